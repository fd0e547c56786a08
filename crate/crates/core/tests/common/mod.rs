#![allow(dead_code)]

use shapekin::motion::{MotionKind, MotionSpec, TimeFn};
use shapekin::Ten3;

pub const IV: [f64; 2] = [0.0, 2.0];

pub fn warp_coefficients() -> [[[f64; 3]; 3]; 3] {
    let mut c = [[[0.0; 3]; 3]; 3];
    c[0][1][1] = 0.4;
    c[1][0][2] = -0.3;
    c[2][2][0] = 0.2;
    c[2][0][0] = 0.1;
    c
}

fn sin(amplitude: f64, w: f64, offset: f64) -> TimeFn {
    TimeFn::Sinusoid {
        amplitude,
        angular_frequency: w,
        phase: 0.3,
        offset,
    }
}

/// Inhomogeneous, time-varying motion: a quadratic warp followed by a
/// homogeneous map with oscillating coefficients.
pub fn generic_motion() -> MotionSpec {
    let k = [
        [sin(0.2, 1.1, 1.0), TimeFn::linear(0.0, 0.3), TimeFn::zero()],
        [
            sin(0.1, 0.7, 0.0),
            TimeFn::exp(1.0, 0.2),
            TimeFn::linear(0.0, -0.1),
        ],
        [
            TimeFn::zero(),
            TimeFn::linear(0.05, 0.1),
            sin(-0.15, 1.3, 1.0),
        ],
    ];
    let c = [TimeFn::linear(0.0, 0.5), TimeFn::zero(), sin(0.3, 2.0, 0.0)];
    let outer = MotionKind::HomogeneousLinear { k, c };
    let inner = MotionKind::QuadraticWarp {
        amplitude: TimeFn::linear(0.0, 0.4),
        coefficients: warp_coefficients(),
    };
    MotionSpec::new(
        MotionKind::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        },
        IV,
    )
    .unwrap()
}

/// Fourth-order time derivative by Richardson extrapolation of central
/// differences at steps `d` and `d/2`.
pub fn richardson(f: impl Fn(f64) -> Ten3, t: f64, d: f64) -> Ten3 {
    let c = |s: f64| (f(t + s) - f(t - s)) / (2.0 * s);
    (c(0.5 * d) * 4.0 - c(d)) / 3.0
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(m: &Ten3) -> Ten3 {
    let norm = m.norm();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let a = m / 2f64.powi(s);
    let mut term = Ten3::identity();
    let mut sum = Ten3::identity();
    for k in 1..=20 {
        term = term * a / k as f64;
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}
