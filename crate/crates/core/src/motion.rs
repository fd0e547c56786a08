//! Closed-form analytic motions `x = χ_t(X)` with exact velocity,
//! deformation gradient and velocity gradient, plus the two objectivity test
//! transforms: superposed rigid motion and Galilean boost.
//!
//! Material labels `X` are the coordinates of the placement at the start of
//! the motion's interval (for the built-in families that placement is the
//! identity, except where a superposed rigid motion moves it).

use serde::{Deserialize, Serialize};

use crate::error::{KinError, Result};
use crate::tensor::{rotation_about, skew_matrix, ten3, Metric3, Ten3, Vec3};

/// Scalar coefficient function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeFn {
    Constant {
        value: f64,
    },
    /// `Σ cₖ tᵏ`
    Polynomial {
        coefficients: Vec<f64>,
    },
    /// `offset + amplitude·sin(ω t + phase)`
    Sinusoid {
        amplitude: f64,
        angular_frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `scale·exp(rate·t)`
    Exponential {
        scale: f64,
        rate: f64,
    },
}

impl TimeFn {
    pub fn constant(value: f64) -> Self {
        TimeFn::Constant { value }
    }

    pub fn zero() -> Self {
        TimeFn::Constant { value: 0.0 }
    }

    pub fn one() -> Self {
        TimeFn::Constant { value: 1.0 }
    }

    /// `a + b t`
    pub fn linear(a: f64, b: f64) -> Self {
        TimeFn::Polynomial {
            coefficients: vec![a, b],
        }
    }

    pub fn exp(scale: f64, rate: f64) -> Self {
        TimeFn::Exponential { scale, rate }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            TimeFn::Constant { value } => *value,
            TimeFn::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
            }
            TimeFn::Sinusoid {
                amplitude,
                angular_frequency,
                phase,
                offset,
            } => offset + amplitude * (angular_frequency * t + phase).sin(),
            TimeFn::Exponential { scale, rate } => scale * (rate * t).exp(),
        }
    }

    /// First time derivative.
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            TimeFn::Constant { .. } => 0.0,
            TimeFn::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * t + k as f64 * c),
            TimeFn::Sinusoid {
                amplitude,
                angular_frequency,
                phase,
                ..
            } => amplitude * angular_frequency * (angular_frequency * t + phase).cos(),
            TimeFn::Exponential { scale, rate } => scale * rate * (rate * t).exp(),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            TimeFn::Constant { value } => value.is_finite(),
            TimeFn::Polynomial { coefficients } => coefficients.iter().all(|c| c.is_finite()),
            TimeFn::Sinusoid {
                amplitude,
                angular_frequency,
                phase,
                offset,
            } => [amplitude, angular_frequency, phase, offset]
                .iter()
                .all(|c| c.is_finite()),
            TimeFn::Exponential { scale, rate } => scale.is_finite() && rate.is_finite(),
        }
    }
}

/// Time-dependent rotation used for superposed rigid motions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RotationFn {
    AxisAngle {
        axis: [f64; 3],
        angle: TimeFn,
    },
    /// A constant matrix; must be orthogonal with unit determinant.
    Fixed {
        matrix: [[f64; 3]; 3],
    },
}

impl RotationFn {
    pub fn about(axis: [f64; 3], angle: TimeFn) -> Self {
        RotationFn::AxisAngle { axis, angle }
    }

    pub fn matrix(&self, t: f64) -> Ten3 {
        match self {
            RotationFn::AxisAngle { axis, angle } => {
                rotation_about(&Vec3::from(*axis), angle.value(t))
            }
            RotationFn::Fixed { matrix } => ten3(*matrix),
        }
    }

    pub fn rate(&self, t: f64) -> Ten3 {
        match self {
            RotationFn::AxisAngle { axis, angle } => {
                let n = Vec3::from(*axis).normalize();
                skew_matrix(&n) * rotation_about(&n, angle.value(t)) * angle.rate(t)
            }
            RotationFn::Fixed { .. } => Ten3::zeros(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            RotationFn::AxisAngle { axis, angle } => {
                let n = Vec3::from(*axis).norm();
                if !(n > 0.0 && n.is_finite()) || !angle.is_finite() {
                    return Err(KinError::Frame(
                        "rotation axis must be a finite nonzero vector".into(),
                    ));
                }
                Ok(())
            }
            RotationFn::Fixed { matrix } => {
                let q = ten3(*matrix);
                let orth = (q.transpose() * q - Ten3::identity()).norm();
                let det = q.determinant();
                if orth > 1e-12 || (det - 1.0).abs() > 1e-12 {
                    return Err(KinError::Frame(format!(
                        "‖QᵀQ − I‖ = {orth:.3e}, det Q = {det:.6}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Family of analytic motions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MotionKind {
    Identity,
    /// `x = K(t)·X + c(t)`
    HomogeneousLinear {
        k: [[TimeFn; 3]; 3],
        c: [TimeFn; 3],
    },
    /// `x = X + γ(t) X₂ e₁`
    SimpleShear {
        gamma: TimeFn,
    },
    /// `x = (λ(t) X₁, X₂, X₃)`
    Uniaxial {
        stretch: TimeFn,
    },
    /// Rotation about a fixed axis through the origin.
    RigidRotation {
        axis: [f64; 3],
        angle: TimeFn,
    },
    /// `x = s(t)·X`
    Radial {
        scale: TimeFn,
    },
    /// `x = exp(t L)·X`; the velocity gradient is the constant `L`.
    ExponentialLinear {
        rate: [[f64; 3]; 3],
    },
    /// `xᵢ = Xᵢ + a(t) Σⱼₖ cᵢⱼₖ Xⱼ Xₖ`; an inhomogeneous motion with a
    /// nonzero, constant-in-space second gradient.
    QuadraticWarp {
        amplitude: TimeFn,
        coefficients: [[[f64; 3]; 3]; 3],
    },
    /// `x = outer_t(inner_t(X))`
    Compose {
        outer: Box<MotionKind>,
        inner: Box<MotionKind>,
    },
    /// `x' = Q(t)(χ_t(X) − x₀) + c(t)`
    Superposed {
        base: Box<MotionKind>,
        rotation: RotationFn,
        translation: [TimeFn; 3],
        center: [f64; 3],
    },
    /// `x' = χ_t(X) − V t`
    Boosted {
        base: Box<MotionKind>,
        velocity: [f64; 3],
    },
}

fn tvec(c: &[TimeFn; 3], t: f64, rate: bool) -> Vec3 {
    let f = |g: &TimeFn| if rate { g.rate(t) } else { g.value(t) };
    Vec3::new(f(&c[0]), f(&c[1]), f(&c[2]))
}

fn tmat(k: &[[TimeFn; 3]; 3], t: f64, rate: bool) -> Ten3 {
    let mut m = Ten3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = if rate {
                k[i][j].rate(t)
            } else {
                k[i][j].value(t)
            };
        }
    }
    m
}

/// Second gradient `G[k] = ∂F/∂X_k`, i.e. `G[k][(i, j)] = ∂²xᵢ/∂Xⱼ∂Xₖ`.
pub type SecondGradient = [Ten3; 3];

fn zero_g() -> SecondGradient {
    [Ten3::zeros(); 3]
}

impl MotionKind {
    fn linear_map(&self, t: f64) -> Option<(Ten3, Ten3)> {
        // (K, K̇) for the homogeneous families with zero translation.
        match self {
            MotionKind::Identity => Some((Ten3::identity(), Ten3::zeros())),
            MotionKind::SimpleShear { gamma } => {
                let mut k = Ten3::identity();
                k[(0, 1)] = gamma.value(t);
                let mut kd = Ten3::zeros();
                kd[(0, 1)] = gamma.rate(t);
                Some((k, kd))
            }
            MotionKind::Uniaxial { stretch } => {
                let mut k = Ten3::identity();
                k[(0, 0)] = stretch.value(t);
                let mut kd = Ten3::zeros();
                kd[(0, 0)] = stretch.rate(t);
                Some((k, kd))
            }
            MotionKind::RigidRotation { axis, angle } => {
                let r = RotationFn::AxisAngle {
                    axis: *axis,
                    angle: angle.clone(),
                };
                Some((r.matrix(t), r.rate(t)))
            }
            MotionKind::Radial { scale } => Some((
                Ten3::identity() * scale.value(t),
                Ten3::identity() * scale.rate(t),
            )),
            MotionKind::ExponentialLinear { rate } => {
                let l = ten3(*rate);
                let k = (l * t).exp();
                Some((k, l * k))
            }
            _ => None,
        }
    }

    fn pos(&self, t: f64, x: &Vec3) -> Vec3 {
        if let Some((k, _)) = self.linear_map(t) {
            return k * x;
        }
        match self {
            MotionKind::HomogeneousLinear { k, c } => tmat(k, t, false) * x + tvec(c, t, false),
            MotionKind::QuadraticWarp {
                amplitude,
                coefficients,
            } => x + quad_term(coefficients, x) * amplitude.value(t),
            MotionKind::Compose { outer, inner } => outer.pos(t, &inner.pos(t, x)),
            MotionKind::Superposed {
                base,
                rotation,
                translation,
                center,
            } => {
                rotation.matrix(t) * (base.pos(t, x) - Vec3::from(*center))
                    + tvec(translation, t, false)
            }
            MotionKind::Boosted { base, velocity } => base.pos(t, x) - Vec3::from(*velocity) * t,
            _ => unreachable!(),
        }
    }

    fn vel(&self, t: f64, x: &Vec3) -> Vec3 {
        if let Some((_, kd)) = self.linear_map(t) {
            return kd * x;
        }
        match self {
            MotionKind::HomogeneousLinear { k, c } => tmat(k, t, true) * x + tvec(c, t, true),
            MotionKind::QuadraticWarp {
                amplitude,
                coefficients,
            } => quad_term(coefficients, x) * amplitude.rate(t),
            MotionKind::Compose { outer, inner } => {
                let y = inner.pos(t, x);
                outer.vel(t, &y) + outer.grad(t, &y) * inner.vel(t, x)
            }
            MotionKind::Superposed {
                base,
                rotation,
                translation,
                center,
            } => {
                rotation.rate(t) * (base.pos(t, x) - Vec3::from(*center))
                    + rotation.matrix(t) * base.vel(t, x)
                    + tvec(translation, t, true)
            }
            MotionKind::Boosted { base, velocity } => base.vel(t, x) - Vec3::from(*velocity),
            _ => unreachable!(),
        }
    }

    fn grad(&self, t: f64, x: &Vec3) -> Ten3 {
        if let Some((k, _)) = self.linear_map(t) {
            return k;
        }
        match self {
            MotionKind::HomogeneousLinear { k, .. } => tmat(k, t, false),
            MotionKind::QuadraticWarp {
                amplitude,
                coefficients,
            } => Ten3::identity() + quad_grad(coefficients, x) * amplitude.value(t),
            MotionKind::Compose { outer, inner } => {
                outer.grad(t, &inner.pos(t, x)) * inner.grad(t, x)
            }
            MotionKind::Superposed { base, rotation, .. } => rotation.matrix(t) * base.grad(t, x),
            MotionKind::Boosted { base, .. } => base.grad(t, x),
            _ => unreachable!(),
        }
    }

    fn grad_rate(&self, t: f64, x: &Vec3) -> Ten3 {
        if let Some((_, kd)) = self.linear_map(t) {
            return kd;
        }
        match self {
            MotionKind::HomogeneousLinear { k, .. } => tmat(k, t, true),
            MotionKind::QuadraticWarp {
                amplitude,
                coefficients,
            } => quad_grad(coefficients, x) * amplitude.rate(t),
            MotionKind::Compose { outer, inner } => {
                let y = inner.pos(t, x);
                let vi = inner.vel(t, x);
                let go = outer.second_grad(t, &y);
                let convected = go[0] * vi[0] + go[1] * vi[1] + go[2] * vi[2];
                (outer.grad_rate(t, &y) + convected) * inner.grad(t, x)
                    + outer.grad(t, &y) * inner.grad_rate(t, x)
            }
            MotionKind::Superposed { base, rotation, .. } => {
                rotation.rate(t) * base.grad(t, x) + rotation.matrix(t) * base.grad_rate(t, x)
            }
            MotionKind::Boosted { base, .. } => base.grad_rate(t, x),
            _ => unreachable!(),
        }
    }

    fn second_grad(&self, t: f64, x: &Vec3) -> SecondGradient {
        if self.linear_map(t).is_some() {
            return zero_g();
        }
        match self {
            MotionKind::HomogeneousLinear { .. } => zero_g(),
            MotionKind::QuadraticWarp {
                amplitude,
                coefficients,
            } => {
                let a = amplitude.value(t);
                let mut g = zero_g();
                for (k, gk) in g.iter_mut().enumerate() {
                    for i in 0..3 {
                        for j in 0..3 {
                            gk[(i, j)] = a * (coefficients[i][j][k] + coefficients[i][k][j]);
                        }
                    }
                }
                g
            }
            MotionKind::Compose { outer, inner } => {
                let y = inner.pos(t, x);
                let fi = inner.grad(t, x);
                let go = outer.second_grad(t, &y);
                let fo = outer.grad(t, &y);
                let gi = inner.second_grad(t, x);
                let mut g = zero_g();
                for (k, gk) in g.iter_mut().enumerate() {
                    let mut dfo = Ten3::zeros();
                    for m in 0..3 {
                        dfo += go[m] * fi[(m, k)];
                    }
                    *gk = dfo * fi + fo * gi[k];
                }
                g
            }
            MotionKind::Superposed { base, rotation, .. } => {
                let q = rotation.matrix(t);
                base.second_grad(t, x).map(|gk| q * gk)
            }
            MotionKind::Boosted { base, .. } => base.second_grad(t, x),
            _ => unreachable!(),
        }
    }

    fn label(&self, t: f64, y: &Vec3) -> Result<Vec3> {
        let invert = |k: Ten3, rhs: Vec3| {
            k.try_inverse().map(|ki| ki * rhs).ok_or_else(|| {
                KinError::SingularCompression(format!("map not invertible at t = {t}"))
            })
        };
        if let Some((k, _)) = self.linear_map(t) {
            return invert(k, *y);
        }
        match self {
            MotionKind::HomogeneousLinear { k, c } => {
                invert(tmat(k, t, false), y - tvec(c, t, false))
            }
            MotionKind::QuadraticWarp { .. } => {
                // Newton iteration from the current position.
                let mut x = *y;
                for _ in 0..60 {
                    let r = self.pos(t, &x) - y;
                    if r.norm() <= 1e-15 * (1.0 + y.norm()) {
                        return Ok(x);
                    }
                    x -= invert(self.grad(t, &x), r)?;
                }
                if (self.pos(t, &x) - y).norm() <= 1e-12 * (1.0 + y.norm()) {
                    Ok(x)
                } else {
                    Err(KinError::Domain(format!(
                        "no material label found for x = {y:?} at t = {t}"
                    )))
                }
            }
            MotionKind::Compose { outer, inner } => inner.label(t, &outer.label(t, y)?),
            MotionKind::Superposed {
                base,
                rotation,
                translation,
                center,
            } => {
                let q = rotation.matrix(t);
                let chi = q.transpose() * (y - tvec(translation, t, false)) + Vec3::from(*center);
                base.label(t, &chi)
            }
            MotionKind::Boosted { base, velocity } => {
                base.label(t, &(y + Vec3::from(*velocity) * t))
            }
            _ => unreachable!(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(KinError::Domain(format!(
                "non-finite coefficient in {what}"
            )))
        };
        match self {
            MotionKind::Identity => Ok(()),
            MotionKind::HomogeneousLinear { k, c } => {
                if k.iter().flatten().chain(c.iter()).all(TimeFn::is_finite) {
                    Ok(())
                } else {
                    bad("homogeneous_linear")
                }
            }
            MotionKind::SimpleShear { gamma: f }
            | MotionKind::Uniaxial { stretch: f }
            | MotionKind::Radial { scale: f } => {
                if f.is_finite() {
                    Ok(())
                } else {
                    bad("motion coefficient")
                }
            }
            MotionKind::RigidRotation { axis, angle } => RotationFn::AxisAngle {
                axis: *axis,
                angle: angle.clone(),
            }
            .validate(),
            MotionKind::ExponentialLinear { rate } => {
                if rate.iter().flatten().all(|c| c.is_finite()) {
                    Ok(())
                } else {
                    bad("exponential_linear")
                }
            }
            MotionKind::QuadraticWarp {
                amplitude,
                coefficients,
            } => {
                if amplitude.is_finite()
                    && coefficients
                        .iter()
                        .flatten()
                        .flatten()
                        .all(|c| c.is_finite())
                {
                    Ok(())
                } else {
                    bad("quadratic_warp")
                }
            }
            MotionKind::Compose { outer, inner } => {
                outer.validate()?;
                inner.validate()
            }
            MotionKind::Superposed {
                base,
                rotation,
                translation,
                center,
            } => {
                rotation.validate()?;
                if !translation.iter().all(TimeFn::is_finite)
                    || !center.iter().all(|c| c.is_finite())
                {
                    return bad("superposed translation");
                }
                base.validate()
            }
            MotionKind::Boosted { base, velocity } => {
                if !velocity.iter().all(|c| c.is_finite()) {
                    return bad("boost velocity");
                }
                base.validate()
            }
        }
    }
}

fn quad_term(c: &[[[f64; 3]; 3]; 3], x: &Vec3) -> Vec3 {
    let mut out = Vec3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i] += c[i][j][k] * x[j] * x[k];
            }
        }
    }
    out
}

fn quad_grad(c: &[[[f64; 3]; 3]; 3], x: &Vec3) -> Ten3 {
    let mut g = Ten3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                g[(i, j)] += (c[i][j][k] + c[i][k][j]) * x[k];
            }
        }
    }
    g
}

/// Position of a material point at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub t: f64,
    pub label: Vec3,
    pub position: Vec3,
}

/// A motion together with the time interval on which it is declared valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSpec {
    pub interval: [f64; 2],
    pub motion: MotionKind,
}

const DET_SAMPLES: usize = 33;

impl MotionSpec {
    /// Validates coefficients, rotations and `det F > 0` on samples of the
    /// interval (at the label origin).
    pub fn new(motion: MotionKind, interval: [f64; 2]) -> Result<Self> {
        let spec = Self { interval, motion };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let [t0, t1] = self.interval;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(KinError::Domain(format!("invalid interval [{t0}, {t1}]")));
        }
        self.motion.validate()?;
        for s in 0..DET_SAMPLES {
            let t = t0 + (t1 - t0) * s as f64 / (DET_SAMPLES - 1) as f64;
            let det = self.motion.grad(t, &Vec3::zeros()).determinant();
            if !(det > 0.0) {
                return Err(KinError::SingularCompression(format!(
                    "det F = {det:.6e} at t = {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn identity(interval: [f64; 2]) -> Self {
        Self {
            interval,
            motion: MotionKind::Identity,
        }
    }

    pub fn simple_shear(gamma: TimeFn, interval: [f64; 2]) -> Result<Self> {
        Self::new(MotionKind::SimpleShear { gamma }, interval)
    }

    pub fn uniaxial(stretch: TimeFn, interval: [f64; 2]) -> Result<Self> {
        Self::new(MotionKind::Uniaxial { stretch }, interval)
    }

    pub fn rigid_rotation(axis: [f64; 3], angle: TimeFn, interval: [f64; 2]) -> Result<Self> {
        Self::new(MotionKind::RigidRotation { axis, angle }, interval)
    }

    pub fn radial(scale: TimeFn, interval: [f64; 2]) -> Result<Self> {
        Self::new(MotionKind::Radial { scale }, interval)
    }

    /// `x = K(t) X + c(t)` from explicit coefficient functions.
    /// Constant velocity gradient `l`.
    pub fn exponential_linear(l: &Ten3, interval: [f64; 2]) -> Result<Self> {
        Self::new(
            MotionKind::ExponentialLinear {
                rate: crate::tensor::rows_of(l),
            },
            interval,
        )
    }

    pub fn homogeneous(k: [[TimeFn; 3]; 3], c: [TimeFn; 3], interval: [f64; 2]) -> Result<Self> {
        Self::new(MotionKind::HomogeneousLinear { k, c }, interval)
    }

    /// `outer ∘ inner`, on the intersection of the two intervals.
    pub fn compose(outer: &MotionSpec, inner: &MotionSpec) -> Result<Self> {
        let interval = [
            outer.interval[0].max(inner.interval[0]),
            outer.interval[1].min(inner.interval[1]),
        ];
        Self::new(
            MotionKind::Compose {
                outer: Box::new(outer.motion.clone()),
                inner: Box::new(inner.motion.clone()),
            },
            interval,
        )
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let [t0, t1] = self.interval;
        let slack = 1e-9 * (1.0 + (t1 - t0).abs());
        if t.is_finite() && t >= t0 - slack && t <= t1 + slack {
            Ok(())
        } else {
            Err(KinError::Domain(format!("t = {t} outside [{t0}, {t1}]")))
        }
    }

    /// Position and velocity of the material point labelled `label`.
    pub fn evaluate(&self, t: f64, label: &Vec3) -> Result<(Vec3, Vec3)> {
        self.check_time(t)?;
        Ok((self.motion.pos(t, label), self.motion.vel(t, label)))
    }

    pub fn place(&self, t: f64, label: &Vec3) -> Result<Placement> {
        self.check_time(t)?;
        Ok(Placement {
            t,
            label: *label,
            position: self.motion.pos(t, label),
        })
    }

    /// `F = ∂χ/∂X`.
    pub fn deformation_gradient(&self, t: f64, label: &Vec3) -> Result<Ten3> {
        self.check_time(t)?;
        Ok(self.motion.grad(t, label))
    }

    /// `Ḟ = ∂F/∂t` at fixed label.
    pub fn deformation_gradient_rate(&self, t: f64, label: &Vec3) -> Result<Ten3> {
        self.check_time(t)?;
        Ok(self.motion.grad_rate(t, label))
    }

    /// `∂F/∂X_k` for k = 0, 1, 2.
    pub fn second_gradient(&self, t: f64, label: &Vec3) -> Result<SecondGradient> {
        self.check_time(t)?;
        Ok(self.motion.second_grad(t, label))
    }

    /// Label of the material point currently at `position`.
    pub fn label_at(&self, t: f64, position: &Vec3) -> Result<Vec3> {
        self.check_time(t)?;
        self.motion.label(t, position)
    }

    /// `L = Ḟ F⁻¹` for the material point with the given label.
    pub fn velocity_gradient_at_label(&self, t: f64, label: &Vec3) -> Result<Ten3> {
        self.check_time(t)?;
        let f = self.motion.grad(t, label);
        let fi = f.try_inverse().ok_or_else(|| {
            KinError::SingularCompression(format!("F not invertible at t = {t}, X = {label:?}"))
        })?;
        Ok(self.motion.grad_rate(t, label) * fi)
    }

    /// `L = v ⊗ ∇ₓ` at the spatial position `position`.
    pub fn velocity_gradient(&self, t: f64, position: &Vec3) -> Result<Ten3> {
        let label = self.label_at(t, position)?;
        self.velocity_gradient_at_label(t, &label)
    }

    /// `x' = Q(t)(χ_t(X) − x₀) + c(t)`.
    pub fn superpose_rigid(
        &self,
        rotation: RotationFn,
        translation: [TimeFn; 3],
        center: [f64; 3],
    ) -> Result<MotionSpec> {
        rotation.validate()?;
        Self::new(
            MotionKind::Superposed {
                base: Box::new(self.motion.clone()),
                rotation,
                translation,
                center,
            },
            self.interval,
        )
    }

    /// `x' = χ_t(X) − V t`.
    pub fn galilean_boost(&self, velocity: [f64; 3]) -> Result<MotionSpec> {
        Self::new(
            MotionKind::Boosted {
                base: Box::new(self.motion.clone()),
                velocity,
            },
            self.interval,
        )
    }

    /// `‖χ_t(Q) − χ_t(P)‖_h`.
    pub fn current_distance(&self, t: f64, p: &Vec3, q: &Vec3, h: &Metric3) -> Result<f64> {
        self.check_time(t)?;
        Ok(h.norm(&(self.motion.pos(t, q) - self.motion.pos(t, p))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const IV: [f64; 2] = [0.0, 2.0];

    fn fd_grad(m: &MotionSpec, t: f64, x: &Vec3, d: f64) -> Ten3 {
        let mut g = Ten3::zeros();
        for j in 0..3 {
            let mut e = Vec3::zeros();
            e[j] = d;
            let (xp, _) = m.evaluate(t, &(x + e)).unwrap();
            let (xm, _) = m.evaluate(t, &(x - e)).unwrap();
            g.set_column(j, &((xp - xm) / (2.0 * d)));
        }
        g
    }

    fn warp() -> MotionKind {
        let mut c = [[[0.0; 3]; 3]; 3];
        c[0][1][1] = 0.4;
        c[1][0][2] = -0.3;
        c[2][2][0] = 0.2;
        c[2][0][0] = 0.1;
        MotionKind::QuadraticWarp {
            amplitude: TimeFn::linear(0.0, 0.5),
            coefficients: c,
        }
    }

    #[test]
    fn rotation_position_and_velocity() {
        let w = 1.3;
        let m = MotionSpec::rigid_rotation([0.0, 0.0, 1.0], TimeFn::linear(0.0, w), IV).unwrap();
        let t = 0.7;
        let (x, v) = m.evaluate(t, &Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((x - Vec3::new((w * t).cos(), (w * t).sin(), 0.0)).norm() < 1e-15);
        assert!((v - Vec3::new(-(w * t).sin(), (w * t).cos(), 0.0) * w).norm() < 1e-15);
        let f = m.deformation_gradient(t, &Vec3::zeros()).unwrap();
        assert!((f.determinant() - 1.0).abs() < 1e-14);
        let l = m.velocity_gradient(t, &x).unwrap();
        let expect = ten3([[0.0, -w, 0.0], [w, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        assert!((l - expect).norm() < 1e-14);
    }

    #[test]
    fn uniaxial_exponential() {
        let a = 0.4;
        let m = MotionSpec::uniaxial(TimeFn::exp(1.0, a), IV).unwrap();
        let t = 1.1;
        let (x, _) = m.evaluate(t, &Vec3::new(2.0, 3.0, 4.0)).unwrap();
        assert!((x - Vec3::new((a * t).exp() * 2.0, 3.0, 4.0)).norm() < 1e-14);
        for t in [0.0, 0.5, 1.9] {
            let l = m.velocity_gradient(t, &Vec3::new(0.3, 1.0, 0.0)).unwrap();
            assert!((l - Ten3::from_diagonal(&Vec3::new(a, 0.0, 0.0))).norm() < 1e-14);
        }
        let d = m
            .current_distance(
                1.0,
                &Vec3::zeros(),
                &Vec3::new(0.25, 0.0, 0.0),
                &Metric3::identity(),
            )
            .unwrap();
        assert!((d - a.exp() * 0.25).abs() < 1e-15);
    }

    #[test]
    fn shear_gradients() {
        let m = MotionSpec::simple_shear(TimeFn::linear(0.0, 1.0), IV).unwrap();
        let f = m
            .deformation_gradient(0.8, &Vec3::new(1.0, 2.0, 3.0))
            .unwrap();
        assert_eq!(f, ten3([[1.0, 0.8, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]));
        let l0 = m.velocity_gradient(0.0, &Vec3::zeros()).unwrap();
        assert_eq!(
            l0,
            ten3([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        );
        // Ḟ F⁻¹ = e₁⊗e₂ · [[1,−t,0],[0,1,0],[0,0,1]] = e₁⊗e₂ for simple shear.
        let l = m.velocity_gradient(1.5, &Vec3::new(0.2, 0.1, 0.0)).unwrap();
        assert!((l - l0).norm() < 1e-15);
    }

    #[test]
    fn composition_is_pointwise() {
        let shear = MotionSpec::simple_shear(TimeFn::linear(0.0, 0.6), IV).unwrap();
        let rot =
            MotionSpec::rigid_rotation([1.0, 1.0, 0.0], TimeFn::linear(0.1, 0.9), IV).unwrap();
        let c = MotionSpec::compose(&rot, &shear).unwrap();
        let x = Vec3::new(0.3, -0.7, 1.1);
        let t = 1.3;
        let (y, _) = shear.evaluate(t, &x).unwrap();
        let (z, _) = rot.evaluate(t, &y).unwrap();
        let (zc, _) = c.evaluate(t, &x).unwrap();
        assert!((z - zc).norm() < 1e-15);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let shear = MotionSpec::simple_shear(TimeFn::linear(0.0, 0.6), IV).unwrap();
        let w = MotionSpec::new(warp(), IV).unwrap();
        let rot =
            MotionSpec::rigid_rotation([0.0, 1.0, 1.0], TimeFn::linear(0.0, 0.9), IV).unwrap();
        let c1 = MotionSpec::compose(&w, &shear).unwrap();
        let c2 = MotionSpec::compose(&rot, &c1).unwrap();
        let c3 = c2
            .superpose_rigid(
                RotationFn::about([1.0, 0.0, 0.0], TimeFn::linear(0.0, 2.0)),
                [
                    TimeFn::linear(0.0, 1.0),
                    TimeFn::zero(),
                    TimeFn::constant(2.0),
                ],
                [0.5, 0.5, 0.0],
            )
            .unwrap();
        let x = Vec3::new(0.3, -0.2, 0.4);
        for m in [&w, &c1, &c2, &c3] {
            let t = 1.2;
            let f = m.deformation_gradient(t, &x).unwrap();
            let e1 = (fd_grad(m, t, &x, 1e-3) - f).norm();
            let e2 = (fd_grad(m, t, &x, 5e-4) - f).norm();
            // quadratic motions: central differences are exact up to roundoff
            assert!(e1 < 1e-9 && e2 < 1e-9, "{e1} {e2}");
            // Ḟ against time differences
            let dt = 1e-4;
            let fd = (m.deformation_gradient(t + dt, &x).unwrap()
                - m.deformation_gradient(t - dt, &x).unwrap())
                / (2.0 * dt);
            assert!((fd - m.deformation_gradient_rate(t, &x).unwrap()).norm() < 1e-6);
            // v against time differences
            let (xp, _) = m.evaluate(t + dt, &x).unwrap();
            let (xm, v) = m.evaluate(t - dt, &x).unwrap();
            let (_, v0) = m.evaluate(t, &x).unwrap();
            assert!(((xp - xm) / (2.0 * dt) - v0).norm() < 1e-6, "{v:?}");
            // label inversion
            let (y, _) = m.evaluate(t, &x).unwrap();
            assert!((m.label_at(t, &y).unwrap() - x).norm() < 1e-12);
        }
    }

    #[test]
    fn second_gradient_is_symmetric_and_matches_fd() {
        let shear = MotionSpec::simple_shear(TimeFn::linear(0.0, 0.6), IV).unwrap();
        let w = MotionSpec::new(warp(), IV).unwrap();
        let m = MotionSpec::compose(&w, &MotionSpec::compose(&shear, &w).unwrap()).unwrap();
        let x = Vec3::new(0.1, 0.4, -0.3);
        let t = 0.9;
        let g = m.second_gradient(t, &x).unwrap();
        for k in 0..3 {
            let mut e = Vec3::zeros();
            let d = 1e-4;
            e[k] = d;
            let fd = (m.deformation_gradient(t, &(x + e)).unwrap()
                - m.deformation_gradient(t, &(x - e)).unwrap())
                / (2.0 * d);
            assert!((fd - g[k]).norm() < 1e-7);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((g[k][(i, j)] - g[j][(i, k)]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn time_domain_and_frame_errors() {
        let m = MotionSpec::identity(IV);
        assert!(matches!(
            m.evaluate(3.0, &Vec3::zeros()),
            Err(KinError::Domain(_))
        ));
        let bad = RotationFn::Fixed {
            matrix: [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
        assert!(matches!(
            m.superpose_rigid(
                bad,
                [TimeFn::zero(), TimeFn::zero(), TimeFn::zero()],
                [0.0; 3]
            ),
            Err(KinError::Frame(_))
        ));
        assert!(matches!(
            MotionSpec::uniaxial(TimeFn::linear(1.0, -1.0), IV),
            Err(KinError::SingularCompression(_))
        ));
    }

    #[test]
    fn boost_keeps_gradients() {
        let m = MotionSpec::new(warp(), IV).unwrap();
        let b = m.galilean_boost([1.0, -2.0, 0.5]).unwrap();
        let x = Vec3::new(0.2, 0.3, 0.4);
        let t = 1.0;
        assert_eq!(
            m.deformation_gradient(t, &x).unwrap(),
            b.deformation_gradient(t, &x).unwrap()
        );
        assert_eq!(
            m.velocity_gradient_at_label(t, &x).unwrap(),
            b.velocity_gradient_at_label(t, &x).unwrap()
        );
        let (x1, v1) = m.evaluate(t, &x).unwrap();
        let (x2, v2) = b.evaluate(t, &x).unwrap();
        assert!((x1 - x2 - Vec3::new(1.0, -2.0, 0.5) * t).norm() < 1e-15);
        assert!((v1 - v2 - Vec3::new(1.0, -2.0, 0.5)).norm() < 1e-15);
    }
}
