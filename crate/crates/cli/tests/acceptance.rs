//! Acceptance suite. Runs every numbered criterion at its stated tolerance
//! and prints one PASS/FAIL line per criterion; exits nonzero on any FAIL.
//!
//! `cargo test -p shapekin-cli --test acceptance`

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shapekin::compat::{
    cesaro_volterra, compat_convergence, compat_residual_from_shape, reconstruction_error,
    shape_field_from_polynomial, CvOptions, CvPath,
};
use shapekin::grid::{saint_venant_residual, SECOND_ORDER_MARGIN};
use shapekin::plastic::{
    evolve_elastoplastic, evolve_relaxed_metric, small_deformedness_decomposition, PlasticLaw,
    PrescribedW,
};
use shapekin::poly::{Monomial, ScalarPoly, TensorPoly, VectorPoly};
use shapekin::shape::{
    deformedness, evolve_inertial_cauchy, evolve_shape, power_identity_residual,
    relaxed_from_shape, shape_from_relaxed, ElasticPotential, EvolveOptions, StrainMeasure,
};
use shapekin::strain::{cauchy_strain, strain_family, Side, StrainFamilyIndex};
use shapekin::tensor::{h_adjoint, polar_decompose, rel_diff, sym_part_h, HSymTensor, Metric3};
use shapekin::{Field, Grid3, MotionKind, MotionSpec, RotationFn, Ten3, TimeFn, Vec3};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    check(
        elapsed < limit,
        format!(
            "{detail}; {:.2} s of {} s",
            elapsed.as_secs_f64(),
            limit.as_secs()
        ),
    )
}

// Oracle independent of the library: scaling and squaring of a Taylor series.
fn expm(m: &Ten3) -> Ten3 {
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

fn random_f(rng: &mut ChaCha8Rng) -> Ten3 {
    loop {
        let m = Ten3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let f = (Ten3::identity() + m * 0.7) * rng.random_range(0.45..2.1);
        let d = f.determinant();
        if d > 0.1 && d < 10.0 {
            return f;
        }
    }
}

fn sin(amplitude: f64, w: f64, offset: f64) -> TimeFn {
    TimeFn::Sinusoid {
        amplitude,
        angular_frequency: w,
        phase: 0.3,
        offset,
    }
}

fn generic_motion() -> MotionSpec {
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
    let mut coeff = [[[0.0; 3]; 3]; 3];
    coeff[0][1][1] = 0.4;
    coeff[1][0][2] = -0.3;
    coeff[2][2][0] = 0.2;
    coeff[2][0][0] = 0.1;
    let outer = MotionKind::HomogeneousLinear { k, c };
    let inner = MotionKind::QuadraticWarp {
        amplitude: TimeFn::linear(0.0, 0.4),
        coefficients: coeff,
    };
    MotionSpec::new(
        MotionKind::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        },
        [0.0, 2.0],
    )
    .unwrap()
}

fn labels() -> Vec<Vec3> {
    vec![
        Vec3::zeros(),
        Vec3::new(0.5, -0.3, 0.2),
        Vec3::new(-0.4, 0.8, -0.6),
    ]
}

fn generic_h() -> Metric3 {
    let m = Ten3::new(1.0, 0.3, -0.2, 0.1, 0.8, 0.4, 0.0, -0.3, 1.2);
    Metric3::new(m * m.transpose() + Ten3::identity() * 0.3).unwrap()
}

fn prestrain(h: &Metric3) -> HSymTensor {
    let s = sym_part_h(
        &Ten3::new(0.2, 0.1, -0.3, 0.0, -0.1, 0.2, 0.3, 0.1, 0.15),
        h,
    );
    HSymTensor::from_matrix_unchecked(expm(s.matrix()))
}

fn pot() -> ElasticPotential {
    ElasticPotential::new(1.3, 0.8, 2.0).unwrap()
}

fn polar() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut rec, mut orth): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let f = random_f(&mut rng);
        let p = polar_decompose(&f).map_err(|e| e.to_string())?;
        let o = p.rotation;
        rec = rec
            .max(rel_diff(&(o * p.right_stretch.matrix()), &f))
            .max(rel_diff(&(p.left_stretch.matrix() * o), &f));
        orth = orth.max((o.transpose() * o - Ten3::identity()).norm());
    }
    let detail = format!("1000 F: reconstruction {rec:.1e}, orthogonality {orth:.1e}");
    check(rec < 1e-12 && orth < 1e-12, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(1), detail)
}

fn strain_coincidence() -> Outcome {
    let m = Ten3::new(0.3, -0.8, 0.5, 0.2, -0.4, 0.9, -0.6, 0.1, 0.7);
    let mut ratios = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let f = Ten3::identity() + m * eps;
        let c = cauchy_strain(&f);
        let mut worst: f64 = 0.0;
        for n in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            for side in [Side::Left, Side::Right] {
                let e = strain_family(&f, StrainFamilyIndex::new(n, side).unwrap())
                    .map_err(|e| e.to_string())?;
                worst = worst.max((e.matrix() - c.matrix()).norm() / (eps * eps));
            }
        }
        ratios.push(worst);
    }
    let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    check(
        lo > 0.0 && spread < 0.2,
        format!(
            "max dist/eps^2 = {ratios:.4?}, spread {:.2}%",
            100.0 * spread
        ),
    )
}

fn hencky_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut tr, mut dev): (f64, f64) = (0.0, 0.0);
    for i in 0..1000 {
        let f = random_f(&mut rng);
        let side = if i % 2 == 0 { Side::Left } else { Side::Right };
        let idx = StrainFamilyIndex::hencky(side);
        let e = strain_family(&f, idx).map_err(|e| e.to_string())?;
        tr = tr.max((e.trace() - f.determinant().ln()).abs());
        let lam = rng.random_range(0.2..5.0);
        let scaled = strain_family(&(f * lam), idx).map_err(|e| e.to_string())?;
        dev = dev.max((e.deviator().matrix() - scaled.deviator().matrix()).norm());
    }
    check(
        tr < 1e-10 && dev < 1e-10,
        format!("1000 F: trace {tr:.1e}, deviator under dilation {dev:.1e}"),
    )
}

fn shape_closed_form() -> Outcome {
    let start = Instant::now();
    let l = Ten3::new(0.3, -0.7, 0.2, 0.5, -0.1, 0.4, -0.3, 0.6, 0.2);
    let m = MotionSpec::exponential_linear(&l, [0.0, 1.0]).unwrap();
    let mut worst: f64 = 0.0;
    for h in [Metric3::identity(), generic_h()] {
        let a0 = prestrain(&h);
        let traj = evolve_shape(&labels(), &vec![a0; 3], &m, &h, 0.0, 1.0, 1e-3)
            .map_err(|e| e.to_string())?;
        let phi = expm(&l);
        let want = phi * a0.matrix() * h_adjoint(&phi, &h);
        for p in &traj.points {
            worst = worst.max(rel_diff(p.a.last().unwrap().matrix(), &want));
        }
    }
    let rot =
        MotionSpec::rigid_rotation([1.0, -2.0, 0.5], TimeFn::linear(0.0, 2.5), [0.0, 1.0]).unwrap();
    let h = Metric3::identity();
    let traj = evolve_shape(
        &labels(),
        &vec![HSymTensor::identity(); 3],
        &rot,
        &h,
        0.0,
        1.0,
        1e-3,
    )
    .map_err(|e| e.to_string())?;
    let drift = traj
        .points
        .iter()
        .flat_map(|p| p.a.iter())
        .map(|a| (a.matrix() - Ten3::identity()).norm())
        .fold(0.0, f64::max);
    let detail = format!("exp(L) oracle {worst:.1e}, rigid rotation |A - I| {drift:.1e}");
    check(worst < 1e-8 && drift < 1e-10, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(1), detail)
}

fn objectivity() -> Outcome {
    let m = generic_motion();
    let rot = RotationFn::about(
        [0.3, 1.0, -0.4],
        TimeFn::Sinusoid {
            amplitude: 1.2,
            angular_frequency: 1.7,
            phase: 0.0,
            offset: 0.4,
        },
    );
    let s = m
        .superpose_rigid(
            rot.clone(),
            [TimeFn::linear(1.0, -2.0), TimeFn::one(), TimeFn::zero()],
            [0.2, 0.1, 0.0],
        )
        .map_err(|e| e.to_string())?;
    let h = Metric3::identity();
    let a0 = prestrain(&h);
    let q0 = rot.matrix(0.0);
    let a0s = HSymTensor::from_matrix_unchecked(q0 * a0.matrix() * q0.transpose());
    let base =
        evolve_shape(&labels(), &vec![a0; 3], &m, &h, 0.0, 1.5, 1e-3).map_err(|e| e.to_string())?;
    let moved = evolve_shape(&labels(), &vec![a0s; 3], &s, &h, 0.0, 1.5, 1e-3)
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (p, ps) in base.points.iter().zip(&moved.points) {
        for k in 0..base.len() {
            let q = rot.matrix(base.times[k]);
            worst = worst.max(rel_diff(
                ps.a[k].matrix(),
                &(q * p.a[k].matrix() * q.transpose()),
            ));
        }
    }
    let hg = generic_h();
    let a0 = prestrain(&hg);
    let boosted = m
        .galilean_boost([3.0, -1.0, 0.25])
        .map_err(|e| e.to_string())?;
    let t1 = evolve_shape(&labels(), &vec![a0; 3], &m, &hg, 0.0, 1.0, 1e-3)
        .map_err(|e| e.to_string())?;
    let t2 = evolve_shape(&labels(), &vec![a0; 3], &boosted, &hg, 0.0, 1.0, 1e-3)
        .map_err(|e| e.to_string())?;
    let identical = t1 == t2;
    check(
        worst < 1e-8 && identical,
        format!("superposed |A' - QAQ^T| {worst:.1e}, boost bit-identical: {identical}"),
    )
}

fn small_motion(eps: f64) -> MotionSpec {
    let s = |a: f64, w: f64| TimeFn::Sinusoid {
        amplitude: a * eps,
        angular_frequency: w,
        phase: 0.0,
        offset: 0.0,
    };
    let k = [
        [TimeFn::linear(1.0, 0.8 * eps), s(1.0, 2.0), s(-0.5, 1.0)],
        [s(-0.7, 1.5), TimeFn::one(), TimeFn::linear(0.0, 0.6 * eps)],
        [
            s(0.4, 3.0),
            TimeFn::linear(0.0, -0.9 * eps),
            TimeFn::linear(1.0, -0.3 * eps),
        ],
    ];
    let c = [TimeFn::zero(), TimeFn::zero(), TimeFn::zero()];
    MotionSpec::new(MotionKind::HomogeneousLinear { k, c }, [0.0, 1.0]).unwrap()
}

fn small_deformedness() -> Outcome {
    let h = Metric3::identity();
    let x = [Vec3::zeros()];
    let mut ratios = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3] {
        let m = small_motion(eps);
        let a = evolve_shape(&x, &[HSymTensor::identity()], &m, &h, 0.0, 1.0, 1e-3)
            .map_err(|e| e.to_string())?;
        let e = evolve_inertial_cauchy(&x, &[HSymTensor::zero()], &m, &h, 0.0, 1.0, 1e-3)
            .map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        for (ak, ek) in a.points[0].a.iter().zip(&e.points[0].a) {
            worst = worst.max(
                (deformedness(ak, &h).map_err(|e| e.to_string())?.matrix() - ek.matrix()).norm(),
            );
        }
        ratios.push(worst / (eps * eps));
    }
    let bounded = ratios.iter().all(|r| *r > 1e-3 && *r < 10.0);
    let stable = (ratios[1] - ratios[2]).abs() / ratios[2] < 0.2;
    check(
        bounded && stable,
        format!("max |D - E|/eps^2 = {ratios:.4?}"),
    )
}

fn quadratic_potential(beta: f64) -> VectorPoly {
    VectorPoly([
        ScalarPoly(vec![
            Monomial(1.0, 1, 0, 0),
            Monomial(beta, 1, 1, 0),
            Monomial(0.5 * beta, 0, 0, 2),
        ]),
        ScalarPoly(vec![
            Monomial(1.0, 0, 1, 0),
            Monomial(-beta, 0, 1, 1),
            Monomial(0.5 * beta, 2, 0, 0),
        ]),
        ScalarPoly(vec![
            Monomial(1.0, 0, 0, 1),
            Monomial(beta, 1, 0, 1),
            Monomial(-0.5 * beta, 0, 2, 0),
        ]),
    ])
}

fn compatibility_convergence() -> Outcome {
    let start = Instant::now();
    let h = Metric3::identity();
    let q = quadratic_potential(0.1);
    let g = Grid3::cube(-1.0, 1.0, 33).unwrap();
    let grids = vec![g.clone(), g.refine(2).unwrap(), g.refine(4).unwrap()];
    let scale = std::cell::Cell::new(0.0);
    let rows = compat_convergence(&grids, &h, |g| {
        let a = shape_field_from_polynomial(&q, g, &h)?;
        scale.set(a.rms_interior(SECOND_ORDER_MARGIN));
        Ok(a)
    });
    let rows = rows.map_err(|e| e.to_string())?;
    let orders: Vec<f64> = rows.iter().filter_map(|r| r.order).collect();
    let monotone = rows.windows(2).all(|w| w[1].ricci_rms < w[0].ricci_rms);
    let rel = rows.last().unwrap().ricci_rms / scale.get();
    let detail = format!(
        "33/65/129 rms {:.2e} {:.2e} {:.2e}, orders {orders:.3?}, final/scale {rel:.1e}",
        rows[0].ricci_rms, rows[1].ricci_rms, rows[2].ricci_rms
    );
    check(
        monotone && orders.iter().all(|o| *o >= 1.8) && rel < 1e-6,
        detail.clone(),
    )?;
    within(start.elapsed(), Duration::from_secs(60), detail)
}

fn incompatibility() -> Outcome {
    let g = Grid3::cube(-1.0, 1.0, 17).unwrap();
    let e = Field::from_fn(&g, |p| Ten3::from_diagonal(&Vec3::new(p.y * p.y, 0.0, 0.0))).unwrap();
    let (sv, _) = saint_venant_residual(&e).map_err(|e| e.to_string())?;
    let mut want = Ten3::zeros();
    want[(2, 2)] = 2.0;
    let mut sv_err: f64 = 0.0;
    for n in 0..g.len() {
        if g.is_interior(n, SECOND_ORDER_MARGIN) {
            sv_err = sv_err.max((sv.at(n).abs() - want).norm());
        }
    }
    let h = Metric3::identity();
    let mut ratios = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let a = Field::from_fn(&g, |p| {
            Ten3::from_diagonal(&Vec3::new(1.0 + 2.0 * eps * p.y * p.y, 1.0, 1.0))
        })
        .unwrap();
        ratios.push(
            compat_residual_from_shape(&a, &h)
                .map_err(|e| e.to_string())?
                .ricci_rms
                / eps,
        );
    }
    let d1 = (ratios[0] - ratios[1]).abs();
    let d2 = (ratios[1] - ratios[2]).abs();
    let converging = ratios[2] > 1.0 && d2 < 0.2 * d1;
    check(
        sv_err < 1e-9 && converging,
        format!("|SV - 2 e_zz| {sv_err:.1e}, ricci_rms/eps = {ratios:.4?}"),
    )
}

fn displacement() -> VectorPoly {
    VectorPoly([
        ScalarPoly(vec![
            Monomial(0.1, 0, 0, 0),
            Monomial(0.05, 2, 0, 0),
            Monomial(-0.03, 0, 1, 1),
            Monomial(0.02, 0, 1, 0),
        ]),
        ScalarPoly(vec![
            Monomial(0.04, 1, 1, 0),
            Monomial(0.01, 0, 0, 2),
            Monomial(-0.02, 0, 0, 1),
        ]),
        ScalarPoly(vec![
            Monomial(-0.06, 1, 0, 1),
            Monomial(0.03, 0, 2, 0),
            Monomial(0.2, 0, 0, 0),
        ]),
    ])
}

fn cesaro_volterra_checks() -> Outcome {
    let g = Grid3::cube(-1.0, 1.0, 9).unwrap();
    let ep = TensorPoly::sym_gradient_of(&displacement());
    let e = Field::from_fn(&g, |p| ep.eval(p)).unwrap();
    let zero = (Vec3::zeros(), Ten3::zeros());
    let cv = |x0: &Vec3, path: &CvPath, u: &Vec3, om: &Ten3| {
        cesaro_volterra(&e, x0, path, u, om, CvOptions::default()).map_err(|e| e.to_string())
    };
    let x0 = g.position(0);
    let u = cv(&x0, &CvPath::default(), &zero.0, &zero.1)?;
    let round = reconstruction_error(&u, &e).map_err(|e| e.to_string())?;

    let end = g.position(g.node(4, 4, 4));
    let p1 = CvPath::Polyline {
        via: vec![[0.3, -0.8, 0.1], [-0.2, 0.5, 0.9], end.into()],
    };
    let p2 = CvPath::Polyline {
        via: vec![[0.9, 0.9, -0.9], end.into()],
    };
    let u1 = cv(&x0, &p1, &zero.0, &zero.1)?;
    let u2 = cv(&x0, &p2, &zero.0, &zero.1)?;
    let path = (0..g.len())
        .map(|n| (u1.at(n) - u2.at(n)).norm())
        .fold(0.0, f64::max);

    let xb = g.position(g.node(2, 6, 3));
    let ua = Vec3::new(0.5, -1.0, 2.0);
    let om = Ten3::new(0.0, 0.2, -0.4, -0.2, 0.0, 0.1, 0.4, -0.1, 0.0);
    let base = cv(&xb, &CvPath::default(), &zero.0, &zero.1)?;
    let moved = cv(&xb, &CvPath::default(), &ua, &om)?;
    let gauge = (0..g.len())
        .map(|n| (moved.at(n) - base.at(n) - (ua + om * (g.position(n) - xb))).norm())
        .fold(0.0, f64::max);
    check(
        round < 1e-8 && path < 1e-7 && gauge < 1e-14,
        format!(
            "round trip {round:.1e}, two polylines {path:.1e}, gauge minus rigid field {gauge:.1e}"
        ),
    )
}

fn power_worst(m: &MotionSpec, dt: f64, measure: StrainMeasure) -> Result<f64, String> {
    let h = Metric3::identity();
    let traj = evolve_shape(
        &[Vec3::zeros()],
        &[HSymTensor::identity()],
        m,
        &h,
        0.0,
        1.0,
        dt,
    )
    .map_err(|e| e.to_string())?;
    Ok(power_identity_residual(&traj, &pot(), measure)
        .map_err(|e| e.to_string())?
        .max_relative)
}

fn power_identity() -> Outcome {
    let dilation = MotionSpec::radial(TimeFn::linear(1.0, 1.0), [0.0, 1.0]).unwrap();
    let shear = MotionSpec::simple_shear(
        TimeFn::Polynomial {
            coefficients: vec![0.0, 2.0, 1.0],
        },
        [0.0, 1.0],
    )
    .unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, m) in [("dilation", &dilation), ("shear", &shear)] {
        let coarse = power_worst(m, 1e-2, StrainMeasure::Hencky)?;
        let fine = power_worst(m, 5e-3, StrainMeasure::Hencky)?;
        let order = (coarse / fine).log2();
        ok &= order > 1.8;
        parts.push(format!("{name} Hencky order {order:.2}"));
    }
    let coarse = power_worst(&shear, 1e-2, StrainMeasure::LinearizedShape)?;
    let fine = power_worst(&shear, 5e-3, StrainMeasure::LinearizedShape)?;
    ok &= fine > 1e-2 && (coarse - fine).abs() / fine < 0.1;
    parts.push(format!(
        "linearized measure relative residual {coarse:.3} -> {fine:.3}"
    ));
    check(ok, parts.join(", "))
}

fn plastic_consistency() -> Outcome {
    let m = generic_motion();
    let h = Metric3::identity();
    let x = labels();
    let opts = EvolveOptions::default();
    let window = (0.0, 1.0, 1e-3);
    let err = |e: shapekin::KinError| e.to_string();

    let a0 = vec![HSymTensor::identity(); 3];
    let el = evolve_shape(&x, &a0, &m, &h, 0.0, 1.0, 1e-3).map_err(err)?;
    let none = evolve_elastoplastic(&x, &a0, &m, &h, &PlasticLaw::None, &pot(), window, opts)
        .map_err(err)?;
    let identical = el == none;

    let beta: f64 = 0.3;
    let law = PlasticLaw::Prescribed {
        w: PrescribedW::ProportionalToShape {
            coefficient: TimeFn::constant(-2.0 * beta),
        },
    };
    let pl = evolve_elastoplastic(&x, &a0, &m, &h, &law, &pot(), window, opts).map_err(err)?;
    let mut family: f64 = 0.0;
    for (pe, pp) in el.points.iter().zip(&pl.points) {
        for k in 0..el.len() {
            family = family.max(rel_diff(
                pp.a[k].matrix(),
                &(pe.a[k].matrix() * (2.0 * beta * el.times[k]).exp()),
            ));
        }
    }

    let a1 =
        vec![HSymTensor::from_matrix_unchecked(Ten3::from_diagonal(&Vec3::new(1.3, 0.8, 1.0))); 3];
    let thr = PlasticLaw::ThresholdDeviatoric {
        yield_stress: 0.2,
        fluidity: 0.8,
    };
    let traj = evolve_elastoplastic(&x, &a1, &m, &h, &thr, &pot(), window, opts).map_err(err)?;
    let mut co: f64 = 0.0;
    for p in &traj.points {
        let g0 = relaxed_from_shape(&p.j[0], &p.a[0], &h).map_err(err)?;
        let gs = evolve_relaxed_metric(&g0, &traj.times, &p.w, &p.j, &h).map_err(err)?;
        for k in 0..traj.len() {
            let want = shape_from_relaxed(&p.j[k], &gs[k], &h);
            co = co.max((p.a[k].matrix() - want.matrix()).norm() / p.a[k].matrix().norm());
        }
    }

    let mut rel = Vec::new();
    for eps in [4e-2, 2e-2, 1e-2, 5e-3] {
        let k = [
            [
                TimeFn::linear(1.0, 0.5 * eps),
                TimeFn::linear(0.0, eps),
                TimeFn::zero(),
            ],
            [
                TimeFn::linear(0.0, -0.4 * eps),
                TimeFn::one(),
                TimeFn::linear(0.0, 0.3 * eps),
            ],
            [
                TimeFn::zero(),
                TimeFn::zero(),
                TimeFn::linear(1.0, -0.2 * eps),
            ],
        ];
        let sm = MotionSpec::new(
            MotionKind::HomogeneousLinear {
                k,
                c: [TimeFn::zero(), TimeFn::zero(), TimeFn::zero()],
            },
            [0.0, 1.0],
        )
        .map_err(err)?;
        let w = |s: f64| TimeFn::constant(s * eps);
        let law = PlasticLaw::Prescribed {
            w: PrescribedW::Tensor {
                components: [
                    [w(0.6), w(0.2), w(0.0)],
                    [w(0.2), w(-0.3), w(0.1)],
                    [w(0.0), w(0.1), w(-0.2)],
                ],
            },
        };
        let t = evolve_elastoplastic(
            &[Vec3::zeros()],
            &[HSymTensor::identity()],
            &sm,
            &h,
            &law,
            &pot(),
            (0.0, 1.0, 1e-2),
            opts,
        )
        .map_err(err)?;
        let d = small_deformedness_decomposition(&t, 0, 0.0, 1.0).map_err(err)?;
        rel.push(d.residual / d.lhs.norm());
    }
    let orders: Vec<f64> = rel.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let linear = orders.iter().all(|o| (o - 1.0).abs() < 0.2);
    check(
        identical && family < 1e-8 && co < 1e-7 && linear,
        format!(
            "W = 0 bit-identical: {identical}, exponential family {family:.1e}, co-evolution {co:.1e}, decomposition orders {orders:.2?}"
        ),
    )
}

fn bundled() -> Vec<(String, PathBuf)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v.into_iter()
        .map(|p| {
            (
                p.file_stem()
                    .unwrap()
                    .to_str()
                    .unwrap()
                    .split('_')
                    .next()
                    .unwrap()
                    .to_string(),
                p,
            )
        })
        .collect()
}

fn read_dir_bytes(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut v: Vec<(PathBuf, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().into(), std::fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn cli_determinism() -> Outcome {
    let start = Instant::now();
    let tmp = std::env::temp_dir().join(format!("shapekin-acceptance-{}", std::process::id()));
    let mut differing = Vec::new();
    let all = bundled();
    for (cmd, cfg) in &all {
        let name = cfg.file_stem().unwrap().to_string_lossy().into_owned();
        let mut outs = Vec::new();
        for run in 0..2 {
            let out = tmp.join(format!("{name}-{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_shapekin"))
                .args([cmd.as_str(), "--quiet", "--config"])
                .arg(cfg)
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{name}: exit {status}"));
            }
            outs.push(read_dir_bytes(&out));
        }
        if outs[0] != outs[1] {
            differing.push(name);
        }
    }
    let _ = std::fs::remove_dir_all(&tmp);
    let detail = format!(
        "{} scenarios run twice, differing: {differing:?}",
        all.len()
    );
    check(differing.is_empty() && !all.is_empty(), detail.clone())?;
    within(start.elapsed(), Duration::from_secs(300), detail)
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("polar decomposition", polar),
        ("strain coincidence", strain_coincidence),
        ("Hencky identities", hencky_identities),
        ("shape evolution vs closed form", shape_closed_form),
        ("objectivity", objectivity),
        ("small deformedness", small_deformedness),
        ("compatibility convergence", compatibility_convergence),
        ("incompatibility detection", incompatibility),
        ("Cesaro-Volterra", cesaro_volterra_checks),
        ("power identity", power_identity),
        ("plastic consistency", plastic_consistency),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {:>2}: {tag}  {name}: {detail} [{secs:.2} s]",
            i + 1
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
