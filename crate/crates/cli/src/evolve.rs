use std::io::Write;

use serde::Serialize;

use shapekin::compat::invert_polynomial;
use shapekin::dump::write_trajectory;
use shapekin::plastic::{evolve_elastoplastic, evolve_relaxed_metric, PlasticRate};
use shapekin::shape::{
    deformedness, power_identity_residual, relaxed_from_shape, shape_from_relaxed, step_count,
    step_halving_error, volume_ratio, EvolveOptions, MetricChangeLaw, PowerResidual, StrainMeasure,
    Trajectory,
};
use shapekin::tensor::{h_adjoint, ten3, HSymTensor, Metric3};
use shapekin::{MotionSpec, Vec3};

use crate::config::{check_window, metric, EvolveConfig, InitialShape, Loaded, Tolerances};
use crate::error::{output, CliError};
use crate::output::{Check, Header, OutDir};

/// Validated inputs of an evolution run.
pub struct Prepared {
    pub labels: Vec<Vec3>,
    pub a0: Vec<HSymTensor>,
    pub h: Metric3,
    pub motion: MotionSpec,
}

pub fn prepare(cfg: &EvolveConfig, seed: u64, at: &str) -> Result<Prepared, CliError> {
    check_window(&cfg.time, &format!("{at}.time"))?;
    let h = metric(&cfg.metric, &format!("{at}.metric"))?;
    let motion = cfg.motion.clone();
    motion
        .validate()
        .map_err(CliError::setup(&format!("{at}.motion")))?;
    let [i0, i1] = motion.interval;
    if cfg.time.t0 < i0 || cfg.time.t1 > i1 {
        return Err(CliError::Config(format!(
            "{at}.time: window [{}, {}] leaves the motion interval [{i0}, {i1}]",
            cfg.time.t0, cfg.time.t1
        )));
    }
    cfg.material
        .validate()
        .map_err(CliError::setup(&format!("{at}.material")))?;
    cfg.plastic
        .validate()
        .map_err(CliError::setup(&format!("{at}.plastic")))?;
    if cfg.record_every == 0 {
        return Err(CliError::Config(format!(
            "{at}.record_every must be at least 1"
        )));
    }
    let n = step_count(cfg.time.t0, cfg.time.t1, cfg.time.dt)
        .map_err(CliError::setup(&format!("{at}.time")))?;
    if n % cfg.record_every != 0 {
        return Err(CliError::Config(format!(
            "{at}.record_every = {} does not divide the {n} steps",
            cfg.record_every
        )));
    }
    let labels = cfg.points.labels(seed, &format!("{at}.points"))?;
    let a0 = initial_shapes(cfg, &labels, &motion, &h, at)?;
    Ok(Prepared {
        labels,
        a0,
        h,
        motion,
    })
}

fn initial_shapes(
    cfg: &EvolveConfig,
    labels: &[Vec3],
    motion: &MotionSpec,
    h: &Metric3,
    at: &str,
) -> Result<Vec<HSymTensor>, CliError> {
    let at = format!("{at}.initial_shape");
    let bad = |m: String| CliError::Config(format!("{at}: {m}"));
    match &cfg.initial_shape {
        InitialShape::Identity => Ok(vec![HSymTensor::identity(); labels.len()]),
        InitialShape::Explicit { tensor } => {
            let a = HSymTensor::new(ten3(*tensor), h).map_err(|e| bad(e.to_string()))?;
            if !a.is_positive_definite(h) {
                return Err(bad("tensor is not positive definite".into()));
            }
            Ok(vec![a; labels.len()])
        }
        InitialShape::FromPotential { potential } => labels
            .iter()
            .enumerate()
            .map(|(p, x)| {
                let (pos, _) = motion
                    .evaluate(cfg.time.t0, x)
                    .map_err(|e| bad(e.to_string()))?;
                let y = invert_polynomial(potential, &pos)
                    .map_err(|e| bad(format!("point {p}: {e}")))?;
                let g = potential.gradient(&y);
                if !(g.determinant() > 0.0) {
                    return Err(bad(format!("point {p}: potential gradient has det <= 0")));
                }
                let a = g * h_adjoint(&g, h);
                let a = HSymTensor::new((a + h_adjoint(&a, h)) * 0.5, h)
                    .map_err(|e| bad(e.to_string()))?;
                Ok(a)
            })
            .collect(),
    }
}

pub fn run_trajectory(cfg: &EvolveConfig, p: &Prepared, dt: f64) -> Result<Trajectory, CliError> {
    let window = (cfg.time.t0, cfg.time.t1, dt);
    let opts = EvolveOptions {
        record_every: cfg.record_every,
    };
    Ok(evolve_elastoplastic(
        &p.labels,
        &p.a0,
        &p.motion,
        &p.h,
        &cfg.plastic,
        &cfg.material,
        window,
        opts,
    )?)
}

pub fn power(
    traj: &Trajectory,
    cfg: &EvolveConfig,
    measure: StrainMeasure,
) -> Result<Option<PowerResidual>, CliError> {
    if traj.len() < 3 {
        return Ok(None);
    }
    Ok(Some(power_identity_residual(traj, &cfg.material, measure)?))
}

/// Largest `‖A − J g̃⁻¹ Jᵀ h‖ / ‖A‖` over points and samples, with `g̃`
/// held fixed (elastic) or co-evolved from the recorded `W`.
fn identity_error(traj: &Trajectory, plastic: bool) -> Result<f64, CliError> {
    let h = &traj.h;
    let mut worst: f64 = 0.0;
    for (p, tr) in traj.points.iter().enumerate() {
        let g0 = relaxed_from_shape(&tr.j[0], &tr.a[0], h)
            .map_err(|e| e.context(format!("point {p}")))?;
        let gs = if plastic && traj.len() >= 2 {
            evolve_relaxed_metric(&g0, &traj.times, &tr.w, &tr.j, h)
                .map_err(|e| e.context(format!("point {p}")))?
        } else {
            vec![g0; traj.len()]
        };
        for k in 0..traj.len() {
            let a = tr.a[k].matrix();
            let want = shape_from_relaxed(&tr.j[k], &gs[k], h);
            worst = worst.max((a - want.matrix()).norm() / a.norm());
        }
    }
    Ok(worst)
}

#[derive(Debug, Serialize)]
struct PointFinal {
    point_id: usize,
    label: [f64; 3],
    a_norm: f64,
    d_norm: f64,
    vol_ratio: f64,
}

#[derive(Debug, Serialize)]
struct EvolveSummary {
    #[serde(flatten)]
    header: Header,
    points: usize,
    steps: usize,
    samples: usize,
    dt: f64,
    plastic: bool,
    final_state: Vec<PointFinal>,
    max_symmetry_drift: f64,
    step_halving_error: Option<f64>,
    power_measure: StrainMeasure,
    power_max_relative: Option<f64>,
    elastic_identity: Check,
}

pub fn run(loaded: &Loaded, header: Header, out: &mut OutDir) -> Result<(), CliError> {
    let cfg = loaded
        .config
        .evolve
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no `evolve` section".into()))?;
    let tol: Tolerances = loaded.config.tolerances;
    let p = prepare(cfg, header.seed, "evolve")?;
    let traj = run_trajectory(cfg, &p, cfg.time.dt)?;
    let pw = power(&traj, cfg, cfg.power_measure)?;
    let plastic = !cfg.plastic.is_none();
    let halving = if cfg.step_check {
        let rate = PlasticRate {
            law: cfg.plastic.clone(),
            pot: cfg.material,
        };
        let law: Option<&dyn MetricChangeLaw> = if plastic { Some(&rate) } else { None };
        let window = (cfg.time.t0, cfg.time.t1, cfg.time.dt);
        Some(step_halving_error(
            &p.labels, &p.a0, &p.motion, &p.h, law, window,
        )?)
    } else {
        None
    };
    let ident = identity_error(&traj, plastic)?;
    let bound = if plastic {
        tol.co_evolution
    } else {
        tol.elastic_identity
    };

    let mut w = out.file("trajectory.csv")?;
    write_trajectory(&mut w, &traj, pw.as_ref()).map_err(output)?;
    w.flush()?;

    let last = traj.len() - 1;
    let final_state = traj
        .points
        .iter()
        .enumerate()
        .map(|(i, tr)| -> Result<PointFinal, CliError> {
            let a = &tr.a[last];
            Ok(PointFinal {
                point_id: i,
                label: tr.label.into(),
                a_norm: a.matrix().norm(),
                d_norm: deformedness(a, &traj.h)?.matrix().norm(),
                vol_ratio: volume_ratio(a)?,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let steps = step_count(cfg.time.t0, cfg.time.t1, cfg.time.dt)?;
    out.summary(&EvolveSummary {
        header,
        points: traj.points.len(),
        steps,
        samples: traj.len(),
        dt: traj.dt,
        plastic,
        final_state,
        max_symmetry_drift: traj.max_drift(),
        step_halving_error: halving,
        power_measure: cfg.power_measure,
        power_max_relative: pw.map(|r| r.max_relative),
        elastic_identity: Check::below(ident, bound),
    })
}
