//! Time-dependent relaxed metric: the metric change tensor
//! `W = J g̃⁻¹ g̃˙ g̃⁻¹ Jᵀ h` and elastoplastic shape evolution
//! `Ȧ = L A + A L⁺ − W`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compat::ricci_rms;
use crate::error::{KinError, Result};
use crate::grid::{Field, Grid3, TensorField};
use crate::motion::{MotionSpec, TimeFn};
use crate::shape::{
    deformedness, evolve_shape_with, relaxed_from_shape, stress_from_potential, ElasticPotential,
    EvolveOptions, MetricChangeLaw, Trajectory,
};
use crate::tensor::{h_adjoint, sym_part_h, HSymTensor, Metric3, Ten3, Vec3};

/// Prescribed metric change, uniform in space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrescribedW {
    /// `W = c(t) A`.
    ProportionalToShape { coefficient: TimeFn },
    /// `W(t)` given componentwise (row-major).
    Tensor { components: [[TimeFn; 3]; 3] },
}

/// Plastic constitutive choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlasticLaw {
    None,
    Prescribed {
        w: PrescribedW,
    },
    /// `W = φ · max(0, ‖dev σ‖ − σ_Y) · n̂ · A` with `n̂ = dev σ / ‖dev σ‖`.
    ThresholdDeviatoric {
        yield_stress: f64,
        fluidity: f64,
    },
    /// `law` while `t < t_off`, no plastic change afterwards (sudden
    /// unloading).
    Until {
        law: Box<PlasticLaw>,
        t_off: f64,
    },
}

impl PlasticLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            PlasticLaw::ThresholdDeviatoric {
                yield_stress,
                fluidity,
            } => {
                if !(*yield_stress >= 0.0 && yield_stress.is_finite()) {
                    return Err(KinError::Domain(format!("yield stress {yield_stress}")));
                }
                if !(*fluidity >= 0.0 && fluidity.is_finite()) {
                    return Err(KinError::Domain(format!("fluidity {fluidity}")));
                }
                Ok(())
            }
            PlasticLaw::Until { law, t_off } => {
                if !t_off.is_finite() {
                    return Err(KinError::Domain("t_off must be finite".into()));
                }
                law.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, PlasticLaw::None)
    }
}

/// A plastic law paired with the potential that supplies the stress.
#[derive(Debug, Clone, PartialEq)]
pub struct PlasticRate {
    pub law: PlasticLaw,
    pub pot: ElasticPotential,
}

/// Threshold law rate for a given shape.
pub fn threshold_rate(
    a: &HSymTensor,
    h: &Metric3,
    pot: &ElasticPotential,
    yield_stress: f64,
    fluidity: f64,
) -> Result<Ten3> {
    let d = deformedness(a, h)?;
    let dev = stress_from_potential(&d, pot, a)?.deviator();
    let norm = dev.norm_h();
    let excess = norm - yield_stress;
    if !(excess > 0.0) || fluidity == 0.0 {
        return Ok(Ten3::zeros());
    }
    Ok(dev.matrix() * a.matrix() * (fluidity * excess / norm))
}

fn law_rate(
    law: &PlasticLaw,
    pot: &ElasticPotential,
    t: f64,
    a: &HSymTensor,
    h: &Metric3,
) -> Result<Ten3> {
    match law {
        PlasticLaw::None => Ok(Ten3::zeros()),
        PlasticLaw::Prescribed {
            w: PrescribedW::ProportionalToShape { coefficient },
        } => Ok(a.matrix() * coefficient.value(t)),
        PlasticLaw::Prescribed {
            w: PrescribedW::Tensor { components },
        } => Ok(Ten3::from_fn(|i, j| components[i][j].value(t))),
        PlasticLaw::ThresholdDeviatoric {
            yield_stress,
            fluidity,
        } => threshold_rate(a, h, pot, *yield_stress, *fluidity),
        PlasticLaw::Until { law, t_off } => {
            if t < *t_off {
                law_rate(law, pot, t, a, h)
            } else {
                Ok(Ten3::zeros())
            }
        }
    }
}

impl MetricChangeLaw for PlasticRate {
    fn metric_change(&self, t: f64, _label: &Vec3, a: &HSymTensor, h: &Metric3) -> Result<Ten3> {
        law_rate(&self.law, &self.pot, t, a, h)
    }
}

/// `W` together with the disagreement between its two expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricChange {
    pub w: Ten3,
    /// `‖W₁ − W₂‖ / ‖W₁‖` for `W₁ = J g̃⁻¹ g̃˙ g̃⁻¹ Jᵀ h` and
    /// `W₂ = −J (g̃⁻¹)˙ Jᵀ h`.
    pub discrepancy: f64,
}

/// Metric change tensor from a relaxed metric rate. The second expression
/// obtains `(g̃⁻¹)˙` by Cholesky solves instead of the explicit inverse.
pub fn metric_change_from_gdot(
    j: &Ten3,
    gtilde: &Metric3,
    gtilde_dot: &Ten3,
    h: &Metric3,
) -> Result<MetricChange> {
    let det = j.determinant();
    if !(det > 0.0) {
        return Err(KinError::SingularCompression(format!("det J = {det:.6e}")));
    }
    let asym = (gtilde_dot - gtilde_dot.transpose()).norm();
    if asym > 1e-12 * gtilde_dot.norm().max(f64::MIN_POSITIVE) {
        return Err(KinError::Metric(format!(
            "relaxed metric rate asymmetry {asym:.3e}"
        )));
    }
    let gi = gtilde.inverse();
    let w1 = j * gi * gtilde_dot * gi * j.transpose() * h.matrix();
    let chol = gtilde
        .matrix()
        .cholesky()
        .ok_or_else(|| KinError::Metric("relaxed metric not positive definite".into()))?;
    let x = chol.solve(gtilde_dot);
    let ginv_dot = -chol.solve(&x.transpose()).transpose();
    let w2 = -(j * ginv_dot * j.transpose() * h.matrix());
    let scale = w1.norm();
    let discrepancy = if scale > 0.0 {
        (w1 - w2).norm() / scale
    } else {
        w2.norm()
    };
    Ok(MetricChange { w: w1, discrepancy })
}

/// Elastoplastic shape evolution. With [`PlasticLaw::None`] this is exactly
/// [`crate::shape::evolve_shape`].
#[allow(clippy::too_many_arguments)]
pub fn evolve_elastoplastic(
    labels: &[Vec3],
    a0: &[HSymTensor],
    motion: &MotionSpec,
    h: &Metric3,
    law: &PlasticLaw,
    pot: &ElasticPotential,
    window: (f64, f64, f64),
    opts: EvolveOptions,
) -> Result<Trajectory> {
    law.validate()?;
    pot.validate()?;
    let (t0, t1, dt) = window;
    if law.is_none() {
        return evolve_shape_with(labels, a0, motion, h, None, t0, t1, dt, opts);
    }
    let rate = PlasticRate {
        law: law.clone(),
        pot: *pot,
    };
    evolve_shape_with(labels, a0, motion, h, Some(&rate), t0, t1, dt, opts)
}

fn lagrange_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != i)
                .map(|(_, &xm)| (x - xm) / (nodes[i] - xm))
                .product()
        })
        .collect()
}

fn midpoint_interp(series: &[Ten3], k: usize) -> Ten3 {
    let n = series.len();
    let lo = if n < 4 {
        0
    } else {
        k.saturating_sub(1).min(n - 4)
    };
    let hi = (lo + 4).min(n);
    let nodes: Vec<f64> = (lo..hi).map(|i| i as f64).collect();
    let w = lagrange_weights(&nodes, k as f64 + 0.5);
    (lo..hi)
        .zip(w)
        .fold(Ten3::zeros(), |acc, (i, wi)| acc + series[i] * wi)
}

fn gdot(g: &Ten3, j: &Ten3, w: &Ten3, h: &Metric3) -> Result<Ten3> {
    let ji = j
        .try_inverse()
        .ok_or_else(|| KinError::SingularCompression("J not invertible".into()))?;
    Ok(g * ji * w * h.inverse() * ji.transpose() * g)
}

/// Integrates `g̃˙ = g̃ J⁻¹ W h⁻¹ J⁻ᵀ g̃` (the inverse of the metric change
/// definition) with RK4 over uniformly spaced samples of `W` and `J`.
/// Half-step values come from cubic Lagrange interpolation of the series.
pub fn evolve_relaxed_metric(
    gtilde0: &Metric3,
    times: &[f64],
    w: &[Ten3],
    j: &[Ten3],
    h: &Metric3,
) -> Result<Vec<Metric3>> {
    let n = times.len();
    if w.len() != n || j.len() != n {
        return Err(KinError::Domain(
            "W, J and time series differ in length".into(),
        ));
    }
    if n < 2 {
        return Ok(vec![*gtilde0; n]);
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0)
        || times
            .windows(2)
            .any(|p| ((p[1] - p[0]) - dt).abs() > 1e-9 * dt)
    {
        return Err(KinError::Domain(
            "relaxed metric integration needs uniform increasing times".into(),
        ));
    }
    let mut out = Vec::with_capacity(n);
    out.push(*gtilde0);
    let mut g = *gtilde0.matrix();
    for k in 0..n - 1 {
        let ctx = |e: KinError| e.context(format!("step {}, t = {}", k + 1, times[k + 1]));
        let (wh, jh) = (midpoint_interp(w, k), midpoint_interp(j, k));
        let k1 = gdot(&g, &j[k], &w[k], h).map_err(ctx)?;
        let k2 = gdot(&(g + k1 * (0.5 * dt)), &jh, &wh, h).map_err(ctx)?;
        let k3 = gdot(&(g + k2 * (0.5 * dt)), &jh, &wh, h).map_err(ctx)?;
        let k4 = gdot(&(g + k3 * dt), &j[k + 1], &w[k + 1], h).map_err(ctx)?;
        let next = g + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
        let m = Metric3::new((next + next.transpose()) * 0.5).map_err(ctx)?;
        g = *m.matrix();
        out.push(m);
    }
    Ok(out)
}

/// Ricci residual of the material relaxed metric over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub rms: Vec<f64>,
    /// `|rms(t) − rms(t₀)|`.
    pub drift: Vec<f64>,
    pub max_drift: f64,
}

/// Ricci RMS of each relaxed metric field in `series`.
pub fn ricci_flatness_monitor(series: &[TensorField]) -> Result<MonitorReport> {
    let rms = series
        .iter()
        .enumerate()
        .map(|(k, g)| ricci_rms(g).map_err(|e| e.context(format!("snapshot {k}"))))
        .collect::<Result<Vec<_>>>()?;
    let r0 = rms.first().copied().unwrap_or(0.0);
    let drift: Vec<f64> = rms.iter().map(|r| (r - r0).abs()).collect();
    let max_drift = drift.iter().copied().fold(0.0, f64::max);
    Ok(MonitorReport {
        rms,
        drift,
        max_drift,
    })
}

/// Relaxed metric fields `g̃ = Jᵀ h A⁻¹ J` of a trajectory whose points are
/// the nodes of `grid` in storage order, at every `stride`-th sample.
pub fn relaxed_metric_fields(
    traj: &Trajectory,
    grid: &Grid3,
    stride: usize,
) -> Result<Vec<TensorField>> {
    if traj.points.len() != grid.len() {
        return Err(KinError::Grid(format!(
            "{} points for {} nodes",
            traj.points.len(),
            grid.len()
        )));
    }
    let stride = stride.max(1);
    let mut ks: Vec<usize> = (0..traj.times.len()).step_by(stride).collect();
    if ks.last() != Some(&(traj.times.len() - 1)) {
        ks.push(traj.times.len() - 1);
    }
    ks.into_iter()
        .map(|k| {
            let vals = traj
                .points
                .par_iter()
                .enumerate()
                .map(|(p, tr)| {
                    relaxed_from_shape(&tr.j[k], &tr.a[k], &traj.h)
                        .map(|m| *m.matrix())
                        .map_err(|e| e.context(format!("node {p}, sample {k}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Field::new(grid.clone(), vals)
        })
        .collect()
}

/// Terms of the additive split over a short interval at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    /// `sym_h[(Δr ⊗ ∇̃) J(t₁)⁻¹]` with `Δr ⊗ ∇̃ = J(t₂) − J(t₁)`.
    pub lhs: Ten3,
    pub delta_d: Ten3,
    /// `−½ J(t₁)[g̃(t₂)⁻¹ − g̃(t₁)⁻¹]J(t₁)ᵀ h`.
    pub plastic_term: Ten3,
    /// `‖lhs − (ΔD + plastic_term)‖`.
    pub residual: f64,
}

/// Largest `‖J(t′) J(t)⁻¹ − I‖` over recorded pairs in `[k1, k2]`.
pub fn jacobian_variation(traj: &Trajectory, point: usize, k1: usize, k2: usize) -> Result<f64> {
    let tr = traj
        .points
        .get(point)
        .ok_or_else(|| KinError::Domain(format!("no point {point}")))?;
    let inv: Vec<Ten3> = (k1..=k2)
        .map(|k| {
            tr.j[k]
                .try_inverse()
                .ok_or_else(|| KinError::SingularCompression(format!("sample {k}")))
        })
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for a in k1..=k2 {
        for (b, ib) in (k1..=k2).zip(&inv) {
            if a != b {
                worst = worst.max((tr.j[a] * ib - Ten3::identity()).norm());
            }
        }
    }
    Ok(worst)
}

/// Regime bound on `‖J(t′) J(t)⁻¹ − I‖`.
pub const SMALL_JACOBIAN_CHANGE: f64 = 0.1;

/// Splits the change over `[t1, t2]` (nearest recorded samples) into the
/// elastic deformedness change and the plastic metric term.
pub fn small_deformedness_decomposition(
    traj: &Trajectory,
    point: usize,
    t1: f64,
    t2: f64,
) -> Result<Decomposition> {
    let (k1, k2) = (traj.index_near(t1), traj.index_near(t2));
    if k2 <= k1 {
        return Err(KinError::Domain(format!("empty interval [{t1}, {t2}]")));
    }
    let var = jacobian_variation(traj, point, k1, k2)?;
    if !(var < SMALL_JACOBIAN_CHANGE) {
        return Err(KinError::Regime(format!(
            "‖J(t′)J(t)⁻¹ − I‖ reaches {var:.3e}"
        )));
    }
    let h = &traj.h;
    let tr = &traj.points[point];
    let (j1, j2) = (tr.j[k1], tr.j[k2]);
    let j1i = j1
        .try_inverse()
        .ok_or_else(|| KinError::SingularCompression("J(t₁)".into()))?;
    let j2i = j2
        .try_inverse()
        .ok_or_else(|| KinError::SingularCompression("J(t₂)".into()))?;
    let lhs = sym_part_h(&((j2 - j1) * j1i), h).into_matrix();
    let delta_d =
        deformedness(&tr.a[k2], h)?.into_matrix() - deformedness(&tr.a[k1], h)?.into_matrix();
    let c = j1 * j2i;
    let plastic_term = (c * tr.a[k2].matrix() * h_adjoint(&c, h) - tr.a[k1].matrix()) * -0.5;
    let residual = (lhs - (delta_d + plastic_term)).norm();
    Ok(Decomposition {
        lhs,
        delta_d,
        plastic_term,
        residual,
    })
}
