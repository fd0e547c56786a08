//! Elastic shape tensor `A = g⁻¹h`, its rate equation, the Hencky
//! deformedness `D = ½ ln A` and the quadratic isotropic potential.
//!
//! Material points are identified by their labels in the motion's chart.
//! Along each point the world-line gradient is `J = F(t, X)`, the relaxed
//! metric in that chart is `g̃`, and
//!
//! ```text
//! A = J g̃⁻¹ Jᵀ h,      Ȧ = L A + A L⁺ − W.
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KinError, Result};
use crate::motion::MotionSpec;
use crate::tensor::{
    func_of_hsym, h_adjoint, sym_part_h, HSymTensor, Metric3, Ten3, TensorFn, Vec3,
};
use crate::tol::EIGEN_TOL;

fn check_det(j: &Ten3) -> Result<()> {
    let det = j.determinant();
    if det > 0.0 && det.is_finite() {
        Ok(())
    } else {
        Err(KinError::SingularCompression(format!("det J = {det:.6e}")))
    }
}

/// `h̃ = Jᵀ h J`.
pub fn current_metric_pullback(j: &Ten3, h: &Metric3) -> Result<Metric3> {
    check_det(j)?;
    let m = j.transpose() * h.matrix() * j;
    Metric3::new((m + m.transpose()) * 0.5)
}

/// `A = g⁻¹ h`, projected onto its h-symmetric part.
pub fn shape_from_metrics(g: &Metric3, h: &Metric3) -> HSymTensor {
    sym_part_h(&(g.inverse() * h.matrix()), h)
}

/// Material form `Ã = J⁻¹ A J` (symmetric with respect to `g̃`, not `h`).
pub fn shape_material(j: &Ten3, a: &HSymTensor) -> Result<HSymTensor> {
    check_det(j)?;
    let ji = j
        .try_inverse()
        .ok_or_else(|| KinError::SingularCompression("J not invertible".into()))?;
    Ok(HSymTensor::from_matrix_unchecked(ji * a.matrix() * j))
}

/// `A = J g̃⁻¹ Jᵀ h`.
pub fn shape_from_relaxed(j: &Ten3, gtilde: &Metric3, h: &Metric3) -> HSymTensor {
    sym_part_h(&(j * gtilde.inverse() * j.transpose() * h.matrix()), h)
}

/// `g̃ = Jᵀ h A⁻¹ J`, the relaxed metric implied by a shape tensor.
pub fn relaxed_from_shape(j: &Ten3, a: &HSymTensor, h: &Metric3) -> Result<Metric3> {
    check_det(j)?;
    let ai = a
        .matrix()
        .try_inverse()
        .ok_or_else(|| KinError::NonPositiveShape("A not invertible".into()))?;
    let m = j.transpose() * h.matrix() * ai * j;
    Metric3::new((m + m.transpose()) * 0.5)
}

/// `D = ½ ln A`.
pub fn deformedness(a: &HSymTensor, h: &Metric3) -> Result<HSymTensor> {
    Ok(func_of_hsym(a, h, TensorFn::Ln)? * 0.5)
}

/// `√det A`, the current volume over the relaxed volume.
pub fn volume_ratio(a: &HSymTensor) -> Result<f64> {
    let det = a.determinant();
    if det > 0.0 && det.is_finite() {
        Ok(det.sqrt())
    } else {
        Err(KinError::NonPositiveShape(format!("det A = {det:.6e}")))
    }
}

/// Isotropic quadratic potential `U(D) = ½λ(tr D)² + μ tr(D²)` with relaxed
/// density `rho_relaxed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticPotential {
    pub lambda: f64,
    pub mu: f64,
    pub rho_relaxed: f64,
}

impl ElasticPotential {
    pub fn new(lambda: f64, mu: f64, rho_relaxed: f64) -> Result<Self> {
        let p = Self {
            lambda,
            mu,
            rho_relaxed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(KinError::Domain(format!(
                "mu = {} must be positive",
                self.mu
            )));
        }
        if !(3.0 * self.lambda + 2.0 * self.mu > 0.0 && self.lambda.is_finite()) {
            return Err(KinError::Domain("3λ + 2μ must be positive".into()));
        }
        if !(self.rho_relaxed > 0.0 && self.rho_relaxed.is_finite()) {
            return Err(KinError::Domain(format!(
                "rho_relaxed = {}",
                self.rho_relaxed
            )));
        }
        Ok(())
    }

    /// Specific energy `U(D)`.
    pub fn energy(&self, d: &HSymTensor) -> f64 {
        let tr = d.trace();
        0.5 * self.lambda * tr * tr + self.mu * (d.matrix() * d.matrix()).trace()
    }

    /// `dU/dD = λ tr D I + 2μ D`.
    pub fn energy_derivative(&self, d: &HSymTensor) -> HSymTensor {
        HSymTensor::scaled_identity(self.lambda * d.trace()) + *d * (2.0 * self.mu)
    }

    /// `ρ = ρ_relaxed / √det A`.
    pub fn density(&self, a: &HSymTensor) -> Result<f64> {
        Ok(self.rho_relaxed / volume_ratio(a)?)
    }
}

/// `σ = ρ dU/dD` with `ρ = ρ_relaxed / √det A`.
pub fn stress_from_potential(
    d: &HSymTensor,
    pot: &ElasticPotential,
    a: &HSymTensor,
) -> Result<HSymTensor> {
    Ok(pot.energy_derivative(d) * pot.density(a)?)
}

/// A metric change rate `W` supplied to the shape evolution. Implemented by
/// the built-in plastic laws; custom implementations may depend on the
/// material label.
pub trait MetricChangeLaw: Sync {
    fn metric_change(&self, t: f64, label: &Vec3, a: &HSymTensor, h: &Metric3) -> Result<Ten3>;
}

/// Which ODE a trajectory integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    /// `Ȧ = L A + A L⁺ − W`.
    Shape,
    /// `Ė = ½(L + L⁺)`.
    InertialCauchy,
}

/// Samples along one material point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTrack {
    pub label: Vec3,
    /// Shape tensor (or inertial Cauchy strain) at each recorded time.
    pub a: Vec<HSymTensor>,
    pub j: Vec<Ten3>,
    pub l: Vec<Ten3>,
    pub w: Vec<Ten3>,
    /// Relative size of the h-skew part removed at each recorded step.
    pub drift: Vec<f64>,
}

/// Output of the evolution routines.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub h: Metric3,
    pub times: Vec<f64>,
    pub points: Vec<PointTrack>,
    /// Integration step actually used (the requested step shrunk to fit).
    pub dt: f64,
}

/// Snapshot of all points at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeState {
    pub t: f64,
    pub points: Vec<Vec3>,
    pub a: Vec<HSymTensor>,
    pub j: Vec<Ten3>,
    pub gtilde: Vec<Metric3>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_drift(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.drift.iter().copied())
            .fold(0.0, f64::max)
    }

    /// Snapshot at recorded index `k`, with `g̃ = Jᵀ h A⁻¹ J`.
    pub fn state(&self, k: usize) -> Result<ShapeState> {
        if k >= self.times.len() {
            return Err(KinError::Domain(format!(
                "sample {k} of {}",
                self.times.len()
            )));
        }
        let gtilde = self
            .points
            .iter()
            .enumerate()
            .map(|(p, tr)| {
                relaxed_from_shape(&tr.j[k], &tr.a[k], &self.h)
                    .map_err(|e| e.context(format!("point {p}")))
            })
            .collect::<Result<_>>()?;
        Ok(ShapeState {
            t: self.times[k],
            points: self.points.iter().map(|p| p.label).collect(),
            a: self.points.iter().map(|p| p.a[k]).collect(),
            j: self.points.iter().map(|p| p.j[k]).collect(),
            gtilde,
        })
    }

    /// Index of the recorded time closest to `t`.
    pub fn index_near(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, &s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        best
    }
}

/// Step control for the evolution routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Record every `record_every`-th step (the last step is always kept).
    pub record_every: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { record_every: 1 }
    }
}

/// Number of uniform steps covering `[t0, t1]` with step at most `dt`.
pub fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(KinError::Domain(format!("dt = {dt} must be positive")));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(KinError::Domain(format!("time window [{t0}, {t1}]")));
    }
    let n = ((t1 - t0) / dt * (1.0 - 1e-12)).ceil();
    if n > 1e9 {
        return Err(KinError::Domain(format!("{n} steps requested")));
    }
    Ok(n as usize)
}

fn shape_rate(l: &Ten3, a: &Ten3, h: &Metric3) -> Ten3 {
    l * a + a * h_adjoint(l, h)
}

fn project(a: &Ten3, h: &Metric3) -> (Ten3, f64) {
    let s = sym_part_h(a, h).into_matrix();
    let drift = (a - s).norm() / s.norm().max(f64::MIN_POSITIVE);
    (s, drift)
}

struct Run<'a> {
    kind: TrajectoryKind,
    motion: &'a MotionSpec,
    h: &'a Metric3,
    law: Option<&'a dyn MetricChangeLaw>,
    t0: f64,
    dt: f64,
    n: usize,
    every: usize,
}

impl Run<'_> {
    fn rate(&self, t: f64, label: &Vec3, l: &Ten3, a: &Ten3) -> Result<Ten3> {
        match self.kind {
            TrajectoryKind::InertialCauchy => Ok(sym_part_h(l, self.h).into_matrix()),
            TrajectoryKind::Shape => match self.law {
                None => Ok(shape_rate(l, a, self.h)),
                Some(law) => {
                    let w = law.metric_change(
                        t,
                        label,
                        &HSymTensor::from_matrix_unchecked(*a),
                        self.h,
                    )?;
                    Ok(shape_rate(l, a, self.h) - w)
                }
            },
        }
    }

    fn w_at(&self, t: f64, label: &Vec3, a: &HSymTensor) -> Result<Ten3> {
        match (self.kind, self.law) {
            (TrajectoryKind::Shape, Some(law)) => law.metric_change(t, label, a, self.h),
            _ => Ok(Ten3::zeros()),
        }
    }

    fn check_spd(&self, a: &Ten3) -> Result<()> {
        if self.kind != TrajectoryKind::Shape {
            return Ok(());
        }
        let ev = HSymTensor::from_matrix_unchecked(*a).eigenvalues(self.h);
        if !(ev[0] > EIGEN_TOL) || !ev.iter().all(|x| x.is_finite()) {
            return Err(KinError::NonPositiveShape(format!(
                "smallest eigenvalue {:.6e}",
                ev[0]
            )));
        }
        Ok(())
    }

    fn point(&self, label: &Vec3, a0: &HSymTensor) -> Result<PointTrack> {
        let m = self.motion;
        let cap = self.n / self.every + 2;
        let mut tr = PointTrack {
            label: *label,
            a: Vec::with_capacity(cap),
            j: Vec::with_capacity(cap),
            l: Vec::with_capacity(cap),
            w: Vec::with_capacity(cap),
            drift: Vec::with_capacity(cap),
        };
        let mut a = *a0.matrix();
        self.check_spd(&a).map_err(|e| e.context("initial shape"))?;
        let mut l0 = m.velocity_gradient_at_label(self.t0, label)?;
        tr.a.push(*a0);
        tr.j.push(m.deformation_gradient(self.t0, label)?);
        tr.l.push(l0);
        tr.w.push(self.w_at(self.t0, label, a0)?);
        tr.drift.push(0.0);
        let dt = self.dt;
        for k in 0..self.n {
            let ctx = |e: KinError| {
                e.context(format!(
                    "step {}, t = {}",
                    k + 1,
                    self.t0 + (k + 1) as f64 * dt
                ))
            };
            let t = self.t0 + k as f64 * dt;
            let th = t + 0.5 * dt;
            let t1 = self.t0 + (k + 1) as f64 * dt;
            let lh = m.velocity_gradient_at_label(th, label).map_err(ctx)?;
            let l1 = m.velocity_gradient_at_label(t1, label).map_err(ctx)?;
            let k1 = self.rate(t, label, &l0, &a).map_err(ctx)?;
            let k2 = self
                .rate(th, label, &lh, &(a + k1 * (0.5 * dt)))
                .map_err(ctx)?;
            let k3 = self
                .rate(th, label, &lh, &(a + k2 * (0.5 * dt)))
                .map_err(ctx)?;
            let k4 = self.rate(t1, label, &l1, &(a + k3 * dt)).map_err(ctx)?;
            let next = a + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
            let (next, drift) = project(&next, self.h);
            self.check_spd(&next).map_err(ctx)?;
            a = next;
            l0 = l1;
            if (k + 1) % self.every == 0 || k + 1 == self.n {
                let ah = HSymTensor::from_matrix_unchecked(a);
                tr.a.push(ah);
                tr.j.push(m.deformation_gradient(t1, label).map_err(ctx)?);
                tr.l.push(l1);
                tr.w.push(self.w_at(t1, label, &ah).map_err(ctx)?);
                tr.drift.push(drift);
            }
        }
        Ok(tr)
    }
}

#[allow(clippy::too_many_arguments)]
fn run(
    kind: TrajectoryKind,
    labels: &[Vec3],
    init: &[HSymTensor],
    motion: &MotionSpec,
    h: &Metric3,
    law: Option<&dyn MetricChangeLaw>,
    window: (f64, f64, f64),
    opts: EvolveOptions,
) -> Result<Trajectory> {
    let (t0, t1, dt) = window;
    if labels.len() != init.len() {
        return Err(KinError::Domain(format!(
            "{} labels but {} initial tensors",
            labels.len(),
            init.len()
        )));
    }
    let n = step_count(t0, t1, dt)?;
    let every = opts.record_every.max(1);
    let dt = if n == 0 { dt } else { (t1 - t0) / n as f64 };
    let r = Run {
        kind,
        motion,
        h,
        law,
        t0,
        dt,
        n,
        every,
    };
    let points = labels
        .par_iter()
        .zip(init.par_iter())
        .enumerate()
        .map(|(p, (x, a0))| r.point(x, a0).map_err(|e| e.context(format!("point {p}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut times = vec![t0];
    for k in 0..n {
        if (k + 1) % every == 0 || k + 1 == n {
            times.push(t0 + (k + 1) as f64 * dt);
        }
    }
    Ok(Trajectory {
        kind,
        h: *h,
        times,
        points,
        dt,
    })
}

/// Integrates `Ȧ = L A + A L⁺` with classical RK4 along each material point.
///
/// `L` is the velocity gradient of `motion` at the point's current
/// position. After every step `A` is replaced by its h-symmetric part (the
/// removed fraction is logged as drift) and checked for positivity.
pub fn evolve_shape(
    labels: &[Vec3],
    a0: &[HSymTensor],
    motion: &MotionSpec,
    h: &Metric3,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Trajectory> {
    evolve_shape_with(
        labels,
        a0,
        motion,
        h,
        None,
        t0,
        t1,
        dt,
        EvolveOptions::default(),
    )
}

/// [`evolve_shape`] with an optional metric change law, `Ȧ = L A + A L⁺ − W`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_shape_with(
    labels: &[Vec3],
    a0: &[HSymTensor],
    motion: &MotionSpec,
    h: &Metric3,
    law: Option<&dyn MetricChangeLaw>,
    t0: f64,
    t1: f64,
    dt: f64,
    opts: EvolveOptions,
) -> Result<Trajectory> {
    run(
        TrajectoryKind::Shape,
        labels,
        a0,
        motion,
        h,
        law,
        (t0, t1, dt),
        opts,
    )
}

/// Integrates `Ė = ½(L + L⁺)`.
pub fn evolve_inertial_cauchy(
    labels: &[Vec3],
    e0: &[HSymTensor],
    motion: &MotionSpec,
    h: &Metric3,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Trajectory> {
    run(
        TrajectoryKind::InertialCauchy,
        labels,
        e0,
        motion,
        h,
        None,
        (t0, t1, dt),
        EvolveOptions::default(),
    )
}

/// Step-halving self check: runs at `dt` and `dt/2` and returns the largest
/// relative difference of the final shape tensors.
pub fn step_halving_error(
    labels: &[Vec3],
    a0: &[HSymTensor],
    motion: &MotionSpec,
    h: &Metric3,
    law: Option<&dyn MetricChangeLaw>,
    window: (f64, f64, f64),
) -> Result<f64> {
    let (t0, t1, dt) = window;
    let last = EvolveOptions {
        record_every: usize::MAX,
    };
    let coarse = evolve_shape_with(labels, a0, motion, h, law, t0, t1, dt, last)?;
    let fine = evolve_shape_with(labels, a0, motion, h, law, t0, t1, 0.5 * dt, last)?;
    Ok(coarse
        .points
        .iter()
        .zip(&fine.points)
        .map(|(c, f)| {
            let (a, b) = (c.a.last().unwrap().matrix(), f.a.last().unwrap().matrix());
            (a - b).norm() / b.norm()
        })
        .fold(0.0, f64::max))
}

/// Strain measure fed into the potential by [`power_identity_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrainMeasure {
    /// `D = ½ ln A`.
    Hencky,
    /// `½(A − I)`, the small-deformedness approximation of `D` and of the
    /// inertial Cauchy strain.
    LinearizedShape,
}

impl StrainMeasure {
    pub fn apply(self, a: &HSymTensor, h: &Metric3) -> Result<HSymTensor> {
        match self {
            StrainMeasure::Hencky => deformedness(a, h),
            StrainMeasure::LinearizedShape => Ok((*a - HSymTensor::identity()) * 0.5),
        }
    }
}

/// Per-point series of the power balance `tr(σL)` against `ρ U̇`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerResidual {
    /// `tr(σL)` per point and recorded time.
    pub power: Vec<Vec<f64>>,
    /// `|tr(σL) − ρ U̇|` per point and recorded time.
    pub residual: Vec<Vec<f64>>,
    /// Largest residual over the largest power magnitude, worst point.
    pub max_relative: f64,
}

/// Second-order time derivative of uniformly sampled data (central in the
/// interior, one-sided at the ends).
pub fn time_derivative(y: &[f64], dt: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|k| {
            if k == 0 {
                (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dt)
            } else if k + 1 == n {
                (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * dt)
            } else {
                (y[k + 1] - y[k - 1]) / (2.0 * dt)
            }
        })
        .collect()
}

/// Mechanical power check `tr(σL) = ρ U̇` along a shape trajectory, with
/// `U̇` from second-order differences of `U(measure(A))`.
pub fn power_identity_residual(
    traj: &Trajectory,
    pot: &ElasticPotential,
    measure: StrainMeasure,
) -> Result<PowerResidual> {
    pot.validate()?;
    if traj.kind != TrajectoryKind::Shape {
        return Err(KinError::Domain(
            "power identity needs a shape trajectory".into(),
        ));
    }
    let n = traj.times.len();
    if n < 3 {
        return Err(KinError::Domain(format!(
            "trajectory has {n} samples, need at least 3"
        )));
    }
    let dt = traj.times[1] - traj.times[0];
    for w in traj.times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
            return Err(KinError::Domain(
                "power identity needs uniformly recorded samples".into(),
            ));
        }
    }
    let h = &traj.h;
    let per_point = traj
        .points
        .par_iter()
        .enumerate()
        .map(|(p, tr)| -> Result<(Vec<f64>, Vec<f64>, f64)> {
            let mut u = Vec::with_capacity(n);
            let mut power = Vec::with_capacity(n);
            let mut rho = Vec::with_capacity(n);
            for k in 0..n {
                let a = &tr.a[k];
                let d = measure
                    .apply(a, h)
                    .map_err(|e| e.context(format!("point {p}, sample {k}")))?;
                let s = stress_from_potential(&d, pot, a)?;
                u.push(pot.energy(&d));
                power.push((s.matrix() * tr.l[k]).trace());
                rho.push(pot.density(a)?);
            }
            let udot = time_derivative(&u, dt);
            let res: Vec<f64> = (0..n)
                .map(|k| (power[k] - rho[k] * udot[k]).abs())
                .collect();
            let scale = power
                .iter()
                .zip(&udot)
                .zip(&rho)
                .map(|((p, ud), r)| p.abs().max((r * ud).abs()))
                .fold(0.0, f64::max);
            let worst = res.iter().copied().fold(0.0, f64::max);
            let rel = if scale > 0.0 { worst / scale } else { worst };
            Ok((power, res, rel))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_relative = per_point.iter().map(|x| x.2).fold(0.0, f64::max);
    let (power, residual) = per_point.into_iter().map(|(a, b, _)| (a, b)).unzip();
    Ok(PowerResidual {
        power,
        residual,
        max_relative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::TimeFn;
    use crate::tensor::ten3;

    fn id() -> Metric3 {
        Metric3::identity()
    }

    #[test]
    fn pullback_examples() {
        let h = id();
        assert_eq!(
            *current_metric_pullback(&Ten3::identity(), &h)
                .unwrap()
                .matrix(),
            Ten3::identity()
        );
        let m = current_metric_pullback(&(Ten3::identity() * 2.0), &h).unwrap();
        assert!((m.matrix() - Ten3::identity() * 4.0).norm() < 1e-15);
        let s = ten3([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let m = current_metric_pullback(&s, &h).unwrap();
        assert_eq!(
            *m.matrix(),
            ten3([[1.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
        );
        assert!(current_metric_pullback(&(Ten3::identity() * -1.0), &h).is_err());
    }

    #[test]
    fn shape_from_metrics_examples() {
        let h = Metric3::diagonal([2.0, 1.0, 3.0]).unwrap();
        assert!((shape_from_metrics(&h, &h).matrix() - Ten3::identity()).norm() < 1e-15);
        let g = Metric3::new(h.matrix() * 0.25).unwrap();
        assert!((shape_from_metrics(&g, &h).matrix() - Ten3::identity() * 4.0).norm() < 1e-14);
        let a = shape_from_metrics(&Metric3::diagonal([1.0, 0.25, 1.0]).unwrap(), &id());
        assert!((a.matrix() - Ten3::from_diagonal(&Vec3::new(1.0, 4.0, 1.0))).norm() < 1e-15);
    }

    #[test]
    fn deformedness_and_volume_examples() {
        let h = id();
        assert!(
            deformedness(&HSymTensor::identity(), &h)
                .unwrap()
                .matrix()
                .norm()
                < 1e-15
        );
        let s = 0.37_f64;
        let d = deformedness(&HSymTensor::scaled_identity((2.0 * s).exp()), &h).unwrap();
        assert!((d.matrix() - Ten3::identity() * s).norm() < 1e-14);
        assert!((d.trace() - 3.0 * s).abs() < 1e-14);
        let a = HSymTensor::from_matrix_unchecked(Ten3::from_diagonal(&Vec3::new(4.0, 1.0, 1.0)));
        let d = deformedness(&a, &h).unwrap();
        assert!((d.matrix()[(0, 0)] - 2f64.ln()).abs() < 1e-15);
        assert!((volume_ratio(&a).unwrap() - 2.0).abs() < 1e-15);
        assert!((volume_ratio(&HSymTensor::scaled_identity(4.0)).unwrap() - 8.0).abs() < 1e-14);
        assert!(matches!(
            deformedness(&HSymTensor::scaled_identity(-1.0), &h),
            Err(KinError::NonPositiveShape(_))
        ));
    }

    #[test]
    fn stress_examples() {
        let pot = ElasticPotential::new(2.0, 1.5, 3.0).unwrap();
        let a = HSymTensor::scaled_identity(1.3);
        let rho = 3.0 / volume_ratio(&a).unwrap();
        assert_eq!(
            stress_from_potential(&HSymTensor::zero(), &pot, &a).unwrap(),
            HSymTensor::zero()
        );
        let s = 0.1;
        let sig = stress_from_potential(&HSymTensor::scaled_identity(s), &pot, &a).unwrap();
        assert!(
            (sig.matrix() - Ten3::identity() * (rho * (3.0 * 2.0 + 2.0 * 1.5) * s)).norm() < 1e-14
        );
        let dsh = HSymTensor::from_matrix_unchecked(ten3([
            [0.0, s, 0.0],
            [s, 0.0, 0.0],
            [0.0, 0.0, 0.0],
        ]));
        let sig = stress_from_potential(&dsh, &pot, &a).unwrap();
        assert!((sig.matrix() - dsh.matrix() * (2.0 * rho * 1.5)).norm() < 1e-15);
        assert!(ElasticPotential::new(1.0, 0.0, 1.0).is_err());
        assert!(ElasticPotential::new(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn rotation_keeps_identity() {
        let m = MotionSpec::rigid_rotation([0.3, -1.0, 0.5], TimeFn::linear(0.0, 2.0), [0.0, 1.0])
            .unwrap();
        let labels = [Vec3::new(0.2, 0.1, -0.4), Vec3::zeros()];
        let a0 = [HSymTensor::identity(); 2];
        let tr = evolve_shape(&labels, &a0, &m, &id(), 0.0, 1.0, 1e-2).unwrap();
        for p in &tr.points {
            for a in &p.a {
                assert!((a.matrix() - Ten3::identity()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn uniaxial_closed_form() {
        let alpha = 0.7;
        let m = MotionSpec::uniaxial(TimeFn::exp(1.0, alpha), [0.0, 1.0]).unwrap();
        let tr = evolve_shape(
            &[Vec3::new(0.5, 0.0, 0.0)],
            &[HSymTensor::identity()],
            &m,
            &id(),
            0.0,
            1.0,
            1e-3,
        )
        .unwrap();
        let a = tr.points[0].a.last().unwrap();
        let exact = Ten3::from_diagonal(&Vec3::new((2.0 * alpha).exp(), 1.0, 1.0));
        assert!((a.matrix() - exact).norm() / exact.norm() < 1e-12);
        assert_eq!(tr.times.len(), 1001);
        assert!((tr.times[1000] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inertial_cauchy_uniaxial() {
        let alpha = 0.7;
        let m = MotionSpec::uniaxial(TimeFn::exp(1.0, alpha), [0.0, 1.0]).unwrap();
        let tr = evolve_inertial_cauchy(
            &[Vec3::zeros()],
            &[HSymTensor::zero()],
            &m,
            &id(),
            0.0,
            1.0,
            1e-2,
        )
        .unwrap();
        let e = tr.points[0].a.last().unwrap();
        assert!((e.matrix() - Ten3::from_diagonal(&Vec3::new(alpha, 0.0, 0.0))).norm() < 1e-13);
    }

    #[test]
    fn invalid_steps() {
        let m = MotionSpec::identity([0.0, 1.0]);
        let l = [Vec3::zeros()];
        let a = [HSymTensor::identity()];
        assert!(matches!(
            evolve_shape(&l, &a, &m, &id(), 0.0, 1.0, 0.0),
            Err(KinError::Domain(_))
        ));
        assert!(matches!(
            evolve_shape(&l, &a, &m, &id(), 0.0, 1.0, -1.0),
            Err(KinError::Domain(_))
        ));
        let bad = [HSymTensor::scaled_identity(-1.0)];
        assert!(matches!(
            evolve_shape(&l, &bad, &m, &id(), 0.0, 1.0, 0.1),
            Err(KinError::NonPositiveShape(_))
        ));
    }

    #[test]
    fn power_identity_static_and_short() {
        let m = MotionSpec::identity([0.0, 1.0]);
        let pot = ElasticPotential::new(1.0, 1.0, 1.0).unwrap();
        let a0 = HSymTensor::from_matrix_unchecked(Ten3::from_diagonal(&Vec3::new(1.2, 0.9, 1.0)));
        let tr = evolve_shape(&[Vec3::zeros()], &[a0], &m, &id(), 0.0, 1.0, 0.1).unwrap();
        let r = power_identity_residual(&tr, &pot, StrainMeasure::Hencky).unwrap();
        assert_eq!(r.max_relative, 0.0);
        let short = evolve_shape(&[Vec3::zeros()], &[a0], &m, &id(), 0.0, 0.1, 0.1).unwrap();
        assert!(matches!(
            power_identity_residual(&short, &pot, StrainMeasure::Hencky),
            Err(KinError::Domain(_))
        ));
    }
}
