//! Curvature compatibility of the relaxed metric and its linearized form.
//!
//! Christoffel symbols `Γⁱ_bc` are stored in a [`Rank3`] as `get(i, b, c)`.
//! The Ricci tensor uses
//!
//! ```text
//! R_bc = ∂ₐΓᵃ_bc − ∂_c Γᵃ_ba + Γᵃ_ad Γᵈ_bc − Γᵃ_bd Γᵈ_ac
//! ```
//!
//! and is evaluated pointwise: Γ is recomputed at the stencil neighbours of
//! each node instead of being stored, which keeps memory at a few tensor
//! fields even on fine grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KinError, Result};
use crate::grid::{
    interpolate, rms_over, saint_venant_rms, vector_gradient_with, Field, Grid3, Rank3,
    TensorField, VectorField, SECOND_ORDER_MARGIN,
};
use crate::motion::{MotionSpec, RotationFn};
use crate::poly::VectorPoly;
use crate::shape::deformedness;
use crate::tensor::{HSymTensor, Metric3, Ten3, Vec3};

fn check_metric_field(g: &TensorField) -> Result<()> {
    for (n, m) in g.values().iter().enumerate() {
        let asym = (m - m.transpose()).norm();
        if asym > 1e-12 * m.norm() || m.cholesky().is_none() {
            return Err(KinError::Metric(format!("node {n} {:?}", g.grid().ijk(n))));
        }
    }
    Ok(())
}

/// `Γⁱ_bc = ½ gⁱᵃ(∂_c g_ab + ∂_b g_ac − ∂_a g_bc)` at node `n`.
pub fn christoffel_with(grid: &Grid3, n: usize, g: &impl Fn(usize) -> Ten3) -> Rank3 {
    let d = [
        grid.partial_with(n, 0, g),
        grid.partial_with(n, 1, g),
        grid.partial_with(n, 2, g),
    ];
    let ginv = g(n)
        .try_inverse()
        .unwrap_or_else(|| Ten3::from_element(f64::NAN));
    // lowered symbols Γ_abc
    let mut low = [[[0.0; 3]; 3]; 3];
    for (a, la) in low.iter_mut().enumerate() {
        for b in 0..3 {
            for c in 0..3 {
                la[b][c] = 0.5 * (d[c][(a, b)] + d[b][(a, c)] - d[a][(b, c)]);
            }
        }
    }
    let mut out = Rank3::zeros();
    for i in 0..3 {
        for b in 0..3 {
            for c in b..3 {
                let v: f64 = (0..3).map(|a| ginv[(i, a)] * low[a][b][c]).sum();
                out.set(i, b, c, v);
                out.set(i, c, b, v);
            }
        }
    }
    out
}

/// Christoffel symbols of a metric field.
pub fn christoffel(g: &TensorField) -> Result<Field<Rank3>> {
    check_metric_field(g)?;
    let grid = g.grid();
    Ok(Field::from_node_fn(grid, |n| {
        christoffel_with(grid, n, &|m| g.at(m))
    }))
}

/// Ricci tensor at node `n` of the metric supplied by `g(node)`.
pub fn ricci_with(grid: &Grid3, n: usize, g: &(impl Fn(usize) -> Ten3 + Sync)) -> Ten3 {
    let gam = |m: usize| christoffel_with(grid, m, g);
    let dg = [
        grid.partial_with(n, 0, gam),
        grid.partial_with(n, 1, gam),
        grid.partial_with(n, 2, gam),
    ];
    let c = gam(n);
    let mut r = Ten3::zeros();
    for b in 0..3 {
        for cc in 0..3 {
            let mut v = 0.0;
            for a in 0..3 {
                v += dg[a].get(a, b, cc) - dg[cc].get(a, b, a);
                for d in 0..3 {
                    v += c.get(a, a, d) * c.get(d, b, cc) - c.get(a, b, d) * c.get(d, a, cc);
                }
            }
            r[(b, cc)] = v;
        }
    }
    r
}

/// Pointwise Ricci field and its RMS over nodes at least two away from a
/// non-periodic boundary.
pub fn ricci(g: &TensorField) -> Result<(TensorField, f64)> {
    check_metric_field(g)?;
    let grid = g.grid();
    let field = Field::from_node_fn(grid, |n| ricci_with(grid, n, &|m| g.at(m)));
    let rms = field.rms_interior(SECOND_ORDER_MARGIN);
    Ok((field, rms))
}

/// Interior RMS of the Ricci tensor without storing the field.
pub fn ricci_rms(g: &TensorField) -> Result<f64> {
    check_metric_field(g)?;
    let grid = g.grid();
    Ok(rms_over(grid, SECOND_ORDER_MARGIN, |n| {
        ricci_with(grid, n, &|m| g.at(m)).norm_squared()
    }))
}

/// One row of a refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub spacing: f64,
    pub ricci_rms: f64,
    pub saint_venant_rms: f64,
    /// Observed order of `ricci_rms` against the previous row.
    pub order: Option<f64>,
}

/// Result of [`compat_residual_from_shape`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompatReport {
    pub ricci_field: TensorField,
    pub ricci_rms: f64,
    pub saint_venant_rms: f64,
    pub grid: Grid3,
    pub convergence: Option<Vec<ConvergenceRow>>,
}

fn check_shape_field(a: &TensorField, h: &Metric3) -> Result<()> {
    let bad = a.values().par_iter().position_first(|m| {
        let ha = h.matrix() * m;
        (ha - ha.transpose()).norm() > 1e-10 * ha.norm().max(1.0)
            || !HSymTensor::from_matrix_unchecked(*m).is_positive_definite(h)
    });
    match bad {
        Some(n) => Err(KinError::NonPositiveShape(format!(
            "node {n} {:?} is not h-symmetric positive definite",
            a.grid().ijk(n)
        ))),
        None => Ok(()),
    }
}

/// Relaxed spatial metric `g = h A⁻¹` of a shape field.
pub fn relaxed_metric_field(a: &TensorField, h: &Metric3) -> Result<TensorField> {
    check_shape_field(a, h)?;
    Ok(a.map(|m| {
        let g = h.matrix()
            * m.try_inverse()
                .unwrap_or_else(|| Ten3::from_element(f64::NAN));
        (g + g.transpose()) * 0.5
    }))
}

/// Covariant (symmetric) form `h·D` of the deformedness field `D = ½ ln A`.
pub fn deformedness_field(a: &TensorField, h: &Metric3) -> Result<TensorField> {
    check_shape_field(a, h)?;
    let vals = a
        .values()
        .par_iter()
        .enumerate()
        .map(|(n, m)| {
            let d = deformedness(&HSymTensor::from_matrix_unchecked(*m), h)
                .map_err(|e| e.context(format!("node {n}")))?;
            let hd = h.matrix() * d.matrix();
            Ok((hd + hd.transpose()) * 0.5)
        })
        .collect::<Result<Vec<_>>>()?;
    Field::new(a.grid().clone(), vals)
}

/// Compatibility residual of a shape field: Ricci tensor of `g = h A⁻¹` and
/// the linearized Saint-Venant residual of `h·D`.
pub fn compat_residual_from_shape(a: &TensorField, h: &Metric3) -> Result<CompatReport> {
    let g = relaxed_metric_field(a, h)?;
    let (ricci_field, ricci_rms) = ricci(&g)?;
    let saint_venant_rms = saint_venant_rms(&deformedness_field(a, h)?)?;
    Ok(CompatReport {
        ricci_field,
        ricci_rms,
        saint_venant_rms,
        grid: a.grid().clone(),
        convergence: None,
    })
}

/// RMS values only, without storing the Ricci field.
pub fn compat_rms_from_shape(a: &TensorField, h: &Metric3) -> Result<(f64, f64)> {
    let g = relaxed_metric_field(a, h)?;
    Ok((
        ricci_rms(&g)?,
        saint_venant_rms(&deformedness_field(a, h)?)?,
    ))
}

/// Refinement study: builds the shape field on each grid and reports the
/// residuals with observed orders. Grids must have strictly decreasing
/// spacing.
pub fn compat_convergence(
    grids: &[Grid3],
    h: &Metric3,
    build: impl Fn(&Grid3) -> Result<TensorField>,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(grids.len());
    for g in grids {
        let spacing = g.spacing.iter().copied().fold(0.0, f64::max);
        if let Some(prev) = rows.last() {
            if !(spacing < prev.spacing) {
                return Err(KinError::Grid(
                    "refinement spacings must strictly decrease".into(),
                ));
            }
        }
        let a = build(g)?;
        let (r, sv) = compat_rms_from_shape(&a, h)?;
        let order = rows
            .last()
            .map(|p| (p.ricci_rms / r).ln() / (p.spacing / spacing).ln());
        rows.push(ConvergenceRow {
            spacing,
            ricci_rms: r,
            saint_venant_rms: sv,
            order,
        });
    }
    Ok(rows)
}

fn shape_of_gradient(q: &Ten3, h: &Metric3) -> Ten3 {
    q * h.inverse() * q.transpose() * h.matrix()
}

/// `A = (q̂⊗∇)(q̂⊗∇)⁺` at every node, with the gradient taken by finite
/// differences in the grid's coordinates.
pub fn shape_from_potential(qhat: &VectorField, h: &Metric3) -> Result<TensorField> {
    let grid = qhat.grid();
    let vals = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let q = vector_gradient_with(grid, n, |m| qhat.at(m));
            let det = q.determinant();
            if !(det > 0.0) {
                return Err(KinError::SingularCompression(format!(
                    "node {n} {:?}: det(q̂⊗∇) = {det:.6e}",
                    grid.ijk(n)
                )));
            }
            let a = shape_of_gradient(&q, h);
            let s = h.inverse() * ((h.matrix() * a + (h.matrix() * a).transpose()) * 0.5);
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    Field::new(grid.clone(), vals)
}

/// Shape field on a grid of current positions generated by an analytic
/// potential `q̂`, a map from relaxed-embedding positions `ŷ` to current
/// positions. At each node `x` the preimage `ŷ = q̂⁻¹(x)` is found by Newton
/// iteration and `A(x) = G G⁺` with `G = (q̂⊗∇)(ŷ)` exact.
///
/// The relaxed metric `h A⁻¹` of this field is flat in the grid
/// coordinates, so its Ricci residual is pure discretization error.
pub fn shape_field_from_polynomial(
    qhat: &VectorPoly,
    grid: &Grid3,
    h: &Metric3,
) -> Result<TensorField> {
    let vals = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let x = grid.position(n);
            let y = invert_polynomial(qhat, &x).map_err(|e| e.context(format!("node {n}")))?;
            let q = qhat.gradient(&y);
            if !(q.determinant() > 0.0) {
                return Err(KinError::SingularCompression(format!(
                    "node {n}: det(q̂⊗∇) <= 0"
                )));
            }
            Ok(shape_of_gradient(&q, h))
        })
        .collect::<Result<Vec<_>>>()?;
    Field::new(grid.clone(), vals)
}

/// Solves `q̂(y) = x` by Newton iteration from `y = x`.
pub fn invert_polynomial(qhat: &VectorPoly, x: &Vec3) -> Result<Vec3> {
    let mut y = *x;
    for _ in 0..60 {
        let r = qhat.eval(&y) - x;
        if r.norm() <= 1e-15 * (1.0 + x.norm()) {
            return Ok(y);
        }
        let j = qhat.gradient(&y);
        let step = j
            .lu()
            .solve(&r)
            .ok_or_else(|| KinError::SingularCompression("singular potential gradient".into()))?;
        y -= step;
        if !y.iter().all(|v| v.is_finite()) {
            break;
        }
    }
    let r = qhat.eval(&y) - x;
    if r.norm() <= 1e-12 * (1.0 + x.norm()) {
        Ok(y)
    } else {
        Err(KinError::Domain(format!(
            "potential inversion did not converge at {x:?}"
        )))
    }
}

/// Rigid re-embedding of the relaxed structure:
/// `r̂' = R(r̂ − o) + o + shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudoMotionGauge {
    pub rotation: RotationFn,
    pub center: [f64; 3],
    #[serde(default)]
    pub shift: [f64; 3],
}

impl PseudoMotionGauge {
    pub fn rotation_only(rotation: RotationFn, center: [f64; 3]) -> Self {
        Self {
            rotation,
            center,
            shift: [0.0; 3],
        }
    }
}

/// Re-places a potential field under a pseudo-motion gauge change.
///
/// With `r̂' = R(r̂ − o) + o + c` the potential becomes
/// `q̂'(ŷ') = q̂(R⁻¹(ŷ' − o − c) + o)`: the values are unchanged and the
/// sample points move rigidly. The grid keeps its node values and gets a
/// new origin and axes, and `A` computed from the result equals `A` of the
/// input node by node whenever `R` is h-orthogonal.
pub fn pseudo_gauge_transform(
    qhat: &VectorField,
    gauge: &PseudoMotionGauge,
    t: f64,
    h: &Metric3,
) -> Result<VectorField> {
    let r = gauge.rotation.matrix(t);
    if !h.is_orthogonal(&r, 1e-12) {
        return Err(KinError::Frame(format!(
            "rotation is not h-orthogonal at t = {t}"
        )));
    }
    let g = qhat.grid();
    let o = Vec3::from(gauge.center);
    let origin = r * (Vec3::from(g.origin) - o) + o + Vec3::from(gauge.shift);
    let grid = g.with_placement(origin.into(), r * g.axes_matrix())?;
    qhat.with_grid(grid)
}

/// Integration path for [`cesaro_volterra`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CvPath {
    /// Axis-aligned steps through grid nodes, along `order[0]` first.
    Staircase { order: [usize; 3] },
    /// Straight segments from the base point through `via` (the last via
    /// point must be a node), then a staircase in x, y, z order.
    Polyline { via: Vec<[f64; 3]> },
}

impl Default for CvPath {
    fn default() -> Self {
        CvPath::Staircase { order: [0, 1, 2] }
    }
}

/// Compatibility gate for [`cesaro_volterra`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvOptions {
    /// Largest accepted Saint-Venant RMS relative to the field RMS.
    pub relative_threshold: f64,
    /// When false the gate only reports; incompatible fields are integrated
    /// anyway (path dependent).
    pub enforce: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            relative_threshold: 1e-6,
            enforce: true,
        }
    }
}

/// Accumulated path integral: `P_i = ∫(E_ij − y_k M_kij) dy_j`,
/// `Q_ki = ∫ M_kij dy_j`, with `M_kij = ∂_k E_ij − ∂_i E_kj`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Acc {
    p: Vec3,
    q: Ten3,
}

impl Acc {
    fn zero() -> Self {
        Acc {
            p: Vec3::zeros(),
            q: Ten3::zeros(),
        }
    }
    fn add(self, o: Acc) -> Acc {
        Acc {
            p: self.p + o.p,
            q: self.q + o.q,
        }
    }
    fn sub(self, o: Acc) -> Acc {
        Acc {
            p: self.p - o.p,
            q: self.q - o.q,
        }
    }
    fn scale(self, s: f64) -> Acc {
        Acc {
            p: self.p * s,
            q: self.q * s,
        }
    }
}

fn integrand(e: &Ten3, de: &Rank3, y: &Vec3, dir: &Vec3) -> Acc {
    // de.get(i, j, k) = ∂_k E_ij
    let mut p = e * dir;
    let mut q = Ten3::zeros();
    for k in 0..3 {
        for i in 0..3 {
            let mut s = 0.0;
            for j in 0..3 {
                s += (de.get(i, j, k) - de.get(k, j, i)) * dir[j];
            }
            q[(k, i)] = s;
            p[i] -= y[k] * s;
        }
    }
    Acc { p, q }
}

fn tensor_gradient_at(e: &TensorField, n: usize) -> Rank3 {
    let mut r = Rank3::zeros();
    for k in 0..3 {
        let d = e.partial_at(n, k);
        for i in 0..3 {
            for j in 0..3 {
                r.set(i, j, k, d[(i, j)]);
            }
        }
    }
    r
}

fn node_of(grid: &Grid3, p: &Vec3) -> Result<usize> {
    let idx = grid.index_of_position(p);
    let mut ijk = [0usize; 3];
    for a in 0..3 {
        let r = idx[a].round();
        if (idx[a] - r).abs() > 1e-9 || r < 0.0 || r as usize >= grid.counts[a] {
            return Err(KinError::Grid(format!("{p:?} is not a grid node")));
        }
        ijk[a] = r as usize;
    }
    Ok(grid.node(ijk[0], ijk[1], ijk[2]))
}

/// Displacement-like potential from a compatible strain field:
///
/// ```text
/// uᵢ(X) = u_arbᵢ + Ωᵢⱼ(X − X_arb)ⱼ + ∫ [Eᵢⱼ + (X_k − X'_k)(∂_k Eᵢⱼ − ∂ᵢ E_kⱼ)] dX'ⱼ
/// ```
///
/// along `path` from `x_arb` to each node. Trapezoid rule per grid step,
/// finite differences for `∂E`; exact when `E` is linear in position.
pub fn cesaro_volterra(
    e: &TensorField,
    x_arb: &Vec3,
    path: &CvPath,
    u_arb: &Vec3,
    omega_arb: &Ten3,
    opts: CvOptions,
) -> Result<VectorField> {
    if (omega_arb + omega_arb.transpose()).norm() > 1e-12 * omega_arb.norm().max(1.0) {
        return Err(KinError::Symmetry("Ω_arb must be antisymmetric".into()));
    }
    let sv = saint_venant_rms(e)?;
    let scale = e.rms_interior(SECOND_ORDER_MARGIN);
    if opts.enforce && sv > opts.relative_threshold * scale {
        return Err(KinError::IncompatibleField(format!(
            "Saint-Venant rms {sv:.3e} exceeds {:.1e} × field rms {scale:.3e}",
            opts.relative_threshold
        )));
    }
    let grid = e.grid();
    let (base_node, base_acc, order) = match path {
        CvPath::Staircase { order } => (node_of(grid, x_arb)?, Acc::zero(), *order),
        CvPath::Polyline { via } => {
            let pts: Vec<Vec3> = std::iter::once(*x_arb)
                .chain(via.iter().map(|v| Vec3::from(*v)))
                .collect();
            let end = node_of(grid, pts.last().unwrap())?;
            let de = Field::from_node_fn(grid, |n| tensor_gradient_at(e, n));
            let hmin = grid.spacing.iter().copied().fold(f64::INFINITY, f64::min);
            let mut acc = Acc::zero();
            for w in pts.windows(2) {
                let seg = w[1] - w[0];
                let len = seg.norm();
                if len == 0.0 {
                    continue;
                }
                let m = ((4.0 * len / hmin).ceil() as usize).max(1);
                let step = seg / m as f64;
                let f = |s: usize| -> Result<Acc> {
                    let y = w[0] + step * s as f64;
                    Ok(integrand(
                        &interpolate(e, &y)?,
                        &interpolate(&de, &y)?,
                        &y,
                        &step,
                    ))
                };
                let mut prev = f(0)?;
                for s in 1..=m {
                    let cur = f(s)?;
                    acc = acc.add(prev.add(cur).scale(0.5));
                    prev = cur;
                }
            }
            (end, acc, [0, 1, 2])
        }
    };
    let mut sorted = order;
    sorted.sort_unstable();
    if sorted != [0, 1, 2] {
        return Err(KinError::Domain(format!(
            "staircase order {order:?} is not a permutation"
        )));
    }
    let acc = staircase(e, base_node, order)?;
    let x0 = *x_arb;
    let vals = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let x = grid.position(n);
            let a = base_acc.add(acc[n]);
            u_arb + omega_arb * (x - x0) + a.p + a.q.transpose() * x
        })
        .collect();
    Field::new(grid.clone(), vals)
}

/// Path integrals from node `base` to every node along axis-aligned steps.
fn staircase(e: &TensorField, base: usize, order: [usize; 3]) -> Result<Vec<Acc>> {
    let grid = e.grid();
    let b = grid.ijk(base);
    let axes = grid.axes_matrix();
    let step_dir = |a: usize| -> Vec3 { axes.column(a) * grid.spacing[a] };
    let node_at = |idx: [usize; 3]| grid.node(idx[0], idx[1], idx[2]);
    // f at a node for a unit index step along axis a
    let f = |n: usize, a: usize| -> Acc {
        integrand(
            &e.at(n),
            &tensor_gradient_at(e, n),
            &grid.position(n),
            &step_dir(a),
        )
    };
    // Cumulative trapezoid along axis `a` through `start`; returns ∫ from
    // start[a] to each index.
    let line = |start: [usize; 3], a: usize| -> Vec<Acc> {
        let c = grid.counts[a];
        let vals: Vec<Acc> = (0..c)
            .map(|i| {
                let mut idx = start;
                idx[a] = i;
                f(node_at(idx), a)
            })
            .collect();
        let mut cum = vec![Acc::zero(); c];
        for i in 1..c {
            cum[i] = cum[i - 1].add(vals[i - 1].add(vals[i]).scale(0.5));
        }
        let s = cum[start[a]];
        cum.into_iter().map(|x| x.sub(s)).collect()
    };
    let [a0, a1, a2] = order;
    let first = line(b, a0);
    let mut out = vec![Acc::zero(); grid.len()];
    let planes: Vec<(usize, Vec<Vec<Acc>>)> = (0..grid.counts[a0])
        .into_par_iter()
        .map(|i0| {
            let mut s = b;
            s[a0] = i0;
            let second = line(s, a1);
            let rows = (0..grid.counts[a1])
                .map(|i1| {
                    let mut s2 = s;
                    s2[a1] = i1;
                    let third = line(s2, a2);
                    third
                        .into_iter()
                        .map(|x| x.add(second[i1]).add(first[i0]))
                        .collect()
                })
                .collect();
            (i0, rows)
        })
        .collect();
    for (i0, rows) in planes {
        for (i1, row) in rows.into_iter().enumerate() {
            for (i2, v) in row.into_iter().enumerate() {
                let mut idx = [0; 3];
                idx[a0] = i0;
                idx[a1] = i1;
                idx[a2] = i2;
                out[node_at(idx)] = v;
            }
        }
    }
    Ok(out)
}

/// Largest pointwise `‖(u⊗∇)ˢ − E‖` over all nodes.
pub fn reconstruction_error(u: &VectorField, e: &TensorField) -> Result<f64> {
    if u.grid().counts != e.grid().counts {
        return Err(KinError::Grid("fields live on different grids".into()));
    }
    let grid = u.grid();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|n| {
            let g = vector_gradient_with(grid, n, |m| u.at(m));
            ((g + g.transpose()) * 0.5 - e.at(n)).norm()
        })
        .reduce(|| 0.0, f64::max))
}

/// Factors of `J = (q̂⊗∇) Ĵ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianFactors {
    pub j: Ten3,
    pub qhat_grad: Ten3,
    pub jhat: Ten3,
}

/// Splits the world-line gradient of `motion` into the gradient `Ĵ` of a
/// pseudo-motion and the potential gradient `q̂⊗∇ = J Ĵ⁻¹`.
pub fn factorize_jacobian(
    motion: &MotionSpec,
    pseudo: &MotionSpec,
    t: f64,
    label: &Vec3,
) -> Result<JacobianFactors> {
    let j = motion.deformation_gradient(t, label)?;
    let jhat = pseudo.deformation_gradient(t, label)?;
    let ji = jhat
        .try_inverse()
        .ok_or_else(|| KinError::Domain("pseudo-motion gradient not invertible".into()))?;
    let qhat_grad = j * ji;
    let err = (j - qhat_grad * jhat).norm() / j.norm();
    if !(err < 1e-10) {
        return Err(KinError::Domain(format!(
            "factorization mismatch {err:.3e}"
        )));
    }
    Ok(JacobianFactors { j, qhat_grad, jhat })
}
