//! Structured box grids and finite-difference calculus on node fields.
//!
//! First derivatives use second-order central differences at interior nodes
//! and, on non-periodic grids, second-order one-sided differences at the two
//! end nodes of each line. Both stencils are exact on quadratics.
//!
//! Index conventions (fixed once, used everywhere):
//!
//! * gradient of a vector: `(u ⊗ ∇)ᵢⱼ = ∂ⱼ uᵢ`
//! * gradient of a tensor: `(E ⊗ ∇)ᵢⱼₖ = ∂ₖ Eᵢⱼ`
//! * left curl: `(∇ × E)ᵢⱼ = εᵢₚq ∂ₚ E_qⱼ`
//! * right curl (mirrored): `(E × ∇)ᵢⱼ = εⱼₚq ∂ₚ Eᵢq`
//! * double curl: `(∇ × E × ∇)ᵢⱼ = εᵢₚq εⱼᵣₛ ∂ₚ∂ᵣ E_qₛ`
//!
//! Worked component: for `E = diag(y², 0, 0)` only `q = s = 0`, `p = r = 1`
//! survive, so `(∇ × E × ∇)₂₂ = ε₂₁₀ ε₂₁₀ ∂²(y²)/∂y² = 2` (zero-based
//! indices) and every other component vanishes.
//!
//! A grid may carry a non-identity `axes` matrix whose columns are the
//! physical directions of the three index axes; node positions are
//! `origin + axes · (i Δx, j Δy, k Δz)` and derivatives are returned with
//! respect to physical coordinates.

use std::ops::{Add, Mul, Sub};

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KinError, Result};
use crate::tensor::{ten3, Ten3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    OneSided,
}

/// Minimum node count per axis (five-point footprint of a composed
/// second derivative with one-sided ends).
pub const MIN_COUNT: usize = 5;

fn identity_axes() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

fn is_identity_axes(a: &[[f64; 3]; 3]) -> bool {
    *a == identity_axes()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid3 {
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub counts: [usize; 3],
    pub boundary: Boundary,
    #[serde(default = "identity_axes", skip_serializing_if = "is_identity_axes")]
    pub axes: [[f64; 3]; 3],
}

impl Grid3 {
    pub fn new(
        origin: [f64; 3],
        spacing: [f64; 3],
        counts: [usize; 3],
        boundary: Boundary,
    ) -> Result<Self> {
        let g = Self {
            origin,
            spacing,
            counts,
            boundary,
            axes: identity_axes(),
        };
        g.validate()?;
        Ok(g)
    }

    /// Non-periodic grid spanning the box `[lo, hi]` with `n` nodes per axis.
    pub fn cube(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let d = (hi - lo) / (n.max(2) - 1) as f64;
        Self::new([lo; 3], [d; 3], [n; 3], Boundary::OneSided)
    }

    /// Periodic grid of period `hi − lo` with `n` nodes per axis.
    pub fn periodic_cube(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let d = (hi - lo) / n.max(1) as f64;
        Self::new([lo; 3], [d; 3], [n; 3], Boundary::Periodic)
    }

    pub fn validate(&self) -> Result<()> {
        for a in 0..3 {
            if self.counts[a] < MIN_COUNT {
                return Err(KinError::Grid(format!(
                    "axis {a} has {} nodes, need at least {MIN_COUNT}",
                    self.counts[a]
                )));
            }
            if !(self.spacing[a] > 0.0 && self.spacing[a].is_finite()) {
                return Err(KinError::Grid(format!(
                    "axis {a} spacing {}",
                    self.spacing[a]
                )));
            }
            if !self.origin[a].is_finite() {
                return Err(KinError::Grid("non-finite origin".into()));
            }
        }
        self.counts[0]
            .checked_mul(self.counts[1])
            .and_then(|n| n.checked_mul(self.counts[2]))
            .ok_or_else(|| KinError::Grid("node count overflows".into()))?;
        if ten3(self.axes).try_inverse().is_none() {
            return Err(KinError::Grid("axes matrix is singular".into()));
        }
        Ok(())
    }

    /// Same nodes with a new affine placement: `origin ↦ origin'`,
    /// `axes ↦ axes'`.
    pub fn with_placement(&self, origin: [f64; 3], axes: Ten3) -> Result<Self> {
        let mut g = self.clone();
        g.origin = origin;
        g.axes = crate::tensor::rows_of(&axes);
        g.validate()?;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1] * self.counts[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.counts[1] + j) * self.counts[2] + k
    }

    pub fn ijk(&self, n: usize) -> [usize; 3] {
        let k = n % self.counts[2];
        let r = n / self.counts[2];
        [r / self.counts[1], r % self.counts[1], k]
    }

    pub fn axes_matrix(&self) -> Ten3 {
        ten3(self.axes)
    }

    fn has_identity_axes(&self) -> bool {
        is_identity_axes(&self.axes)
    }

    /// Physical position of fractional index coordinates.
    pub fn position_of_index(&self, idx: [f64; 3]) -> Vec3 {
        let local = Vec3::new(
            idx[0] * self.spacing[0],
            idx[1] * self.spacing[1],
            idx[2] * self.spacing[2],
        );
        Vec3::from(self.origin)
            + if self.has_identity_axes() {
                local
            } else {
                self.axes_matrix() * local
            }
    }

    pub fn position(&self, n: usize) -> Vec3 {
        let [i, j, k] = self.ijk(n);
        self.position_of_index([i as f64, j as f64, k as f64])
    }

    /// Fractional index coordinates of a physical point.
    pub fn index_of_position(&self, p: &Vec3) -> Vec3 {
        let rel = p - Vec3::from(self.origin);
        let local = if self.has_identity_axes() {
            rel
        } else {
            self.axes_matrix()
                .try_inverse()
                .unwrap_or_else(Ten3::identity)
                * rel
        };
        Vec3::new(
            local.x / self.spacing[0],
            local.y / self.spacing[1],
            local.z / self.spacing[2],
        )
    }

    /// Interior nodes are at least `margin` nodes away from every
    /// non-periodic boundary.
    pub fn is_interior(&self, n: usize, margin: usize) -> bool {
        if self.boundary == Boundary::Periodic {
            return true;
        }
        self.ijk(n)
            .iter()
            .zip(self.counts)
            .all(|(&i, c)| i >= margin && i + margin < c)
    }

    /// Refines every axis by `factor`, keeping the box.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor < 2 {
            return Err(KinError::Grid(format!("refinement factor {factor} < 2")));
        }
        let mut g = self.clone();
        for a in 0..3 {
            let c = match self.boundary {
                Boundary::Periodic => self.counts[a].checked_mul(factor),
                Boundary::OneSided => (self.counts[a] - 1).checked_mul(factor).map(|c| c + 1),
            };
            g.counts[a] = c.ok_or_else(|| KinError::Grid("refined node count overflows".into()))?;
            g.spacing[a] = self.spacing[a] / factor as f64;
        }
        g.validate()?;
        Ok(g)
    }

    /// Physical box corners (first node and last node, or period end).
    pub fn corners(&self) -> (Vec3, Vec3) {
        let last = |a: usize| match self.boundary {
            Boundary::Periodic => self.counts[a] as f64,
            Boundary::OneSided => (self.counts[a] - 1) as f64,
        };
        (
            self.position_of_index([0.0; 3]),
            self.position_of_index([last(0), last(1), last(2)]),
        )
    }

    /// Derivative along index axis `axis` (scaled by spacing, i.e. with
    /// respect to the local coordinate `ξ = i·Δ`), with values supplied by
    /// `f(node)`.
    pub fn index_derivative_with<T: FieldValue>(
        &self,
        n: usize,
        axis: usize,
        f: impl Fn(usize) -> T,
    ) -> T {
        let ijk = self.ijk(n);
        let c = self.counts[axis];
        let i = ijk[axis];
        let at = |ii: usize| {
            let mut q = ijk;
            q[axis] = ii;
            f(self.node(q[0], q[1], q[2]))
        };
        let inv = 1.0 / self.spacing[axis];
        match self.boundary {
            Boundary::Periodic => {
                let ip = (i + 1) % c;
                let im = (i + c - 1) % c;
                (at(ip) - at(im)) * (0.5 * inv)
            }
            Boundary::OneSided => {
                if i == 0 {
                    (at(0) * -3.0 + at(1) * 4.0 - at(2)) * (0.5 * inv)
                } else if i + 1 == c {
                    (at(c - 1) * 3.0 - at(c - 2) * 4.0 + at(c - 3)) * (0.5 * inv)
                } else {
                    (at(i + 1) - at(i - 1)) * (0.5 * inv)
                }
            }
        }
    }

    /// Physical partial derivative `∂f/∂y_axis` at node `n`.
    pub fn partial_with<T: FieldValue>(&self, n: usize, axis: usize, f: impl Fn(usize) -> T) -> T {
        if self.has_identity_axes() {
            return self.index_derivative_with(n, axis, f);
        }
        let ainv = self
            .axes_matrix()
            .try_inverse()
            .unwrap_or_else(Ten3::identity);
        let mut acc = T::zero();
        for m in 0..3 {
            let w = ainv[(m, axis)];
            if w != 0.0 {
                acc = acc + self.index_derivative_with(n, m, &f) * w;
            }
        }
        acc
    }
}

/// Values that can live on grid nodes and be differentiated.
pub trait FieldValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    const NCOMP: usize;
    fn zero() -> Self;
    fn push_components(&self, out: &mut Vec<f64>);
    fn from_components(c: &[f64]) -> Self;
    fn sq_norm(&self) -> f64;
    fn is_finite(&self) -> bool;
}

impl FieldValue for f64 {
    const NCOMP: usize = 1;
    fn zero() -> Self {
        0.0
    }
    fn push_components(&self, out: &mut Vec<f64>) {
        out.push(*self);
    }
    fn from_components(c: &[f64]) -> Self {
        c[0]
    }
    fn sq_norm(&self) -> f64 {
        self * self
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl FieldValue for Vec3 {
    const NCOMP: usize = 3;
    fn zero() -> Self {
        Vec3::zeros()
    }
    fn push_components(&self, out: &mut Vec<f64>) {
        out.extend(self.iter());
    }
    fn from_components(c: &[f64]) -> Self {
        Vec3::new(c[0], c[1], c[2])
    }
    fn sq_norm(&self) -> f64 {
        self.norm_squared()
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

impl FieldValue for Ten3 {
    const NCOMP: usize = 9;
    fn zero() -> Self {
        Matrix3::zeros()
    }
    /// Row-major: xx, xy, xz, yx, ...
    fn push_components(&self, out: &mut Vec<f64>) {
        for i in 0..3 {
            for j in 0..3 {
                out.push(self[(i, j)]);
            }
        }
    }
    fn from_components(c: &[f64]) -> Self {
        Matrix3::from_row_slice(&c[..9])
    }
    fn sq_norm(&self) -> f64 {
        self.norm_squared()
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

/// Third-order tensor, `T[(i, j, k)]` stored at `9i + 3j + k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank3(pub [f64; 27]);

impl Rank3 {
    pub fn zeros() -> Self {
        Rank3([0.0; 27])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.0[9 * i + 3 * j + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.0[9 * i + 3 * j + k] = v;
    }

    /// Matrix `(j, k) ↦ T[(i, j, k)]` for fixed first index.
    pub fn slice(&self, i: usize) -> Ten3 {
        Matrix3::from_row_slice(&self.0[9 * i..9 * i + 9])
    }
}

impl Add for Rank3 {
    type Output = Rank3;
    fn add(mut self, rhs: Self) -> Self {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Rank3 {
    type Output = Rank3;
    fn sub(mut self, rhs: Self) -> Self {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Mul<f64> for Rank3 {
    type Output = Rank3;
    fn mul(mut self, rhs: f64) -> Self {
        self.0.iter_mut().for_each(|a| *a *= rhs);
        self
    }
}

impl FieldValue for Rank3 {
    const NCOMP: usize = 27;
    fn zero() -> Self {
        Rank3::zeros()
    }
    fn push_components(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.0);
    }
    fn from_components(c: &[f64]) -> Self {
        let mut r = Rank3::zeros();
        r.0.copy_from_slice(&c[..27]);
        r
    }
    fn sq_norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }
    fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// Node-sampled field on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid3,
    values: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type VectorField = Field<Vec3>;
pub type TensorField = Field<Ten3>;

impl<T: FieldValue> Field<T> {
    pub fn new(grid: Grid3, values: Vec<T>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(KinError::Grid(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(n) = values.iter().position(|v| !v.is_finite()) {
            return Err(KinError::Grid(format!("non-finite sample at node {n}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(position)` at every node.
    pub fn from_fn(grid: &Grid3, f: impl Fn(&Vec3) -> T + Sync) -> Result<Self> {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|n| f(&grid.position(n)))
            .collect();
        Self::new(grid.clone(), values)
    }

    /// Samples `f(node)` at every node.
    pub fn from_node_fn(grid: &Grid3, f: impl Fn(usize) -> T + Sync + Send) -> Self {
        let values = (0..grid.len()).into_par_iter().map(f).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn at(&self, n: usize) -> T {
        self.values[n]
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.values[self.grid.node(i, j, k)]
    }

    pub fn map<U: FieldValue>(&self, f: impl Fn(&T) -> U + Sync + Send) -> Field<U> {
        Field {
            grid: self.grid.clone(),
            values: self.values.par_iter().map(f).collect(),
        }
    }

    /// Same values on a grid with identical counts (used for re-placements).
    pub fn with_grid(&self, grid: Grid3) -> Result<Self> {
        if grid.counts != self.grid.counts {
            return Err(KinError::Grid("node counts differ".into()));
        }
        Field::new(grid, self.values.clone())
    }

    /// `∂f/∂y_axis` at node `n`.
    pub fn partial_at(&self, n: usize, axis: usize) -> T {
        self.grid.partial_with(n, axis, |m| self.values[m])
    }

    pub fn partial(&self, axis: usize) -> Field<T> {
        Field::from_node_fn(&self.grid, |n| self.partial_at(n, axis))
    }

    /// Root mean square of the pointwise Frobenius norm over interior nodes.
    pub fn rms_interior(&self, margin: usize) -> f64 {
        rms_over(&self.grid, margin, |n| self.values[n].sq_norm())
    }

    pub fn max_norm_interior(&self, margin: usize) -> f64 {
        (0..self.grid.len())
            .filter(|&n| self.grid.is_interior(n, margin))
            .map(|n| self.values[n].sq_norm().sqrt())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn rms_over(grid: &Grid3, margin: usize, sq: impl Fn(usize) -> f64 + Sync) -> f64 {
    // Terms are collected in node order and summed serially so the result
    // does not depend on the thread count.
    let terms: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .filter(|&n| grid.is_interior(n, margin))
        .map(&sq)
        .collect();
    if terms.is_empty() {
        0.0
    } else {
        (terms.iter().sum::<f64>() / terms.len() as f64).sqrt()
    }
}

/// Margin excluded from first-derivative norms.
pub const FIRST_ORDER_MARGIN: usize = 1;
/// Margin excluded from norms of composed second derivatives.
pub const SECOND_ORDER_MARGIN: usize = 2;

/// `∇f` of a scalar field.
pub fn grad_scalar(f: &ScalarField) -> VectorField {
    Field::from_node_fn(f.grid(), |n| {
        Vec3::new(f.partial_at(n, 0), f.partial_at(n, 1), f.partial_at(n, 2))
    })
}

/// `u ⊗ ∇` at one node, with values from `u(node)`.
pub fn vector_gradient_with(grid: &Grid3, n: usize, u: impl Fn(usize) -> Vec3) -> Ten3 {
    let mut g = Ten3::zeros();
    for j in 0..3 {
        g.set_column(j, &grid.partial_with(n, j, &u));
    }
    g
}

/// `u ⊗ ∇` of a vector field.
pub fn grad_vector(u: &VectorField) -> TensorField {
    Field::from_node_fn(u.grid(), |n| {
        vector_gradient_with(u.grid(), n, |m| u.values[m])
    })
}

/// `E ⊗ ∇` of a tensor field.
pub fn grad_tensor(e: &TensorField) -> Field<Rank3> {
    Field::from_node_fn(e.grid(), |n| {
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
    })
}

/// `∇ · u`.
pub fn div(u: &VectorField) -> ScalarField {
    Field::from_node_fn(u.grid(), |n| (0..3).map(|a| u.partial_at(n, a)[a]).sum())
}

const LEVI: [(usize, usize, usize, f64); 6] = [
    (0, 1, 2, 1.0),
    (1, 2, 0, 1.0),
    (2, 0, 1, 1.0),
    (0, 2, 1, -1.0),
    (2, 1, 0, -1.0),
    (1, 0, 2, -1.0),
];

fn curl_left_at(grid: &Grid3, n: usize, e: impl Fn(usize) -> Ten3) -> Ten3 {
    let d = [
        grid.partial_with(n, 0, &e),
        grid.partial_with(n, 1, &e),
        grid.partial_with(n, 2, &e),
    ];
    let mut out = Ten3::zeros();
    for &(i, p, q, s) in &LEVI {
        for j in 0..3 {
            out[(i, j)] += s * d[p][(q, j)];
        }
    }
    out
}

fn curl_right_at(grid: &Grid3, n: usize, e: impl Fn(usize) -> Ten3) -> Ten3 {
    let d = [
        grid.partial_with(n, 0, &e),
        grid.partial_with(n, 1, &e),
        grid.partial_with(n, 2, &e),
    ];
    let mut out = Ten3::zeros();
    for &(j, p, q, s) in &LEVI {
        for i in 0..3 {
            out[(i, j)] += s * d[p][(i, q)];
        }
    }
    out
}

/// `(∇ × E)ᵢⱼ = εᵢₚq ∂ₚ E_qⱼ`.
pub fn curl_left(e: &TensorField) -> TensorField {
    Field::from_node_fn(e.grid(), |n| curl_left_at(e.grid(), n, |m| e.values[m]))
}

/// `(E × ∇)ᵢⱼ = εⱼₚq ∂ₚ Eᵢq`.
pub fn curl_right(e: &TensorField) -> TensorField {
    Field::from_node_fn(e.grid(), |n| curl_right_at(e.grid(), n, |m| e.values[m]))
}

/// `∇ × E × ∇` at one node, evaluating the right curl on the fly at the
/// stencil neighbours so no intermediate field is stored.
pub fn double_curl_with(grid: &Grid3, n: usize, e: &(impl Fn(usize) -> Ten3 + Sync)) -> Ten3 {
    curl_left_at(grid, n, |m| curl_right_at(grid, m, e))
}

/// Pointwise symmetry tolerance for strain inputs.
pub const SYMMETRY_TOL: f64 = 1e-10;

fn check_symmetric(e: &TensorField) -> Result<()> {
    for (n, v) in e.values().iter().enumerate() {
        let asym = (v - v.transpose()).norm();
        if asym > SYMMETRY_TOL * v.norm().max(1.0) {
            return Err(KinError::Symmetry(format!(
                "node {n} {:?}: asymmetry {asym:.3e}",
                e.grid().ijk(n)
            )));
        }
    }
    Ok(())
}

/// Pointwise incompatibility `∇ × E × ∇` and its RMS over interior nodes.
pub fn saint_venant_residual(e: &TensorField) -> Result<(TensorField, f64)> {
    check_symmetric(e)?;
    let grid = e.grid();
    let field = Field::from_node_fn(grid, |n| double_curl_with(grid, n, &|m| e.values[m]));
    let rms = field.rms_interior(SECOND_ORDER_MARGIN);
    Ok((field, rms))
}

/// RMS of `∇ × E × ∇` without materializing the residual field.
pub fn saint_venant_rms(e: &TensorField) -> Result<f64> {
    check_symmetric(e)?;
    let grid = e.grid();
    Ok(rms_over(grid, SECOND_ORDER_MARGIN, |n| {
        double_curl_with(grid, n, &|m| e.values[m]).norm_squared()
    }))
}

/// Trilinear interpolation of a field at a physical point inside the grid.
pub fn interpolate<T: FieldValue>(f: &Field<T>, p: &Vec3) -> Result<T> {
    let g = f.grid();
    let idx = g.index_of_position(p);
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for a in 0..3 {
        let x = idx[a];
        let hi = match g.boundary {
            Boundary::OneSided => (g.counts[a] - 1) as f64,
            Boundary::Periodic => g.counts[a] as f64,
        };
        let tol = 1e-9;
        if !(x >= -tol && x <= hi + tol) {
            return Err(KinError::Grid(format!(
                "point {p:?} outside grid along axis {a}"
            )));
        }
        let x = x.clamp(0.0, hi);
        let mut b = x.floor() as usize;
        if g.boundary == Boundary::OneSided && b + 1 >= g.counts[a] {
            b = g.counts[a] - 2;
        }
        base[a] = b;
        frac[a] = x - b as f64;
    }
    let wrap = |a: usize, i: usize| i % g.counts[a];
    let mut acc = T::zero();
    for di in 0..2 {
        for dj in 0..2 {
            for dk in 0..2 {
                let w = (if di == 1 { frac[0] } else { 1.0 - frac[0] })
                    * (if dj == 1 { frac[1] } else { 1.0 - frac[1] })
                    * (if dk == 1 { frac[2] } else { 1.0 - frac[2] });
                if w != 0.0 {
                    let n = g.node(
                        wrap(0, base[0] + di),
                        wrap(1, base[1] + dj),
                        wrap(2, base[2] + dk),
                    );
                    acc = acc + f.at(n) * w;
                }
            }
        }
    }
    Ok(acc)
}
