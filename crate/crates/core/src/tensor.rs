//! 3×3 tensor algebra in fixed inertial-frame coordinates.
//!
//! All second-order tensors are stored as plain coordinate matrices. Which
//! space a tensor maps between (material tangent space, spatial vectors) is a
//! documentation convention; the spatial metric `h` is always passed
//! explicitly so that adjoints and symmetric parts are taken with respect to
//! it rather than the coordinate transpose.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{KinError, Result};
use crate::tol::{EIGEN_TOL, REL_TOL};

/// Linear map between three-dimensional vector spaces, in frame coordinates.
pub type Ten3 = Matrix3<f64>;
/// Vector in frame coordinates.
pub type Vec3 = Vector3<f64>;

/// Symmetric positive definite metric, with its inverse and square roots cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric3 {
    m: Ten3,
    inv: Ten3,
    sqrt: Ten3,
    inv_sqrt: Ten3,
}

impl Metric3 {
    /// Validates symmetry (relative 1e-12) and positive definiteness.
    pub fn new(m: Ten3) -> Result<Self> {
        if !m.iter().all(|x| x.is_finite()) {
            return Err(KinError::Metric("non-finite entry".into()));
        }
        let scale = m.norm().max(f64::MIN_POSITIVE);
        let asym = (m - m.transpose()).norm();
        if asym > REL_TOL * scale {
            return Err(KinError::Metric(format!(
                "asymmetry {asym:.3e} exceeds relative tolerance"
            )));
        }
        let sym = (m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let min = eig.eigenvalues.min();
        if min <= 0.0 {
            return Err(KinError::Metric(format!("smallest eigenvalue {min:.3e}")));
        }
        let v = eig.eigenvectors;
        let diag =
            |f: fn(f64) -> f64| v * Ten3::from_diagonal(&eig.eigenvalues.map(f)) * v.transpose();
        Ok(Self {
            m: sym,
            inv: diag(|x| 1.0 / x),
            sqrt: diag(f64::sqrt),
            inv_sqrt: diag(|x| 1.0 / x.sqrt()),
        })
    }

    pub fn identity() -> Self {
        let i = Ten3::identity();
        Self {
            m: i,
            inv: i,
            sqrt: i,
            inv_sqrt: i,
        }
    }

    pub fn diagonal(d: [f64; 3]) -> Result<Self> {
        Self::new(Ten3::from_diagonal(&Vec3::from(d)))
    }

    pub fn matrix(&self) -> &Ten3 {
        &self.m
    }

    pub fn inverse(&self) -> &Ten3 {
        &self.inv
    }

    pub fn sqrt(&self) -> &Ten3 {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &Ten3 {
        &self.inv_sqrt
    }

    /// h-norm of a vector, `sqrt(vᵀ h v)`.
    pub fn norm(&self, v: &Vec3) -> f64 {
        v.dot(&(self.m * v)).sqrt()
    }

    /// True when `Rᵀ h R = h` to the given relative tolerance.
    pub fn is_orthogonal(&self, r: &Ten3, tol: f64) -> bool {
        (r.transpose() * self.m * r - self.m).norm() <= tol * self.m.norm()
    }
}

impl Default for Metric3 {
    fn default() -> Self {
        Self::identity()
    }
}

/// A tensor that is self-adjoint with respect to some metric `h`, i.e. `h·A`
/// is symmetric. The metric is not stored; every operation takes it
/// explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HSymTensor(Ten3);

impl HSymTensor {
    /// Checks h-symmetry to relative 1e-12.
    pub fn new(m: Ten3, h: &Metric3) -> Result<Self> {
        let hm = h.matrix() * m;
        let asym = (hm - hm.transpose()).norm();
        if asym > REL_TOL * hm.norm().max(1.0) {
            return Err(KinError::Symmetry(format!("h·A asymmetry {asym:.3e}")));
        }
        Ok(Self(m))
    }

    /// Wraps without checking. Use for values produced by h-symmetric
    /// constructions (projections, functions of h-symmetric tensors).
    pub fn from_matrix_unchecked(m: Ten3) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        Self(Ten3::identity())
    }

    pub fn zero() -> Self {
        Self(Ten3::zeros())
    }

    pub fn scaled_identity(s: f64) -> Self {
        Self(Ten3::identity() * s)
    }

    pub fn matrix(&self) -> &Ten3 {
        &self.0
    }

    pub fn into_matrix(self) -> Ten3 {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Deviatoric part `A − (tr A / 3) I`.
    pub fn deviator(&self) -> Self {
        Self(self.0 - Ten3::identity() * (self.0.trace() / 3.0))
    }

    /// Natural norm `sqrt(tr(A A))`, valid for h-symmetric tensors (the
    /// eigenvalues are real, so this is the root sum of their squares).
    pub fn norm_h(&self) -> f64 {
        (self.0 * self.0).trace().max(0.0).sqrt()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self, h: &Metric3) -> [f64; 3] {
        let b = symmetrized_conjugate(&self.0, h);
        let mut ev: [f64; 3] = SymmetricEigen::new(b).eigenvalues.into();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// True when every eigenvalue is strictly positive.
    pub fn is_positive_definite(&self, h: &Metric3) -> bool {
        // h·A is congruent to h^{1/2} A h^{-1/2}, so Cholesky of h·A decides it.
        let ha = h.matrix() * self.0;
        let ha = (ha + ha.transpose()) * 0.5;
        ha.cholesky().is_some()
    }
}

impl std::ops::Add for HSymTensor {
    type Output = HSymTensor;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HSymTensor {
    type Output = HSymTensor;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl std::ops::Mul<f64> for HSymTensor {
    type Output = HSymTensor;
    fn mul(self, rhs: f64) -> Self {
        Self(self.0 * rhs)
    }
}

/// `L⁺ = h⁻¹ Lᵀ h`.
pub fn h_adjoint(l: &Ten3, h: &Metric3) -> Ten3 {
    h.inverse() * l.transpose() * h.matrix()
}

/// `½(L + L⁺)`.
pub fn sym_part_h(l: &Ten3, h: &Metric3) -> HSymTensor {
    HSymTensor((l + h_adjoint(l, h)) * 0.5)
}

/// `½(L − L⁺)`.
pub fn skew_part_h(l: &Ten3, h: &Metric3) -> Ten3 {
    (l - h_adjoint(l, h)) * 0.5
}

/// Result of [`polar_decompose`]: `F = O·U_R = U_L·O`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub rotation: Ten3,
    pub right_stretch: HSymTensor,
    pub left_stretch: HSymTensor,
}

/// Euclidean polar decomposition of a deformation gradient with `det F > 0`.
///
/// Built from the singular value decomposition `F = W Σ Vᵀ`, giving
/// `O = W Vᵀ`, `U_R = V Σ Vᵀ`, `U_L = W Σ Wᵀ`.
pub fn polar_decompose(f: &Ten3) -> Result<Polar> {
    let det = f.determinant();
    if !(det > 0.0) || !det.is_finite() {
        return Err(KinError::SingularCompression(format!("det F = {det:.6e}")));
    }
    let svd = f.svd(true, true);
    let (w, vt) = match (svd.u, svd.v_t) {
        (Some(w), Some(vt)) => (w, vt),
        _ => return Err(KinError::SingularCompression("SVD did not converge".into())),
    };
    let sigma = Ten3::from_diagonal(&svd.singular_values);
    let rotation = w * vt;
    let ur = vt.transpose() * sigma * vt;
    let ul = w * sigma * w.transpose();
    Ok(Polar {
        rotation,
        right_stretch: HSymTensor((ur + ur.transpose()) * 0.5),
        left_stretch: HSymTensor((ul + ul.transpose()) * 0.5),
    })
}

/// Scalar functions that can be lifted to h-symmetric tensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TensorFn {
    Ln,
    Sqrt,
    Exp,
    /// Real power; requires positive eigenvalues.
    Pow(f64),
}

impl TensorFn {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            TensorFn::Ln => x.ln(),
            TensorFn::Sqrt => x.sqrt(),
            TensorFn::Exp => x.exp(),
            TensorFn::Pow(n) => x.powf(n),
        }
    }

    fn needs_positive(self) -> bool {
        !matches!(self, TensorFn::Exp)
    }
}

// B = h^{1/2} A h^{-1/2}, symmetric when A is h-symmetric.
fn symmetrized_conjugate(a: &Ten3, h: &Metric3) -> Ten3 {
    let b = h.sqrt() * a * h.inv_sqrt();
    (b + b.transpose()) * 0.5
}

/// Applies a scalar function to an h-symmetric tensor through its
/// eigen-decomposition. The result has eigenvalues `f(λᵢ)` and the same
/// eigenvectors.
pub fn func_of_hsym(a: &HSymTensor, h: &Metric3, f: TensorFn) -> Result<HSymTensor> {
    map_hsym(a, h, |x| f.apply(x), f.needs_positive())
}

/// Like [`func_of_hsym`] for an arbitrary closure. When `positive_domain`
/// is set, eigenvalues `<= 0` are rejected.
pub fn map_hsym(
    a: &HSymTensor,
    h: &Metric3,
    f: impl Fn(f64) -> f64,
    positive_domain: bool,
) -> Result<HSymTensor> {
    let b = symmetrized_conjugate(&a.0, h);
    let eig = SymmetricEigen::new(b);
    if positive_domain {
        if let Some(bad) = eig.eigenvalues.iter().find(|&&x| !(x > 0.0)) {
            return Err(KinError::NonPositiveShape(format!("eigenvalue {bad:.6e}")));
        }
    }
    let fl = eig.eigenvalues.map(f);
    if fl.iter().any(|x| !x.is_finite()) {
        return Err(KinError::Domain(
            "tensor function produced a non-finite value".into(),
        ));
    }
    let v = eig.eigenvectors;
    let fb = v * Ten3::from_diagonal(&fl) * v.transpose();
    Ok(HSymTensor(h.inv_sqrt() * fb * h.sqrt()))
}

/// Determinant, trace and deviator in one pass.
pub fn det_trace_dev(a: &HSymTensor) -> (f64, f64, HSymTensor) {
    (a.determinant(), a.trace(), a.deviator())
}

/// Relative Frobenius distance `‖a − b‖ / max(‖b‖, floor)`.
pub fn rel_diff(a: &Ten3, b: &Ten3) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Convenience constructor from nested rows.
pub fn ten3(rows: [[f64; 3]; 3]) -> Ten3 {
    Ten3::from_row_slice(&[
        rows[0][0], rows[0][1], rows[0][2], rows[1][0], rows[1][1], rows[1][2], rows[2][0],
        rows[2][1], rows[2][2],
    ])
}

/// Rows of a tensor as nested arrays.
pub fn rows_of(t: &Ten3) -> [[f64; 3]; 3] {
    [
        [t[(0, 0)], t[(0, 1)], t[(0, 2)]],
        [t[(1, 0)], t[(1, 1)], t[(1, 2)]],
        [t[(2, 0)], t[(2, 1)], t[(2, 2)]],
    ]
}

/// Rotation by `angle` about `axis` (Rodrigues). The axis is normalized.
pub fn rotation_about(axis: &Vec3, angle: f64) -> Ten3 {
    let n = axis.normalize();
    let k = skew_matrix(&n);
    Ten3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos())
}

/// The matrix `[n]×` with `[n]× v = n × v`.
pub fn skew_matrix(n: &Vec3) -> Ten3 {
    ten3([[0.0, -n.z, n.y], [n.z, 0.0, -n.x], [-n.y, n.x, 0.0]])
}

/// Eigenvalue tolerance used when testing positivity after integration.
pub const SPD_EIGEN_FLOOR: f64 = EIGEN_TOL;
