//! Classical reference-configuration deformation and strain families.
//!
//! These are the frame-dependent baselines (left/right stretch powers, the
//! Seth–Hill style strain series, the Cauchy strain) that the frame-free
//! shape tensor is compared against.

use serde::{Deserialize, Serialize};

use crate::error::{KinError, Result};
use crate::tensor::{map_hsym, HSymTensor, Metric3, Ten3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Member of the strain family: real exponent `n` and the stretch side.
/// `n = 0` is the logarithmic (Hencky) member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrainFamilyIndex {
    pub n: f64,
    pub side: Side,
}

impl StrainFamilyIndex {
    pub fn new(n: f64, side: Side) -> Result<Self> {
        if !n.is_finite() {
            return Err(KinError::Domain(format!("strain exponent {n}")));
        }
        Ok(Self { n, side })
    }

    pub fn hencky(side: Side) -> Self {
        Self { n: 0.0, side }
    }
}

fn check_det(f: &Ten3) -> Result<()> {
    let det = f.determinant();
    if det > 0.0 && det.is_finite() {
        Ok(())
    } else {
        Err(KinError::SingularCompression(format!("det F = {det:.6e}")))
    }
}

/// `FᵀF` (right) or `FFᵀ` (left): the squared stretch on the chosen side.
pub fn squared_stretch(f: &Ten3, side: Side) -> HSymTensor {
    let c = match side {
        Side::Right => f.transpose() * f,
        Side::Left => f * f.transpose(),
    };
    HSymTensor::from_matrix_unchecked((c + c.transpose()) * 0.5)
}

/// `(U_side)ⁿ`, evaluated as `(U²)^{n/2}` through the eigenvalues of `U²`.
pub fn cauchy_green(f: &Ten3, idx: StrainFamilyIndex) -> Result<HSymTensor> {
    check_det(f)?;
    let half_n = idx.n * 0.5;
    map_hsym(
        &squared_stretch(f, idx.side),
        &Metric3::identity(),
        |mu| mu.powf(half_n),
        true,
    )
}

/// `(1/n)[Uⁿ − I]`, or `ln U` for `n = 0`.
///
/// Each eigenvalue `μ` of `U²` maps to `expm1(n·½ln μ)/n`, which is
/// continuous through `n = 0` and free of cancellation for small `n`.
pub fn strain_family(f: &Ten3, idx: StrainFamilyIndex) -> Result<HSymTensor> {
    check_det(f)?;
    let n = idx.n;
    let g = move |mu: f64| {
        let ln_stretch = 0.5 * mu.ln();
        if n == 0.0 {
            ln_stretch
        } else {
            (n * ln_stretch).exp_m1() / n
        }
    };
    map_hsym(&squared_stretch(f, idx.side), &Metric3::identity(), g, true)
}

/// `Fˢ − I`.
pub fn cauchy_strain(f: &Ten3) -> HSymTensor {
    HSymTensor::from_matrix_unchecked((f + f.transpose()) * 0.5 - Ten3::identity())
}

/// `F_{t2}^{(t0)} = F_{t2}^{(t1)} · F_{t1}^{(t0)}`.
pub fn compose_f(f_21: &Ten3, f_10: &Ten3) -> Result<Ten3> {
    check_det(f_21)?;
    check_det(f_10)?;
    Ok(f_21 * f_10)
}

/// `F_{t0}^{(t1)} = [F_{t1}^{(t0)}]⁻¹`.
pub fn invert_f(f: &Ten3) -> Result<Ten3> {
    check_det(f)?;
    f.try_inverse()
        .ok_or_else(|| KinError::SingularCompression("deformation gradient not invertible".into()))
}
