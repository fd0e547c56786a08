//! Polynomial fields in three variables with exact derivatives. Used to build
//! analytic test and scenario inputs (displacements, potentials, strains).

use serde::{Deserialize, Serialize};

use crate::tensor::{Ten3, Vec3};

/// `coef · x^a y^b z^c`, serialized as `[coef, a, b, c]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial(pub f64, pub u32, pub u32, pub u32);

fn ipow(x: f64, n: u32) -> f64 {
    x.powi(n as i32)
}

impl Monomial {
    fn eval(&self, p: &Vec3) -> f64 {
        self.0 * ipow(p.x, self.1) * ipow(p.y, self.2) * ipow(p.z, self.3)
    }

    fn derivative(&self, axis: usize) -> Option<Monomial> {
        let Monomial(c, a, b, d) = *self;
        match axis {
            0 if a > 0 => Some(Monomial(c * a as f64, a - 1, b, d)),
            1 if b > 0 => Some(Monomial(c * b as f64, a, b - 1, d)),
            2 if d > 0 => Some(Monomial(c * d as f64, a, b, d - 1)),
            _ => None,
        }
    }
}

/// Scalar polynomial as a list of monomials.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarPoly(pub Vec<Monomial>);

impl ScalarPoly {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn constant(c: f64) -> Self {
        Self(vec![Monomial(c, 0, 0, 0)])
    }

    /// The coordinate function `x_axis`.
    pub fn coordinate(axis: usize) -> Self {
        let mut p = [0u32; 3];
        p[axis] = 1;
        Self(vec![Monomial(1.0, p[0], p[1], p[2])])
    }

    pub fn eval(&self, p: &Vec3) -> f64 {
        self.0.iter().map(|m| m.eval(p)).sum()
    }

    pub fn derivative(&self, axis: usize) -> ScalarPoly {
        ScalarPoly(self.0.iter().filter_map(|m| m.derivative(axis)).collect())
    }

    pub fn gradient(&self, p: &Vec3) -> Vec3 {
        Vec3::new(
            self.derivative(0).eval(p),
            self.derivative(1).eval(p),
            self.derivative(2).eval(p),
        )
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|m| m.1 + m.2 + m.3).max().unwrap_or(0)
    }
}

/// Vector polynomial field.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorPoly(pub [ScalarPoly; 3]);

impl VectorPoly {
    /// `x ↦ x`.
    pub fn identity() -> Self {
        Self([
            ScalarPoly::coordinate(0),
            ScalarPoly::coordinate(1),
            ScalarPoly::coordinate(2),
        ])
    }

    pub fn eval(&self, p: &Vec3) -> Vec3 {
        Vec3::new(self.0[0].eval(p), self.0[1].eval(p), self.0[2].eval(p))
    }

    /// `(u ⊗ ∇)ᵢⱼ = ∂ⱼ uᵢ`.
    pub fn gradient(&self, p: &Vec3) -> Ten3 {
        let mut g = Ten3::zeros();
        for i in 0..3 {
            g.set_row(i, &self.0[i].gradient(p).transpose());
        }
        g
    }

    /// Symmetrized gradient `(u ⊗ ∇)ˢ`, exactly.
    pub fn sym_gradient(&self, p: &Vec3) -> Ten3 {
        let g = self.gradient(p);
        (g + g.transpose()) * 0.5
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(ScalarPoly::degree).max().unwrap_or(0)
    }
}

/// Second-order tensor polynomial field, stored by rows.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TensorPoly(pub [[ScalarPoly; 3]; 3]);

impl TensorPoly {
    pub fn eval(&self, p: &Vec3) -> Ten3 {
        let mut m = Ten3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = self.0[i][j].eval(p);
            }
        }
        m
    }

    /// Symmetrized gradient of a vector polynomial, as a tensor polynomial.
    pub fn sym_gradient_of(u: &VectorPoly) -> Self {
        let mut out = TensorPoly::default();
        for i in 0..3 {
            for j in 0..3 {
                let mut terms: Vec<Monomial> = Vec::new();
                for m in u.0[i]
                    .derivative(j)
                    .0
                    .iter()
                    .chain(u.0[j].derivative(i).0.iter())
                {
                    terms.push(Monomial(0.5 * m.0, m.1, m.2, m.3));
                }
                out.0[i][j] = ScalarPoly(terms);
            }
        }
        out
    }
}
