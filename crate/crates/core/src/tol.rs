//! Shared numerical tolerances.

/// Relative tolerance for exact algebraic identities (adjoints, products).
pub const REL_TOL: f64 = 1e-12;

/// Relative tolerance for results routed through a symmetric eigensolver.
pub const EIGEN_TOL: f64 = 1e-10;

/// Absolute floor added to relative comparisons of near-zero quantities.
pub const ABS_FLOOR: f64 = 1e-300;
