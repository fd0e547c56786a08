//! Frame-free kinematics of finite elastic and plastic deformation.
//!
//! The crate is organized bottom-up:
//!
//! * [`tensor`]: 3×3 tensors, metrics, h-adjoints, polar decomposition,
//!   functions of h-symmetric tensors.
//! * [`strain`]: classical stretch and strain families.
//! * [`motion`]: analytic motions and objectivity test transforms.
//! * [`grid`], [`poly`]: structured-grid fields and finite differences.
//! * [`shape`]: elastic shape tensor, its evolution, Hencky deformedness,
//!   the isotropic Hencky potential.
//! * [`compat`]: Christoffel/Ricci compatibility of the relaxed metric,
//!   shape potentials, gauge transforms, Cesàro–Volterra reconstruction.
//! * [`plastic`]: metric change tensor and elastoplastic evolution.
//! * [`dump`]: CSV field and trajectory formats shared with the CLI.

pub mod compat;
pub mod dump;
pub mod error;
pub mod grid;
pub mod motion;
pub mod plastic;
pub mod poly;
pub mod shape;
pub mod strain;
pub mod tensor;
pub mod tol;

pub use error::{KinError, Result};
pub use grid::{Boundary, Field, Grid3, Rank3, ScalarField, TensorField, VectorField};
pub use motion::{MotionKind, MotionSpec, Placement, RotationFn, TimeFn};
pub use tensor::{HSymTensor, Metric3, Ten3, Vec3};
