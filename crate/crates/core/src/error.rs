use thiserror::Error;

/// Failures raised by the kinematics routines.
///
/// Variants carry a free-form context string (node index, step, point id)
/// so callers such as the CLI can report where a run went wrong.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinError {
    #[error("metric is not symmetric positive definite: {0}")]
    Metric(String),
    #[error("singular or orientation-reversing compression (det <= 0): {0}")]
    SingularCompression(String),
    #[error("shape tensor has a non-positive eigenvalue: {0}")]
    NonPositiveShape(String),
    #[error("argument outside the admissible domain: {0}")]
    Domain(String),
    #[error("rigid frame transform is not orthogonal: {0}")]
    Frame(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("tensor field is not symmetric: {0}")]
    Symmetry(String),
    #[error("strain field is incompatible: {0}")]
    IncompatibleField(String),
    #[error("small-deformedness regime violated: {0}")]
    Regime(String),
}

impl KinError {
    /// Prefixes the context message, keeping the variant.
    pub fn context(self, prefix: impl AsRef<str>) -> Self {
        let p = prefix.as_ref();
        match self {
            KinError::Metric(m) => KinError::Metric(format!("{p}: {m}")),
            KinError::SingularCompression(m) => KinError::SingularCompression(format!("{p}: {m}")),
            KinError::NonPositiveShape(m) => KinError::NonPositiveShape(format!("{p}: {m}")),
            KinError::Domain(m) => KinError::Domain(format!("{p}: {m}")),
            KinError::Frame(m) => KinError::Frame(format!("{p}: {m}")),
            KinError::Grid(m) => KinError::Grid(format!("{p}: {m}")),
            KinError::Symmetry(m) => KinError::Symmetry(format!("{p}: {m}")),
            KinError::IncompatibleField(m) => KinError::IncompatibleField(format!("{p}: {m}")),
            KinError::Regime(m) => KinError::Regime(format!("{p}: {m}")),
        }
    }
}

pub type Result<T> = std::result::Result<T, KinError>;
