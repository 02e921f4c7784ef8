use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("series precondition violated: {0}")]
    Precondition(String),

    #[error("invalid domain parameters: {0}")]
    InvalidDomain(String),

    #[error("cannot parse domain spec {spec:?}: {reason}")]
    Parse { spec: String, reason: String },

    #[error("sampling failed after {attempts} attempts: {reason}")]
    Sampling { attempts: usize, reason: String },

    #[error("point lies outside the domain: {0}")]
    OutsideDomain(String),

    #[error("off-grade coefficient {off_grade:.3e} exceeds tolerance (max coefficient {max_coeff:.3e})")]
    Structure { off_grade: f64, max_coeff: f64 },

    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    #[error("principal branch check failed for points {alpha} and {beta}: Re N = {re:.3e}")]
    Branch { alpha: usize, beta: usize, re: f64 },

    #[error("catalog inconsistency at lambda = {lambda}: closed form says {expected}, degree {degree} block says otherwise")]
    CatalogInconsistency { lambda: f64, expected: bool, degree: u32 },

    #[error("ill-conditioned metric (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("eigensolver failed: {0}")]
    Eigen(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::Precondition(_) => "precondition",
            Error::InvalidDomain(_) => "invalid_domain",
            Error::Parse { .. } => "parse",
            Error::Sampling { .. } => "sampling",
            Error::OutsideDomain(_) => "outside_domain",
            Error::Structure { .. } => "structure",
            Error::NotPsd(_) => "not_psd",
            Error::Branch { .. } => "branch",
            Error::CatalogInconsistency { .. } => "catalog_inconsistency",
            Error::IllConditioned(_) => "ill_conditioned",
            Error::Eigen(_) => "eigen",
        }
    }
}
