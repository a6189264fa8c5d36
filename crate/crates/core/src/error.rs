use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice specification: {0}")]
    InvalidSpec(String),

    #[error("sub-network coupling matrix is not Hermitian (max deviation {deviation:e})")]
    NonHermitianSubNetwork { deviation: f64 },

    #[error("unknown side `{0}` (expected left, right or both)")]
    UnknownSide(String),

    #[error("energy {energy} is outside the open band (-{bandwidth_half}, {bandwidth_half})")]
    OutOfBand { energy: f64, bandwidth_half: f64 },

    #[error("quasi-momentum {k} is outside the open interval (0, pi)")]
    MomentumOutOfRange { k: f64 },

    #[error("parameters sit on a pole of the closed-form amplitude: {0}")]
    Pole(String),

    #[error("operation requires a uniform-chain sub-network with g = J")]
    NotUniformChain,

    #[error("eigensolver failed to converge")]
    EigenNonConvergence,

    #[error("eigenpair residual {residual:e} exceeds bound {bound:e}")]
    EigenResidual { residual: f64, bound: f64 },

    #[error("scattering system is singular (relative smallest singular value {ratio:e}); energy hits a bound state")]
    SingularScattering { ratio: f64 },

    #[error("plane-wave matching system has null-space dimension {dimension} (expected 1)")]
    NullSpaceDimension { dimension: usize },

    #[error("correspondence violated at k = {k}: alignment residual {align_residual:e}")]
    CorrespondenceFailure { k: f64, align_residual: f64 },

    #[error("eigenvector matrix condition number {condition:e} too large; close to an exceptional point")]
    ExceptionalPoint { condition: f64 },

    #[error("wave packet does not fit the chain: tail mass {tail_mass:e} outside sites")]
    PacketTail { tail_mass: f64 },

    #[error("simulation horizon violated: {0}")]
    Horizon(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    /// Stable machine-readable identifier of the failed check.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid_spec",
            Error::NonHermitianSubNetwork { .. } => "non_hermitian_subnetwork",
            Error::UnknownSide(_) => "unknown_side",
            Error::OutOfBand { .. } => "out_of_band",
            Error::MomentumOutOfRange { .. } => "momentum_out_of_range",
            Error::Pole(_) => "pole",
            Error::NotUniformChain => "not_uniform_chain",
            Error::EigenNonConvergence => "eigen_non_convergence",
            Error::EigenResidual { .. } => "eigen_residual",
            Error::SingularScattering { .. } => "singular_scattering",
            Error::NullSpaceDimension { .. } => "null_space_dimension",
            Error::CorrespondenceFailure { .. } => "correspondence_failure",
            Error::ExceptionalPoint { .. } => "exceptional_point",
            Error::PacketTail { .. } => "packet_tail",
            Error::Horizon(_) => "horizon",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Empty(_) => "empty_input",
        }
    }
}
