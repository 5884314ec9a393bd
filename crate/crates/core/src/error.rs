use crate::fock::ModeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("mode {0} is not part of the state")]
    UnknownMode(ModeId),
    #[error("mode {0} appears more than once")]
    DuplicateMode(ModeId),
    #[error("a two-mode operation needs two distinct modes, got {0} twice")]
    SameMode(ModeId),
    #[error("photon number {count} exceeds the cutoff {cutoff}")]
    CutoffExceeded { count: u32, cutoff: u32 },
    #[error("states are defined over different mode lists")]
    ModeMismatch,
    #[error("occupation vector has {got} entries, state has {expected} modes")]
    OccupationLength { expected: usize, got: usize },
    #[error("cannot normalize the zero vector")]
    ZeroNorm,
    #[error("state is not normalized (squared norm {0})")]
    Unnormalized(f64),
    #[error("spatial mode {0} is missing its H or V polarization mode")]
    MissingPolarization(u16),
    #[error("expected {expected} photons in total, found a term with {found}")]
    PhotonNumber { expected: u32, found: u32 },
    #[error("dual-rail invariant violated: {0}")]
    DualRail(String),
    #[error("the selected detection branch has zero probability")]
    ZeroProbability,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),
    #[error("matrix is not symplectic (max deviation {0:e})")]
    NotSymplectic(f64),
    #[error("matrix dimension {got} does not match the expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("covariance matrix is unphysical (min eigenvalue {0:e})")]
    Unphysical(f64),
    #[error("measured quadrature variance {0:e} is not positive")]
    NonPositiveVariance(f64),
}
