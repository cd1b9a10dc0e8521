use thiserror::Error;

/// Errors produced while building or evolving Fock states and circuits.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode registry must contain at least one mode")]
    EmptyRegistry,
    #[error("duplicate mode label `{0}`")]
    DuplicateLabel(String),
    #[error("per-mode photon cap {0} is outside 1..={max}", max = crate::fock::MAX_CAP)]
    InvalidCap(u8),
    #[error("occupation vector has {found} entries, registry has {expected} modes")]
    LengthMismatch { expected: usize, found: usize },
    #[error("mode `{mode}` would hold {count} photons, cap is {cap}")]
    CapExceeded { mode: String, count: u32, cap: u8 },
    #[error("states live on different mode registries")]
    RegistryMismatch,
    #[error("mode index {0} is out of range")]
    InvalidMode(usize),
    #[error("unknown mode label `{0}`")]
    UnknownMode(String),
    #[error("a two-mode element needs two distinct modes (got {0} twice)")]
    SameMode(usize),
    #[error("reflectivity {0} is outside [0, 1]")]
    InvalidReflectivity(f64),
    #[error("phase {0} is not finite")]
    InvalidPhase(f64),
    #[error("photon number must be non-negative, got {0}")]
    NegativePhotonNumber(i64),
    #[error("mode `{0}` is not vacuum in every term")]
    NonVacuumMode(String),
    #[error("mode map is not a bijection: {0}")]
    NotPermutation(String),
    #[error("invalid detector model: {0}")]
    InvalidDetector(String),
    #[error("operator extraction needs ideal detectors; element {0} is lossy")]
    NonIdealDetector(usize),
    #[error("element {element} uses mode `{mode}` after it was detected")]
    UseAfterDetect { element: usize, mode: String },
    #[error("element {element}: {message}")]
    Element { element: usize, message: String },
    #[error("state is not normalized (norm² = {0})")]
    Unnormalized(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("eigen-decomposition did not converge")]
    NoConvergence,
    #[error("malformed circuit file: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
