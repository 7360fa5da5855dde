use thiserror::Error;

/// Errors produced anywhere in the codec, solver or evaluation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("SVD did not converge (mode {mode:?}) after {sweeps} sweeps")]
    SvdNonConvergence { mode: Option<usize>, sweeps: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("reference tensor has zero norm")]
    DegenerateReference,

    #[error("factor column {0} is zero")]
    DegenerateFactor(usize),

    #[error("factor is not semi-orthogonal (||U^H U - I||_F = {0:.3e})")]
    NotSemiOrthogonal(f64),

    #[error("Givens elimination left residual {0:.3e}; column phases not normalized")]
    PhaseNormalizationMissing(f64),

    #[error("solver diverged at iteration {iter}: objective {objective:.6e} exceeds 10x initial {initial:.6e}")]
    Divergence {
        iter: usize,
        objective: f64,
        initial: f64,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("unsupported format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("checksum mismatch in {0}")]
    Checksum(String),

    #[error("truncated stream: {0}")]
    Truncated(String),

    #[error("malformed stream: {0}")]
    Malformed(String),

    #[error("zero reference sum rate")]
    ZeroReferenceRate,

    #[error("eigensolver failed for user {user}, RB {rb}")]
    Eigen { user: usize, rb: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::Contract(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
