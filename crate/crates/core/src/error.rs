use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ladder index {n} outside truncation |n| <= {truncation}")]
    IndexOutOfLadder { n: i32, truncation: i32 },

    #[error("singular kinematics: energy denominator {denominator:e} (on-shell intermediate state)")]
    SingularKinematics { denominator: f64 },

    #[error("Bragg condition violated: E(k2) - E(k0) = {mismatch:e}")]
    BraggCondition { mismatch: f64 },

    #[error("unsupported tensor component ({mu}, {nu}); only spatial indices 2 and 3 are expanded")]
    UnsupportedComponent { mu: usize, nu: usize },

    #[error("kinematics are off shell: energy residual {residual:e}")]
    OffShell { residual: f64 },

    #[error("norm drift {drift:e} exceeds {limit:e} at t = {time:e}; the time step is too coarse")]
    NormDrift { drift: f64, limit: f64, time: f64 },

    #[error("non-oscillatory data: R^2 = {r_squared:.4} (< 0.9)")]
    PoorFit { r_squared: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no minimum inside the bracket [{lo}, {hi}]")]
    NoMinimumInBracket { lo: f64, hi: f64 },
}
