use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The Fock cutoff is too small for the requested state.
    #[error("truncation tail {tail:.3e} exceeds tolerance {tolerance:.3e}; increase n_max")]
    Truncation { tail: f64, tolerance: f64 },

    /// A geometric series with |r| >= 1 cannot be normalized.
    #[error("geometric ratio |r| = {ratio_abs} >= 1: series is not normalizable")]
    Divergence { ratio_abs: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("eigen-residual {residual:.3e} exceeds bound {bound:.3e}")]
    Convergence { residual: f64, bound: f64 },

    #[error("bands overlap: no spectral gap (window [{lower}, {upper}])")]
    NoGap { lower: f64, upper: f64 },

    #[error("only {usable} usable sites above the amplitude floor, need {required}")]
    InsufficientSupport { usable: usize, required: usize },

    #[error("gap closes at |v| = |w| (v = {v}, w = {w})")]
    GapClosure { v: f64, w: f64 },

    #[error("recurrence does not decay: final-cell weight {last_weight:.3e}")]
    Normalization { last_weight: f64 },

    #[error("integrator step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("trace drifted by {drift:.3e} (limit {limit:.3e}) at t = {t}")]
    TraceDrift { t: f64, drift: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_) | Error::Dimension { .. } | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
