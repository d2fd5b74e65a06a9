use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A formula was evaluated outside the region where it is defined.
    #[error("{what}: argument {value} is outside the domain of the formula")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular expression in {what}")]
    Singular { what: &'static str },

    #[error(
        "pump amplitude is below the oscillation threshold (no non-negative steady-state root)"
    )]
    BelowThreshold,

    #[error("no instability boundary at this detuning (discriminant {discriminant} < 0)")]
    NoBoundary { discriminant: f64 },

    #[error("step size {dt:e} s is too coarse for the fastest rate {rate:e} rad/s (dt*rate = {product:.3} >= 0.1)")]
    Stiffness { dt: f64, rate: f64, product: f64 },

    #[error("integration produced a non-finite amplitude at t = {time:e} s")]
    NonFinite { time: f64 },

    #[error("sampling window [{start:e}, {end:e}] s exceeds the trajectory span (ends at {available:e} s)")]
    WindowExceedsTrajectory {
        start: f64,
        end: f64,
        available: f64,
    },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("shot {index}: {source}")]
    Shot {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
