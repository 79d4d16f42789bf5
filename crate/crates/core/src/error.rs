use crate::linalg::Vector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e}){}", context_suffix(.context))]
    SolverFailure {
        iterations: usize,
        residual: f64,
        /// Last iterate reached before giving up.
        last_iterate: Vector,
        context: Option<String>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("protocol violation at round {round}: {detail}")]
    ProtocolViolation { round: usize, detail: String },

    #[error("competitive ratio is unbounded: offline cost is zero but online cost is {alg_total:e}")]
    UnboundedRatio { alg_total: f64 },

    #[error("verification failed at step {step}: {detail}")]
    VerificationFailure { step: usize, detail: String },

    #[error("malformed file: {0}")]
    Format(#[from] serde_json::Error),
}

fn context_suffix(context: &Option<String>) -> String {
    match context {
        Some(c) => format!(" [{c}]"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attaches a location (e.g. the round index) to a solver failure.
    pub fn with_context(self, ctx: impl Into<String>) -> Self {
        match self {
            Error::SolverFailure {
                iterations,
                residual,
                last_iterate,
                context,
            } => {
                let ctx = ctx.into();
                let context = Some(match context {
                    Some(inner) => format!("{ctx}: {inner}"),
                    None => ctx,
                });
                Error::SolverFailure {
                    iterations,
                    residual,
                    last_iterate,
                    context,
                }
            }
            other => other,
        }
    }
}
