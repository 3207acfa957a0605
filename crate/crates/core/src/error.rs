use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter violates its domain. `field` is a dotted path
    /// such as `mechanics[1].freq`.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("configuration has {} invalid field(s): {}", .0.len(), join_errors(.0))]
    Validation(Vec<Error>),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("drift matrix is unstable (spectral abscissa {abscissa:.6e} rad/s)")]
    Unstable { abscissa: f64 },

    #[error("lyapunov solve is ill-conditioned (estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("lyapunov residual {residual:.3e} exceeds tolerance")]
    Residual { residual: f64 },

    #[error("unphysical covariance: mode `{mode}` has occupation {occupation:.3e}")]
    Unphysical { mode: String, occupation: f64 },

    #[error("mean-field iteration did not converge after {iterations} iterations (last change {change:.3e})")]
    NoConvergence { iterations: usize, change: f64 },

    #[error("degenerate polariton frequencies near {freq:.6e} rad/s")]
    Degenerate { freq: f64 },

    #[error("time step {dt:.3e} s exceeds the stability bound {bound:.3e} s")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("infeasible tuning target: {0}")]
    Infeasible(String),

    #[error("no feasible point found within {evaluations} evaluations")]
    NoFeasiblePoint { evaluations: usize },

    #[error("cannot parse configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Io(String),
}

fn join_errors(errors: &[Error]) -> String {
    errors
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// Whether the error stems from user input rather than a failed solve.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Validation(_)
                | Error::Shape(_)
                | Error::Infeasible(_)
                | Error::Config(_)
                | Error::Io(_)
        )
    }

    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
