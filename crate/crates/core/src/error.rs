use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Variants fall in two families: input problems (`Validation`, `Parameter`)
/// and numerical capability problems (`Capability`, `Convergence`,
/// `GridResolution`). The CLI maps the first family to exit status 2 and
/// the second to exit status 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("eigensolver did not converge within {iterations} iterations (dim {dim})")]
    Convergence { dim: usize, iterations: usize },

    #[error("grid resolution error: {0}")]
    GridResolution(String),

    #[error("flavor error: {0}")]
    Flavor(String),
}

impl Error {
    /// True for errors caused by invalid input rather than numerical limits.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Parameter(_) | Error::Flavor(_)
        )
    }

    /// Name of the module that raised the error, used to qualify CLI messages.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Convergence { .. } => "spectral-core",
            Error::GridResolution(_) | Error::Flavor(_) => "besov",
            Error::Capability(_) => "function-model",
            Error::Validation(_) | Error::Parameter(_) => "input",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
