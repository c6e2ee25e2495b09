use std::fmt;
use std::path::Path;

/// CLI failure with its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: unreadable or invalid config, bad flags, unwritable output.
    Validation {
        module: &'static str,
        message: String,
    },
    /// Numerical capability failure reported by the core.
    Numerical {
        module: &'static str,
        message: String,
    },
}

impl CliError {
    pub fn validation(module: &'static str, message: impl Into<String>) -> Self {
        CliError::Validation {
            module,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, action: &str, e: std::io::Error) -> Self {
        Self::validation("cli", format!("cannot {action} {}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation { module, message } | CliError::Numerical { module, message } => {
                write!(f, "[{module}] {message}")
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<opint_core::Error> for CliError {
    fn from(e: opint_core::Error) -> Self {
        let (module, message) = (e.module(), e.to_string());
        if e.is_validation() {
            CliError::Validation { module, message }
        } else {
            CliError::Numerical { module, message }
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::validation("cli", format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::validation("cli", format!("json: {e}"))
    }
}
