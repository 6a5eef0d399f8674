use thiserror::Error;

/// Failures surfaced by the command line, each with a stable code and an
/// exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: unbound name `{name}`")]
    UnboundName {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: {message}")]
    Type {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Math(#[from] darboux_core::Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Syntax { .. } => "SyntaxError",
            CliError::UnboundName { .. } => "UnboundName",
            CliError::Type { .. } => "TypeError",
            CliError::Usage(_) => "UsageError",
            CliError::Io(_) => "IoError",
            CliError::Math(e) => e.code(),
        }
    }

    /// 2 for mathematical failures, 1 for everything the user got wrong.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Math(e) if e.is_mathematical() => 2,
            _ => 1,
        }
    }

    pub fn location(&self) -> Option<(usize, usize)> {
        match self {
            CliError::Syntax { line, col, .. }
            | CliError::UnboundName { line, col, .. }
            | CliError::Type { line, col, .. } => Some((*line, *col)),
            _ => None,
        }
    }

    /// Shifts positions of an error raised while parsing a flag value so the
    /// message names the flag.
    pub fn in_flag(self, flag: &str) -> CliError {
        match self {
            CliError::Syntax { line, col, message } => CliError::Syntax {
                line,
                col,
                message: format!("in {flag}: {message}"),
            },
            CliError::Type { line, col, message } => CliError::Type {
                line,
                col,
                message: format!("in {flag}: {message}"),
            },
            other => other,
        }
    }
}
