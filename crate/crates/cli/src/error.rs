use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: ghmimo::Error,
    },

    #[error("parse: {0}")]
    Parse(String),

    /// An output that was not produced because one it derives from failed.
    #[error("not produced because {output} failed")]
    Dependent {
        output: String,
        category: &'static str,
    },

    #[error("{failed} of {total} outputs failed")]
    Partial { failed: usize, total: usize },
}

impl CliError {
    pub fn core(context: impl Into<String>, source: ghmimo::Error) -> Self {
        CliError::Core {
            context: context.into(),
            source,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core { source, .. } => source.category(),
            CliError::Parse(_) => "parse",
            CliError::Dependent { category, .. } => category,
            CliError::Partial { .. } => "partial_failure",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core { .. } | CliError::Dependent { .. } => 4,
            CliError::Partial { .. } => 5,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
