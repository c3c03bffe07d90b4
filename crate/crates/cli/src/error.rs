use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cnls_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Usage(_) => "validation",
            CliError::Io { .. } | CliError::Json(_) | CliError::Csv(_) => "io",
        }
    }

    /// 2 is shared with argument errors reported by clap.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "validation" => 2,
            "regime" => 3,
            "structure" => 4,
            "shooting" => 5,
            "no-such-branch" => 6,
            "flow" => 7,
            "solver" => 8,
            _ => 9,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
