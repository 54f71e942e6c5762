use thiserror::Error;

/// Failures of a job, split by who is at fault.
#[derive(Debug, Error)]
pub enum JobError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse config file: {0}")]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Core(#[from] cvschmidt_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl JobError {
    pub fn config(msg: impl Into<String>) -> Self {
        JobError::Config(msg.into())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        JobError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit status: 3 when the numerics failed, 2 for bad input,
    /// 1 for anything environmental (files, disks).
    pub fn exit_code(&self) -> u8 {
        match self {
            JobError::Core(e) if e.is_numerical() => 3,
            JobError::Config(_) | JobError::Toml(_) | JobError::Core(_) => 2,
            JobError::Io { .. } | JobError::Csv(_) => 1,
        }
    }
}
