use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("{path}: line {line}: {reason}")]
    Line { path: String, line: usize, reason: String },

    #[error("trace {episode}: {reason}")]
    Order { episode: String, reason: String },

    #[error("duplicate group id `{0}`")]
    DuplicateGroup(String),

    #[error("train fraction {0} outside [0, 1]")]
    Fraction(f64),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ReplayError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        ReplayError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = ReplayError> = std::result::Result<T, E>;
