use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("line {line}: {reason}")]
    Grammar { line: usize, reason: String },

    #[error("backend failed after {attempts} attempts: {last}")]
    Exhausted { attempts: usize, last: String },

    #[error("backend reply could not be parsed: {0}")]
    Reply(String),

    #[error("backend configuration: {0}")]
    Config(String),

    #[error("script {path}: {reason}")]
    Script { path: String, reason: String },
}

pub type Result<T, E = AgentError> = std::result::Result<T, E>;
