use thiserror::Error;

use crate::kinds::{ActionKind, RoleId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("unknown {vocabulary} token `{token}`")]
    UnknownToken {
        vocabulary: &'static str,
        token: String,
    },

    #[error("input packet has neither topic text nor keywords")]
    EmptyPacket,

    #[error("decision {kind} targets missing or unusable id `{id}`")]
    MissingTarget { kind: ActionKind, id: String },

    #[error("decision {kind} is malformed: {reason}")]
    MalformedDecision { kind: ActionKind, reason: String },

    #[error("merge aborted on patch {kind} from {role}: {reason}")]
    Merge {
        role: RoleId,
        kind: ActionKind,
        reason: String,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("graph integrity violated: {0}")]
    Integrity(String),

    #[error("signal component {name} = {value} is outside [0, 1]")]
    SignalOutOfRange { name: &'static str, value: f64 },
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
