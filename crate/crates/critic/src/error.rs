use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CriticError {
    #[error("embedding dimension {got}, expected {expected}")]
    EmbeddingDimension { expected: usize, got: usize },
    #[error("relation index {0} out of range")]
    RelationIndex(usize),
    #[error("edge endpoint {index} out of range for {nodes} nodes")]
    EdgeEndpoint { index: usize, nodes: usize },
    #[error("corpus row {row} (group {group_id}): {reason}")]
    CorpusRow { row: usize, group_id: String, reason: String },
    #[error("weight file: {0}")]
    WeightFile(String),
    #[error("embedder failure: {0}")]
    Embedder(String),
    #[error(transparent)]
    Graph(#[from] eig_core::CoreError),
}

pub type Result<T, E = CriticError> = std::result::Result<T, E>;
