//! Shared-encoder two-head graph critic.
//!
//! A relation-aware message-passing encoder embeds the idea graph; the edit
//! head scores slate candidates on the pre-round snapshot and the commit head
//! scores the realized post-round graph. Gradients are derived by hand and
//! verified against central finite differences.

pub mod corpus;
pub mod embed;
pub mod error;
pub mod features;
pub mod gradcheck;
pub mod layout;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod params;
pub mod synthetic;
pub mod train;
pub mod weights;

pub use corpus::{CommitExample, CommitLabel, EditExample};
pub use embed::{Embedder, HashEmbedder};
pub use error::{CriticError, Result};
pub use features::{candidate_input, commit_features, featurize, CandidateInput, GraphBatchInput};
pub use gradcheck::{grad_check, GradCheckReport, GradInstance};
pub use loss::{CommitSample, SlateSample};
pub use model::{encode, score_commit, score_edits};
pub use params::CriticParams;
pub use train::{train, EpochMetrics, TrainConfig, TrainData, TrainOutcome};
