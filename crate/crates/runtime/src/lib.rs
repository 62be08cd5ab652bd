//! The round runtime: role activation, frozen-snapshot parallel rounds,
//! controller selection, deterministic merge, commit gating and synthesis,
//! plus the sequential-update variant.

pub mod activation;
pub mod config;
pub mod critic;
pub mod episode;
pub mod error;
pub mod round;
pub mod synthesis;

pub use activation::{activate_roles, activate_roles_with, ActivationMap};
pub use config::{ConfigFile, ControllerKind, RoleOrder, RunConfig};
pub use critic::{EncoderCache, LearnedCritic};
pub use episode::EpisodeResult;
pub use error::{Result, RuntimeError};
pub use round::{RoundOutcome, Runtime};
pub use synthesis::{synthesize_proposal, template_proposal, Proposal, Synthesis};
