use thiserror::Error;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error(transparent)]
    Core(#[from] eig_core::CoreError),

    #[error(transparent)]
    Critic(#[from] eig_critic::CriticError),

    #[error(transparent)]
    Replay(#[from] eig_replay::ReplayError),

    #[error("config: {0}")]
    Config(String),

    #[error("the learned controller needs critic weights")]
    MissingCritic,

    #[error("episode {group_id} round {round}: {source}")]
    Episode {
        group_id: String,
        round: u32,
        #[source]
        source: Box<RuntimeError>,
    },
}

impl RuntimeError {
    pub fn in_episode(self, group_id: &str, round: u32) -> Self {
        match self {
            e @ RuntimeError::Episode { .. } => e,
            e => RuntimeError::Episode {
                group_id: group_id.to_string(),
                round,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T, E = RuntimeError> = std::result::Result<T, E>;
