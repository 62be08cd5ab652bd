use std::sync::Arc;

use eig_core::{InputPacket, RoleId};

use crate::agent::{Agent, Proposals};
use crate::backend::TextBackend;
use crate::grammar::{parse_reply, parse_seed_reply, NodeDraft};
use crate::prompt::{build_role_prompt, build_seed_prompt};
use crate::request::AgentRequest;

/// Role agent backed by a chat-completion model.
#[derive(Clone)]
pub struct ChatAgent {
    backend: Arc<dyn TextBackend>,
}

impl ChatAgent {
    pub fn new(backend: Arc<dyn TextBackend>) -> Self {
        ChatAgent { backend }
    }
}

impl Agent for ChatAgent {
    fn propose(&self, request: &AgentRequest) -> Proposals {
        match self.backend.complete(&build_role_prompt(request.role, request)) {
            Ok(reply) => {
                let parsed = parse_reply(&reply, request.role);
                Proposals {
                    candidates: parsed.candidates,
                    dropped: parsed.dropped,
                    failure: None,
                }
            }
            Err(e) => {
                tracing::warn!(role = %request.role, round = request.round, error = %e, "agent backend failed");
                Proposals::failed(e.to_string())
            }
        }
    }

    fn seed(&self, role: RoleId, packet: &InputPacket) -> Vec<NodeDraft> {
        match self.backend.complete(&build_seed_prompt(role, packet)) {
            Ok(reply) => parse_seed_reply(&reply),
            Err(e) => {
                tracing::warn!(%role, error = %e, "seed request failed");
                Vec::new()
            }
        }
    }
}
