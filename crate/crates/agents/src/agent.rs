use eig_core::slates::Candidate;
use eig_core::{InputPacket, RoleId};

use crate::grammar::NodeDraft;
use crate::request::AgentRequest;

/// Raw suggestions from one role for one round, before slate validation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Proposals {
    pub candidates: Vec<Candidate>,
    /// Reply lines rejected by the grammar.
    pub dropped: usize,
    /// Set when the backend gave up; the runtime then falls back to heuristic candidates.
    pub failure: Option<String>,
}

impl Proposals {
    pub fn failed(reason: impl Into<String>) -> Self {
        Proposals {
            failure: Some(reason.into()),
            ..Proposals::default()
        }
    }
}

/// A source of role-local edit suggestions. One agent value serves every role;
/// the role travels in the request.
pub trait Agent: Send + Sync {
    fn propose(&self, request: &AgentRequest) -> Proposals;

    /// Nodes the role contributes to its branch before the first round.
    fn seed(&self, _role: RoleId, _packet: &InputPacket) -> Vec<NodeDraft> {
        Vec::new()
    }

    /// Relations among seeded nodes, applied once every role has seeded.
    fn seed_links(&self, _role: RoleId, _packet: &InputPacket) -> Vec<Candidate> {
        Vec::new()
    }
}
