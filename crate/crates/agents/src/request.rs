use serde::{Deserialize, Serialize};

use eig_core::canonical::serialize_string;
use eig_core::{ActionKind, InputPacket, Reference, RoleId, Snapshot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Structure,
    Repair,
}

impl Phase {
    pub fn of_round(round: u32) -> Self {
        if round <= 1 {
            Phase::Structure
        } else {
            Phase::Repair
        }
    }

    /// Edit kinds an agent may emit in this phase, skip included.
    pub fn vocabulary(self) -> Vec<ActionKind> {
        let round = match self {
            Phase::Structure => 1,
            Phase::Repair => 2,
        };
        ActionKind::ALL
            .iter()
            .copied()
            .filter(|k| k.allowed_in_round(round))
            .collect()
    }
}

/// Everything a role sees when proposing edits for one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentRequest {
    pub role: RoleId,
    pub round: u32,
    pub phase: Phase,
    pub group_id: String,
    pub topic: String,
    pub keywords: Vec<String>,
    pub references: Vec<Reference>,
    pub snapshot: String,
    pub snapshot_hash: String,
}

impl AgentRequest {
    pub fn new(snapshot: &Snapshot, role: RoleId, round: u32, packet: &InputPacket) -> Self {
        AgentRequest {
            role,
            round,
            phase: Phase::of_round(round),
            group_id: packet.group_id.clone(),
            topic: packet.topic.clone(),
            keywords: packet.keywords.clone(),
            references: packet.references.clone(),
            snapshot: serialize_string(snapshot.graph()),
            snapshot_hash: snapshot.hash().to_string(),
        }
    }
}
