//! Deterministic agents replaying a script keyed by (group, round, role).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use eig_core::slates::Candidate;
use eig_core::{InputPacket, RoleId};

use crate::agent::{Agent, Proposals};
use crate::error::{AgentError, Result};
use crate::grammar::{parse_reply, NodeDraft};
use crate::request::AgentRequest;

/// Matches any group id in a script entry.
pub const ANY_GROUP: &str = "*";

/// One script line. Round 0 entries carry branch seeds in `nodes` and
/// relations among them in `actions`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    pub group_id: String,
    pub round: u32,
    pub role: RoleId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<NodeDraft>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScriptedAgent {
    entries: BTreeMap<(String, u32, RoleId), ScriptEntry>,
}

impl ScriptedAgent {
    /// Later entries for the same key extend earlier ones.
    pub fn from_entries(entries: impl IntoIterator<Item = ScriptEntry>) -> Self {
        let mut map: BTreeMap<(String, u32, RoleId), ScriptEntry> = BTreeMap::new();
        for e in entries {
            match map.get_mut(&(e.group_id.clone(), e.round, e.role)) {
                Some(existing) => {
                    existing.actions.extend(e.actions);
                    existing.nodes.extend(e.nodes);
                }
                None => {
                    map.insert((e.group_id.clone(), e.round, e.role), e);
                }
            }
        }
        ScriptedAgent { entries: map }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ScriptEntry = serde_json::from_str(line).map_err(|e| AgentError::Script {
                path: origin.to_string(),
                reason: format!("line {}: {e}", i + 1),
            })?;
            entries.push(entry);
        }
        Ok(Self::from_entries(entries))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AgentError::Script {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    fn entry(&self, group: &str, round: u32, role: RoleId) -> Option<&ScriptEntry> {
        self.entries
            .get(&(group.to_string(), round, role))
            .or_else(|| self.entries.get(&(ANY_GROUP.to_string(), round, role)))
    }
}

impl Agent for ScriptedAgent {
    fn propose(&self, request: &AgentRequest) -> Proposals {
        let Some(entry) = self.entry(&request.group_id, request.round, request.role) else {
            return Proposals::default();
        };
        let parsed = parse_reply(&entry.actions.join("\n"), request.role);
        Proposals {
            candidates: parsed.candidates,
            dropped: parsed.dropped,
            failure: None,
        }
    }

    fn seed(&self, role: RoleId, packet: &InputPacket) -> Vec<NodeDraft> {
        self.entry(&packet.group_id, 0, role)
            .map(|e| e.nodes.clone())
            .unwrap_or_default()
    }

    fn seed_links(&self, role: RoleId, packet: &InputPacket) -> Vec<Candidate> {
        self.entry(&packet.group_id, 0, role)
            .map(|e| parse_reply(&e.actions.join("\n"), role).candidates)
            .unwrap_or_default()
    }
}
