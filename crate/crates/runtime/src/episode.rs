//! Whole episodes: branch seeding, rounds until commit, backbone synthesis.

use rayon::prelude::*;

use eig_agents::NodeDraft;
use eig_core::canonical::{content_hash, serialize_string};
use eig_core::control::Decision;
use eig_core::patch::EDIT_NODE_CONFIDENCE;
use eig_core::slates::Candidate;
use eig_core::{
    extract_backbone, freeze_snapshot, init_graph, materialize_decision, merge_patches, role_branch, DecisionSource,
    IdeaGraph, InputPacket, NodeInsert, Patch, Provenance, RoleId, SignalVector,
};
use eig_replay::record::{EpisodeMeta, GuardRecord, MergeRecord, PatchRecord, RecordBody, ReplayRecord, SynthesisRecord};
use eig_replay::Trace;

use crate::critic::EncoderCache;
use crate::error::{Result, RuntimeError};
use crate::round::{RoundOutcome, Runtime};
use crate::synthesis::{synthesize_proposal, Proposal};

#[derive(Clone, Debug)]
pub struct EpisodeResult {
    /// The graph at the commit round.
    pub graph: IdeaGraph,
    pub backbone: IdeaGraph,
    pub commit_round: u32,
    pub proposal: Proposal,
    pub synthesis_fallback: bool,
    pub trace: Trace,
    /// Post-round signals, one entry per round.
    pub signals: Vec<SignalVector>,
    pub decisions: Vec<Vec<Decision>>,
}

impl EpisodeResult {
    pub fn graph_hash(&self) -> String {
        content_hash(&self.graph)
    }
}

struct Recorder {
    trace: Trace,
    episode_id: String,
    group_id: String,
}

impl Recorder {
    fn push(&mut self, round: u32, body: RecordBody) -> Result<()> {
        self.trace.push(ReplayRecord {
            episode_id: self.episode_id.clone(),
            group_id: self.group_id.clone(),
            round,
            body,
        })?;
        Ok(())
    }
}

impl Runtime {
    pub fn episode_id(&self, packet: &InputPacket) -> String {
        let c = &self.config;
        let mut id = format!("{}.{}.{}", packet.group_id, c.seed, c.controller.token());
        if c.sequential {
            id.push_str(&format!(".sequential-{}", c.role_order.token()));
        }
        id
    }

    /// Inserts every role's seed nodes into its branch in canonical role order,
    /// then applies the roles' seed links as one scripted merge. All five roles
    /// seed even when the episode restricts which roles act. Returns the link
    /// patches and a guard for every link that could not be realized.
    pub fn seed_branches(
        &self,
        graph: &mut IdeaGraph,
        packet: &InputPacket,
    ) -> Result<(usize, Vec<Patch>, Vec<GuardRecord>)> {
        let seeds: Vec<(RoleId, Vec<NodeDraft>, Vec<Candidate>)> = RoleId::ALL
            .par_iter()
            .map(|r| (*r, self.agent.seed(*r, packet), self.agent.seed_links(*r, packet)))
            .collect();
        let mut inserted = 0;
        for (role, nodes, _) in &seeds {
            for d in nodes {
                graph.insert_node(NodeInsert {
                    kind: d.kind,
                    text: d.text.clone(),
                    role: Some(*role),
                    branch: role_branch(*role),
                    confidence: EDIT_NODE_CONFIDENCE,
                    evidence: Vec::new(),
                    provenance: Provenance::Agent,
                });
                inserted += 1;
            }
        }
        let snapshot = freeze_snapshot(graph);
        let mut patches = Vec::new();
        let mut guards = Vec::new();
        for (role, _, links) in &seeds {
            for link in links {
                let action = link.to_action(*role, 0, DecisionSource::Scripted);
                match materialize_decision(&snapshot, &action) {
                    Ok(p) if !p.empty => patches.push(p),
                    Ok(_) => {}
                    Err(e) => guards.push(GuardRecord {
                        guard: "seed_link_rejected".into(),
                        role: Some(*role),
                        detail: e.to_string(),
                    }),
                }
            }
        }
        if !patches.is_empty() {
            *graph = merge_patches(graph, &patches)?;
        }
        Ok((inserted, patches, guards))
    }

    /// Runs rounds until the commit gate fires, then synthesizes the proposal.
    /// Dispatches to the sequential variant when configured.
    pub fn run_episode(&self, packet: &InputPacket) -> Result<EpisodeResult> {
        self.config.validate()?;
        self.learned_critic()?;
        let group = packet.group_id.clone();
        let mut rec = Recorder {
            trace: Trace::new(),
            episode_id: self.episode_id(packet),
            group_id: group.clone(),
        };
        rec.push(
            0,
            RecordBody::EpisodeMeta(EpisodeMeta {
                packet: packet.clone(),
                seed: self.config.seed,
                controller: self.config.controller.token().into(),
                t_max: self.config.t_max,
                sequential: self.config.sequential,
                config: serde_json::to_value(&self.config).expect("config serializes"),
            }),
        )?;

        let mut graph = init_graph(packet).map_err(|e| RuntimeError::from(e).in_episode(&group, 0))?;
        let (inserted, seed_patches, seed_guards) = self
            .seed_branches(&mut graph, packet)
            .map_err(|e| e.in_episode(&group, 0))?;
        for p in seed_patches.iter() {
            rec.push(
                0,
                RecordBody::Patch(PatchRecord {
                    role: p.role,
                    patch: p.clone(),
                }),
            )?;
        }
        if inserted > 0 || !seed_patches.is_empty() {
            rec.push(
                0,
                RecordBody::Merge(MergeRecord {
                    graph_hash: content_hash(&graph),
                    graph: serialize_string(&graph),
                }),
            )?;
        }
        for g in seed_guards {
            rec.push(0, RecordBody::Guard(g))?;
        }

        let mut cache = EncoderCache::default();
        let mut signals = Vec::new();
        let mut decisions = Vec::new();
        for round in 1..=self.config.t_max {
            let outcome: RoundOutcome = if self.config.sequential {
                self.run_round_sequential(&graph, round, packet, &mut cache)
            } else {
                self.run_round(&graph, round, packet, &mut cache)
            }
            .map_err(|e| e.in_episode(&group, round))?;
            for body in outcome.records {
                rec.push(round, body)?;
            }
            signals.push(outcome.signals);
            decisions.push(outcome.decisions);
            graph = outcome.graph;

            if outcome.committed {
                let backbone = extract_backbone(&graph);
                let synthesis = synthesize_proposal(&backbone, packet, self.synthesis_backend.as_deref());
                rec.push(
                    round,
                    RecordBody::Synthesis(SynthesisRecord {
                        backbone_hash: content_hash(&backbone),
                        proposal: serde_json::to_value(&synthesis.proposal).expect("proposal serializes"),
                        fallback: synthesis.fallback,
                    }),
                )?;
                for g in outcome.guards {
                    rec.push(round, RecordBody::Guard(g))?;
                }
                return Ok(EpisodeResult {
                    graph,
                    backbone,
                    commit_round: round,
                    proposal: synthesis.proposal,
                    synthesis_fallback: synthesis.fallback,
                    trace: rec.trace,
                    signals,
                    decisions,
                });
            }
            for g in outcome.guards {
                rec.push(round, RecordBody::Guard(g))?;
            }
        }
        unreachable!("the round budget forces a commit at t_max")
    }
}
