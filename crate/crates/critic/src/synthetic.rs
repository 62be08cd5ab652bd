//! Separable synthetic corpora for sanity-checking training.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eig_core::canonical::serialize_string;
use eig_core::graph::{Evidence, NodeInsert};
use eig_core::slates::{validate_slate, Candidate, CandidateOrigin};
use eig_core::{freeze_snapshot, ActionKind, ActionPayload, IdeaGraph, NodeKind, Provenance, RoleId};

use crate::corpus::{CommitExample, CommitLabel, EditExample};

const FILLER: &[&str] = &[
    "routing", "memory", "sparse", "latency", "protein", "energy", "token", "cache", "schedule", "kernel", "corpus",
    "vision", "speech", "policy", "reward", "graph",
];
/// Tokens that mark the positive candidate's evidence.
pub const POSITIVE_MARKER: &str = "decisive replicated measurement";

fn words(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| *FILLER.choose(rng).expect("non-empty")).collect::<Vec<_>>().join(" ")
}

fn small_graph(rng: &mut ChaCha8Rng, group: &str, hypotheses: usize) -> (IdeaGraph, Vec<String>) {
    let mut g = IdeaGraph::new(group);
    let add = |g: &mut IdeaGraph, kind, text: String| {
        g.insert_node(NodeInsert {
            kind,
            text,
            role: None,
            branch: "init".into(),
            confidence: 0.5,
            evidence: Vec::new(),
            provenance: Provenance::Init,
        })
    };
    add(&mut g, NodeKind::Problem, words(rng, 4));
    let ids = (0..hypotheses)
        .map(|_| add(&mut g, NodeKind::Hypothesis, words(rng, 3)))
        .collect();
    (g, ids)
}

/// Slates of attach_evidence candidates where exactly one carries the marker evidence.
pub fn separable_edit_corpus(count: usize, seed: u64) -> Vec<EditExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let group = format!("synthetic-{}", i % 97);
            let k = rng.gen_range(3..=6);
            let (g, ids) = small_graph(&mut rng, &group, k);
            let snap = freeze_snapshot(&g);
            let role = *RoleId::ALL.choose(&mut rng).expect("non-empty");
            let winner = rng.gen_range(0..k);
            let candidates: Vec<Candidate> = ids
                .iter()
                .enumerate()
                .map(|(j, id)| {
                    let snippet = if j == winner {
                        format!("{POSITIVE_MARKER} {}", words(&mut rng, 2))
                    } else {
                        words(&mut rng, 5)
                    };
                    Candidate::new(
                        ActionKind::AttachEvidence,
                        vec![id.clone()],
                        ActionPayload::with_evidence(Evidence {
                            source: format!("ref-{j}"),
                            snippet,
                        }),
                        role,
                        CandidateOrigin::Heuristic,
                    )
                })
                .collect();
            let slate = validate_slate(&candidates, &snap, role, 2);
            let labels = slate
                .candidates
                .iter()
                .map(|c| {
                    u8::from(
                        c.payload
                            .evidence
                            .as_ref()
                            .is_some_and(|e| e.snippet.starts_with(POSITIVE_MARKER)),
                    )
                })
                .collect();
            EditExample {
                group_id: group,
                episode_id: format!("synthetic-{seed}-{i}"),
                round: 2,
                role,
                snapshot: serialize_string(&g),
                snapshot_hash: snap.hash().to_string(),
                candidates: slate.candidates,
                labels,
            }
        })
        .collect()
}

/// Post-round states labeled commit exactly when the maturity feature sits above 0.5, with a margin on both sides.
pub fn separable_commit_corpus(count: usize, seed: u64) -> Vec<CommitExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let group = format!("synthetic-{}", i % 97);
            let k = rng.gen_range(1..=4);
            let (g, _) = small_graph(&mut rng, &group, k);
            let commit = rng.gen_bool(0.5);
            let maturity = if commit {
                rng.gen_range(0.6..=0.95)
            } else {
                rng.gen_range(0.05..=0.4)
            };
            CommitExample {
                group_id: group,
                episode_id: format!("synthetic-{seed}-{i}"),
                round: rng.gen_range(1..=6),
                graph: serialize_string(&g),
                features: [rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0), maturity],
                label: if commit { CommitLabel::Commit } else { CommitLabel::Continue },
            }
        })
        .collect()
}
