mod common;

use std::sync::Arc;

use common::{runtime, scenario};
use eig_agents::{Agent, AgentRequest, Proposals};
use eig_core::canonical::{content_hash, deserialize_str};
use eig_core::control::Decision;
use eig_core::{
    ActionKind,     freeze_snapshot, graph_signals, init_graph, materialize_decision, merge_patches, DecisionSource, InputPacket, Patch, RoleId,
};
use eig_replay::record::RecordBody;
use eig_replay::Trace;
use eig_runtime::{ControllerKind, EncoderCache, RuntimeError};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn merges(trace: &Trace) -> Vec<(u32, String, String)> {
    trace
        .records()
        .iter()
        .filter_map(|r| match &r.body {
            RecordBody::Merge(m) => Some((r.round, m.graph_hash.clone(), m.graph.clone())),
            _ => None,
        })
        .collect()
}

fn round_patches(trace: &Trace, round: u32) -> Vec<Patch> {
    trace
        .round(round)
        .filter_map(|r| match &r.body {
            RecordBody::Patch(p) => Some(p.patch.clone()),
            _ => None,
        })
        .collect()
}

fn round_starts(trace: &Trace) -> usize {
    trace
        .records()
        .iter()
        .filter(|r| matches!(r.body, RecordBody::RoundStart(_)))
        .count()
}

fn guards(trace: &Trace) -> Vec<String> {
    trace
        .records()
        .iter()
        .filter_map(|r| match &r.body {
            RecordBody::Guard(g) => Some(g.guard.clone()),
            _ => None,
        })
        .collect()
}

#[test]
fn phased_scenario_commits_at_round_four() {
    let (packet, rt) = runtime("phased", |_| {});
    let res = rt.run_episode(&packet).unwrap();
    assert_eq!(res.commit_round, 4);
    assert_eq!(round_starts(&res.trace), 4);
    assert!(res.decisions[0]
        .iter()
        .all(|d| d.candidate.kind.allowed_in_round(1) && d.source == DecisionSource::Heuristic));
    for round in &res.decisions[1..3] {
        assert!(round
            .iter()
            .all(|d| matches!(d.candidate.kind, ActionKind::ProposeRepair | ActionKind::AttachEvidence)));
    }
    assert!(res.signals[0].contradiction_load > 0.0);
    assert_eq!(res.signals[1].contradiction_load, 0.0);
    assert!(res.signals[3].maturity >= 0.75);
    assert!(res.signals.windows(2).all(|w| w[1].grounding >= w[0].grounding));
}

#[test]
fn single_round_budget_forces_commit() {
    let (packet, rt) = runtime("phased", |c| c.t_max = 1);
    let res = rt.run_episode(&packet).unwrap();
    assert_eq!(res.commit_round, 1);
    assert_eq!(round_starts(&res.trace), 1);
    let eval = res
        .trace
        .records()
        .iter()
        .find_map(|r| match &r.body {
            RecordBody::CommitEval(c) => Some(c.clone()),
            _ => None,
        })
        .unwrap();
    assert!(eval.committed && eval.forced && eval.teacher_label);
    assert!(!res.proposal.problem.is_empty());
}

#[test]
fn same_inputs_give_the_same_trace() {
    let (packet, rt) = runtime("phased", |_| {});
    let a = rt.run_episode(&packet).unwrap();
    let b = rt.run_episode(&packet).unwrap();
    assert_eq!(a.trace.content_hash(), b.trace.content_hash());
    assert_eq!(a.trace.to_jsonl(), b.trace.to_jsonl());
    assert_eq!(a.proposal, b.proposal);
}

#[test]
fn recorded_patches_replay_to_the_recorded_graphs() {
    let (packet, rt) = runtime("phased", |_| {});
    let res = rt.run_episode(&packet).unwrap();
    let recorded = merges(&res.trace);
    let seeded = recorded.iter().find(|(r, _, _)| *r == 0).unwrap();
    let mut graph = deserialize_str(&seeded.2).unwrap();
    for round in 1..=3 {
        graph = merge_patches(&graph, &round_patches(&res.trace, round)).unwrap();
        graph.round = round;
        let (_, hash, text) = recorded.iter().rfind(|(r, _, _)| *r == round).unwrap();
        assert_eq!(&content_hash(&graph), hash, "round {round}");
        assert_eq!(&eig_core::canonical::serialize_string(&graph), text);
    }
}

#[test]
fn every_slate_reads_the_round_snapshot() {
    let (packet, rt) = runtime("phased", |_| {});
    let res = rt.run_episode(&packet).unwrap();
    for round in res.trace.rounds().into_iter().filter(|r| *r > 0) {
        let start = res
            .trace
            .round(round)
            .find_map(|r| match &r.body {
                RecordBody::RoundStart(s) => Some(s.snapshot_hash.clone()),
                _ => None,
            })
            .unwrap();
        for r in res.trace.round(round) {
            if let RecordBody::Slate(s) = &r.body {
                assert_eq!(s.slate.snapshot_hash, start);
            }
        }
    }
}

#[test]
fn proposal_provenance_resolves_in_backbone() {
    for name in ["phased", "order"] {
        let (packet, rt) = runtime(name, |_| {});
        let res = rt.run_episode(&packet).unwrap();
        for (section, ids) in &res.proposal.provenance {
            for id in ids {
                assert!(res.backbone.is_active_node(id), "{section} cites {id}");
            }
        }
        for section in ["problem", "hypothesis", "method", "evaluation"] {
            assert!(!res.proposal.section(section).unwrap().is_empty(), "{name} {section}");
        }
    }
}

#[test]
fn all_skip_round_leaves_graph_unchanged() {
    let (packet, agent, _) = scenario("phased");
    let mut graph = init_graph(&packet).unwrap();
    let (_, rt) = runtime("phased", |_| {});
    rt.seed_branches(&mut graph, &packet).unwrap();
    let snapshot = freeze_snapshot(&graph);
    let mut patches = Vec::new();
    for role in RoleId::ALL.iter().copied() {
        let slate = rt.role_slate(&snapshot, role, 1, &packet).slate;
        let skip = Decision::from_slate(&slate, slate.skip_index(), 0.0, DecisionSource::Heuristic);
        patches.push(materialize_decision(&snapshot, &skip.candidate.to_action(role, 1, skip.source)).unwrap());
    }
    assert!(patches.iter().all(|p| p.empty));
    let merged = merge_patches(&graph, &patches).unwrap();
    assert_eq!(merged, graph);
    assert_eq!(graph_signals(&merged), graph_signals(&graph));
    drop(agent);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gather_order_never_changes_the_merge(seed in any::<u64>()) {
        let (packet, rt) = runtime("order", |_| {});
        let res = rt.run_episode(&packet).unwrap();
        let recorded = merges(&res.trace);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for round in 1..=res.commit_round {
            let before = deserialize_str(&recorded.iter().rfind(|(r, _, _)| *r == round - 1).unwrap().2).unwrap();
            let mut patches = round_patches(&res.trace, round);
            patches.shuffle(&mut rng);
            let mut merged = merge_patches(&before, &patches).unwrap();
            merged.round = round;
            let expected = &recorded.iter().rfind(|(r, _, _)| *r == round).unwrap().1;
            prop_assert_eq!(&content_hash(&merged), expected);
        }
    }
}

#[test]
fn round_must_follow_the_graph() {
    let (packet, rt) = runtime("phased", |_| {});
    let graph = init_graph(&packet).unwrap();
    let err = rt.run_round(&graph, 3, &packet, &mut EncoderCache::default()).unwrap_err();
    assert!(matches!(err, RuntimeError::Config(_)), "{err}");
}

struct Failing;

impl Agent for Failing {
    fn propose(&self, _request: &AgentRequest) -> Proposals {
        Proposals::failed("backend exhausted after 3 attempts")
    }
}

#[test]
fn failed_agent_falls_back_to_heuristic_slate() {
    let packet: InputPacket = scenario("phased").0;
    let (_, mut rt) = runtime("phased", |c| c.t_max = 2);
    rt.agent = Arc::new(Failing);
    let res = rt.run_episode(&packet).unwrap();
    let g = guards(&res.trace);
    assert!(g.iter().any(|g| g == "agent_failure"), "{g:?}");
    assert!(res.decisions.iter().flatten().all(|d| d.source == DecisionSource::Heuristic));
    let slates = res
        .trace
        .records()
        .iter()
        .filter(|r| matches!(&r.body, RecordBody::Slate(s) if s.agent_failure.is_some()))
        .count();
    assert!(slates > 0);
}

#[test]
fn random_controller_is_seeded() {
    let run = |seed| {
        let (packet, rt) = runtime("phased", |c| {
            c.controller = ControllerKind::Random;
            c.seed = seed;
        });
        rt.run_episode(&packet).unwrap()
    };
    let a = run(3);
    assert_eq!(a.trace.content_hash(), run(3).trace.content_hash());
    assert!(a.decisions.iter().flatten().all(|d| d.source == DecisionSource::Random));
}

#[test]
fn rounds_never_exceed_budget() {
    for t_max in 1..=6 {
        for name in ["phased", "order"] {
            let (packet, rt) = runtime(name, |c| c.t_max = t_max);
            let res = rt.run_episode(&packet).unwrap();
            assert!(res.commit_round <= t_max);
            assert_eq!(round_starts(&res.trace), res.commit_round as usize);
            assert_eq!(res.signals.len(), res.commit_round as usize);
        }
    }
}
