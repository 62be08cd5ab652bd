#![allow(dead_code)]

use eig_core::graph::{EdgeInsert, NodeInsert};
use eig_core::kinds::{ActionKind, DecisionSource, EdgeKind, NodeKind, Provenance, RoleId};
use eig_core::slates::build_slate;
use eig_core::{freeze_snapshot, materialize_decision, Evidence, IdeaGraph, Patch, SignalComponents};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn node(g: &mut IdeaGraph, kind: NodeKind, text: &str) -> String {
    g.insert_node(NodeInsert {
        kind,
        text: text.into(),
        role: None,
        branch: "init".into(),
        confidence: 0.5,
        evidence: Vec::new(),
        provenance: Provenance::Init,
    })
}

pub fn evidenced(g: &mut IdeaGraph, kind: NodeKind, text: &str) -> String {
    let id = node(g, kind, text);
    g.nodes.get_mut(&id).unwrap().evidence.push(Evidence {
        source: "ref".into(),
        snippet: format!("about {text}"),
    });
    id
}

pub fn edge(g: &mut IdeaGraph, src: &str, dst: &str, kind: EdgeKind) -> String {
    g.insert_edge(EdgeInsert {
        src: src.into(),
        dst: dst.into(),
        kind,
        role: None,
        branch: "init".into(),
        evidence_ref: None,
        note: None,
    })
    .unwrap()
    .expect("fresh edge")
}

const WORDS: &[&str] = &[
    "sparse", "attention", "routing", "memory", "graph", "retrieval", "latency", "robust", "calibrated",
    "protein", "folding", "energy",
];

fn sentence(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..6);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// A small random graph exercising every node and edge kind.
pub fn random_graph(seed: u64) -> IdeaGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = IdeaGraph::new(format!("g{seed}"));
    let n = rng.gen_range(1..=10);
    let mut ids = Vec::new();
    for _ in 0..n {
        let kind = *NodeKind::ALL.choose(&mut rng).unwrap();
        let text = sentence(&mut rng);
        let id = if rng.gen_bool(0.4) {
            evidenced(&mut g, kind, &text)
        } else {
            node(&mut g, kind, &text)
        };
        ids.push(id);
    }
    if ids.len() >= 2 {
        for _ in 0..rng.gen_range(0..=12) {
            let a = ids.choose(&mut rng).unwrap().clone();
            let b = ids.choose(&mut rng).unwrap().clone();
            if a == b {
                continue;
            }
            let kind = *EdgeKind::ALL.choose(&mut rng).unwrap();
            if let Ok(Some(e)) = g.insert_edge(EdgeInsert {
                src: a,
                dst: b,
                kind,
                role: None,
                branch: "init".into(),
                evidence_ref: None,
                note: None,
            }) {
                if kind == EdgeKind::Contradicts && rng.gen_bool(0.3) {
                    g.edges.get_mut(&e).unwrap().resolved = true;
                }
                if rng.gen_bool(0.1) {
                    g.edges.get_mut(&e).unwrap().active = false;
                }
            }
        }
    }
    for id in &ids {
        if rng.gen_bool(0.1) {
            g.nodes.get_mut(id).unwrap().active = false;
        }
    }
    g.round = rng.gen_range(0..4);
    g
}

/// Random but realizable patches for one round, including same-target collisions.
pub fn random_patches(graph: &IdeaGraph, seed: u64) -> Vec<Patch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let snap = freeze_snapshot(graph);
    let round = graph.round + 1;
    let active: Vec<String> = graph.active_nodes().map(|n| n.id.clone()).collect();
    let mut patches = Vec::new();
    for &role in RoleId::ALL {
        let (slate, _) = build_slate(&snap, role, round.max(2), &[]);
        let picks = rng.gen_range(0..=2);
        for _ in 0..picks {
            let c = slate.candidates.choose(&mut rng).unwrap();
            let action = c.to_action(role, round, DecisionSource::Scripted);
            patches.push(materialize_decision(&snap, &action).unwrap());
        }
        if active.len() >= 2 && rng.gen_bool(0.5) {
            let a = active.choose(&mut rng).unwrap().clone();
            let b = active.choose(&mut rng).unwrap().clone();
            let kind = *[
                ActionKind::AddSupportEdge,
                ActionKind::AddDependencyEdge,
                ActionKind::AddContradictionEdge,
            ]
            .choose(&mut rng)
            .unwrap();
            let mut action = eig_core::slates::Candidate::skip(role).to_action(role, round, DecisionSource::Random);
            action.kind = kind;
            action.targets = vec![a, b];
            if let Ok(p) = materialize_decision(&snap, &action) {
                patches.push(p);
            }
        }
    }
    patches
}

/// Brute-force signal components, counted without the library's helpers.
pub fn oracle_components(g: &IdeaGraph) -> SignalComponents {
    let active = |id: &str| g.nodes.get(id).map(|n| n.active).unwrap_or(false);
    let edges: Vec<_> = g
        .edges
        .values()
        .filter(|e| e.active && active(&e.src) && active(&e.dst))
        .collect();
    let frac = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };

    let focus: Vec<_> = g
        .nodes
        .values()
        .filter(|n| {
            n.active
                && matches!(
                    n.kind,
                    NodeKind::Hypothesis | NodeKind::Method | NodeKind::NoveltyClaim | NodeKind::EvalPlan
                )
        })
        .collect();
    let mut sup = 0;
    let mut evi = 0;
    for n in &focus {
        if edges
            .iter()
            .any(|e| e.kind == EdgeKind::Supports && (e.src == n.id || e.dst == n.id))
        {
            sup += 1;
        }
        if !n.evidence.is_empty() {
            evi += 1;
        }
    }

    let contra: Vec<_> = edges.iter().filter(|e| e.kind == EdgeKind::Contradicts).collect();
    let unresolved = contra.iter().filter(|e| !e.resolved).count();
    let mut targets: Vec<&str> = contra.iter().map(|e| e.dst.as_str()).collect();
    targets.sort();
    targets.dedup();
    let open = targets
        .iter()
        .filter(|t| !edges.iter().any(|e| e.kind == EdgeKind::Repairs && e.dst == **t))
        .count();

    let slot_kinds = [NodeKind::Problem, NodeKind::Hypothesis, NodeKind::Method, NodeKind::EvalPlan];
    let slots: Vec<_> = g
        .nodes
        .values()
        .filter(|n| n.active && slot_kinds.contains(&n.kind))
        .collect();
    let is_slot = |id: &str| slots.iter().any(|n| n.id == id);
    let present: Vec<NodeKind> = slot_kinds
        .iter()
        .copied()
        .filter(|k| slots.iter().any(|n| n.kind == *k))
        .collect();
    let chain: Vec<_> = edges
        .iter()
        .filter(|e| {
            matches!(e.kind, EdgeKind::Supports | EdgeKind::DependsOn) && is_slot(&e.src) && is_slot(&e.dst)
        })
        .collect();
    let deps: Vec<_> = slots.iter().filter(|n| n.kind != NodeKind::Problem).collect();
    let linked = deps
        .iter()
        .filter(|n| chain.iter().any(|e| e.src == n.id))
        .count();

    let q_conn = if slots.is_empty() {
        0.0
    } else {
        let mut best = 0;
        let mut covers_all = false;
        for start in &slots {
            let mut reach = vec![start.id.clone()];
            loop {
                let before = reach.len();
                for e in &chain {
                    if reach.contains(&e.src) && !reach.contains(&e.dst) {
                        reach.push(e.dst.clone());
                    } else if reach.contains(&e.dst) && !reach.contains(&e.src) {
                        reach.push(e.src.clone());
                    }
                }
                if reach.len() == before {
                    break;
                }
            }
            best = best.max(reach.len());
            if present
                .iter()
                .all(|k| reach.iter().any(|id| g.nodes[id].kind == *k))
            {
                covers_all = true;
            }
        }
        if covers_all {
            1.0
        } else {
            frac(best, slots.len())
        }
    };

    SignalComponents {
        s_sup: frac(sup, focus.len()),
        s_evi: frac(evi, focus.len()),
        l_edge: frac(unresolved, contra.len()),
        l_open: frac(open, targets.len()),
        q_slot: present.len() as f64 / 4.0,
        q_dep: frac(linked, deps.len()),
        q_conn,
    }
}
