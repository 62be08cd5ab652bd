#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use eig_agents::ScriptedAgent;
use eig_core::graph::{EdgeInsert, NodeInsert};
use eig_core::{EdgeKind, Evidence, IdeaGraph, InputPacket, NodeKind, Provenance};
use eig_runtime::{ConfigFile, RunConfig, Runtime};

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

/// Packet, scripted agent and run configuration of a bundled scenario.
pub fn scenario(name: &str) -> (InputPacket, Arc<ScriptedAgent>, RunConfig) {
    let dir = scenario_dir();
    let packet = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.packet.json"))).unwrap()).unwrap();
    let agent = ScriptedAgent::load(&dir.join(format!("{name}.script.jsonl"))).unwrap();
    let config = ConfigFile::load(&dir.join(format!("{name}.toml"))).unwrap().run_config();
    (packet, Arc::new(agent), config)
}

pub fn runtime(name: &str, edit: impl FnOnce(&mut RunConfig)) -> (InputPacket, Runtime) {
    let (packet, agent, mut config) = scenario(name);
    edit(&mut config);
    (packet, Runtime::new(config, agent))
}

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
        source: format!("src-{text}"),
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

/// Fully evidenced and supported problem-hypothesis-method-evaluation chain.
/// Returns the graph and the slot ids in chain order.
pub fn mature_chain() -> (IdeaGraph, [String; 4]) {
    let mut g = IdeaGraph::new("mature");
    let p = node(&mut g, NodeKind::Problem, "problem");
    let h = evidenced(&mut g, NodeKind::Hypothesis, "hypothesis");
    let m = evidenced(&mut g, NodeKind::Method, "method");
    let e = evidenced(&mut g, NodeKind::EvalPlan, "evaluation");
    edge(&mut g, &h, &p, EdgeKind::Supports);
    edge(&mut g, &m, &h, EdgeKind::Supports);
    edge(&mut g, &e, &m, EdgeKind::Supports);
    (g, [p, h, m, e])
}
