//! Hand-built graphs with component values counted on paper.

use eig_core::kinds::{EdgeKind, NodeKind};
use eig_core::{IdeaGraph, SignalComponents};

use crate::fixtures::{edge, evidenced, node};

fn comps(s_sup: f64, s_evi: f64, l_edge: f64, l_open: f64, q_slot: f64, q_dep: f64, q_conn: f64) -> SignalComponents {
    SignalComponents {
        s_sup,
        s_evi,
        l_edge,
        l_open,
        q_slot,
        q_dep,
        q_conn,
    }
}

pub fn hand_built() -> Vec<(&'static str, IdeaGraph, SignalComponents)> {
    let mut out = Vec::new();

    out.push(("empty", IdeaGraph::new("empty"), comps(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)));

    let mut g = IdeaGraph::new("lone-problem");
    node(&mut g, NodeKind::Problem, "p");
    out.push(("lone problem", g, comps(0.0, 0.0, 0.0, 0.0, 0.25, 0.0, 1.0)));

    let mut g = IdeaGraph::new("partial");
    let p = node(&mut g, NodeKind::Problem, "p");
    let h = evidenced(&mut g, NodeKind::Hypothesis, "h");
    node(&mut g, NodeKind::Method, "m");
    edge(&mut g, &h, &p, EdgeKind::Supports);
    out.push(("partial chain", g, comps(0.5, 0.5, 0.0, 0.0, 0.75, 0.5, 2.0 / 3.0)));

    let mut g = IdeaGraph::new("contested");
    let p = evidenced(&mut g, NodeKind::Problem, "p");
    let h1 = evidenced(&mut g, NodeKind::Hypothesis, "h1");
    let h2 = evidenced(&mut g, NodeKind::Hypothesis, "h2");
    edge(&mut g, &h1, &p, EdgeKind::Supports);
    edge(&mut g, &h2, &p, EdgeKind::Supports);
    edge(&mut g, &h1, &h2, EdgeKind::Contradicts);
    out.push(("open contradiction", g, comps(1.0, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0)));

    let mut g = IdeaGraph::new("half-resolved");
    let a = node(&mut g, NodeKind::Hypothesis, "a");
    let b = node(&mut g, NodeKind::Hypothesis, "b");
    let c = node(&mut g, NodeKind::NoveltyClaim, "c");
    let d = node(&mut g, NodeKind::NoveltyClaim, "d");
    let done = edge(&mut g, &a, &b, EdgeKind::Contradicts);
    g.edges.get_mut(&done).unwrap().resolved = true;
    let fix = node(&mut g, NodeKind::Repair, "fix");
    edge(&mut g, &fix, &b, EdgeKind::Repairs);
    edge(&mut g, &c, &d, EdgeKind::Contradicts);
    out.push(("half resolved", g, comps(0.0, 0.0, 0.5, 0.5, 0.25, 0.0, 1.0)));

    let mut g = IdeaGraph::new("mature");
    let p = evidenced(&mut g, NodeKind::Problem, "p");
    let h = evidenced(&mut g, NodeKind::Hypothesis, "h");
    let m = evidenced(&mut g, NodeKind::Method, "m");
    let e = evidenced(&mut g, NodeKind::EvalPlan, "e");
    edge(&mut g, &h, &p, EdgeKind::Supports);
    edge(&mut g, &m, &h, EdgeKind::Supports);
    edge(&mut g, &e, &m, EdgeKind::Supports);
    out.push(("mature chain", g, comps(1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0)));

    let mut g = IdeaGraph::new("inactive-node");
    let p = node(&mut g, NodeKind::Problem, "p");
    let h = evidenced(&mut g, NodeKind::Hypothesis, "h");
    edge(&mut g, &h, &p, EdgeKind::Supports);
    g.nodes.get_mut(&h).unwrap().active = false;
    out.push(("inactive hypothesis", g, comps(0.0, 0.0, 0.0, 0.0, 0.25, 0.0, 1.0)));

    let mut g = IdeaGraph::new("inactive-edge");
    let p = node(&mut g, NodeKind::Problem, "p");
    let h = evidenced(&mut g, NodeKind::Hypothesis, "h");
    let e = edge(&mut g, &h, &p, EdgeKind::Supports);
    g.edges.get_mut(&e).unwrap().active = false;
    out.push(("inactive edge", g, comps(0.0, 1.0, 0.0, 0.0, 0.5, 0.0, 0.5)));

    let mut g = IdeaGraph::new("dependencies");
    let p = node(&mut g, NodeKind::Problem, "p");
    let h = node(&mut g, NodeKind::Hypothesis, "h");
    let m = node(&mut g, NodeKind::Method, "m");
    let e = node(&mut g, NodeKind::EvalPlan, "e");
    edge(&mut g, &h, &p, EdgeKind::Supports);
    edge(&mut g, &m, &h, EdgeKind::DependsOn);
    edge(&mut g, &e, &m, EdgeKind::DependsOn);
    out.push(("dependency chain", g, comps(1.0 / 3.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0)));

    let mut g = IdeaGraph::new("repaired-target");
    node(&mut g, NodeKind::Problem, "p");
    let m = node(&mut g, NodeKind::Method, "m");
    let r = node(&mut g, NodeKind::Risk, "r");
    let x = node(&mut g, NodeKind::Repair, "x");
    edge(&mut g, &r, &m, EdgeKind::Contradicts);
    edge(&mut g, &x, &m, EdgeKind::Repairs);
    out.push(("repaired but unresolved", g, comps(0.0, 0.0, 1.0, 0.0, 0.5, 0.0, 0.5)));

    out
}
