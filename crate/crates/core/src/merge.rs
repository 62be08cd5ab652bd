//! Deterministic realization of a round's selected patches.
//!
//! Non-empty patches are applied in the fixed action-kind order, then in
//! canonical role order. Patches with the same kind and the same sorted target
//! tuple collide; only the last one in that order is applied. The output never
//! depends on the order the patch set arrived in.

use std::collections::BTreeMap;

use crate::canonical::{canonical_json, sha256_hex};
use crate::error::{CoreError, Result};
use crate::graph::{role_branch, EdgeInsert, IdeaGraph, NodeInsert};
use crate::kinds::ActionKind;
use crate::patch::{Addition, FieldChange, NodeRef, Patch};

type OverwriteKey = (ActionKind, Vec<String>);

fn overwrite_key(patch: &Patch) -> OverwriteKey {
    let mut targets = patch.targets.clone();
    targets.sort();
    (patch.kind, targets)
}

/// Orders patches for realization and drops those overwritten by a later one.
pub fn realization_order(patches: &[Patch]) -> Vec<&Patch> {
    let mut keyed: Vec<(usize, usize, String, &Patch)> = patches
        .iter()
        .filter(|p| !p.empty)
        .map(|p| {
            (
                p.kind.merge_rank(),
                p.role.canonical_rank(),
                sha256_hex(canonical_json(p).as_bytes()),
                p,
            )
        })
        .collect();
    keyed.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));

    let mut last: BTreeMap<OverwriteKey, usize> = BTreeMap::new();
    for (i, (_, _, _, p)) in keyed.iter().enumerate() {
        last.insert(overwrite_key(p), i);
    }
    keyed
        .iter()
        .enumerate()
        .filter(|(i, (_, _, _, p))| last[&overwrite_key(p)] == *i)
        .map(|(_, (_, _, _, p))| *p)
        .collect()
}

fn check_references(graph: &IdeaGraph, patch: &Patch) -> Result<()> {
    let fail = |reason: String| CoreError::Merge {
        role: patch.role,
        kind: patch.kind,
        reason,
    };
    for add in &patch.additions {
        if let Addition::Edge { src, dst, .. } = add {
            for end in [src, dst] {
                match end {
                    NodeRef::Existing(id) if !graph.nodes.contains_key(id) => {
                        return Err(fail(format!("node {id} is absent from the graph")));
                    }
                    NodeRef::Added(i)
                        if !matches!(patch.additions.get(*i), Some(Addition::Node { .. })) =>
                    {
                        return Err(fail(format!("addition {i} is not a node")));
                    }
                    _ => {}
                }
            }
        }
    }
    for m in &patch.mutations {
        let present = match m.change {
            FieldChange::Evidence(_) => graph.nodes.contains_key(&m.target),
            FieldChange::Resolved(_) => graph.edges.contains_key(&m.target),
        };
        if !present {
            return Err(fail(format!("target {} is absent from the graph", m.target)));
        }
    }
    Ok(())
}

fn apply(graph: &mut IdeaGraph, patch: &Patch) -> Result<()> {
    let branch = role_branch(patch.role);
    let mut added: Vec<Option<String>> = Vec::with_capacity(patch.additions.len());
    for add in &patch.additions {
        match add {
            Addition::Node {
                kind,
                text,
                confidence,
                provenance,
            } => {
                let id = graph.insert_node(NodeInsert {
                    kind: *kind,
                    text: text.clone(),
                    role: Some(patch.role),
                    branch: branch.clone(),
                    confidence: *confidence,
                    evidence: Vec::new(),
                    provenance: *provenance,
                });
                added.push(Some(id));
            }
            Addition::Edge {
                src,
                dst,
                kind,
                evidence_ref,
                note,
            } => {
                let resolve = |r: &NodeRef| match r {
                    NodeRef::Existing(id) => id.clone(),
                    NodeRef::Added(i) => added[*i].clone().expect("checked node addition"),
                };
                let (src, dst) = (resolve(src), resolve(dst));
                graph
                    .insert_edge(EdgeInsert {
                        src,
                        dst,
                        kind: *kind,
                        role: Some(patch.role),
                        branch: branch.clone(),
                        evidence_ref: evidence_ref.clone(),
                        note: note.clone(),
                    })
                    .map_err(|e| CoreError::Merge {
                        role: patch.role,
                        kind: patch.kind,
                        reason: e.to_string(),
                    })?;
                added.push(None);
            }
        }
    }
    for m in &patch.mutations {
        match &m.change {
            FieldChange::Evidence(ev) => {
                let node = graph.nodes.get_mut(&m.target).expect("checked target");
                node.evidence.push(ev.clone());
            }
            FieldChange::Resolved(v) => {
                graph.edges.get_mut(&m.target).expect("checked target").resolved = *v;
            }
        }
    }
    graph.log_action(patch.action());
    Ok(())
}

/// Applies a round's patches to `graph`, returning the realized graph.
pub fn merge_patches(graph: &IdeaGraph, patches: &[Patch]) -> Result<IdeaGraph> {
    for p in patches.iter().filter(|p| !p.empty) {
        check_references(graph, p)?;
    }
    let mut out = graph.clone();
    for p in realization_order(patches) {
        apply(&mut out, p)?;
    }
    Ok(out)
}
