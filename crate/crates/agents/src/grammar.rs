//! One action per line: `KIND | target_ids | payload`.
//!
//! Targets are comma-separated ids. The payload is a repair statement for
//! `propose_repair`, `source :: snippet` for `attach_evidence`, and an optional
//! note for edge actions. Blank lines and lines starting with `#` are ignored.

use serde::{Deserialize, Serialize};

use eig_core::slates::{Candidate, CandidateOrigin};
use eig_core::{ActionKind, ActionPayload, Evidence, NodeKind, RoleId};

use crate::error::{AgentError, Result};

pub const FIELD_SEPARATOR: char = '|';
pub const EVIDENCE_SEPARATOR: &str = "::";

/// A node an agent contributes to its role branch before the first round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDraft {
    pub kind: NodeKind,
    pub text: String,
}

/// Parsed reply: well-formed candidates plus the count of rejected lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedReply {
    pub candidates: Vec<Candidate>,
    pub dropped: usize,
}

fn grammar(line: usize, reason: impl Into<String>) -> AgentError {
    AgentError::Grammar {
        line,
        reason: reason.into(),
    }
}

fn is_id(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | ':'))
}

fn strip_bullet(line: &str) -> &str {
    let t = line.trim();
    t.strip_prefix("- ").or_else(|| t.strip_prefix("* ")).unwrap_or(t).trim()
}

fn is_ignorable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#') || t.starts_with("```")
}

fn arity(kind: ActionKind) -> usize {
    match kind {
        ActionKind::Skip => 0,
        ActionKind::AttachEvidence | ActionKind::ProposeRepair => 1,
        _ => 2,
    }
}

/// Parses one action line; `line_no` is only used for error messages.
pub fn parse_line(line: &str, role: RoleId, line_no: usize) -> Result<Candidate> {
    let fields: Vec<&str> = strip_bullet(line).splitn(3, FIELD_SEPARATOR).map(str::trim).collect();
    let kind: ActionKind = fields[0]
        .to_ascii_lowercase()
        .parse()
        .map_err(|_| grammar(line_no, format!("unknown action kind `{}`", fields[0])))?;
    if kind != ActionKind::Skip && fields.len() < 2 {
        return Err(grammar(line_no, "missing target field"));
    }
    let targets: Vec<String> = fields
        .get(1)
        .map(|t| {
            t.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect()
        })
        .unwrap_or_default();
    if let Some(bad) = targets.iter().find(|t| !is_id(t)) {
        return Err(grammar(line_no, format!("malformed target id `{bad}`")));
    }
    if targets.len() != arity(kind) {
        return Err(grammar(
            line_no,
            format!("{kind} takes {} targets, got {}", arity(kind), targets.len()),
        ));
    }
    if arity(kind) == 2 && targets[0] == targets[1] {
        return Err(grammar(line_no, "edge endpoints coincide"));
    }
    let raw = fields.get(2).copied().unwrap_or("").trim();
    let payload = match kind {
        ActionKind::Skip => ActionPayload::default(),
        ActionKind::AttachEvidence => {
            let (source, snippet) = raw
                .split_once(EVIDENCE_SEPARATOR)
                .ok_or_else(|| grammar(line_no, "evidence payload must read `source :: snippet`"))?;
            let (source, snippet) = (source.trim(), snippet.trim());
            if source.is_empty() || snippet.is_empty() {
                return Err(grammar(line_no, "evidence source and snippet must be non-empty"));
            }
            ActionPayload::with_evidence(Evidence {
                source: source.into(),
                snippet: snippet.into(),
            })
        }
        ActionKind::ProposeRepair if !raw.is_empty() => ActionPayload::with_text(raw),
        ActionKind::ProposeRepair => ActionPayload::default(),
        _ if raw.is_empty() => ActionPayload::default(),
        _ => ActionPayload {
            note: Some(raw.into()),
            ..ActionPayload::default()
        },
    };
    if kind == ActionKind::Skip {
        return Ok(Candidate::skip(role));
    }
    Ok(Candidate::new(kind, targets, payload, role, CandidateOrigin::Agent))
}

/// Inverse of [`parse_line`] for candidates it can produce.
pub fn format_line(c: &Candidate) -> String {
    let payload = match c.kind {
        ActionKind::AttachEvidence => c
            .payload
            .evidence
            .as_ref()
            .map(|e| format!("{} {EVIDENCE_SEPARATOR} {}", e.source, e.snippet))
            .unwrap_or_default(),
        ActionKind::ProposeRepair => c.payload.text.clone().unwrap_or_default(),
        ActionKind::Skip => String::new(),
        _ => c.payload.note.clone().unwrap_or_default(),
    };
    format!("{} | {} | {}", c.kind, c.targets.join(","), payload)
        .trim_end()
        .to_string()
}

/// Parses every line of a model reply, counting lines that fail the grammar.
pub fn parse_reply(text: &str, role: RoleId) -> ParsedReply {
    let mut out = ParsedReply::default();
    for (i, line) in text.lines().enumerate() {
        if is_ignorable(line) {
            continue;
        }
        match parse_line(line, role, i + 1) {
            Ok(c) => out.candidates.push(c),
            Err(e) => {
                tracing::debug!(%role, error = %e, "dropping reply line");
                out.dropped += 1;
            }
        }
    }
    out
}

/// Parses `Kind | text` seed lines; malformed lines are skipped.
pub fn parse_seed_reply(text: &str) -> Vec<NodeDraft> {
    text.lines()
        .filter(|l| !is_ignorable(l))
        .filter_map(|l| {
            let (kind, body) = strip_bullet(l).split_once(FIELD_SEPARATOR)?;
            let kind: NodeKind = kind.trim().parse().ok()?;
            let body = body.trim();
            (!body.is_empty() && kind != NodeKind::Repair).then(|| NodeDraft {
                kind,
                text: body.to_string(),
            })
        })
        .collect()
}
