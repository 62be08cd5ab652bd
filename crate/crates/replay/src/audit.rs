//! Round-wise controller action audit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use eig_core::ActionKind;

use crate::record::RecordBody;
use crate::trace::Trace;

/// Column order of the audit table.
pub const AUDIT_COLUMNS: [(ActionKind, &str); 6] = [
    (ActionKind::AddSupportEdge, "Support"),
    (ActionKind::AttachEvidence, "Evidence"),
    (ActionKind::ProposeRepair, "Repair"),
    (ActionKind::AddDependencyEdge, "Dependency"),
    (ActionKind::AddContradictionEdge, "Contradiction"),
    (ActionKind::Skip, "Skip"),
];

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRow {
    pub round: u32,
    /// Selected role actions per column.
    pub counts: [usize; 6],
    pub commits: usize,
}

impl AuditRow {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Share of the round's selected actions, in percent.
    pub fn percent(&self, column: usize) -> f64 {
        match self.total() {
            0 => 0.0,
            t => 100.0 * self.counts[column] as f64 / t as f64,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionAudit {
    pub rows: Vec<AuditRow>,
}

fn column(kind: ActionKind) -> usize {
    AUDIT_COLUMNS
        .iter()
        .position(|(k, _)| *k == kind)
        .expect("every action kind has a column")
}

pub fn audit_actions(traces: &[Trace]) -> ActionAudit {
    let mut rows: BTreeMap<u32, AuditRow> = BTreeMap::new();
    for trace in traces {
        for r in trace.records() {
            let row = || AuditRow {
                round: r.round,
                ..AuditRow::default()
            };
            match &r.body {
                RecordBody::Decision(d) => rows.entry(r.round).or_insert_with(row).counts[column(d.kind())] += 1,
                RecordBody::Commit(_) => rows.entry(r.round).or_insert_with(row).commits += 1,
                _ => {}
            }
        }
    }
    ActionAudit {
        rows: rows.into_values().collect(),
    }
}

impl ActionAudit {
    /// Aligned plain-text table: counts with one-decimal percentages, commits as raw counts.
    pub fn render(&self) -> String {
        let mut header = vec!["Round".to_string()];
        header.extend(AUDIT_COLUMNS.iter().map(|(_, name)| name.to_string()));
        header.push("Commit".into());
        let mut table = vec![header];
        for row in &self.rows {
            let mut cells = vec![row.round.to_string()];
            for c in 0..AUDIT_COLUMNS.len() {
                cells.push(format!("{} ({:.1}%)", row.counts[c], row.percent(c)));
            }
            cells.push(row.commits.to_string());
            table.push(cells);
        }
        let widths: Vec<usize> = (0..table[0].len())
            .map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &table {
            let line: Vec<String> = r.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}
