//! Append-only per-episode record streams and their line-delimited files.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use eig_core::canonical::{canonical_json, sha256_hex};

use crate::error::{ReplayError, Result};
use crate::record::{RecordBody, ReplayRecord};

pub const TRACE_EXTENSION: &str = "trace";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    records: Vec<ReplayRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    pub fn records(&self) -> &[ReplayRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends a record, rejecting anything that would break the stream order.
    pub fn push(&mut self, record: ReplayRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            let fail = |reason: String| {
                Err(ReplayError::Order {
                    episode: record.episode_id.clone(),
                    reason,
                })
            };
            if record.episode_id != last.episode_id {
                return fail(format!("episode id changed from {}", last.episode_id));
            }
            let (prev, next) = ((last.round, last.body.rank()), (record.round, record.body.rank()));
            if next < prev {
                return fail(format!(
                    "{} in round {} after {} in round {}",
                    record.body.type_name(),
                    record.round,
                    last.body.type_name(),
                    last.round
                ));
            }
        }
        if let RecordBody::Decision(d) = &record.body {
            let known = self.records.iter().any(|r| {
                r.round == record.round && matches!(&r.body, RecordBody::Slate(s) if s.slate_hash == d.slate_hash)
            });
            if !known {
                return Err(ReplayError::Order {
                    episode: record.episode_id.clone(),
                    reason: format!("decision in round {} references unknown slate {}", record.round, d.slate_hash),
                });
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn episode_id(&self) -> Option<&str> {
        self.records.first().map(|r| r.episode_id.as_str())
    }

    pub fn group_id(&self) -> Option<&str> {
        self.records.first().map(|r| r.group_id.as_str())
    }

    pub fn meta(&self) -> Option<&crate::record::EpisodeMeta> {
        self.records.iter().find_map(|r| match &r.body {
            RecordBody::EpisodeMeta(m) => Some(m),
            _ => None,
        })
    }

    /// Records of one round in stream order.
    pub fn round(&self, round: u32) -> impl Iterator<Item = &ReplayRecord> {
        self.records.iter().filter(move |r| r.round == round)
    }

    pub fn rounds(&self) -> BTreeSet<u32> {
        self.records
            .iter()
            .filter(|r| matches!(r.body, RecordBody::RoundStart(_)))
            .map(|r| r.round)
            .collect()
    }

    pub fn record_hashes(&self) -> Vec<String> {
        self.records.iter().map(|r| sha256_hex(canonical_json(r).as_bytes())).collect()
    }

    /// One sorted-key JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&canonical_json(r));
            out.push('\n');
        }
        out
    }

    pub fn content_hash(&self) -> String {
        sha256_hex(self.to_jsonl().as_bytes())
    }

    pub fn from_jsonl(text: &str, origin: &str) -> Result<Self> {
        let mut trace = Trace::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |reason: String| ReplayError::Line {
                path: origin.to_string(),
                line: i + 1,
                reason,
            };
            let record: ReplayRecord = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            trace.push(record).map_err(|e| err(e.to_string()))?;
        }
        Ok(trace)
    }

    /// `{group_id}.{seed}.trace`.
    pub fn file_name(&self) -> String {
        let group = self.group_id().unwrap_or("episode");
        let seed = self.meta().map_or(0, |m| m.seed);
        format!("{group}.{seed}.{TRACE_EXTENSION}")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()).map_err(|e| ReplayError::io(path, e))
    }

    pub fn write_into(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| ReplayError::io(dir, e))?;
        let path = dir.join(self.file_name());
        self.write(&path)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ReplayError::io(path, e))?;
        Self::from_jsonl(&text, &path.display().to_string())
    }
}

/// Every `*.trace` file under `dir`, in file-name order. A missing directory reads as empty.
pub fn read_trace_dir(dir: &Path) -> Result<Vec<Trace>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| ReplayError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == TRACE_EXTENSION))
        .collect();
    paths.sort();
    paths.iter().map(|p| Trace::read(p)).collect()
}

/// Reads a single trace file or every trace in a directory.
pub fn read_traces(path: &Path) -> Result<Vec<Trace>> {
    if path.is_file() {
        Ok(vec![Trace::read(path)?])
    } else {
        read_trace_dir(path)
    }
}
