//! Group-level train/dev partitions and their hygiene audit.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ReplayError, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSplit {
    pub train: BTreeSet<String>,
    pub dev: BTreeSet<String>,
}

impl GroupSplit {
    pub fn side(&self, group: &str) -> Option<&'static str> {
        match (self.train.contains(group), self.dev.contains(group)) {
            (true, false) => Some("train"),
            (false, true) => Some("dev"),
            _ => None,
        }
    }
}

/// Shuffles the sorted ids with a seeded generator and takes the first
/// `round(fraction * n)` as train.
pub fn split_groups(groups: &[String], fraction: f64, seed: u64) -> Result<GroupSplit> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(ReplayError::Fraction(fraction));
    }
    let mut ids: Vec<&String> = groups.iter().collect();
    ids.sort();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(ReplayError::DuplicateGroup(w[0].clone()));
    }
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (fraction * ids.len() as f64).round() as usize;
    Ok(GroupSplit {
        train: ids[..cut].iter().map(|s| s.to_string()).collect(),
        dev: ids[cut..].iter().map(|s| s.to_string()).collect(),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAudit {
    pub train_groups: usize,
    pub dev_groups: usize,
    /// Groups present on both sides.
    pub overlap: Vec<String>,
    /// Row group ids that belong to neither side or to both.
    pub stray_rows: Vec<String>,
}

impl SplitAudit {
    pub fn passed(&self) -> bool {
        self.overlap.is_empty() && self.stray_rows.is_empty()
    }
}

impl fmt::Display for SplitAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "train = {}, dev = {}, overlap = {}",
            self.train_groups,
            self.dev_groups,
            self.overlap.len()
        )?;
        if !self.overlap.is_empty() {
            write!(f, " [{}]", self.overlap.join(", "))?;
        }
        if !self.stray_rows.is_empty() {
            write!(f, ", stray rows = {} [{}]", self.stray_rows.len(), self.stray_rows.join(", "))?;
        }
        Ok(())
    }
}

/// Checks that train and held-out groups are disjoint and that every row's
/// group sits on exactly one side.
pub fn audit_split<'a>(
    train: &BTreeSet<String>,
    held_out: &BTreeSet<String>,
    row_groups: impl IntoIterator<Item = &'a str>,
) -> SplitAudit {
    let split = GroupSplit {
        train: train.clone(),
        dev: held_out.clone(),
    };
    let mut stray: BTreeSet<String> = BTreeSet::new();
    for g in row_groups {
        if split.side(g).is_none() {
            stray.insert(g.to_string());
        }
    }
    SplitAudit {
        train_groups: train.len(),
        dev_groups: held_out.len(),
        overlap: train.intersection(held_out).cloned().collect(),
        stray_rows: stray.into_iter().collect(),
    }
}
