//! Corpus commands: curate, split, synth and train.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use serde_json::json;

use eig_critic::corpus::{prepare_commit_corpus, prepare_edit_corpus};
use eig_critic::synthetic::{separable_commit_corpus, separable_edit_corpus};
use eig_critic::{train, weights, CommitExample, CriticParams, EditExample, HashEmbedder, TrainConfig, TrainData};
use eig_replay::curate::from_jsonl;
use eig_replay::{audit_split, curate_labels, read_traces, split_groups, CurateConfig, GroupSplit};

use crate::cli::{CurateArgs, SplitArgs, SynthArgs, TrainArgs};
use crate::setup::{emit, write_jsonl};

pub fn curate(args: &CurateArgs) -> Result<()> {
    let traces = read_traces(&args.traces)?;
    if traces.is_empty() {
        eprintln!("warning: no traces found under {}", args.traces.display());
    }
    let mut cfg = CurateConfig::default();
    if let Some(m) = args.margin {
        cfg.low_gain_margin = m;
    }
    let curated = curate_labels(&traces, &cfg);
    write_jsonl(&args.out.join("edit.jsonl"), &curated.edit)?;
    write_jsonl(&args.out.join("commit.jsonl"), &curated.commit)?;
    write_jsonl(&args.out.join("rejections.jsonl"), &curated.rejections)?;
    let reasons: serde_json::Map<String, serde_json::Value> = curated
        .summary()
        .into_iter()
        .map(|(k, v)| (serde_json::to_value(k).expect("reason serializes").as_str().unwrap_or_default().to_string(), v.into()))
        .collect();
    emit(&json!({
        "command": "curate",
        "traces": traces.len(),
        "edit_rows": curated.edit.len(),
        "commit_rows": curated.commit.len(),
        "rejected": curated.rejections.len(),
        "rejections_by_reason": reasons,
    }));
    Ok(())
}

fn read_ids(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

#[derive(Deserialize)]
struct GroupOnly {
    group_id: String,
}

fn row_groups(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows: Vec<GroupOnly> = from_jsonl(&text, &path.display().to_string())?;
    Ok(rows.into_iter().map(|r| r.group_id).collect())
}

pub fn split(args: &SplitArgs) -> Result<()> {
    let split = split_groups(&read_ids(&args.groups)?, args.fraction, args.seed)?;
    if let Some(out) = &args.out {
        let mut text = eig_core::canonical::canonical_json(&split);
        text.push('\n');
        std::fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    }
    let held_out: BTreeSet<String> = match &args.held_out {
        Some(p) => read_ids(p)?.into_iter().collect(),
        None => split.dev.clone(),
    };
    let mut rows = Vec::new();
    for p in &args.rows {
        rows.extend(row_groups(p)?);
    }
    let audit = audit_split(&split.train, &held_out, rows.iter().map(String::as_str));
    println!("{audit}");
    if !audit.passed() {
        bail!("split audit failed: {audit}");
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    write_jsonl(&args.out.join("edit.jsonl"), &separable_edit_corpus(args.edit, args.seed))?;
    write_jsonl(&args.out.join("commit.jsonl"), &separable_commit_corpus(args.commit, args.seed + 1))?;
    emit(&json!({"command": "synth", "edit_rows": args.edit, "commit_rows": args.commit, "out": args.out.display().to_string()}));
    Ok(())
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(from_jsonl(&text, &path.display().to_string())?)
}

fn partition<T: Clone>(rows: &[T], group: impl Fn(&T) -> &str, split: &GroupSplit) -> Result<(Vec<T>, Vec<T>)> {
    let (mut train, mut dev) = (Vec::new(), Vec::new());
    for r in rows {
        match split.side(group(r)) {
            Some("train") => train.push(r.clone()),
            Some(_) => dev.push(r.clone()),
            None => bail!("row group `{}` is on neither side of the split", group(r)),
        }
    }
    Ok((train, dev))
}

pub fn train_cmd(args: &TrainArgs) -> Result<()> {
    let edit_rows: Vec<EditExample> = read_rows(&args.edit_corpus)?;
    let commit_rows: Vec<CommitExample> = read_rows(&args.commit_corpus)?;
    let split: GroupSplit = match &args.split {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing split {}", p.display()))?
        }
        None => {
            let groups: BTreeSet<String> = edit_rows
                .iter()
                .map(|r| r.group_id.clone())
                .chain(commit_rows.iter().map(|r| r.group_id.clone()))
                .collect();
            split_groups(&groups.into_iter().collect::<Vec<_>>(), args.train_fraction, args.seed)?
        }
    };
    let all_groups = edit_rows
        .iter()
        .map(|r| r.group_id.as_str())
        .chain(commit_rows.iter().map(|r| r.group_id.as_str()));
    let audit = audit_split(&split.train, &split.dev, all_groups);
    if !audit.passed() {
        bail!("split audit failed: {audit}");
    }
    let (edit_train, edit_dev) = partition(&edit_rows, |r| &r.group_id, &split)?;
    let (commit_train, commit_dev) = partition(&commit_rows, |r| &r.group_id, &split)?;
    let embedder = HashEmbedder;
    let edit_train = prepare_edit_corpus(&edit_train, &embedder)?;
    let edit_dev = prepare_edit_corpus(&edit_dev, &embedder)?;
    let commit_train = prepare_commit_corpus(&commit_train, &embedder)?;
    let commit_dev = prepare_commit_corpus(&commit_dev, &embedder)?;

    let mut cfg = TrainConfig {
        seed: args.seed,
        ..TrainConfig::default()
    };
    if let Some(e) = args.epochs {
        cfg.epochs = e;
    }
    if let Some(lr) = args.learning_rate {
        cfg.learning_rate = lr;
    }
    if let Some(b) = args.batch_size {
        cfg.batch_size = b;
    }
    let data = TrainData {
        edit_train: &edit_train,
        edit_dev: &edit_dev,
        commit_train: &commit_train,
        commit_dev: &commit_dev,
    };
    let outcome = train(data, &cfg, CriticParams::init(args.seed))?;
    if let Some(dir) = args.out_weights.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    weights::save(&outcome.params, &args.out_weights)?;
    write_jsonl(&args.metrics, &outcome.metrics)?;
    let last = outcome.metrics.last();
    emit(&json!({
        "command": "train",
        "split": audit.to_string(),
        "edit_rows": [edit_train.len(), edit_dev.len()],
        "commit_rows": [commit_train.len(), commit_dev.len()],
        "epochs": outcome.metrics.len(),
        "dev_slate_accuracy": last.map(|m| m.dev_slate_accuracy),
        "dev_commit_accuracy": last.map(|m| m.dev_commit_accuracy),
        "weights": args.out_weights.display().to_string(),
        "weights_hash": outcome.params.hash(),
    }));
    Ok(())
}
