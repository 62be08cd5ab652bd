//! Commands that run episodes: run, profile, eval and ablate.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use eig_core::canonical::canonical_json;
use eig_core::InputPacket;
use eig_runtime::{ControllerKind, EpisodeResult, RoleOrder};

use crate::cli::{AblateArgs, EpisodeOpts, EvalArgs, ProfileArgs, RunArgs, Variant};
use crate::setup::{emit, ensure_unique_groups, episode_setup, read_packet, read_packets, write_jsonl};

const DEFAULT_TRACE_DIR: &str = "traces";

fn proposal_path(dir: &Path, result: &EpisodeResult, seed: u64) -> PathBuf {
    dir.join(format!("{}.{seed}.proposal.json", result.graph.group_id))
}

pub fn run(args: &RunArgs) -> Result<()> {
    let packet = read_packet(&args.input)?;
    let setup = episode_setup(&args.episode, args.sequential.then_some(true), args.role_order.map(Into::into))?;
    let seed = setup.runtime.config.seed;
    let result = setup.runtime.run_episode(&packet)?;
    let dir = args
        .trace_out
        .clone()
        .or(setup.trace_dir)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_TRACE_DIR));
    let trace_path = result.trace.write_into(&dir)?;
    let proposal_path = proposal_path(&dir, &result, seed);
    let mut proposal = canonical_json(&result.proposal);
    proposal.push('\n');
    std::fs::write(&proposal_path, proposal).with_context(|| format!("writing {}", proposal_path.display()))?;
    emit(&json!({
        "command": "run",
        "group_id": packet.group_id,
        "episode_id": result.trace.episode_id(),
        "commit_round": result.commit_round,
        "graph_hash": result.graph_hash(),
        "trace": trace_path.display().to_string(),
        "trace_hash": result.trace.content_hash(),
        "proposal": proposal_path.display().to_string(),
        "synthesis_fallback": result.synthesis_fallback,
    }));
    Ok(())
}

pub fn profile(args: &ProfileArgs) -> Result<()> {
    let packets = read_packets(&args.packet)?;
    ensure_unique_groups(&packets)?;
    let base = EpisodeOpts {
        config: args.config.clone(),
        controller: Some(ControllerKind::Heuristic),
        seed: args.seed,
        script: args.script.clone(),
        ..EpisodeOpts::default()
    };
    let first_seed = episode_setup(&base, None, None)?.runtime.config.seed;
    let jobs: Vec<(&InputPacket, u64)> = packets
        .iter()
        .flat_map(|p| (0..args.seeds.max(1)).map(move |k| (p, first_seed + k)))
        .collect();
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let rows: Vec<Value> = jobs
        .par_iter()
        .map(|(packet, seed)| -> Result<Value> {
            let opts = EpisodeOpts {
                seed: Some(*seed),
                ..base.clone()
            };
            let result = episode_setup(&opts, None, None)?
                .runtime
                .run_episode(packet)
                .with_context(|| format!("group {}", packet.group_id))?;
            let path = result.trace.write_into(&args.out)?;
            Ok(json!({
                "group_id": packet.group_id,
                "seed": seed,
                "trace": path.file_name().map(|f| f.to_string_lossy().into_owned()),
                "commit_round": result.commit_round,
                "packet": packet,
            }))
        })
        .collect::<Result<_>>()?;
    write_jsonl(&args.out.join("manifest.jsonl"), &rows)?;
    emit(&json!({
        "command": "profile",
        "episodes": rows.len(),
        "groups": packets.len(),
        "out": args.out.display().to_string(),
    }));
    Ok(())
}

/// Per-episode summary: signals and action counts by round.
fn summary(variant: &str, controller: ControllerKind, result: &EpisodeResult) -> Value {
    let rounds: Vec<Value> = result
        .signals
        .iter()
        .zip(&result.decisions)
        .enumerate()
        .map(|(i, (s, ds))| {
            let mut kinds: BTreeMap<String, usize> = BTreeMap::new();
            for d in ds {
                *kinds.entry(d.candidate.kind.to_string()).or_insert(0) += 1;
            }
            json!({
                "round": i + 1,
                "grounding": s.grounding,
                "contradiction_load": s.contradiction_load,
                "completeness": s.completeness,
                "maturity": s.maturity,
                "actions": kinds,
            })
        })
        .collect();
    json!({
        "variant": variant,
        "controller": controller.token(),
        "group_id": result.graph.group_id,
        "episode_id": result.trace.episode_id(),
        "commit_round": result.commit_round,
        "final_maturity": result.signals.last().map(|s| s.maturity),
        "graph_hash": result.graph_hash(),
        "trace_hash": result.trace.content_hash(),
        "rounds": rounds,
    })
}

struct EvalPlan<'a> {
    /// Label for the summaries; defaults to the controller, or `sequential`.
    variant: Option<&'a str>,
    input: &'a Path,
    episode: EpisodeOpts,
    sequential: Option<bool>,
    role_order: Option<RoleOrder>,
    out: Option<&'a Path>,
    trace_out: Option<&'a Path>,
}

fn evaluate(plan: EvalPlan<'_>) -> Result<()> {
    let packets = read_packets(plan.input)?;
    ensure_unique_groups(&packets)?;
    let setup = episode_setup(&plan.episode, plan.sequential, plan.role_order)?;
    let controller = setup.runtime.config.controller;
    let variant = plan.variant.unwrap_or(if setup.runtime.config.sequential {
        "sequential"
    } else {
        controller.token()
    });
    let results: Vec<EpisodeResult> = packets
        .par_iter()
        .map(|p| setup.runtime.run_episode(p).with_context(|| format!("group {}", p.group_id)))
        .collect::<Result<_>>()?;
    if let Some(dir) = plan.trace_out {
        for r in &results {
            r.trace.write_into(dir)?;
        }
    }
    let rows: Vec<Value> = results.iter().map(|r| summary(variant, controller, r)).collect();
    match plan.out {
        Some(path) => write_jsonl(path, &rows)?,
        None => rows.iter().for_each(emit),
    }
    let n = results.len().max(1) as f64;
    emit(&json!({
        "command": "eval",
        "variant": variant,
        "episodes": results.len(),
        "mean_commit_round": results.iter().map(|r| r.commit_round as f64).sum::<f64>() / n,
        "mean_final_maturity": results.iter().filter_map(|r| r.signals.last()).map(|s| s.maturity).sum::<f64>() / n,
    }));
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    evaluate(EvalPlan {
        variant: None,
        input: &args.input,
        episode: args.episode.clone(),
        sequential: args.sequential.then_some(true),
        role_order: args.role_order.map(Into::into),
        out: args.out.as_deref(),
        trace_out: args.trace_out.as_deref(),
    })
}

pub fn ablate(args: &AblateArgs) -> Result<()> {
    let mut episode = args.episode.clone();
    let (name, sequential) = match args.variant {
        Variant::Heuristic => ("heuristic", false),
        Variant::Random => ("random", false),
        Variant::Learned => ("learned", false),
        Variant::Sequential => ("sequential", true),
    };
    episode.controller = Some(match args.variant {
        Variant::Random => ControllerKind::Random,
        Variant::Learned => ControllerKind::Learned,
        Variant::Heuristic | Variant::Sequential => ControllerKind::Heuristic,
    });
    evaluate(EvalPlan {
        variant: Some(name),
        input: &args.input,
        episode,
        sequential: Some(sequential),
        role_order: args.role_order.map(Into::into),
        out: args.out.as_deref(),
        trace_out: args.trace_out.as_deref(),
    })
}
