//! Read-only checks: gradient verification and action audits.

use anyhow::{bail, Result};
use serde_json::json;

use eig_critic::gradcheck::{grad_check, GradInstance, DEFAULT_EPSILON};
use eig_critic::{CriticParams, HashEmbedder};
use eig_replay::{audit_actions, read_traces};

use crate::cli::{AuditArgs, GradcheckArgs};
use crate::setup::emit;

pub fn gradcheck(args: &GradcheckArgs) -> Result<()> {
    let mut worst: f64 = 0.0;
    for k in 0..args.instances {
        let seed = args.seed.wrapping_add(k);
        // Every fifth instance has no edges, so the message-passing path is checked in isolation too.
        let inst = GradInstance::random(seed, args.max_nodes, k % 5 != 4, &HashEmbedder)?;
        let report = grad_check(&CriticParams::init(seed), &inst, DEFAULT_EPSILON, seed)?;
        worst = worst.max(report.max_relative_error);
        emit(&json!({
            "instance": k,
            "seed": seed,
            "checked": report.checked,
            "resampled": report.resampled,
            "max_relative_error": report.max_relative_error,
            "worst": report.worst,
        }));
    }
    let passed = worst < args.tolerance;
    emit(&json!({
        "command": "gradcheck",
        "instances": args.instances,
        "max_relative_error": worst,
        "tolerance": args.tolerance,
        "passed": passed,
    }));
    if !passed {
        bail!("max relative gradient error {worst:e} is not below {:e}", args.tolerance);
    }
    Ok(())
}

pub fn audit(args: &AuditArgs) -> Result<()> {
    let traces = read_traces(&args.traces)?;
    if traces.is_empty() {
        eprintln!("warning: no traces found under {}", args.traces.display());
    }
    let audit = audit_actions(&traces);
    if args.json {
        audit.rows.iter().for_each(|r| emit(&serde_json::to_value(r).expect("row serializes")));
    } else {
        print!("{}", audit.render());
    }
    Ok(())
}
