//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../../core/tests/common/mod.rs"]
mod fixtures;
mod graphs;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use anyhow::{bail, ensure, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use eig_agents::mock::{MockReply, MockServer};
use eig_agents::{AgentError, BackendConfig, ChatClient, ChatMessage, ScriptedAgent, Sleeper};
use eig_core::canonical::serialize_string;
use eig_core::control::teacher_select;
use eig_core::{
    build_slate, compute_components, dominant_deficit, freeze_snapshot, graph_signals, materialize_decision,
    merge_patches, ActionKind, Candidate, DecisionSource, DeficitKind, IdeaGraph, InputPacket, RoleId, SignalVector,
};
use eig_critic::corpus::{prepare_commit_corpus, prepare_edit_corpus};
use eig_critic::gradcheck::{grad_check, GradInstance, DEFAULT_EPSILON};
use eig_critic::synthetic::{separable_commit_corpus, separable_edit_corpus};
use eig_critic::{train, CriticParams, HashEmbedder, TrainConfig, TrainData};
use eig_replay::record::RecordBody;
use eig_replay::{audit_actions, audit_split, split_groups};
use eig_runtime::{ConfigFile, RoleOrder, Runtime, RunConfig};

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scenario_runtime(name: &str, edit: impl FnOnce(&mut RunConfig)) -> Result<(InputPacket, Runtime)> {
    let dir = scenario_dir();
    let packet = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.packet.json")))?)?;
    let agent = ScriptedAgent::load(&dir.join(format!("{name}.script.jsonl")))?;
    let mut config = ConfigFile::load(&dir.join(format!("{name}.toml")))?.run_config();
    edit(&mut config);
    Ok((packet, Runtime::new(config, Arc::new(agent))))
}

/// Every arrival order for up to five patches, otherwise 20 seeded shuffles.
fn arrival_orders<T: Clone>(items: &[T], rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    if items.len() <= 5 {
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..items.len()).collect();
        permute(&mut idx, items.len(), &mut |p| out.push(p.iter().map(|i| items[*i].clone()).collect()));
        return out;
    }
    (0..20)
        .map(|_| {
            let mut p = items.to_vec();
            p.shuffle(rng);
            p
        })
        .collect()
}

fn permute(idx: &mut Vec<usize>, k: usize, emit: &mut dyn FnMut(&[usize])) {
    if k <= 1 {
        emit(idx);
        return;
    }
    for i in 0..k {
        permute(idx, k - 1, emit);
        let j = if k.is_multiple_of(2) { i } else { 0 };
        idx.swap(j, k - 1);
    }
}

fn merge_determinism() -> Result<String> {
    let start = Instant::now();
    let mut orders = 0usize;
    for seed in 0..1000u64 {
        let g = fixtures::random_graph(seed);
        let patches = fixtures::random_patches(&g, seed);
        let reference = serialize_string(&merge_patches(&g, &patches)?);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for perm in arrival_orders(&patches, &mut rng) {
            ensure!(
                serialize_string(&merge_patches(&g, &perm)?) == reference,
                "patch set {seed} depends on arrival order"
            );
            orders += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("1000 patch sets, {orders} arrival orders, {:.1}s", elapsed.as_secs_f64()))
}

fn signal_oracle() -> Result<String> {
    let cases = graphs::hand_built();
    for (name, g, expected) in &cases {
        ensure!(g.nodes.len() <= 10, "{name} has {} nodes", g.nodes.len());
        let counted = compute_components(g);
        ensure!(counted == fixtures::oracle_components(g), "{name}: {counted:?} disagrees with the oracle");
        ensure!(counted == *expected, "{name}: {counted:?}, counted by hand {expected:?}");
        let v = graph_signals(g);
        let c = &v.components;
        let gaps = [
            v.grounding - (0.5 * c.s_sup + 0.5 * c.s_evi),
            v.contradiction_load - (0.65 * c.l_edge + 0.35 * c.l_open),
            v.completeness - (0.25 * c.q_slot + 0.45 * c.q_dep + 0.30 * c.q_conn),
            v.maturity - (0.40 * v.grounding + 0.35 * v.completeness + 0.25 * (1.0 - v.contradiction_load)),
        ];
        ensure!(gaps.iter().all(|d| d.abs() < 1e-12), "{name}: identity gaps {gaps:?}");
    }
    Ok(format!("{} graphs match the oracle, identities within 1e-12", cases.len()))
}

/// Simulates one candidate against the frozen graph, independently of the control module.
fn simulated_gain(g: &IdeaGraph, c: &Candidate) -> f64 {
    let pre = graph_signals(g);
    if c.kind == ActionKind::Skip {
        return if pre.maturity >= 0.8 { 0.1 } else { 0.0 };
    }
    let snap = freeze_snapshot(g);
    let Ok(patch) = materialize_decision(&snap, &c.to_action(c.proposer, 1, DecisionSource::Heuristic)) else {
        return f64::NEG_INFINITY;
    };
    let post = graph_signals(&merge_patches(g, &[patch]).expect("single patch merges"));
    let deficit = |v: &SignalVector| match dominant_deficit(&pre) {
        DeficitKind::Grounding => 1.0 - v.grounding,
        DeficitKind::Contradiction => v.contradiction_load,
        DeficitKind::Completeness => 1.0 - v.completeness,
    };
    (deficit(&pre) - deficit(&post)) + 0.25 * (post.maturity - pre.maturity)
}

fn teacher_equivalence() -> Result<String> {
    let n = 500u64;
    for seed in 0..n {
        let g = fixtures::random_graph(seed);
        let snap = freeze_snapshot(&g);
        let role = RoleId::ALL[(seed % 5) as usize];
        let (slate, _) = build_slate(&snap, role, 1 + (seed % 3) as u32, &[]);
        let scores: Vec<f64> = slate.candidates.iter().map(|c| simulated_gain(&g, c)).collect();
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = i;
            }
        }
        let chosen = teacher_select(&snap, &slate);
        ensure!(
            chosen.candidate_index == best && chosen.candidate == slate.candidates[best],
            "pair {seed}: teacher picked {}, exhaustive argmax {best}",
            chosen.candidate_index
        );
    }
    Ok(format!("{n}/{n} pairs agree"))
}

fn gradient_correctness() -> Result<String> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let inst = GradInstance::random(500 + seed, 12, seed % 5 != 4, &HashEmbedder)?;
        let report = grad_check(&CriticParams::init(seed), &inst, DEFAULT_EPSILON, seed)?;
        worst = worst.max(report.max_relative_error);
    }
    let elapsed = start.elapsed();
    ensure!(worst < 1e-4, "max relative error {worst:e}");
    ensure!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    Ok(format!("20 instances, max relative error {worst:.2e}, {:.1}s", elapsed.as_secs_f64()))
}

fn training_sanity() -> Result<String> {
    let cfg = TrainConfig::default();
    ensure!(
        cfg.learning_rate == 1e-3 && cfg.batch_size == 16 && cfg.epochs == 8 && cfg.positive_weight == 1.115,
        "defaults drifted: {cfg:?}"
    );
    let edit = prepare_edit_corpus(&separable_edit_corpus(200, 3), &HashEmbedder)?;
    let commit = prepare_commit_corpus(&separable_commit_corpus(1000, 4), &HashEmbedder)?;
    let (edit_train, edit_dev) = edit.split_at(160);
    let (commit_train, commit_dev) = commit.split_at(800);
    let run = || {
        let data = TrainData {
            edit_train,
            edit_dev,
            commit_train,
            commit_dev,
        };
        train(data, &cfg, CriticParams::init(0))
    };
    let first = run()?;
    let second = run()?;
    let last = first.metrics.last().expect("eight epochs of metrics");
    ensure!(first.metrics.len() == 8, "{} epochs", first.metrics.len());
    ensure!(last.dev_slate_accuracy > 0.95, "dev slate accuracy {}", last.dev_slate_accuracy);
    ensure!(last.dev_commit_accuracy > 0.95, "dev commit accuracy {}", last.dev_commit_accuracy);
    ensure!(first.params.hash() == second.params.hash(), "same-seed weight hashes differ");
    Ok(format!(
        "dev slate {:.3}, dev commit {:.3}, weights {}",
        last.dev_slate_accuracy,
        last.dev_commit_accuracy,
        &first.params.hash()[..12]
    ))
}

fn phased_scenario() -> Result<String> {
    let (packet, rt) = scenario_runtime("phased", |_| {})?;
    let res = rt.run_episode(&packet)?;
    ensure!(res.commit_round == 4, "committed at round {}", res.commit_round);
    ensure!(
        res.decisions[0].iter().all(|d| d.candidate.kind.allowed_in_round(1)),
        "round 1 has a non-structural edit"
    );
    for (i, round) in res.decisions[1..3].iter().enumerate() {
        ensure!(
            round
                .iter()
                .all(|d| matches!(d.candidate.kind, ActionKind::AttachEvidence | ActionKind::ProposeRepair)),
            "round {} is not evidence or repair",
            i + 2
        );
    }
    let load: Vec<f64> = res.signals.iter().map(|s| s.contradiction_load).collect();
    let grounding: Vec<f64> = res.signals.iter().map(|s| s.grounding).collect();
    let cleared = load.iter().position(|r| *r == 0.0);
    ensure!(matches!(cleared, Some(i) if i < 3), "contradiction load {load:?}");
    ensure!(load[0] > 0.0, "no contradiction after round 1");
    ensure!(grounding.windows(2).all(|w| w[1] >= w[0]), "grounding {grounding:?}");
    ensure!(grounding[3] > grounding[0], "grounding flat at {grounding:?}");
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(" ");
    Ok(format!("commit at round 4, load [{}], grounding [{}]", fmt(&load), fmt(&grounding)))
}

fn order_witness() -> Result<String> {
    let mut parallel = std::collections::BTreeSet::new();
    let mut sequential = std::collections::BTreeSet::new();
    for order in RoleOrder::ALL {
        for (seq, set) in [(false, &mut parallel), (true, &mut sequential)] {
            let (packet, rt) = scenario_runtime("order", |c| {
                c.sequential = seq;
                c.role_order = order;
            })?;
            set.insert(rt.run_episode(&packet)?.graph_hash());
        }
    }
    ensure!(parallel.len() == 1, "{} parallel hashes", parallel.len());
    ensure!(sequential.len() >= 2, "{} sequential hashes", sequential.len());
    Ok(format!("parallel {} hash, sequential {} hashes", parallel.len(), sequential.len()))
}

const PHASED_AUDIT: &str = "\
Round  Support     Evidence    Repair      Dependency  Contradiction  Skip      Commit
1      2 (100.0%)  0 (0.0%)    0 (0.0%)    0 (0.0%)    0 (0.0%)       0 (0.0%)  0
2      0 (0.0%)    0 (0.0%)    1 (100.0%)  0 (0.0%)    0 (0.0%)       0 (0.0%)  0
3      0 (0.0%)    1 (100.0%)  0 (0.0%)    0 (0.0%)    0 (0.0%)       0 (0.0%)  0
4      0 (0.0%)    2 (100.0%)  0 (0.0%)    0 (0.0%)    0 (0.0%)       0 (0.0%)  1
";

fn audit_fidelity() -> Result<String> {
    let (packet, rt) = scenario_runtime("phased", |_| {})?;
    let trace = rt.run_episode(&packet)?.trace;
    // Counted independently from the decision and commit records.
    let mut by_round = std::collections::BTreeMap::<u32, Vec<ActionKind>>::new();
    let mut commits = std::collections::BTreeMap::<u32, usize>::new();
    for r in trace.records() {
        match &r.body {
            RecordBody::Decision(d) => by_round.entry(r.round).or_default().push(d.kind()),
            RecordBody::Commit(_) => *commits.entry(r.round).or_default() += 1,
            _ => {}
        }
    }
    ensure!(
        by_round.get(&4).map(Vec::len) == Some(2) && commits == [(4, 1)].into(),
        "trace no longer matches the hand count: {by_round:?} {commits:?}"
    );
    let audit = audit_actions(&[trace]);
    let rendered = audit.render();
    ensure!(rendered == PHASED_AUDIT, "table differs:\n{rendered}");
    for row in &audit.rows {
        let sum: f64 = (0..6).map(|c| row.percent(c)).sum();
        ensure!((sum - 100.0).abs() <= 0.1, "round {} sums to {sum}", row.round);
    }
    Ok(format!("{} rounds match the hand count", audit.rows.len()))
}

fn split_hygiene() -> Result<String> {
    let groups: Vec<String> = (0..400).map(|i| format!("group-{i:03}")).collect();
    let split = split_groups(&groups, 0.75, 0)?;
    let audit = audit_split(&split.train, &split.dev, groups.iter().map(String::as_str));
    ensure!(split.train.len() == 300 && split.dev.len() == 100, "{audit}");
    ensure!(audit.overlap.is_empty() && audit.passed(), "{audit}");
    Ok(audit.to_string())
}

#[derive(Clone, Default)]
struct NoSleep(Arc<Mutex<Vec<Duration>>>);

impl Sleeper for NoSleep {
    fn sleep(&self, d: Duration) {
        self.0.lock().unwrap().push(d);
    }
}

fn mock_client(server: &MockServer, timeout_s: f64) -> Result<ChatClient> {
    let config = BackendConfig {
        endpoint: server.endpoint(),
        model: "test-model".into(),
        timeout_s,
        api_key_env: "EIG_ACCEPTANCE_KEY_UNSET".into(),
        ..BackendConfig::default()
    };
    Ok(ChatClient::with_sleeper(config, Box::new(NoSleep::default()))?)
}

fn backend_contract() -> Result<String> {
    let d = BackendConfig::default();
    ensure!(
        d.temperature == 0.2 && d.max_tokens == 1400 && d.timeout_s == 90.0 && d.retries == 2,
        "defaults drifted: {d:?}"
    );
    let messages = [ChatMessage::system("sys"), ChatMessage::user("hello")];

    let server = MockServer::start(vec![MockReply::content("ok")])?;
    mock_client(&server, 5.0)?.chat(&messages)?;
    let body = String::from_utf8(server.requests()[0].body.clone())?;
    let expected = r#"{"model":"test-model","messages":[{"role":"system","content":"sys"},{"role":"user","content":"hello"}],"temperature":0.2,"max_tokens":1400}"#;
    ensure!(body == expected, "request body {body}");

    let slow = MockReply::content("late").delayed(Duration::from_millis(1500));
    let server = MockServer::start(vec![slow.clone(), slow, MockReply::content("on time")])?;
    let done = mock_client(&server, 0.4)?.chat(&messages)?;
    ensure!(done.attempts == 3 && server.hits() == 3, "timeouts took {} attempts", done.attempts);

    let server = MockServer::start(vec![MockReply::status(500)])?;
    match mock_client(&server, 5.0)?.chat(&messages) {
        Err(AgentError::Exhausted { attempts: 3, .. }) if server.hits() == 3 => {}
        other => bail!("server errors: {other:?}, {} hits", server.hits()),
    }
    Ok("body bytes exact, 3 attempts on timeouts and on status 500".into())
}

fn cli_determinism() -> Result<String> {
    let dir = scenario_dir();
    let tmp = tempfile::tempdir()?;
    let mut outputs = Vec::new();
    let mut slowest = Duration::ZERO;
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_eig"))
            .arg("run")
            .arg("--input")
            .arg(dir.join("phased.packet.json"))
            .arg("--config")
            .arg(dir.join("phased.toml"))
            .arg("--trace-out")
            .arg(&out)
            .output()?;
        slowest = slowest.max(start.elapsed());
        ensure!(status.status.success(), "exit {:?}: {}", status.status, String::from_utf8_lossy(&status.stderr));
        outputs.push((
            std::fs::read(out.join("scenario-phased.0.trace"))?,
            std::fs::read(out.join("scenario-phased.0.proposal.json"))?,
        ));
    }
    ensure!(outputs[0].0 == outputs[1].0, "trace bytes differ");
    ensure!(outputs[0].1 == outputs[1].1, "proposal bytes differ");
    ensure!(slowest < Duration::from_secs(10), "slowest run {slowest:?}");
    let hash = eig_core::canonical::sha256_hex(&outputs[0].0);
    Ok(format!("trace {}, slowest run {:.2}s", &hash[..12], slowest.as_secs_f64()))
}

type Criterion = (u32, &'static str, fn() -> Result<String>);

const CRITERIA: [Criterion; 11] = [
    (1, "merge determinism", merge_determinism),
    (2, "signal oracle", signal_oracle),
    (3, "teacher equivalence", teacher_equivalence),
    (4, "gradient correctness", gradient_correctness),
    (5, "training sanity", training_sanity),
    (6, "phased scenario", phased_scenario),
    (7, "parallel vs sequential witness", order_witness),
    (8, "audit fidelity", audit_fidelity),
    (9, "split hygiene", split_hygiene),
    (10, "backend contract", backend_contract),
    (11, "end-to-end determinism", cli_determinism),
];

fn main() {
    let mut failed = 0;
    for (id, name, check) in CRITERIA {
        let outcome = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(p) => Err(anyhow::anyhow!(
                "panicked: {}",
                p.downcast_ref::<String>().map(String::as_str).or(p.downcast_ref::<&str>().copied()).unwrap_or("?")
            )),
        };
        let line = match &outcome {
            Ok(detail) => format!("PASS  criterion {id:>2}  {name}: {detail}"),
            Err(e) => {
                failed += 1;
                format!("FAIL  criterion {id:>2}  {name}: {e:#}")
            }
        };
        let mut out = std::io::stdout().lock();
        writeln!(out, "{line}").expect("stdout");
        out.flush().expect("stdout");
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
