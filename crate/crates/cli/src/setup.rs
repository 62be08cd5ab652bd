//! Configuration, packet and runtime assembly shared by the episode commands.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};

use eig_agents::{Agent, ChatAgent, ChatClient, ScriptedAgent, TemplateAgent, TextBackend};
use eig_core::canonical::canonical_json;
use eig_core::InputPacket;
use eig_critic::{weights, HashEmbedder};
use eig_runtime::{ConfigFile, ControllerKind, LearnedCritic, RoleOrder, RunConfig, Runtime};

use crate::cli::EpisodeOpts;

/// A loaded configuration file and the directory its relative paths resolve against.
pub struct Loaded {
    pub file: ConfigFile,
    pub base: PathBuf,
}

impl Loaded {
    pub fn read(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Ok(Loaded {
                file: ConfigFile::load(p)?,
                base: p.parent().map(Path::to_path_buf).unwrap_or_default(),
            }),
            None => Ok(Loaded {
                file: ConfigFile::default(),
                base: PathBuf::new(),
            }),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

pub struct EpisodeSetup {
    pub runtime: Runtime,
    pub trace_dir: Option<PathBuf>,
}

/// Builds the runtime from the configuration file with command-line overrides on top.
pub fn episode_setup(
    opts: &EpisodeOpts,
    sequential: Option<bool>,
    role_order: Option<RoleOrder>,
) -> Result<EpisodeSetup> {
    let loaded = Loaded::read(opts.config.as_deref())?;
    let mut config: RunConfig = loaded.file.run_config();
    if let Some(c) = opts.controller {
        config.controller = c;
    }
    if let Some(s) = opts.seed {
        config.seed = s;
    }
    if let Some(t) = opts.t_max {
        config.t_max = t;
    }
    if let Some(s) = sequential {
        config.sequential = s;
    }
    if let Some(o) = role_order {
        config.role_order = o;
    }
    config.validate()?;

    let backend: Option<Arc<ChatClient>> = match &loaded.file.backend {
        Some(b) => Some(Arc::new(ChatClient::new(b.clone())?)),
        None => None,
    };
    let script = opts
        .script
        .clone()
        .or_else(|| loaded.file.paths.script.as_ref().map(|p| loaded.resolve(p)));
    let agent: Arc<dyn Agent> = match (&script, &backend) {
        (Some(path), _) => Arc::new(ScriptedAgent::load(path)?),
        (None, Some(client)) => Arc::new(ChatAgent::new(client.clone() as Arc<dyn TextBackend>)),
        (None, None) => Arc::new(TemplateAgent),
    };

    let learned = config.controller == ControllerKind::Learned;
    let mut runtime = Runtime::new(config, agent);
    if learned {
        let path = opts
            .weights
            .clone()
            .or_else(|| loaded.file.paths.weights.as_ref().map(|p| loaded.resolve(p)));
        let Some(path) = path else {
            bail!("the learned controller needs --weights or paths.weights");
        };
        let params = weights::load(&path).with_context(|| format!("loading weights {}", path.display()))?;
        runtime = runtime.with_critic(Arc::new(LearnedCritic::new(params, Arc::new(HashEmbedder))));
    }
    if let Some(client) = backend {
        runtime = runtime.with_synthesis_backend(client);
    }
    Ok(EpisodeSetup {
        runtime,
        trace_dir: loaded.file.paths.trace_dir.as_ref().map(|p| loaded.resolve(p)),
    })
}

pub fn read_packet(path: &Path) -> Result<InputPacket> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing packet {}", path.display()))
}

/// A single packet file, a JSON-lines file of packets, or every `*.json` file in a directory.
pub fn read_packets(path: &Path) -> Result<Vec<InputPacket>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("listing {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        return files.iter().map(|p| read_packet(p)).collect();
    }
    if path.extension().is_some_and(|x| x == "jsonl") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{}: line {}", path.display(), i + 1)))
            .collect();
    }
    Ok(vec![read_packet(path)?])
}

pub fn ensure_unique_groups(packets: &[InputPacket]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for p in packets {
        if !seen.insert(p.group_id.as_str()) {
            bail!("duplicate packet group id `{}`", p.group_id);
        }
    }
    Ok(())
}

pub fn write_jsonl<T: serde::Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut out = String::new();
    for r in rows {
        out.push_str(&canonical_json(r));
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn emit(value: &serde_json::Value) {
    println!("{}", eig_core::canonical::canonical_json_value(value));
}
