use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use eig_runtime::{ControllerKind, RoleOrder};

#[derive(Parser, Debug)]
#[command(name = "eig", version, about = "Evolving idea graph runtime")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one episode and write its trace and proposal.
    Run(RunArgs),
    /// Run heuristic episodes over a packet set, one trace per episode.
    Profile(ProfileArgs),
    /// Turn traces into edit and commit corpora plus a rejection report.
    Curate(CurateArgs),
    /// Partition group ids into train and dev sets and audit the split.
    Split(SplitArgs),
    /// Write the separable synthetic corpora used for training sanity checks.
    Synth(SynthArgs),
    /// Train both critic heads.
    Train(TrainArgs),
    /// Compare analytic and finite-difference critic gradients.
    Gradcheck(GradcheckArgs),
    /// Run a controller over packets and emit per-episode summaries.
    Eval(EvalArgs),
    /// Round-wise controller action table.
    Audit(AuditArgs),
    /// Evaluate one controller variant.
    Ablate(AblateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run(_) => "run",
            Command::Profile(_) => "profile",
            Command::Curate(_) => "curate",
            Command::Split(_) => "split",
            Command::Synth(_) => "synth",
            Command::Train(_) => "train",
            Command::Gradcheck(_) => "gradcheck",
            Command::Eval(_) => "eval",
            Command::Audit(_) => "audit",
            Command::Ablate(_) => "ablate",
        }
    }
}

/// Options shared by every command that runs episodes.
#[derive(Args, Debug, Clone, Default)]
pub struct EpisodeOpts {
    /// Run configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_controller)]
    pub controller: Option<ControllerKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Critic weights for the learned controller.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Scripted-agent file; overrides the configured script.
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long)]
    pub t_max: Option<u32>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Input packet (JSON).
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub episode: EpisodeOpts,
    /// Directory for `{group}.{seed}.trace` and the proposal.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[arg(long)]
    pub sequential: bool,
    #[arg(long, value_enum)]
    pub role_order: Option<OrderArg>,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    /// Packet file, packet JSON-lines file, or directory of packet files.
    #[arg(long)]
    pub packet: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Episodes per packet, with consecutive seeds.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
}

#[derive(Args, Debug)]
pub struct CurateArgs {
    #[arg(long)]
    pub traces: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Teacher-score margin over skip below which edit rows are dropped.
    #[arg(long)]
    pub margin: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    /// One group id per line.
    #[arg(long)]
    pub groups: PathBuf,
    #[arg(long)]
    pub fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the split as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Held-out group list to audit against train instead of the dev side.
    #[arg(long)]
    pub held_out: Option<PathBuf>,
    /// Corpus files whose rows must each fall on exactly one side.
    #[arg(long)]
    pub rows: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub edit: usize,
    #[arg(long, default_value_t = 1000)]
    pub commit: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub edit_corpus: PathBuf,
    #[arg(long)]
    pub commit_corpus: PathBuf,
    #[arg(long)]
    pub out_weights: PathBuf,
    /// Per-epoch metrics, one JSON object per line.
    #[arg(long)]
    pub metrics: PathBuf,
    /// Split file written by `eig split`; otherwise groups are split here.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
}

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub instances: u64,
    #[arg(long, default_value_t = 12)]
    pub max_nodes: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Packet file, packet JSON-lines file, or directory of packet files.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub episode: EpisodeOpts,
    #[arg(long)]
    pub sequential: bool,
    #[arg(long, value_enum)]
    pub role_order: Option<OrderArg>,
    /// Summary lines go here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write each episode's trace into this directory.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long)]
    pub traces: PathBuf,
    /// Emit rows as JSON lines instead of the aligned table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct AblateArgs {
    #[arg(long, value_enum)]
    pub variant: Variant,
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub episode: EpisodeOpts,
    #[arg(long, value_enum)]
    pub role_order: Option<OrderArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Heuristic,
    Random,
    Learned,
    Sequential,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderArg {
    Canonical,
    Reverse,
    Cyclic,
}

impl From<OrderArg> for RoleOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Canonical => RoleOrder::Canonical,
            OrderArg::Reverse => RoleOrder::Reverse,
            OrderArg::Cyclic => RoleOrder::Cyclic,
        }
    }
}

fn parse_controller(s: &str) -> Result<ControllerKind, String> {
    s.parse().map_err(|e: eig_runtime::RuntimeError| e.to_string())
}
