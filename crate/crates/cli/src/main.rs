//! `eig`: episodes, profiling, curation, splits, training and audits.

mod cli;
mod data;
mod diagnostics;
mod episodes;
mod setup;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};

fn dispatch(command: &Command) -> anyhow::Result<()> {
    match command {
        Command::Run(a) => episodes::run(a),
        Command::Profile(a) => episodes::profile(a),
        Command::Curate(a) => data::curate(a),
        Command::Split(a) => data::split(a),
        Command::Synth(a) => data::synth(a),
        Command::Train(a) => data::train_cmd(a),
        Command::Gradcheck(a) => diagnostics::gradcheck(a),
        Command::Eval(a) => episodes::eval(a),
        Command::Audit(a) => diagnostics::audit(a),
        Command::Ablate(a) => episodes::ablate(a),
    }
}

fn main() -> ExitCode {
    // Usage errors exit with status 2 through clap.
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({
                "command": cli.command.name(),
                "error": format!("{e:#}"),
            });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
