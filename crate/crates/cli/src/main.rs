use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use seqresp_cli::commands::Options;
use seqresp_cli::Command;

/// Transfer-operator experiments for sequential circle maps.
///
/// Exit codes: 0 ok, 1 config error, 2 invalid system, 3 non-convergence,
/// 4 tolerance failure.
#[derive(Debug, Parser)]
#[command(name = "seqresp", version, about)]
struct Args {
    command: Command,
    /// Experiment config (TOML).
    config: PathBuf,
    /// Write a gnuplot script next to the CSV outputs.
    #[arg(long)]
    emit_gnuplot: bool,
    /// Repeat the pullback from a second seed and report the gap (equivariant).
    #[arg(long)]
    two_seed: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let options = Options {
        emit_gnuplot: args.emit_gnuplot,
        two_seed: args.two_seed,
    };
    let code = seqresp_cli::run(args.command, &args.config, options);
    ExitCode::from(code as u8)
}
