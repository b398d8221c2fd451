//! Library side of the `seqresp` command-line tool: configuration parsing,
//! command implementations and artifact writers.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;

use crate::commands::{Context, Options};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{sha256_hex, OutputDir, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Certify,
    Equivariant,
    Memory,
    Respond,
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Equivariant => "equivariant",
            Command::Memory => "memory",
            Command::Respond => "respond",
            Command::Simulate => "simulate",
        }
    }
}

fn configure_threads(threads: Option<usize>) -> usize {
    if let Some(t) = threads {
        // fails only if the global pool already exists (repeated in-process runs)
        if rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            log::debug!("rayon pool already initialised");
        }
    }
    rayon::current_num_threads()
}

/// Runs one command and writes its run manifest. Returns the process exit code.
pub fn run(command: Command, config_path: &Path, options: Options) -> i32 {
    let started = Instant::now();
    let bytes = match std::fs::read(config_path) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return 1;
        }
    };
    let parsed = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Config(format!("config is not UTF-8: {e}")))
        .and_then(ExperimentConfig::parse);
    let config = match parsed {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let threads = configure_threads(config.grid.threads);
    let mut out = match OutputDir::create(&config.run.output) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let result = dispatch(command, &config, &mut out, options);
    let (status, code) = match &result {
        Ok(summary) => {
            println!("{summary}");
            ("ok".to_string(), 0)
        }
        Err(e) => {
            eprintln!("error: {e}");
            (e.to_string(), e.exit_code())
        }
    };
    let manifest = RunManifest {
        command: command.name().into(),
        config_path: config_path.display().to_string(),
        config_sha256: sha256_hex(&bytes),
        seqresp_version: seqresp::VERSION,
        cli_version: env!("CARGO_PKG_VERSION"),
        threads,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        status,
        exit_code: code,
        outputs: out.written().to_vec(),
    };
    if let Err(e) = out.json(&format!("run_{}.json", command.name()), &manifest) {
        eprintln!("error: cannot write run manifest: {e}");
        return if code == 0 { e.exit_code() } else { code };
    }
    code
}

fn dispatch(command: Command, config: &ExperimentConfig, out: &mut OutputDir, options: Options) -> CliResult<String> {
    let mut ctx = Context { config, out, options };
    match command {
        Command::Certify => commands::certify_cmd(&mut ctx),
        Command::Equivariant => commands::equivariant_cmd(&mut ctx),
        Command::Memory => commands::memory_cmd(&mut ctx),
        Command::Respond => commands::respond_cmd(&mut ctx),
        Command::Simulate => commands::simulate_cmd(&mut ctx),
    }
}
