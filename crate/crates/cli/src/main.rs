//! `fluxsense` command-line driver.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::commands::Command;
use crate::error::{CliError, CliResult};
use crate::output::{OutputDir, RunManifest};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "FLUXSENSE_OUT";

#[derive(Debug, Parser)]
#[command(name = "fluxsense", version, about = "Forward models of a MHz fluxonium charge sensor")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration; the reference device is used when absent.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory. Falls back to the config, then $FLUXSENSE_OUT, then `out`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// `section.key=value` override applied after the file is parsed; repeatable.
    #[arg(long = "set", value_name = "K=V")]
    overrides: Vec<String>,
    /// Worker threads for parallel pipelines.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

fn execute(cli: &Cli) -> CliResult<(PathBuf, RunManifest)> {
    let mut cfg = config::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("threads", "need at least one thread"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config("threads", e.to_string()))?;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let mut out = OutputDir::create(&dir)?;
    out.write_json("config.json", &cfg)?;
    commands::run(cli.command, &cfg, &mut out)?;
    let manifest = out.finish(cli.command.name(), cfg.hash(), cfg.seed)?;
    Ok((dir, manifest))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok((dir, manifest)) => {
            println!(
                "{}: wrote {} files to {} (config {})",
                manifest.command,
                manifest.outputs.len() + 1,
                dir.display(),
                &manifest.config_hash[..12]
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.kind.code() as u8)
        }
    }
}
