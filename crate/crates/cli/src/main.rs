//! `pucci-lab <command> --config <path> --out <dir> [--seed N] [--threads N]`
//!
//! Exit codes: 0 every check passed, 1 a check failed or a computation was
//! rejected, 2 configuration error, 3 I/O failure.

mod artifacts;
mod config;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use artifacts::{sha256_hex, Artifacts, Manifest, MANIFEST_FORMAT};
use config::Command;
use run::{Context, Failure};

pub const THREADS_ENV: &str = "PUCCI_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "pucci-lab", version, about = "Batch runs of the pucci-lab solver, barrier certificates and estimators")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing)
    #[arg(long)]
    out: PathBuf,
    /// Overrides the random-coefficient seeds of the configuration
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to $PUCCI_LAB_THREADS, then to the core count
    #[arg(long)]
    threads: Option<usize>,
}

fn threads(cli: &Cli) -> Result<Option<usize>, String> {
    if let Some(n) = cli.threads {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        Err(_) => Ok(None),
    }
}

fn manifest(cmd: Command, config_bytes: &[u8], seed: Option<u64>, pass: bool, timings: Vec<(String, u128)>) -> Manifest {
    Manifest {
        format: MANIFEST_FORMAT.into(),
        command: cmd.name().into(),
        config_sha256: sha256_hex(config_bytes),
        code_version: env!("CARGO_PKG_VERSION").into(),
        seed,
        status: if pass { "pass" } else { "fail" }.into(),
        exit_code: if pass { 0 } else { 1 },
        files: Vec::new(),
        timings_ms: timings,
    }
}

fn commit(art: Artifacts, out: &Path, m: Manifest) -> ExitCode {
    let code = m.exit_code as u8;
    match art.commit(out, m) {
        Ok(_) => ExitCode::from(code),
        Err(e) => {
            eprintln!("I/O error writing {}: {e}", out.display());
            ExitCode::from(3)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match threads(&cli) {
        Ok(Some(0)) | Err(_) => {
            eprintln!("config error: thread count must be a positive integer");
            return ExitCode::from(2);
        }
        Ok(Some(n)) => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Ok(None) => {}
    }
    let (cfg, bytes) = match config::load(&cli.config) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(c) = cfg.command {
        if c != cli.command {
            eprintln!("config error: key `command` says {} but {} was requested", c.name(), cli.command.name());
            return ExitCode::from(2);
        }
    }
    let seed = cli.seed.or(cfg.seed);
    let config_dir = cli.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let ctx = Context { config: &cfg, config_dir: &config_dir, seed };
    match run::execute(cli.command, &ctx) {
        Ok(outcome) => {
            let m = manifest(cli.command, &bytes, seed, outcome.pass, outcome.timings);
            if !outcome.pass {
                eprintln!("{}: a check failed; see {}", cli.command.name(), cli.out.display());
            }
            commit(outcome.artifacts, &cli.out, m)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(pucci_lab::Error::Io(e))) => {
            eprintln!("I/O error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("{}: {e}", cli.command.name());
            let mut art = Artifacts::default();
            let body = serde_json::json!({ "command": cli.command.name(), "error": e.to_string() });
            art.add("error.json", serde_json::to_string_pretty(&body).expect("serializable") + "\n");
            commit(art, &cli.out, manifest(cli.command, &bytes, seed, false, Vec::new()))
        }
    }
}
