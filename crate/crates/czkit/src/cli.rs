//! Argument parsing, precedence of flags over config over environment, and
//! the exit-code contract.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::cache::{hex, MatrixCache};
use crate::commands::{self, Context, Outcome};
use crate::config::RunConfig;
use crate::error::{exit, CliError, Result};
use crate::exec::Pool;
use crate::report::{sidecar_path, to_json, write_atomic, Metadata};

/// Environment variable naming the default cache root.
pub const CACHE_ENV: &str = "CZKIT_CACHE_DIR";

#[derive(Debug, Parser)]
#[command(name = "czkit", version, about = "Numerical checks for compact Calderón–Zygmund operators")]
pub struct Cli {
    /// Run configuration (sectioned key-value file).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Report path; stdout when absent. Metadata goes to PATH.meta.json.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Matrix cache directory; falls back to $CZKIT_CACHE_DIR.
    #[arg(long = "cache-dir", global = true, value_name = "PATH")]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Window override.
    #[arg(long, global = true, value_name = "M,R,JMIN,JMAX", allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Kernel override.
    #[arg(long, global = true, value_name = "NAME[:PARAMS]")]
    pub kernel: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Smoothness diagnostics of the kernel against its declared triple.
    KernelVerify,
    /// Tail norms, weak compactness, decay bound and necessity fits of the matrix.
    Compactness,
    /// Paraproduct identities and the tail-norm bound.
    Paraproduct,
    /// Convergence table of the T(1) functional on an atom.
    T1,
    /// CMO moduli of a coefficient family.
    Cmo,
    /// Prints the normalized configuration.
    Config,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::KernelVerify => "kernel-verify",
            Command::Compactness => "compactness",
            Command::Paraproduct => "paraproduct",
            Command::T1 => "t1",
            Command::Cmo => "cmo",
            Command::Config => "config",
        }
    }
}

/// The effective config after applying flag overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(k) = &cli.kernel {
        cfg.kernel.spec = k.clone();
    }
    if let Some(w) = &cli.window {
        cfg.override_window(w)?;
    }
    if let Some(d) = &cli.cache_dir {
        cfg.output.cache_dir = Some(d.to_string_lossy().into_owned());
    }
    if let Some(t) = cli.threads {
        cfg.output.threads = Some(t);
    }
    if let Some(o) = &cli.out {
        cfg.output.report = Some(o.to_string_lossy().into_owned());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one command; the report text and pass flag come back in the outcome.
pub fn run(command: Command, cfg: RunConfig) -> Result<Outcome> {
    let cache_dir = cfg.output.cache_dir.clone().map(PathBuf::from).or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    let ctx = Context { pool: Pool::new(cfg.output.threads.unwrap_or(0))?, cache: cache_dir.map(MatrixCache::new), cfg };
    match command {
        Command::KernelVerify => commands::kernel_verify(&ctx),
        Command::Compactness => commands::compactness(&ctx),
        Command::Paraproduct => commands::paraproduct(&ctx),
        Command::T1 => commands::t1(&ctx),
        Command::Cmo => commands::cmo(&ctx),
        Command::Config => Ok(Outcome { json: ctx.cfg.normalized(), passed: true, cache: crate::cache::Lookup::Disabled }),
    }
}

/// Writes the report (and sidecar) or prints it.
fn emit(command: Command, cfg: &RunConfig, outcome: &Outcome, started: SystemTime, elapsed: f64) -> Result<()> {
    match &cfg.output.report {
        None => {
            print!("{}", outcome.json);
            Ok(())
        }
        Some(path) => {
            let path = PathBuf::from(path);
            write_atomic(&path, outcome.json.as_bytes())?;
            let meta = Metadata {
                tool: "czkit",
                version: env!("CARGO_PKG_VERSION"),
                command: command.name().into(),
                started_unix_seconds: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
                elapsed_seconds: elapsed,
                threads: cfg.output.threads.unwrap_or(0),
                cache: outcome.cache.label(),
                config_sha256: hex(&Sha256::digest(cfg.normalized().as_bytes())),
            };
            write_atomic(&sidecar_path(&path), to_json(&meta)?.as_bytes())
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let cfg = resolve_config(cli)?;
    let outcome = run(cli.command, cfg.clone())?;
    emit(cli.command, &cfg, &outcome, started, clock.elapsed().as_secs_f64())?;
    Ok(outcome.passed)
}

/// Parses `std::env::args`, runs, and maps the result onto the exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::from(exit::PASS),
        Ok(false) => ExitCode::from(exit::VIOLATION),
        Err(e) => {
            report_error(&e);
            ExitCode::from(e.exit_code())
        }
    }
}

fn report_error(e: &CliError) {
    eprintln!("czkit: {e}");
}
