//! `ybx`: run the R-matrix identity suite from the command line.
//!
//! Exit codes: 0 when every selected check passes, 1 when a check fails or
//! a run cannot complete, 2 on usage or configuration errors.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ybx_core::identity_suite::{catalog, run_suite, with_threads, CaseTag};
use ybx_core::Error;

use config::{Overrides, RunConfig, UsageError};

#[derive(Parser)]
#[command(name = "ybx", version, about = "Numerical verification of elliptic R-matrix identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the identity catalog.
    List,
    /// Run checks and write a report.
    Run(Box<RunArgs>),
}

#[derive(Args)]
struct RunArgs {
    /// Check ids, comma separated (default: all).
    #[arg(long)]
    check: Option<String>,
    /// Ranks N, comma separated.
    #[arg(long)]
    n: Option<String>,
    /// Cases: rational, trigonometric, elliptic.
    #[arg(long)]
    case: Option<String>,
    /// Moduli written as re+imi, comma separated.
    #[arg(long)]
    tau: Option<String>,
    /// Base seed of the per-cell random generators.
    #[arg(long)]
    seed: Option<String>,
    /// Accepted points per check cell.
    #[arg(long)]
    samples: Option<String>,
    /// Tolerance replacing the per-check defaults.
    #[arg(long)]
    tol: Option<String>,
    /// Report file (default: standard output).
    #[arg(long)]
    report: Option<String>,
    /// Report format: json, csv or text.
    #[arg(long)]
    format: Option<String>,
    /// File of `key = value` lines using the flag names as keys.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Result<Overrides, UsageError> {
        let mut o = Overrides::default();
        let flags = [
            ("check", &self.check),
            ("n", &self.n),
            ("case", &self.case),
            ("tau", &self.tau),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("tol", &self.tol),
            ("report", &self.report),
            ("format", &self.format),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                o.set(key, v).map_err(|e| UsageError(format!("--{key}: {e}")))?;
            }
        }
        Ok(o)
    }

    fn resolve(&self) -> Result<RunConfig, UsageError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
                Overrides::from_config_text(&text)?
            }
            None => Overrides::default(),
        };
        RunConfig::resolve(file.merge(self.overrides()?))
    }
}

fn threads_from_env() -> Result<usize, UsageError> {
    match std::env::var("YBX_THREADS") {
        Ok(v) => v.trim().parse().map_err(|_| UsageError(format!("YBX_THREADS must be a count, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn list() -> ExitCode {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{:<14} {:<32} {:<28} identity", "id", "families", "cases");
    for c in catalog() {
        let families = if c.families.is_empty() {
            "scalar".to_string()
        } else {
            c.families.iter().map(|f| f.name()).collect::<Vec<_>>().join(",")
        };
        let cases = c.cases.iter().map(CaseTag::name).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "{:<14} {:<32} {:<28} {}", c.id, families, cases, c.paper_eq);
    }
    ExitCode::SUCCESS
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial report.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn run(args: &RunArgs) -> ExitCode {
    let usage = |e: UsageError| {
        eprintln!("ybx: {e}");
        ExitCode::from(2)
    };
    let cfg = match args.resolve() {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => return usage(e),
    };
    let result = with_threads(threads, || run_suite(&cfg.plan, &cfg.checks, cfg.tol)).and_then(|r| r);
    let report = match result {
        Ok(r) => r,
        Err(e @ (Error::UnknownCheck(_) | Error::InvalidPlan(_))) => return usage(UsageError(e.to_string())),
        Err(e) => {
            eprintln!("ybx: {e}");
            return ExitCode::from(1);
        }
    };
    let text = match report.render(cfg.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("ybx: {e}");
            return ExitCode::from(1);
        }
    };
    match &cfg.report {
        Some(path) => {
            if let Err(e) = write_atomic(path, &text) {
                eprintln!("ybx: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
            let failed = report.checks.iter().filter(|c| !c.pass).count();
            eprintln!("{} checks, {} failed; report written to {}", report.checks.len(), failed, path.display());
        }
        None => print!("{text}"),
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match &cli.command {
        Command::List => list(),
        Command::Run(args) => run(args),
    }
}
