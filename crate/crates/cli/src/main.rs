//! `dqlab`: difference-quotient experiments from the command line.
//!
//! Exit codes: 0 success, 2 invalid configuration or arguments,
//! 3 a computation did not converge, 4 a check failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod runner;

use anyhow::{bail, Context as _};
use clap::{Parser, Subcommand};
use config::{defaults, Experiment, Suite, SCHEMA_VERSION};
use runner::{run, status_label, write_summary, Context, SummaryRow};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INVALID: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 4;

const KINDS: [&str; 8] = ["constants", "norms", "distribution", "limits", "bbm", "counterexample", "interp", "wavelet"];

#[derive(Parser)]
#[command(name = "dqlab", version, about = "Difference-quotient measures, norms and limits")]
struct Cli {
    /// JSON experiment suite; subcommands other than `run` keep only their kind.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for Monte Carlo engines; overrides the suite seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "dqlab-out")]
    out_dir: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Multiplies every tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite file, or every built-in experiment.
    Run {
        /// Suite file (same as --config).
        path: Option<PathBuf>,
    },
    /// k(p,n) and sphere areas against quadrature.
    Constants,
    /// Weak and Lorentz quasi-norms of difference quotients.
    Norms,
    /// Survival curves, or Monte Carlo against the 1D oracle.
    Distribution,
    /// Plateau limits and the gamma = 0 threshold.
    Limits,
    /// s -> 1 and s -> 0 limits of fractional seminorms.
    Bbm,
    /// Growth tables and the staircase inequality for the Cantor family.
    Counterexample,
    /// Interpolation inequalities.
    Interp,
    /// Haar coefficient sandwich.
    Wavelet,
    /// Print summary.json from the output directory.
    Report,
}

impl Command {
    fn kind(&self) -> Option<&'static str> {
        match self {
            Command::Constants => Some("constants"),
            Command::Norms => Some("norms"),
            Command::Distribution => Some("distribution"),
            Command::Limits => Some("limits"),
            Command::Bbm => Some("bbm"),
            Command::Counterexample => Some("counterexample"),
            Command::Interp => Some("interp"),
            Command::Wavelet => Some("wavelet"),
            Command::Run { .. } | Command::Report => None,
        }
    }
}

fn load_suite(path: &Path) -> anyhow::Result<Suite> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let suite: Suite = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if suite.schema_version != SCHEMA_VERSION {
        bail!("unsupported schema_version {} (expected {SCHEMA_VERSION})", suite.schema_version);
    }
    let mut names = std::collections::BTreeSet::new();
    for e in &suite.experiments {
        if e.name().is_empty() || e.name().contains(['/', '\\']) || e.name() == "." || e.name() == ".." {
            bail!("experiment name `{}` is not a valid directory name", e.name());
        }
        if !names.insert(e.name()) {
            bail!("duplicate experiment name `{}`", e.name());
        }
    }
    Ok(suite)
}

fn report(dir: &Path) -> anyhow::Result<u8> {
    let path = dir.join("summary.json");
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let doc: serde_json::Value = serde_json::from_str(&text)?;
    let rows: Vec<SummaryRow> = serde_json::from_value(doc["rows"].clone()).context("summary rows")?;
    print_rows(&rows);
    Ok(exit_for(&rows))
}

fn print_rows(rows: &[SummaryRow]) {
    let fmt = |v: Option<f64>| v.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
    for r in rows {
        let verdict = match (r.status.as_str(), r.pass) {
            ("ok", Some(true)) => "PASS",
            ("ok", Some(false)) => "FAIL",
            ("ok", None) => "INFO",
            _ => "ERROR",
        };
        println!(
            "{verdict:5} {:<20} {:<32} {:<40} value {} predicted {} tol {} [{}]",
            r.experiment,
            r.item,
            r.quantity,
            fmt(r.value),
            fmt(r.predicted),
            fmt(r.tolerance),
            r.status
        );
    }
}

fn exit_for(rows: &[SummaryRow]) -> u8 {
    if rows.iter().any(|r| r.status == "invalid" || r.status == "unknown-function" || r.status == "unsupported") {
        EXIT_INVALID
    } else if rows.iter().any(|r| r.status != "ok") {
        EXIT_NONCONVERGENCE
    } else if rows.iter().any(|r| r.pass == Some(false)) {
        EXIT_CHECK_FAILED
    } else {
        0
    }
}

fn execute(cli: Cli) -> anyhow::Result<u8> {
    if !(cli.tolerance_scale > 0.0 && cli.tolerance_scale.is_finite()) {
        bail!("--tolerance-scale must be positive");
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    if let Command::Report = cli.command {
        return report(&cli.out_dir);
    }
    let path = match &cli.command {
        Command::Run { path: Some(p) } => Some(p.clone()),
        _ => cli.config.clone(),
    };
    let suite = path.as_deref().map(load_suite).transpose()?;
    let kind = cli.command.kind();
    let experiments: Vec<Experiment> = match (&suite, kind) {
        (Some(s), Some(k)) => s.experiments.iter().filter(|e| e.kind() == k).cloned().collect(),
        (Some(s), None) => s.experiments.clone(),
        (None, Some(k)) => defaults(k),
        (None, None) => KINDS.iter().flat_map(|k| defaults(k)).collect(),
    };
    if experiments.is_empty() {
        bail!("no experiments selected");
    }
    let seed = cli.seed.or(suite.as_ref().and_then(|s| s.seed)).unwrap_or(1);
    let ctx = Context { seed, tolerance_scale: cli.tolerance_scale, out_dir: cli.out_dir.clone() };
    let mut rows = Vec::new();
    for exp in &experiments {
        eprintln!("running {} ({})", exp.name(), exp.kind());
        let (mut part, err) = run(exp, &ctx);
        if let Some(e) = err {
            eprintln!("  {}: {e}", exp.name());
            let row = SummaryRow {
                experiment: exp.name().to_string(),
                kind: exp.kind().to_string(),
                item: String::new(),
                quantity: "error".into(),
                value: None,
                error: None,
                predicted: None,
                tolerance: None,
                formula: String::new(),
                constants: e.to_string(),
                pass: Some(false),
                status: status_label(&e).into(),
            };
            part.push(row);
        }
        rows.extend(part);
    }
    write_summary(&rows, seed, &cli.out_dir)?;
    print_rows(&rows);
    Ok(exit_for(&rows))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
