//! Command-line driver.
//!
//! Exit codes: `0` when every declared gate passes, `1` when a gate fails or a
//! pipeline errors, `2` for unreadable or invalid scenarios and bad flags.

use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use crate::report::run_scenario;
use crate::scenario::{RunKind, Scenario};

pub const EXIT_OK: u8 = 0;
pub const EXIT_GATE_FAILED: u8 = 1;
pub const EXIT_INVALID_INPUT: u8 = 2;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "tclkraus",
    version,
    about = "Evolve a small open quantum system with TCL2, Lindblad, canonical Kraus and exact pipelines, and compare them."
)]
pub struct Cli {
    /// Scenario file (JSON).
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,

    /// Output directory; overrides the scenario's `output_dir`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Comma-separated subset of the scenario's runs (tcl2, lindblad, kraus, dephasing, oracle).
    #[arg(long, value_name = "RUNLIST", value_delimiter = ',')]
    pub only: Option<Vec<String>>,

    /// Suppress the summary on stdout.
    #[arg(long)]
    pub quiet: bool,
}

/// Execute the CLI and return the process exit code. Diagnostics go to `err`,
/// the summary to `out`.
pub fn run<O: Write, E: Write>(cli: &Cli, out: &mut O, err: &mut E) -> u8 {
    let scenario = match Scenario::from_path(&cli.scenario) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", cli.scenario.display());
            return EXIT_INVALID_INPUT;
        }
    };

    let only = match &cli.only {
        None => None,
        Some(names) => {
            let mut runs = Vec::with_capacity(names.len());
            for name in names {
                match RunKind::parse(name.trim()) {
                    Some(r) if scenario.runs.contains(&r) => runs.push(r),
                    Some(r) => {
                        let _ = writeln!(err, "error: --only: run `{r}` is not declared in the scenario");
                        return EXIT_INVALID_INPUT;
                    }
                    None => {
                        let _ = writeln!(err, "error: --only: unknown run `{name}`");
                        return EXIT_INVALID_INPUT;
                    }
                }
            }
            Some(runs)
        }
    };

    let dir = cli
        .out
        .clone()
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&scenario.name));

    let output = match run_scenario(&scenario, only.as_deref()) {
        Ok(o) => o,
        // `--only` was validated above, so anything left is a pipeline failure.
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_GATE_FAILED;
        }
    };
    if let Err(e) = output.write_artifacts(&dir) {
        let _ = writeln!(err, "error: writing artifacts to {}: {e}", dir.display());
        return EXIT_GATE_FAILED;
    }
    if !cli.quiet {
        let _ = write!(out, "{}", output.summary_text());
        let _ = writeln!(out, "\nartifacts written to {}", dir.display());
    }

    let failed: Vec<_> = output.report.failed_gates().collect();
    if failed.is_empty() {
        return EXIT_OK;
    }
    for g in failed {
        let _ = writeln!(
            err,
            "gate failed: {} = {:.6e} exceeds {:.1e}",
            g.metric,
            g.value.unwrap_or(f64::NAN),
            g.max
        );
    }
    EXIT_GATE_FAILED
}
