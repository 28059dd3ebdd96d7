//! `xlab`: batch runner for the checks in `xlab-core`.
//!
//! Every run prints one CSV table on stdout. With `--out PREFIX` the same
//! table is written to `PREFIX.csv` together with a JSON report
//! (`PREFIX.json`) holding the full configuration, per-row details and
//! witnesses of any violated inequality. Exit status: 0 when every check
//! passed, 2 when a mathematical assertion failed, 1 on usage or I/O errors.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

pub use commands::{columns, execute, load_inputs, Outcome};
pub use config::{Command, ExperimentConfig, GenSpec, Grid, MAX_GRID_CELLS};
pub use error::{CliError, CliResult, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliCommand {
    GtVerify,
    Tail,
    TailExact,
    Healy,
    Mgf,
    Martingale,
    GraphInfo,
    Sample,
    /// Run the config's command over its `grid`.
    Sweep,
}

impl CliCommand {
    fn single(self) -> Option<Command> {
        Some(match self {
            Self::GtVerify => Command::GtVerify,
            Self::Tail => Command::Tail,
            Self::TailExact => Command::TailExact,
            Self::Healy => Command::Healy,
            Self::Mgf => Command::Mgf,
            Self::Martingale => Command::Martingale,
            Self::GraphInfo => Command::GraphInfo,
            Self::Sample => Command::Sample,
            Self::Sweep => return None,
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "xlab",
    version,
    about = "Numerical checks for matrix concentration on expander walks"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: CliCommand,
    /// JSON config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// complete:N, cycle:N, margulis:M or a graph file.
    #[arg(long)]
    pub graph: Option<String>,
    /// JSON file with the matrices of f.
    #[arg(long = "fn")]
    pub fn_path: Option<PathBuf>,
    /// Random mean-zero f as seed:n:d.
    #[arg(long)]
    pub gen: Option<GenSpec>,
    /// Walk length.
    #[arg(long)]
    pub k: Option<usize>,
    /// Deviation threshold.
    #[arg(long = "eps")]
    pub epsilon: Option<f64>,
    /// MGF parameter t.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Real part of the exponent coefficient (default 1).
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Imaginary part of the exponent coefficient (default 0).
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Monte-Carlo trials, random vectors or walks, depending on the command.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Quadrature nodes per arc for gt-verify.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// PRNG seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output prefix for PREFIX.csv and PREFIX.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Cli {
    /// The merged configuration: file first, then flags.
    pub fn config(&self) -> CliResult<ExperimentConfig> {
        let base = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let flags = ExperimentConfig {
            command: self.command.single(),
            graph: self.graph.clone(),
            fn_path: self.fn_path.clone(),
            gen: self.gen,
            k: self.k,
            epsilon: self.epsilon,
            t: self.t,
            gamma: self.gamma,
            b: self.b,
            trials: self.trials,
            nodes: self.nodes,
            seed: self.seed,
            out: self.out.clone(),
            grid: None,
        };
        Ok(base.overlay(flags))
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: String,
    pub report: Value,
    pub exit_code: i32,
}

/// Runs one experiment, or every cell of `cfg.grid` when `sweep` is set.
pub fn run_config(cfg: &ExperimentConfig, sweep: bool) -> CliResult<RunOutput> {
    let start = Instant::now();
    let cmd = cfg
        .command
        .ok_or_else(|| error::usage("the config does not name a command"))?;
    let cols = columns(cmd);
    let (csv, results, exit_code) = if sweep {
        let grid = cfg.grid.clone().unwrap_or_default();
        let cells = grid.expand(cfg)?;
        let inputs = load_inputs(cmd, cfg)?;
        let outcomes: Vec<CliResult<Outcome>> =
            cells.par_iter().map(|c| execute(cmd, c, &inputs)).collect();
        let mut header = vec!["cell"];
        header.extend_from_slice(cols);
        header.extend(["status", "error"]);
        let mut rows = Vec::with_capacity(outcomes.len());
        let mut results = Vec::with_capacity(outcomes.len());
        let (mut any_fail, mut any_error) = (false, false);
        for (i, (o, c)) in outcomes.iter().zip(&cells).enumerate() {
            let mut line = vec![i.to_string()];
            match o {
                Ok(o) => {
                    any_fail |= !o.passed;
                    let status = if o.passed { "pass" } else { "fail" };
                    line.extend(o.row.render(cols));
                    line.extend([status.to_owned(), String::new()]);
                    results.push(json!({ "cell": i, "config": c, "status": status, "row": o.row.to_json(), "detail": o.detail }));
                }
                Err(e) => {
                    any_error = true;
                    line.extend(cols.iter().map(|_| String::new()));
                    line.extend(["error".to_owned(), e.to_string()]);
                    results.push(json!({ "cell": i, "config": c, "status": "error", "error": e.to_string() }));
                }
            }
            rows.push(line);
        }
        (
            table::write_csv(&header, &rows)?,
            results,
            sweep_exit_code(any_fail, any_error),
        )
    } else {
        let inputs = load_inputs(cmd, cfg)?;
        let o = execute(cmd, cfg, &inputs)?;
        let csv = table::write_csv(cols, &[o.row.render(cols)])?;
        let code = if o.passed { EXIT_OK } else { EXIT_VIOLATION };
        let status = if o.passed { "pass" } else { "fail" };
        (
            csv,
            vec![json!({ "status": status, "row": o.row.to_json(), "detail": o.detail })],
            code,
        )
    };
    let report = json!({
        "command": cmd.name(),
        "config": cfg,
        "results": results,
        "passed": exit_code == EXIT_OK,
        "exit_code": exit_code,
        "runtime_ms": start.elapsed().as_secs_f64() * 1e3,
    });
    Ok(RunOutput {
        csv,
        report,
        exit_code,
    })
}

/// A violated inequality outranks a cell that could not run.
pub fn sweep_exit_code(any_fail: bool, any_error: bool) -> i32 {
    if any_fail {
        EXIT_VIOLATION
    } else if any_error {
        EXIT_USAGE
    } else {
        EXIT_OK
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(error::io_err(path))
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Caps the global rayon pool at `XLAB_THREADS` workers when that is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("XLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        error::usage(format!(
            "XLAB_THREADS must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| error::usage(format!("thread pool: {e}")))
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("xlab: {e}");
            EXIT_USAGE
        }
    }
}

fn run_cli(cli: &Cli) -> CliResult<i32> {
    configure_threads()?;
    let cfg = cli.config()?;
    let out = run_config(&cfg, cli.command == CliCommand::Sweep)?;
    print!("{}", out.csv);
    if cfg.command == Some(Command::GraphInfo) {
        if let Some(r) = out.report["results"][0]["detail"].as_object() {
            eprintln!(
                "{}: n = {}, D = {}, lambda = {:.12}",
                r["graph"].as_str().unwrap_or(""),
                r["n"],
                r["degree"],
                r["lambda"].as_f64().unwrap_or(f64::NAN)
            );
        }
    }
    if let Some(prefix) = &cfg.out {
        write_file(&with_suffix(prefix, "csv"), &out.csv)?;
        write_file(
            &with_suffix(prefix, "json"),
            &(serde_json::to_string_pretty(&out.report)? + "\n"),
        )?;
    }
    if out.exit_code == EXIT_VIOLATION {
        eprintln!("xlab: a checked inequality was violated; see the report for the witness");
    }
    Ok(out.exit_code)
}
