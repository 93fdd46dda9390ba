//! `szilard` command-line front end.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{RunConfig, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "szilard",
    version,
    about = "Work, force balance and optimal wall removal of the N-particle quantum Szilard engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate F_m(x), <F_p(x)> and W_m(l, x) over an x-grid for one outcome m.
    ///
    /// Columns: x, F_m, F_avg, residual (= F_m - F_avg), W_m (= -ln[f_m(l)/f_m(x)]),
    /// fW_m (= f_m(l) W_m). Forces are in units of E0/L. The footer records the
    /// force-balance point x_balance and the optimal point x_optimal of outcome m.
    Forces(RunArgs),
    /// Sweep temperature (--t-grid), insertion point (--l-grid), or both.
    ///
    /// Columns: t, l, x_balance_0..N, x_optimal_0..N, then for each selected
    /// protocol P: W_P_kT (work / k_BT), W_P_E0 (work / E0), W_P_0..N (per-outcome
    /// -ln[f_m(l)/f_m(x_m)]); finally l_residual (dW/dl stationarity residual) and
    /// error (empty unless the row failed). JSON output is an array of objects with
    /// the same field names.
    Sweep(RunArgs),
    /// Solve one model at (t, l) and search the best insertion point.
    ///
    /// Same columns as `sweep` plus l_best and W_best_kT.
    Optimize(RunArgs),
    /// Run the fast invariant suite and report pass/fail per invariant.
    Validate,
}

#[derive(Debug, Args, Default)]
struct RunArgs {
    /// boson | fermion | distinguishable | classical
    #[arg(long)]
    stats: Option<String>,
    /// Particle count N.
    #[arg(long)]
    n: Option<String>,
    /// Dimensionless temperature k_BT/E0.
    #[arg(long)]
    t: Option<String>,
    /// Temperature grid A:B:STEPS or log:A:B:STEPS.
    #[arg(long)]
    t_grid: Option<String>,
    /// Insertion point l in units of L (default 0.5).
    #[arg(long)]
    l: Option<String>,
    /// Insertion grid A:B:STEPS.
    #[arg(long)]
    l_grid: Option<String>,
    /// balance | optimal | both
    #[arg(long)]
    protocol: Option<String>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// Output file (default stdout).
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for sweep rows.
    #[arg(long)]
    workers: Option<String>,
    /// key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Outcome m for `forces` (default 1).
    #[arg(long)]
    m: Option<String>,
    /// Position grid for `forces` (default 0.01:0.99:99).
    #[arg(long)]
    x_grid: Option<String>,
    /// Balance protocol for one-sided outcomes: stay (wall removed at l) | edge (x_0 = 0, x_N = L).
    #[arg(long)]
    one_sided: Option<String>,
    /// Truncation threshold for level sums (default 1e-14).
    #[arg(long)]
    eps: Option<String>,
    /// Root-scan resolution (default 1024).
    #[arg(long)]
    scan_points: Option<String>,
    /// Bisection tolerance in units of L (default 1e-10).
    #[arg(long)]
    root_tol: Option<String>,
}

impl RunArgs {
    fn settings(self) -> Result<Settings, CliError> {
        let base = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let flags = Settings {
            stats: self.stats,
            n: self.n,
            t: self.t,
            t_grid: self.t_grid,
            l: self.l,
            l_grid: self.l_grid,
            protocol: self.protocol,
            format: self.format,
            out: self.out,
            workers: self.workers,
            m: self.m,
            x_grid: self.x_grid,
            one_sided: self.one_sided,
            eps: self.eps,
            scan_points: self.scan_points,
            root_tol: self.root_tol,
        };
        // a single value on the command line replaces a grid from the file
        let mut base = base;
        if flags.t.is_some() {
            base.t_grid = None;
        }
        if flags.t_grid.is_some() {
            base.t = None;
        }
        if flags.l.is_some() {
            base.l_grid = None;
        }
        if flags.l_grid.is_some() {
            base.l = None;
        }
        Ok(flags.over(base))
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate => {
            let (report, ok) = commands::cmd_validate();
            print!("{report}");
            if ok {
                Ok(())
            } else {
                Err(CliError::Compute("invariant suite failed".into()))
            }
        }
        Command::Forces(args) => {
            let cfg = RunConfig::resolve(args.settings()?)?;
            let table = commands::cmd_forces(&cfg)?;
            emit(&cfg, &table.render(cfg.format))
        }
        Command::Sweep(args) => {
            let cfg = RunConfig::resolve(args.settings()?)?;
            let table = commands::cmd_sweep(&cfg)?;
            emit(&cfg, &table.render(cfg.format))
        }
        Command::Optimize(args) => {
            let cfg = RunConfig::resolve(args.settings()?)?;
            let table = commands::cmd_optimize(&cfg)?;
            emit(&cfg, &table.render(cfg.format))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("szilard: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
