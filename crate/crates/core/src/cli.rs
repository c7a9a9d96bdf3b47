//! The `vaxgame` command line: `ne-run`, `so-run`, `compare` and `sweep`.
//!
//! Every command echoes its effective configuration to stdout and to
//! `config.txt` in the output directory (a loadable config file), then writes
//! its results once the computation has finished.
//!
//! Exit codes: 0 success, 1 error, 2 completed with warnings (a solver did
//! not converge, a verification check failed, or a sweep has no ok cells).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{load_config, parse_override, SimConfig};
use crate::error::{Error, Result};
use crate::export::{self, fmt_num};
use crate::metrics::{compare_runs, outcome, r0, OutcomeMetrics};
use crate::ne::run_ne;
use crate::oracle::verify_so_run;
use crate::so::solve_fbs;
use crate::sweep::{run_sweep, AxisSpec, CellStatus, SweepSettings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_WARNING: i32 = 2;

/// Thresholds `so-run --verify` applies to [`crate::oracle::SoDiagnostics`].
const VERIFY_ADJOINT_TOL: f64 = 1e-4;
const VERIFY_STATIONARITY_TOL: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "vaxgame", version, about = "Vaccination game on an SIRS/V epidemic model")]
pub struct Cli {
    /// Config file with `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Override one setting; repeatable, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Sweep worker threads (0 = one per core).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Behavioral run with imitation dynamics.
    NeRun,
    /// Social optimum by forward-backward sweep.
    SoRun {
        /// Also check the solution against finite differences, an Euler
        /// costate pass and constant controls.
        #[arg(long)]
        verify: bool,
    },
    /// Both runs and the social efficiency deficit.
    Compare,
    /// Two-parameter grid of comparisons.
    Sweep {
        /// `name:lo:hi:steps[:coupled]`, rows of the grid.
        #[arg(long, value_name = "AXIS")]
        axis1: AxisSpec,
        /// `name:lo:hi:steps[:coupled]`, columns of the grid.
        #[arg(long, value_name = "AXIS")]
        axis2: AxisSpec,
        /// Write a PPM heatmap and a range sidecar per field.
        #[arg(long)]
        render: bool,
    },
}

impl Cli {
    /// Config file, then `--set`, then `--out`/`--workers`.
    pub fn effective_config(&self) -> Result<SimConfig> {
        let mut overrides = self
            .set
            .iter()
            .map(|s| parse_override(s))
            .collect::<Result<Vec<_>>>()?;
        if let Some(out) = &self.out {
            overrides.push(("out".into(), out.display().to_string()));
        }
        if let Some(w) = self.workers {
            overrides.push(("workers".into(), w.to_string()));
        }
        load_config(self.config.as_deref(), &overrides)
    }
}

/// Files to write, collected while computing.
struct Output {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Output {
    fn new(dir: &Path) -> Self {
        Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    fn flush(self) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        for (name, contents) in self.files {
            let path = self.dir.join(name);
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

type Entries = Vec<(String, String)>;

fn entry(entries: &mut Entries, key: &str, value: impl ToString) {
    entries.push((key.to_string(), value.to_string()));
}

fn metric_entries(entries: &mut Entries, prefix: &str, m: &OutcomeMetrics) {
    entry(entries, &format!("{prefix}it"), fmt_num(m.it));
    entry(entries, &format!("{prefix}vt"), fmt_num(m.vt));
    entry(entries, &format!("{prefix}asp"), fmt_num(m.asp));
    if let Some(j) = m.j {
        entry(entries, &format!("{prefix}j"), fmt_num(j));
    }
}

fn opt_time(t: Option<f64>) -> String {
    t.map(fmt_num).unwrap_or_else(|| "none".into())
}

fn cmd_ne_run(cfg: &SimConfig, out: &mut Output, log: &mut dyn Write) -> Result<i32> {
    let grid = cfg.grid()?;
    let run = run_ne(&cfg.params, cfg.init, grid, cfg.eq_tol)?;
    let m = outcome(&run.trajectory, &cfg.params, grid.t_end(), None)?;
    let mut s = Entries::new();
    entry(&mut s, "model", "ne");
    entry(&mut s, "R0", format!("{:.2}", r0(&cfg.params)));
    metric_entries(&mut s, "", &m);
    entry(&mut s, "horizon", fmt_num(m.horizon_used));
    entry(&mut s, "converged", run.converged);
    entry(&mut s, "equilibrium_time", opt_time(run.equilibrium_time));
    out.add("ne_trajectory.csv", export::trajectory_csv(&run.trajectory));
    out.add("ne_summary.txt", export::summary_text(&s));
    write!(log, "{}", export::summary_text(&s)).ok();
    if !run.converged {
        warn(log, "behavioral run did not reach equilibrium within the horizon");
        return Ok(EXIT_WARNING);
    }
    Ok(EXIT_OK)
}

fn cmd_so_run(cfg: &SimConfig, verify: bool, out: &mut Output, log: &mut dyn Write) -> Result<i32> {
    let grid = cfg.grid()?;
    let run = solve_fbs(&cfg.params, cfg.init, &cfg.fbs()?)?;
    let m = outcome(&run.states, &cfg.params, grid.t_end(), Some(run.objective_j))?;
    let mut s = Entries::new();
    entry(&mut s, "model", "so");
    entry(&mut s, "R0", format!("{:.2}", r0(&cfg.params)));
    metric_entries(&mut s, "", &m);
    entry(&mut s, "horizon", fmt_num(m.horizon_used));
    entry(&mut s, "converged", run.converged);
    entry(&mut s, "iterations", run.iterations);
    let last = run.convergence_history.last().copied().unwrap_or(0.0);
    entry(&mut s, "last_control_change", fmt_num(last));
    out.add("so_trajectory.csv", export::trajectory_csv(&run.states));
    out.add("so_summary.txt", export::summary_text(&s));
    write!(log, "{}", export::summary_text(&s)).ok();
    let mut code = EXIT_OK;
    if !run.converged {
        warn(
            log,
            &format!("forward-backward sweep stopped after {} iterations without converging", run.iterations),
        );
        code = EXIT_WARNING;
    }
    if verify {
        let d = verify_so_run(&cfg.params, cfg.init, &run)?;
        let mut v = Entries::new();
        entry(&mut v, "adjoint_fd_error", fmt_num(d.adjoint_fd_error));
        entry(&mut v, "stationarity_error", fmt_num(d.stationarity_error));
        entry(&mut v, "euler_adjoint_gap", fmt_num(d.euler_adjoint_gap));
        entry(&mut v, "best_constant_j", fmt_num(d.best_constant_j));
        entry(&mut v, "j", fmt_num(d.j));
        let passed = d.adjoint_fd_error <= VERIFY_ADJOINT_TOL
            && d.stationarity_error <= VERIFY_STATIONARITY_TOL
            && d.beats_constant_controls();
        entry(&mut v, "passed", passed);
        out.add("so_verify.txt", export::summary_text(&v));
        write!(log, "{}", export::summary_text(&v)).ok();
        if !passed {
            warn(log, "verification checks failed");
            code = EXIT_WARNING;
        }
    }
    Ok(code)
}

fn cmd_compare(cfg: &SimConfig, out: &mut Output, log: &mut dyn Write) -> Result<i32> {
    let runs = compare_runs(&cfg.params, cfg.init, cfg.grid()?, cfg.eq_tol, &cfg.fbs()?)?;
    let cmp = &runs.comparison;
    let mut s = Entries::new();
    entry(&mut s, "R0", format!("{:.2}", r0(&cfg.params)));
    metric_entries(&mut s, "ne_", &cmp.ne);
    metric_entries(&mut s, "so_", &cmp.so);
    entry(&mut s, "sed", fmt_num(cmp.sed));
    entry(&mut s, "ne_converged", cmp.ne_converged);
    entry(&mut s, "ne_equilibrium_time", opt_time(runs.ne.equilibrium_time));
    entry(&mut s, "so_converged", cmp.so_converged);
    entry(&mut s, "so_iterations", runs.so.iterations);
    out.add("ne_trajectory.csv", export::trajectory_csv(&runs.ne.trajectory));
    out.add("so_trajectory.csv", export::trajectory_csv(&runs.so.states));
    out.add("comparison.csv", export::comparison_csv(cmp));
    out.add("compare_summary.txt", export::summary_text(&s));
    write!(log, "{}", export::summary_text(&s)).ok();
    if !(cmp.ne_converged && cmp.so_converged) {
        warn(log, "at least one run did not converge; metrics cover the full horizon");
        return Ok(EXIT_WARNING);
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(
    cfg: &SimConfig,
    axis1: &AxisSpec,
    axis2: &AxisSpec,
    render: bool,
    out: &mut Output,
    log: &mut dyn Write,
) -> Result<i32> {
    let settings = SweepSettings {
        base: cfg.params,
        init: cfg.init,
        horizon: cfg.grid()?,
        eq_tol: cfg.eq_tol,
        fbs: cfg.fbs()?,
    };
    let res = run_sweep(&settings, axis1, axis2, cfg.workers)?;
    out.add("sweep.csv", export::sweep_csv(&res));
    if render {
        for field in export::HEATMAP_FIELDS {
            let map = export::render_heatmap(&res, field);
            out.add(&format!("heatmap_{field}.txt"), export::heatmap_sidecar(&res, field, &map));
            out.add(&format!("heatmap_{field}.ppm"), map.ppm);
        }
    }
    let mut s = Entries::new();
    entry(&mut s, "axis1", axis1);
    entry(&mut s, "axis2", axis2);
    for status in [
        CellStatus::Ok,
        CellStatus::Unconverged,
        CellStatus::Skipped,
        CellStatus::Failed,
    ] {
        entry(&mut s, status.as_str(), res.count(status));
    }
    out.add("sweep_summary.txt", export::summary_text(&s));
    write!(log, "{}", export::summary_text(&s)).ok();
    for cell in res.cells.iter().filter(|c| c.status == CellStatus::Failed) {
        warn(
            log,
            &format!(
                "cell ({}, {}) failed: {}",
                fmt_num(cell.value1),
                fmt_num(cell.value2),
                cell.note.as_deref().unwrap_or("")
            ),
        );
    }
    if res.count(CellStatus::Ok) == 0 {
        warn(log, "no cell completed with both runs converged");
        return Ok(EXIT_WARNING);
    }
    Ok(EXIT_OK)
}

fn warn(log: &mut dyn Write, message: &str) {
    writeln!(log, "WARNING: {message}").ok();
}

/// Runs a parsed command; `stdout` receives the config echo and summaries,
/// `stderr` warnings and errors.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = (|| {
        let cfg = cli.effective_config()?;
        let echo = cfg.to_config_string();
        write!(stdout, "{echo}").ok();
        let mut out = Output::new(&cfg.out_dir);
        out.add("config.txt", echo);
        let mut log = Vec::new();
        let code = match &cli.command {
            Command::NeRun => cmd_ne_run(&cfg, &mut out, &mut log),
            Command::SoRun { verify } => cmd_so_run(&cfg, *verify, &mut out, &mut log),
            Command::Compare => cmd_compare(&cfg, &mut out, &mut log),
            Command::Sweep {
                axis1,
                axis2,
                render,
            } => cmd_sweep(&cfg, axis1, axis2, *render, &mut out, &mut log),
        }?;
        out.flush()?;
        for line in String::from_utf8_lossy(&log).lines() {
            if line.starts_with("WARNING") {
                writeln!(stderr, "{line}").ok();
            } else {
                writeln!(stdout, "{line}").ok();
            }
        }
        writeln!(stdout, "wrote results to {}", cfg.out_dir.display()).ok();
        Ok::<i32, Error>(code)
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            writeln!(stderr, "error: {e}").ok();
            EXIT_ERROR
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                write!(stderr, "{text}").ok();
            } else {
                write!(stdout, "{text}").ok();
            }
            code
        }
    }
}
