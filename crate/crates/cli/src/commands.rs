//! Experiment commands behind the CLI subcommands.

use std::io;
use std::path::PathBuf;

use log::{info, warn};
use rbc_sched::sim::{average_over_seeds, sweep, SchedulerKind, SweepGrid, SweepRow};
use thiserror::Error;

use crate::config::{ConfigError, Experiment};
use crate::emit::{self, CompareRow, Format};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("output: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// 1 for bad input, 2 for failures while running or writing results.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Usage(_) => 1,
            Self::Simulation(_) | Self::Io(_) => 2,
        }
    }
}

/// Where and how results are written.
#[derive(Debug, Clone)]
pub struct Output {
    pub dir: PathBuf,
    pub format: Format,
    /// Also write per-run time series and trace files.
    pub series: bool,
}

fn grid(
    exp: &Experiment,
    receivers: &[usize],
    drive_powers: &[f64],
    schedulers: &[SchedulerKind],
) -> SweepGrid<f64> {
    SweepGrid {
        receivers: receivers.to_vec(),
        drive_powers: drive_powers.to_vec(),
        schedulers: schedulers.to_vec(),
        seeds: exp.seeds(),
    }
}

fn check_drive_powers(drive_powers: &[f64]) -> Result<(), CliError> {
    match drive_powers.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        Some(p) => Err(CliError::Usage(format!(
            "drive power out of range (0,inf): {p}"
        ))),
        None => Ok(()),
    }
}

fn run_grid(
    exp: &Experiment,
    grid: &SweepGrid<f64>,
    out: &Output,
) -> Result<Vec<SweepRow<f64>>, CliError> {
    check_drive_powers(&grid.drive_powers)?;
    let rows = sweep(&exp.sim, grid).map_err(|e| CliError::Usage(e.to_string()))?;
    if out.series {
        emit::emit_results(&rows, exp.sim.init_mode, out.format, &out.dir)?;
    } else {
        emit::emit_summary(&rows, exp.sim.init_mode, out.format, &out.dir)?;
    }
    Ok(rows)
}

fn first_failure(rows: &[SweepRow<f64>]) -> Result<(), CliError> {
    let failed: Vec<&SweepRow<f64>> = rows.iter().filter(|r| r.outcome.is_err()).collect();
    for r in &failed {
        warn!(
            "{} n={} pd={} seed={:?} failed: {}",
            r.cell.scheduler,
            r.cell.receivers,
            r.cell.drive_power,
            r.cell.seed,
            r.outcome.as_ref().err().map_or("", String::as_str)
        );
    }
    match failed.first() {
        Some(r) => Err(CliError::Simulation(format!(
            "{} of {} runs failed; first: {}",
            failed.len(),
            rows.len(),
            r.outcome.as_ref().err().map_or("", String::as_str)
        ))),
        None => Ok(()),
    }
}

/// Runs the configured scheduler once.
pub fn cmd_run(exp: &Experiment, out: &Output) -> Result<Vec<SweepRow<f64>>, CliError> {
    let mut one = exp.clone();
    // a single run uses the base seed only
    one.seed_count = 1;
    let g = grid(
        &one,
        &[exp.sim.receivers],
        &[exp.sim.drive.drive_power],
        &[exp.sim.scheduler],
    );
    let rows = run_grid(&one, &g, out)?;
    first_failure(&rows)?;
    Ok(rows)
}

/// Runs both schedulers for each receiver count and tabulates
/// (N, T_alt, T_tdma, T_tdma / T_alt), averaging over seeds in uniform mode.
pub fn cmd_compare(
    exp: &Experiment,
    receivers: &[usize],
    out: &Output,
) -> Result<Vec<CompareRow>, CliError> {
    if receivers.is_empty() {
        return Err(CliError::Usage(
            "compare needs at least one receiver count".into(),
        ));
    }
    let g = grid(
        exp,
        receivers,
        &[exp.sim.drive.drive_power],
        &[SchedulerKind::Tdma, SchedulerKind::Alternative],
    );
    let rows = run_grid(exp, &g, out)?;
    first_failure(&rows)?;
    let averages = average_over_seeds(&rows, exp.sim.init_mode);
    let mut table = Vec::new();
    for n in g
        .cells(exp.sim.seed)
        .iter()
        .map(|c| c.receivers)
        .collect::<std::collections::BTreeSet<_>>()
    {
        let t = |kind| {
            averages
                .iter()
                .find(|a| a.scheduler == kind && a.receivers == n)
                .map(|a| a.t_charge)
                .expect("both schedulers ran")
        };
        let (t_tdma_s, t_alt_s) = (t(SchedulerKind::Tdma), t(SchedulerKind::Alternative));
        let ratio = t_tdma_s / t_alt_s;
        info!("n={n}: alternative {t_alt_s} s, tdma {t_tdma_s} s, ratio {ratio}");
        table.push(CompareRow {
            n_receivers: n,
            t_alt_s,
            t_tdma_s,
            ratio,
        });
    }
    emit::emit_compare(&table, out.format, &out.dir)?;
    Ok(table)
}

/// Full grid over receiver counts, drive powers and schedulers.
pub fn cmd_sweep(
    exp: &Experiment,
    receivers: &[usize],
    drive_powers: &[f64],
    schedulers: &[SchedulerKind],
    out: &Output,
) -> Result<Vec<SweepRow<f64>>, CliError> {
    let g = grid(exp, receivers, drive_powers, schedulers);
    let rows = run_grid(exp, &g, out)?;
    emit::emit_averages(
        &average_over_seeds(&rows, exp.sim.init_mode),
        out.format,
        &out.dir,
    )?;
    first_failure(&rows)?;
    Ok(rows)
}

pub fn cmd_profile(exp: &Experiment, soc_step: f64, out: &Output) -> Result<PathBuf, CliError> {
    if !(soc_step > 0.0 && soc_step <= 1.0) {
        return Err(CliError::Usage(format!(
            "soc step out of range (0,1]: {soc_step}"
        )));
    }
    Ok(emit::emit_profile(
        &exp.sim.battery,
        soc_step,
        out.format,
        &out.dir,
    )?)
}
