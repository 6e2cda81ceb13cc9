use rayon::prelude::*;
use serde::Serialize;

use super::{run, InitMode, SchedulerKind, SimConfig, SimResult};
use crate::error::{Error, Result};
use crate::Scalar;

/// Axes of a parameter sweep. Every combination becomes one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid<T> {
    pub receivers: Vec<usize>,
    pub drive_powers: Vec<T>,
    pub schedulers: Vec<SchedulerKind>,
    /// Empty means "the base config's seed".
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell<T> {
    pub scheduler: SchedulerKind,
    pub receivers: usize,
    pub drive_power: T,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct SweepRow<T: Scalar> {
    pub cell: SweepCell<T>,
    /// The run's result, or the error message of a failed cell.
    pub outcome: std::result::Result<SimResult<T>, String>,
}

impl<T: Scalar> SweepGrid<T> {
    /// Cells sorted by (scheduler, receivers, drive power, seed).
    pub fn cells(&self, base_seed: Option<u64>) -> Vec<SweepCell<T>> {
        let seeds: Vec<Option<u64>> = if self.seeds.is_empty() {
            vec![base_seed]
        } else {
            self.seeds.iter().copied().map(Some).collect()
        };
        let mut cells = Vec::new();
        for &scheduler in &self.schedulers {
            for &receivers in &self.receivers {
                for &drive_power in &self.drive_powers {
                    for &seed in &seeds {
                        cells.push(SweepCell {
                            scheduler,
                            receivers,
                            drive_power,
                            seed,
                        });
                    }
                }
            }
        }
        cells.sort_by(|a, b| {
            a.scheduler
                .cmp(&b.scheduler)
                .then(a.receivers.cmp(&b.receivers))
                .then(
                    a.drive_power
                        .partial_cmp(&b.drive_power)
                        .unwrap_or(std::cmp::Ordering::Equal),
                )
                .then(a.seed.cmp(&b.seed))
        });
        cells.dedup();
        cells
    }
}

/// Runs every cell of `grid` on top of `base`. Cells run in parallel; the
/// output order depends only on the grid. A failing cell is reported in its
/// row and does not stop the sweep.
pub fn sweep<T: Scalar>(base: &SimConfig<T>, grid: &SweepGrid<T>) -> Result<Vec<SweepRow<T>>> {
    if grid.receivers.is_empty() || grid.drive_powers.is_empty() || grid.schedulers.is_empty() {
        return Err(Error::Domain("sweep grid is empty"));
    }
    let cells = grid.cells(base.seed);
    Ok(cells
        .into_par_iter()
        .map(|cell| {
            let mut config = base.clone();
            config.scheduler = cell.scheduler;
            config.receivers = cell.receivers;
            config.drive.drive_power = cell.drive_power;
            config.seed = cell.seed;
            let outcome = run(&config).map_err(|e| e.to_string());
            SweepRow { cell, outcome }
        })
        .collect())
}

/// Seed-averaged metrics of one (scheduler, receivers, drive power) group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedAverage<T> {
    pub scheduler: SchedulerKind,
    pub receivers: usize,
    pub drive_power: T,
    pub init_mode: InitMode,
    pub runs: usize,
    pub failed: usize,
    pub t_charge: T,
    pub average_multiplexing: T,
}

/// Averages successful rows over seeds, preserving row order.
pub fn average_over_seeds<T: Scalar>(
    rows: &[SweepRow<T>],
    init_mode: InitMode,
) -> Vec<SeedAverage<T>> {
    let mut out: Vec<SeedAverage<T>> = Vec::new();
    for row in rows {
        let c = &row.cell;
        let same_group = out.last().is_some_and(|g| {
            g.scheduler == c.scheduler
                && g.receivers == c.receivers
                && g.drive_power == c.drive_power
        });
        if !same_group {
            out.push(SeedAverage {
                scheduler: c.scheduler,
                receivers: c.receivers,
                drive_power: c.drive_power,
                init_mode,
                runs: 0,
                failed: 0,
                t_charge: T::zero(),
                average_multiplexing: T::zero(),
            });
        }
        let g = out.last_mut().expect("group pushed above");
        match &row.outcome {
            Ok(r) => {
                // running mean keeps the sums in range for f32
                g.runs += 1;
                let n = T::from_count(g.runs);
                g.t_charge = g.t_charge + (r.t_charge - g.t_charge) / n;
                g.average_multiplexing =
                    g.average_multiplexing + (r.average_multiplexing - g.average_multiplexing) / n;
            }
            Err(_) => g.failed += 1,
        }
    }
    out
}
