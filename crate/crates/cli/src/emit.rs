//! CSV and JSON result files.
//!
//! Column order is fixed and numbers use Rust's shortest round-trip
//! formatting, so identical inputs give byte-identical files.

use std::io;
use std::path::{Path, PathBuf};

use rbc_sched::battery::{desired_power, stage_of};
use rbc_sched::sim::{InitMode, SeedAverage, SweepRow};
use rbc_sched::{BatterySpec64, SimResult64};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

pub const SUMMARY_COLUMNS: [&str; 8] = [
    "scheduler",
    "n_receivers",
    "drive_power_w",
    "init_mode",
    "seed",
    "t_charge_s",
    "avg_multiplexing",
    "power_limited_any",
];

pub const TIMESERIES_COLUMNS: [&str; 4] = ["t_s", "psi", "active_receivers", "delivered_power_w"];

#[derive(Debug, Serialize)]
struct SummaryRow<'a> {
    scheduler: &'a str,
    n_receivers: usize,
    drive_power_w: f64,
    init_mode: &'a str,
    seed: Option<u64>,
    t_charge_s: Option<f64>,
    avg_multiplexing: Option<f64>,
    power_limited_any: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

#[derive(Debug, Serialize)]
struct TimeseriesRow {
    t_s: f64,
    psi: usize,
    active_receivers: usize,
    delivered_power_w: f64,
}

#[derive(Debug, Serialize)]
struct TraceRow {
    t_s: f64,
    receiver: u32,
    residual_mah: f64,
    desired_power_w: f64,
    slots: usize,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_table<R: Serialize>(
    dir: &Path,
    stem: &str,
    format: Format,
    columns: &[&str],
    rows: &[R],
    csv_row: impl Fn(&R) -> Vec<String>,
) -> io::Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    let body = match format {
        Format::Csv => {
            let mut s = columns.join(",");
            s.push('\n');
            for r in rows {
                s.push_str(&csv_row(r).join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows).map_err(io::Error::other)?;
            s.push('\n');
            s
        }
    };
    std::fs::write(&path, body)?;
    Ok(path)
}

/// File stem of a result's time series.
pub fn timeseries_stem(r: &SimResult64) -> String {
    format!(
        "timeseries_{}_n{}_pd{}_{}",
        r.scheduler,
        r.receivers,
        r.drive_power,
        r.seed.map_or("noseed".to_owned(), |s| format!("seed{s}"))
    )
}

/// Writes the `summary` table: one row per run, failed runs with empty
/// metric fields.
pub fn emit_summary(
    rows: &[SweepRow<f64>],
    init_mode: InitMode,
    format: Format,
    dir: &Path,
) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let summary: Vec<SummaryRow> = rows
        .iter()
        .map(|row| {
            let ok = row.outcome.as_ref().ok();
            SummaryRow {
                scheduler: row.cell.scheduler.as_str(),
                n_receivers: row.cell.receivers,
                drive_power_w: row.cell.drive_power,
                init_mode: init_mode.as_str(),
                seed: row.cell.seed,
                t_charge_s: ok.map(|r| r.t_charge),
                avg_multiplexing: ok.map(|r| r.average_multiplexing),
                power_limited_any: ok.map(|r| r.power_limited_any),
                error: row.outcome.as_ref().err().map(String::as_str),
            }
        })
        .collect();
    write_table(dir, "summary", format, &SUMMARY_COLUMNS, &summary, |r| {
        vec![
            r.scheduler.to_owned(),
            r.n_receivers.to_string(),
            r.drive_power_w.to_string(),
            r.init_mode.to_owned(),
            opt(r.seed),
            opt(r.t_charge_s),
            opt(r.avg_multiplexing),
            opt(r.power_limited_any),
        ]
    })
}

/// Writes `summary` plus one `timeseries_*` file (and a `trace_*` file when
/// traces were recorded) per successful row. Returns the files written.
pub fn emit_results(
    rows: &[SweepRow<f64>],
    init_mode: InitMode,
    format: Format,
    dir: &Path,
) -> io::Result<Vec<PathBuf>> {
    let mut written = vec![emit_summary(rows, init_mode, format, dir)?];

    for result in rows.iter().filter_map(|r| r.outcome.as_ref().ok()) {
        let series: Vec<TimeseriesRow> = result
            .series
            .iter()
            .map(|p| TimeseriesRow {
                t_s: p.t,
                psi: p.psi,
                active_receivers: p.active,
                delivered_power_w: p.delivered_power,
            })
            .collect();
        let stem = timeseries_stem(result);
        written.push(write_table(
            dir,
            &stem,
            format,
            &TIMESERIES_COLUMNS,
            &series,
            |r| {
                vec![
                    r.t_s.to_string(),
                    r.psi.to_string(),
                    r.active_receivers.to_string(),
                    r.delivered_power_w.to_string(),
                ]
            },
        )?);

        if !result.traces.is_empty() {
            let traces: Vec<TraceRow> = result
                .traces
                .iter()
                .map(|p| TraceRow {
                    t_s: p.t,
                    receiver: p.device.0,
                    residual_mah: p.residual,
                    desired_power_w: p.desired_power,
                    slots: p.slots,
                })
                .collect();
            let stem = stem.replacen("timeseries", "trace", 1);
            written.push(write_table(
                dir,
                &stem,
                format,
                &[
                    "t_s",
                    "receiver",
                    "residual_mah",
                    "desired_power_w",
                    "slots",
                ],
                &traces,
                |r| {
                    vec![
                        r.t_s.to_string(),
                        r.receiver.to_string(),
                        r.residual_mah.to_string(),
                        r.desired_power_w.to_string(),
                        r.slots.to_string(),
                    ]
                },
            )?);
        }
    }
    Ok(written)
}

/// Seed-averaged sweep metrics.
pub fn emit_averages(
    averages: &[SeedAverage<f64>],
    format: Format,
    dir: &Path,
) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    write_table(
        dir,
        "averages",
        format,
        &[
            "scheduler",
            "n_receivers",
            "drive_power_w",
            "init_mode",
            "runs",
            "failed",
            "t_charge_s",
            "avg_multiplexing",
        ],
        averages,
        |a| {
            vec![
                a.scheduler.to_string(),
                a.receivers.to_string(),
                a.drive_power.to_string(),
                a.init_mode.to_string(),
                a.runs.to_string(),
                a.failed.to_string(),
                a.t_charge.to_string(),
                a.average_multiplexing.to_string(),
            ]
        },
    )
}

/// One row of the scheduler comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRow {
    pub n_receivers: usize,
    pub t_alt_s: f64,
    pub t_tdma_s: f64,
    pub ratio: f64,
}

pub fn emit_compare(rows: &[CompareRow], format: Format, dir: &Path) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    write_table(
        dir,
        "compare",
        format,
        &["n_receivers", "t_alt_s", "t_tdma_s", "ratio"],
        rows,
        |r| {
            vec![
                r.n_receivers.to_string(),
                r.t_alt_s.to_string(),
                r.t_tdma_s.to_string(),
                r.ratio.to_string(),
            ]
        },
    )
}

/// The charging profile sampled on a grid of `round(1 / step)` equal
/// state-of-charge intervals.
pub fn emit_profile(
    spec: &BatterySpec64,
    step: f64,
    format: Format,
    dir: &Path,
) -> io::Result<PathBuf> {
    #[derive(Serialize)]
    struct ProfileRow {
        soc: f64,
        stage: &'static str,
        desired_power_w: f64,
    }
    std::fs::create_dir_all(dir)?;
    let points = ((1.0 / step).round() as usize).max(1);
    let rows: Vec<ProfileRow> = (0..=points)
        .map(|i| {
            let soc = i as f64 / points as f64;
            ProfileRow {
                soc,
                stage: stage_of(soc, spec).expect("soc in [0, 1]").label(),
                desired_power_w: desired_power(soc, spec).expect("soc in [0, 1]"),
            }
        })
        .collect();
    write_table(
        dir,
        "profile",
        format,
        &["soc", "stage", "desired_power_w"],
        &rows,
        |r| {
            vec![
                r.soc.to_string(),
                r.stage.to_owned(),
                r.desired_power_w.to_string(),
            ]
        },
    )
}
