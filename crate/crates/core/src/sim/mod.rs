//! Deterministic simulation of both schedulers, metrics and sweeps.

mod config;
mod engine;
mod init;
mod result;
mod sweep;

pub use config::{InitMode, SchedulerKind, SimConfig};
pub use engine::{run, run_alternative, run_tdma, SimOutcome};
pub use init::init_capacities;
pub use result::{average_multiplexing, DeviceOutcome, PsiRecord, SimError, SimResult, TracePoint};
pub use sweep::{average_over_seeds, sweep, SeedAverage, SweepCell, SweepGrid, SweepRow};
