use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{InitMode, SchedulerKind};
use crate::error::{Error as DomainError, Result};
use crate::scheduler::DeviceId;
use crate::Scalar;

/// One refresh period of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiRecord<T> {
    /// Start of the period, seconds.
    pub t: T,
    /// Multiplexing number: receivers charged during the period.
    pub psi: usize,
    pub duration: T,
    /// Receivers still being scheduled.
    pub active: usize,
    /// Mean charging power delivered to all receivers over the period, watts.
    pub delivered_power: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint<T> {
    pub device: DeviceId,
    pub t: T,
    pub residual: T,
    pub desired_power: T,
    pub slots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceOutcome<T> {
    pub id: DeviceId,
    pub initial_residual: T,
    pub final_residual: T,
    /// Energy the battery accepted over the run, joules.
    pub delivered_energy: T,
    /// Refresh time at which the receiver was found full.
    pub completed_at: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult<T> {
    pub scheduler: SchedulerKind,
    pub receivers: usize,
    pub drive_power: T,
    pub init_mode: InitMode,
    pub seed: Option<u64>,
    /// Time until every receiver is full, seconds. For an incomplete run,
    /// the elapsed time when the cap fired.
    pub t_charge: T,
    pub series: Vec<PsiRecord<T>>,
    pub average_multiplexing: T,
    pub traces: Vec<TracePoint<T>>,
    pub devices: Vec<DeviceOutcome<T>>,
    /// Energy accepted by all batteries, joules.
    pub delivered_energy: T,
    /// Energy drawn by the transmitter driver, joules.
    pub transmitter_energy: T,
    /// Some receiver wanted more than a full frame could deliver.
    pub power_limited_any: bool,
    pub complete: bool,
}

impl<T: Scalar> SimResult<T> {
    /// Sum of ψ over the run weighted by how long each value held.
    pub fn psi_time_integral(&self) -> T {
        self.series
            .iter()
            .fold(T::zero(), |acc, r| acc + T::from_count(r.psi) * r.duration)
    }

    /// Time-weighted mean ψ over `[from, to)`, seconds.
    pub fn mean_psi_between(&self, from: T, to: T) -> Option<T> {
        let mut weighted = T::zero();
        let mut span = T::zero();
        for r in &self.series {
            let lo = r.t.max(from);
            let hi = (r.t + r.duration).min(to);
            if hi > lo {
                weighted = weighted + T::from_count(r.psi) * (hi - lo);
                span = span + (hi - lo);
            }
        }
        (span > T::zero()).then(|| weighted / span)
    }
}

/// Time-weighted average multiplexing number over a run of length `total`.
pub fn average_multiplexing<T: Scalar>(series: &[PsiRecord<T>], total: T) -> Result<T> {
    if !(total > T::zero()) {
        return Err(DomainError::Domain("charging time must be positive"));
    }
    let weighted = series
        .iter()
        .fold(T::zero(), |acc, r| acc + T::from_count(r.psi) * r.duration);
    Ok(weighted / total)
}

#[derive(Debug, Error)]
pub enum SimError<T: Scalar> {
    #[error(transparent)]
    Invalid(#[from] DomainError),
    #[error("simulated time cap of {cap} s reached with {remaining} receivers unfinished")]
    TimeLimit {
        cap: f64,
        remaining: usize,
        partial: Box<SimResult<T>>,
    },
}
