use serde::{Deserialize, Serialize};

use crate::battery::BatterySpec;
use crate::error::{check_range, Error, Result};
use crate::power::{DriveSettings, EfficiencyChain};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    Tdma,
    Alternative,
}

impl SchedulerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Tdma => "tdma",
            Self::Alternative => "alternative",
        }
    }
}

impl std::fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tdma" => Ok(Self::Tdma),
            "alternative" => Ok(Self::Alternative),
            other => Err(format!(
                "unknown scheduler {other:?} (expected tdma|alternative)"
            )),
        }
    }
}

/// How initial residual capacities are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Every battery starts empty.
    Zero,
    /// Independent uniform draws on `[0, full_capacity)`.
    Uniform,
}

impl InitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Uniform => "uniform",
        }
    }
}

impl std::fmt::Display for InitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for InitMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zero" => Ok(Self::Zero),
            "uniform" => Ok(Self::Uniform),
            other => Err(format!(
                "unknown init mode {other:?} (expected zero|uniform)"
            )),
        }
    }
}

/// Everything one simulation run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    pub scheduler: SchedulerKind,
    pub receivers: usize,
    pub init_mode: InitMode,
    pub seed: Option<u64>,
    pub efficiency: EfficiencyChain<T>,
    pub drive: DriveSettings<T>,
    pub battery: BatterySpec<T>,
    /// Macro step of the alternative scheduler, seconds. `None` uses the
    /// TDMA segment width. TDMA always refreshes once per segment.
    pub refresh_period: Option<T>,
    /// Simulated-time cap, seconds.
    pub max_time: T,
    /// Record a per-receiver trace point every this many refreshes; 0 turns
    /// tracing off.
    pub trace_stride: usize,
}

impl<T: Scalar> Default for SimConfig<T> {
    fn default() -> Self {
        Self {
            scheduler: SchedulerKind::Tdma,
            receivers: 1,
            init_mode: InitMode::Zero,
            seed: None,
            efficiency: EfficiencyChain::default(),
            drive: DriveSettings::default(),
            battery: BatterySpec::default(),
            refresh_period: None,
            max_time: T::lit(1e7),
            trace_stride: 60,
        }
    }
}

impl<T: Scalar> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.efficiency.validate()?;
        self.drive.validate()?;
        self.battery.validate()?;
        if self.init_mode == InitMode::Uniform && self.seed.is_none() {
            return Err(Error::MissingSeed);
        }
        let step = self.macro_step();
        check_range(
            "refresh_period_s",
            step,
            step > T::zero() && step.is_finite(),
            "(0,inf)",
        )?;
        check_range(
            "max_time_s",
            self.max_time,
            self.max_time > T::zero(),
            "(0,inf)",
        )
    }

    /// Refresh period of the configured scheduler, seconds.
    pub fn macro_step(&self) -> T {
        match self.scheduler {
            SchedulerKind::Tdma => self.drive.segment_width,
            SchedulerKind::Alternative => self.refresh_period.unwrap_or(self.drive.segment_width),
        }
    }

    pub fn with_scheduler(&self, scheduler: SchedulerKind) -> Self {
        Self {
            scheduler,
            ..self.clone()
        }
    }
}
