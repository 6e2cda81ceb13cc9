//! Multi-user charging schedules for adaptive resonant beam charging.
//!
//! A single transmitter charges many receivers by time-sharing its beam.
//! This crate models the power chain from driver to battery, a parametric
//! CC-CV charging profile, the TDMA slot allocator and a round-robin
//! baseline, and a deterministic simulator that compares the two.
//!
//! All math is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the common types to `f64`.

// `!(x > 0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod battery;
mod error;
pub mod power;
mod scalar;
pub mod scheduler;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type EfficiencyChain64 = power::EfficiencyChain<f64>;
pub type PwmWave64 = power::PwmWave<f64>;
pub type DriveSettings64 = power::DriveSettings<f64>;
pub type BatterySpec64 = battery::BatterySpec<f64>;
pub type BatteryState64 = battery::BatteryState<f64>;
pub type Registry64 = scheduler::Registry<f64>;
pub type SimConfig64 = sim::SimConfig<f64>;
pub type SimResult64 = sim::SimResult<f64>;
pub type SimError64 = sim::SimError<f64>;

pub type EfficiencyChain32 = power::EfficiencyChain<f32>;
pub type BatterySpec32 = battery::BatterySpec<f32>;
pub type SimConfig32 = sim::SimConfig<f32>;
pub type SimResult32 = sim::SimResult<f32>;
