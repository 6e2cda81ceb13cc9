//! Discrete-time simulation loops.
//!
//! Both loops refresh the registry at a fixed cadence and hold every
//! decision constant until the next refresh. TDMA repeats one frame layout
//! for a whole segment, so the segment is the natural step. The alternative
//! scheduler hands successive frames to receivers in rotation; frames are
//! short enough that over one macro step each of the `n` active receivers
//! gets `1/n` of the time at its own desired power.

use log::debug;

use super::init::init_capacities;
use super::result::{DeviceOutcome, PsiRecord, SimError, SimResult, TracePoint};
use super::{average_multiplexing, SchedulerKind, SimConfig};
use crate::battery::{charge, BatteryState};
use crate::power::charging_power;
use crate::scheduler::{
    allocate_frame, alternative_next, AccessRequest, DeviceId, DeviceProfile, Registry,
};
use crate::Scalar;

pub type SimOutcome<T> = Result<SimResult<T>, SimError<T>>;

/// Runs the scheduler named in `config`.
pub fn run<T: Scalar>(config: &SimConfig<T>) -> SimOutcome<T> {
    match config.scheduler {
        SchedulerKind::Tdma => run_tdma(config),
        SchedulerKind::Alternative => run_alternative(config),
    }
}

/// Bookkeeping shared by both loops.
struct Run<'a, T: Scalar> {
    config: &'a SimConfig<T>,
    efficiency: T,
    registry: Registry<T>,
    outcomes: Vec<DeviceOutcome<T>>,
    series: Vec<PsiRecord<T>>,
    traces: Vec<TracePoint<T>>,
    transmitter_energy: T,
    power_limited_any: bool,
}

impl<'a, T: Scalar> Run<'a, T> {
    fn new(config: &'a SimConfig<T>) -> Result<Self, SimError<T>> {
        config.validate()?;
        let efficiency = config.efficiency.overall()?;
        let capacities = init_capacities(
            config.receivers,
            config.init_mode,
            config.seed,
            config.battery.full_capacity,
        )?;
        let mut registry = Registry::new();
        let mut outcomes = Vec::with_capacity(capacities.len());
        for (i, residual) in capacities.into_iter().enumerate() {
            let id = DeviceId(i as u32);
            let battery = BatteryState::new(residual, &config.battery)?;
            registry.request(AccessRequest { id, battery });
            outcomes.push(DeviceOutcome {
                id,
                initial_residual: residual,
                final_residual: residual,
                delivered_energy: T::zero(),
                completed_at: None,
            });
        }
        // authentication is out of scope: every receiver is admitted
        registry.access(|_| true)?;
        Ok(Self {
            config,
            efficiency,
            registry,
            outcomes,
            series: Vec::new(),
            traces: Vec::new(),
            transmitter_energy: T::zero(),
            power_limited_any: false,
        })
    }

    /// Refreshes the registry at time `t`; true once every receiver is full.
    fn refresh(&mut self, t: T) -> Result<bool, SimError<T>> {
        let removed =
            self.registry
                .refresh(&self.config.drive, self.efficiency, &self.config.battery)?;
        for d in removed {
            let o = &mut self.outcomes[d.id.0 as usize];
            o.completed_at = Some(t);
            o.final_residual = d.battery.residual;
        }
        Ok(self.registry.is_empty())
    }

    fn trace(&mut self, step: u64, t: T) {
        let stride = self.config.trace_stride as u64;
        if stride == 0 || !step.is_multiple_of(stride) {
            return;
        }
        self.traces
            .extend(self.registry.devices().iter().map(|d| TracePoint {
                device: d.id,
                t,
                residual: d.battery.residual,
                desired_power: d.desired_power,
                slots: d.slots,
            }));
    }

    /// Charges `id` at `power` for `dt`; returns the energy accepted.
    fn charge(&mut self, id: DeviceId, power: T, dt: T) -> Result<T, SimError<T>> {
        let spec = &self.config.battery;
        let profile: &mut DeviceProfile<T> = self
            .registry
            .get_mut(id)
            .expect("scheduled receiver is registered");
        let step = charge(profile.battery, power, dt, spec)?;
        profile.battery = step.state;
        let o = &mut self.outcomes[id.0 as usize];
        o.delivered_energy = o.delivered_energy + step.energy;
        o.final_residual = step.state.residual;
        Ok(step.energy)
    }

    fn finish(self, t_charge: T, complete: bool) -> SimResult<T> {
        let average_multiplexing = if t_charge > T::zero() {
            average_multiplexing(&self.series, t_charge).unwrap_or_else(|_| T::zero())
        } else {
            T::zero()
        };
        let delivered_energy = self
            .outcomes
            .iter()
            .fold(T::zero(), |acc, o| acc + o.delivered_energy);
        SimResult {
            scheduler: self.config.scheduler,
            receivers: self.config.receivers,
            drive_power: self.config.drive.drive_power,
            init_mode: self.config.init_mode,
            seed: self.config.seed,
            t_charge,
            series: self.series,
            average_multiplexing,
            traces: self.traces,
            devices: self.outcomes,
            delivered_energy,
            transmitter_energy: self.transmitter_energy,
            power_limited_any: self.power_limited_any,
            complete,
        }
    }

    fn time_limit(self, t: T) -> SimError<T> {
        let cap = self.config.max_time.as_f64();
        let remaining = self.registry.len();
        SimError::TimeLimit {
            cap,
            remaining,
            partial: Box::new(self.finish(t, false)),
        }
    }
}

/// TDMA scheduling: refresh, allocate a frame, and repeat that frame for one
/// segment at constant drive power, until every receiver is full.
///
/// Each selected receiver's DC-DC stage regulates to its desired power, so
/// the battery sees exactly that power unless the receiver is power limited,
/// in which case it gets the full-frame power.
pub fn run_tdma<T: Scalar>(config: &SimConfig<T>) -> SimOutcome<T> {
    let mut run = Run::new(config)?;
    let drive = config.drive;
    let segment = drive.segment_width;
    let ns = T::from_count(drive.slots_per_frame);
    let mut step: u64 = 0;
    loop {
        let t = T::lit(step as f64) * segment;
        if run.refresh(t)? {
            debug!("tdma: all {} receivers full at t = {t} s", config.receivers);
            return Ok(run.finish(t, true));
        }
        if t >= config.max_time {
            return Err(run.time_limit(t));
        }
        run.trace(step, t);

        let frame = allocate_frame(&run.registry, drive.slots_per_frame);
        let mut delivered = T::zero();
        for pulse in frame.pulses() {
            let profile = run.registry.get(pulse.device).expect("allocated receiver");
            let deliverable = charging_power(
                drive.drive_power,
                T::from_count(pulse.slots) / ns,
                run.efficiency,
            );
            let power = profile.desired_power.min(deliverable);
            run.power_limited_any |= profile.power_limited;
            run.charge(pulse.device, power, segment)?;
            delivered = delivered + power;
        }
        run.transmitter_energy =
            run.transmitter_energy + drive.drive_power * T::from_count(frame.len()) / ns * segment;
        run.series.push(PsiRecord {
            t,
            psi: frame.multiplexing(),
            duration: segment,
            active: run.registry.len(),
            delivered_power: delivered,
        });
        step += 1;
    }
}

/// Alternative scheduling: whole frames go to one receiver at a time in
/// cyclic id order, each at that receiver's desired power, with the driving
/// power following the receiver.
pub fn run_alternative<T: Scalar>(config: &SimConfig<T>) -> SimOutcome<T> {
    let mut run = Run::new(config)?;
    let dt = config.macro_step();
    let mut cursor: Option<DeviceId> = None;
    let mut step: u64 = 0;
    loop {
        let t = T::lit(step as f64) * dt;
        if run.refresh(t)? {
            debug!(
                "alternative: all {} receivers full at t = {t} s",
                config.receivers
            );
            return Ok(run.finish(t, true));
        }
        if t >= config.max_time {
            return Err(run.time_limit(t));
        }
        run.trace(step, t);

        let active = run.registry.len();
        let share = dt / T::from_count(active);
        // nobody is full right after a refresh, so one lap visits each once
        let mut lap = Vec::with_capacity(active);
        for _ in 0..active {
            cursor = alternative_next(&run.registry, cursor, &config.battery);
            lap.extend(cursor);
        }
        let mut delivered = T::zero();
        for id in lap {
            let power = run
                .registry
                .get(id)
                .expect("rotated receiver")
                .desired_power;
            let energy = run.charge(id, power, share)?;
            delivered = delivered + power * share / dt;
            run.transmitter_energy = run.transmitter_energy + energy / run.efficiency;
        }
        run.series.push(PsiRecord {
            t,
            psi: 1,
            duration: dt,
            active,
            delivered_power: delivered,
        });
        step += 1;
    }
}
