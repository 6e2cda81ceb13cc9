//! Parametric CC-CV Li-ion charging profile and coulomb counting.
//!
//! State of charge maps to one of four stages:
//!
//! | stage | soc range                     | desired power                           |
//! |-------|-------------------------------|-----------------------------------------|
//! | TC    | `[0, tc_soc_end)`             | `tc_current_c * I1C * v_min`            |
//! | CC    | `[tc_soc_end, cc_soc_end)`    | `I1C * V(soc)`, V ramps v_min to v_max  |
//! | CV    | `[cc_soc_end, 1)`             | `v_max * I1C * max(floor, taper(soc))`  |
//! | CT    | `1`                           | 0                                       |
//!
//! where `taper(soc) = (1 - soc) / (1 - cc_soc_end)`. The current floor keeps
//! the CV stage finite: without it the taper only approaches full capacity
//! asymptotically.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::Scalar;

const SECONDS_PER_HOUR: f64 = 3600.0;
const MAH_PER_AH: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChargeStage {
    /// Trickle charge.
    #[serde(rename = "TC")]
    Trickle,
    /// Constant current.
    #[serde(rename = "CC")]
    ConstantCurrent,
    /// Constant voltage.
    #[serde(rename = "CV")]
    ConstantVoltage,
    /// Charge terminal.
    #[serde(rename = "CT")]
    Terminal,
}

impl ChargeStage {
    pub fn label(self) -> &'static str {
        match self {
            Self::Trickle => "TC",
            Self::ConstantCurrent => "CC",
            Self::ConstantVoltage => "CV",
            Self::Terminal => "CT",
        }
    }
}

impl std::fmt::Display for ChargeStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Cell capacity and charging profile parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatterySpec<T> {
    /// Full capacity, mAh.
    pub full_capacity: T,
    /// Current at 1C, amps.
    pub c_rate_current: T,
    /// State of charge at which trickle charge hands over to CC.
    pub tc_soc_end: T,
    /// State of charge at which CC hands over to CV.
    pub cc_soc_end: T,
    /// Terminal voltage at the start of CC (and throughout TC), volts.
    pub v_min: T,
    /// CV regulation voltage, volts.
    pub v_max: T,
    /// Trickle current as a fraction of 1C.
    pub tc_current_c: T,
    /// Lowest CV current as a fraction of 1C.
    pub cv_current_floor_c: T,
}

impl<T: Scalar> Default for BatterySpec<T> {
    /// 1000 mAh single cell, 4.2 W peak at the CC/CV boundary.
    fn default() -> Self {
        Self {
            full_capacity: T::lit(1000.0),
            c_rate_current: T::one(),
            tc_soc_end: T::lit(0.1),
            cc_soc_end: T::lit(0.8),
            v_min: T::lit(3.0),
            v_max: T::lit(4.2),
            tc_current_c: T::lit(0.1),
            cv_current_floor_c: T::lit(0.05),
        }
    }
}

impl<T: Scalar> BatterySpec<T> {
    pub fn validate(&self) -> Result<()> {
        let (zero, one) = (T::zero(), T::one());
        check_range(
            "full_capacity_mah",
            self.full_capacity,
            self.full_capacity > zero && self.full_capacity.is_finite(),
            "(0,inf)",
        )?;
        check_range(
            "c_rate_current_a",
            self.c_rate_current,
            self.c_rate_current > zero && self.c_rate_current.is_finite(),
            "(0,inf)",
        )?;
        check_range(
            "tc_soc_end",
            self.tc_soc_end,
            self.tc_soc_end > zero && self.tc_soc_end < one,
            "(0,1)",
        )?;
        check_range(
            "cc_soc_end",
            self.cc_soc_end,
            self.cc_soc_end > self.tc_soc_end && self.cc_soc_end < one,
            "(tc_soc_end,1)",
        )?;
        check_range("v_min", self.v_min, self.v_min > zero, "(0,v_max)")?;
        check_range(
            "v_max",
            self.v_max,
            self.v_max > self.v_min && self.v_max.is_finite(),
            "(v_min,inf)",
        )?;
        check_range(
            "tc_current_c",
            self.tc_current_c,
            self.tc_current_c > zero && self.tc_current_c.is_finite(),
            "(0,inf)",
        )?;
        check_range(
            "cv_current_floor_c",
            self.cv_current_floor_c,
            self.cv_current_floor_c > zero && self.cv_current_floor_c <= one,
            "(0,1]",
        )
    }

    /// Largest desired power over the whole profile, reached at `cc_soc_end`.
    pub fn peak_power(&self) -> T {
        self.v_max * self.c_rate_current
    }

    /// Terminal voltage used to turn power into current at `soc`.
    pub fn charge_voltage(&self, soc: T) -> T {
        match self.stage(soc) {
            ChargeStage::Trickle => self.v_min,
            ChargeStage::ConstantCurrent => {
                self.v_min
                    + (self.v_max - self.v_min) * (soc - self.tc_soc_end)
                        / (self.cc_soc_end - self.tc_soc_end)
            }
            ChargeStage::ConstantVoltage | ChargeStage::Terminal => self.v_max,
        }
    }

    /// Desired charging current at `soc`, amps.
    pub fn desired_current(&self, soc: T) -> T {
        let i1c = self.c_rate_current;
        match self.stage(soc) {
            ChargeStage::Trickle => self.tc_current_c * i1c,
            ChargeStage::ConstantCurrent => i1c,
            ChargeStage::ConstantVoltage => {
                let taper = (T::one() - soc) / (T::one() - self.cc_soc_end);
                i1c * taper.max(self.cv_current_floor_c)
            }
            ChargeStage::Terminal => T::zero(),
        }
    }

    // soc assumed already range-checked
    fn stage(&self, soc: T) -> ChargeStage {
        if soc < self.tc_soc_end {
            ChargeStage::Trickle
        } else if soc < self.cc_soc_end {
            ChargeStage::ConstantCurrent
        } else if soc < T::one() {
            ChargeStage::ConstantVoltage
        } else {
            ChargeStage::Terminal
        }
    }
}

fn check_soc<T: Scalar>(soc: T) -> Result<()> {
    if soc >= T::zero() && soc <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain("state of charge outside [0, 1]"))
    }
}

/// Charging stage at state of charge `soc`.
pub fn stage_of<T: Scalar>(soc: T, spec: &BatterySpec<T>) -> Result<ChargeStage> {
    check_soc(soc)?;
    Ok(spec.stage(soc))
}

/// Charging power the profile asks for at `soc`, watts.
pub fn desired_power<T: Scalar>(soc: T, spec: &BatterySpec<T>) -> Result<T> {
    check_soc(soc)?;
    let p = match spec.stage(soc) {
        ChargeStage::Trickle => spec.tc_current_c * spec.c_rate_current * spec.v_min,
        ChargeStage::ConstantCurrent => spec.c_rate_current * spec.charge_voltage(soc),
        ChargeStage::ConstantVoltage => spec.v_max * spec.desired_current(soc),
        ChargeStage::Terminal => T::zero(),
    };
    Ok(p)
}

/// Residual charge of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryState<T> {
    /// Residual capacity, mAh.
    pub residual: T,
}

impl<T: Scalar> BatteryState<T> {
    pub fn new(residual: T, spec: &BatterySpec<T>) -> Result<Self> {
        check_range(
            "residual_capacity_mah",
            residual,
            residual >= T::zero() && residual <= spec.full_capacity,
            "[0,full_capacity]",
        )?;
        Ok(Self { residual })
    }

    pub fn empty() -> Self {
        Self {
            residual: T::zero(),
        }
    }

    pub fn soc(&self, spec: &BatterySpec<T>) -> T {
        (self.residual / spec.full_capacity).min(T::one())
    }

    pub fn is_full(&self, spec: &BatterySpec<T>) -> bool {
        self.residual >= spec.full_capacity
    }

    pub fn stage(&self, spec: &BatterySpec<T>) -> ChargeStage {
        spec.stage(self.soc(spec))
    }

    pub fn desired_power(&self, spec: &BatterySpec<T>) -> T {
        // soc() is clamped to [0, 1] for any valid state
        desired_power(self.soc(spec), spec).unwrap_or_else(|_| T::zero())
    }
}

/// Outcome of holding a constant charging power for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeStep<T> {
    pub state: BatteryState<T>,
    /// Energy the battery accepted, joules. Less than `power * dt` when the
    /// cell fills part way through the step.
    pub energy: T,
    /// Seconds of the step spent charging before the cell filled.
    pub active_time: T,
}

/// Holds `power` for `dt` seconds, converting it to current at the terminal
/// voltage at the start of the step. Capacity is clamped at full.
pub fn charge<T: Scalar>(
    state: BatteryState<T>,
    power: T,
    dt: T,
    spec: &BatterySpec<T>,
) -> Result<ChargeStep<T>> {
    if !(power >= T::zero()) {
        return Err(Error::Domain("charging power must be non-negative"));
    }
    if !(dt >= T::zero()) {
        return Err(Error::Domain("time step must be non-negative"));
    }
    let idle = ChargeStep {
        state,
        energy: T::zero(),
        active_time: T::zero(),
    };
    if state.is_full(spec) || power == T::zero() || dt == T::zero() {
        return Ok(idle);
    }
    let current = power / spec.charge_voltage(state.soc(spec));
    let mah_per_second = current * T::lit(MAH_PER_AH / SECONDS_PER_HOUR);
    let headroom = spec.full_capacity - state.residual;
    let gain = mah_per_second * dt;
    if gain >= headroom {
        let active_time = headroom / mah_per_second;
        Ok(ChargeStep {
            state: BatteryState {
                residual: spec.full_capacity,
            },
            energy: power * active_time,
            active_time,
        })
    } else {
        Ok(ChargeStep {
            state: BatteryState {
                residual: state.residual + gain,
            },
            energy: power * dt,
            active_time: dt,
        })
    }
}

/// Zero-order-hold coulomb counting over `dt` seconds at constant `power`.
pub fn integrate<T: Scalar>(
    state: BatteryState<T>,
    power: T,
    dt: T,
    spec: &BatterySpec<T>,
) -> Result<BatteryState<T>> {
    charge(state, power, dt, spec).map(|s| s.state)
}

/// Time to charge one cell from `initial` to full when it always receives its
/// desired power, integrated in steps of `dt` seconds.
///
/// This is the single-receiver reference: with one receiver both schedulers
/// dedicate every frame to it.
pub fn reference_charge_time<T: Scalar>(
    initial: BatteryState<T>,
    dt: T,
    spec: &BatterySpec<T>,
) -> Result<T> {
    spec.validate()?;
    if !(dt > T::zero()) {
        return Err(Error::Domain("time step must be positive"));
    }
    // floor current bounds the time; allow generous headroom
    let worst_current = spec.c_rate_current * spec.tc_current_c.min(spec.cv_current_floor_c);
    let worst_seconds = spec.full_capacity.as_f64() / MAH_PER_AH * SECONDS_PER_HOUR
        / worst_current.as_f64()
        * (spec.v_max / spec.v_min).as_f64();
    let max_steps = (2.0 * worst_seconds / dt.as_f64()).ceil() as u64 + 1;

    let mut state = initial;
    let mut steps: u64 = 0;
    while !state.is_full(spec) {
        if steps >= max_steps {
            return Err(Error::Domain("profile does not reach full charge"));
        }
        state = integrate(state, state.desired_power(spec), dt, spec)?;
        steps += 1;
    }
    Ok(T::lit(steps as f64) * dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec() -> BatterySpec<f64> {
        BatterySpec::default()
    }

    #[test]
    fn defaults_validate() {
        spec().validate().unwrap();
        assert_relative_eq!(spec().peak_power(), 4.2, max_relative = 1e-15);
    }

    #[test]
    fn bad_specs_rejected() {
        let s = BatterySpec {
            tc_soc_end: 0.9,
            ..spec()
        };
        assert!(s.validate().is_err());
        let s = BatterySpec {
            v_min: 5.0,
            ..spec()
        };
        assert!(s.validate().is_err());
        let s = BatterySpec {
            full_capacity: 0.0,
            ..spec()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn stages() {
        let s = spec();
        assert_eq!(stage_of(0.05, &s).unwrap(), ChargeStage::Trickle);
        assert_eq!(stage_of(0.1, &s).unwrap(), ChargeStage::ConstantCurrent);
        assert_eq!(stage_of(0.5, &s).unwrap(), ChargeStage::ConstantCurrent);
        assert_eq!(stage_of(0.8, &s).unwrap(), ChargeStage::ConstantVoltage);
        assert_eq!(stage_of(0.999, &s).unwrap(), ChargeStage::ConstantVoltage);
        assert_eq!(stage_of(1.0, &s).unwrap(), ChargeStage::Terminal);
        assert!(stage_of(1.01, &s).is_err());
        assert!(stage_of(-0.01, &s).is_err());
    }

    #[test]
    fn profile_values() {
        let s = spec();
        assert_relative_eq!(desired_power(0.0, &s).unwrap(), 0.3, max_relative = 1e-12);
        assert_relative_eq!(desired_power(0.1, &s).unwrap(), 3.0, max_relative = 1e-12);
        assert_relative_eq!(desired_power(0.45, &s).unwrap(), 3.6, max_relative = 1e-12);
        assert_relative_eq!(desired_power(0.8, &s).unwrap(), 4.2, max_relative = 1e-12);
        // halfway down the taper
        assert_relative_eq!(desired_power(0.9, &s).unwrap(), 2.1, max_relative = 1e-12);
        // floor: 0.05C at 4.2 V
        assert_relative_eq!(
            desired_power(0.995, &s).unwrap(),
            0.21,
            max_relative = 1e-12
        );
        assert_eq!(desired_power(1.0, &s).unwrap(), 0.0);
        assert!(desired_power(2.0, &s).is_err());
    }

    #[test]
    fn integrate_examples() {
        let s = spec();
        let out = integrate(BatteryState::empty(), 0.3, 3600.0, &s).unwrap();
        assert_relative_eq!(out.residual, 100.0, max_relative = 1e-12);

        let st = BatteryState::new(420.0, &s).unwrap();
        assert_eq!(integrate(st, 3.3, 0.0, &s).unwrap(), st);

        let full = BatteryState::new(1000.0, &s).unwrap();
        assert_eq!(integrate(full, 4.2, 10.0, &s).unwrap(), full);

        assert!(integrate(st, -1.0, 1.0, &s).is_err());
        assert!(integrate(st, 1.0, -1.0, &s).is_err());
    }

    #[test]
    fn charge_clamps_and_reports_partial_step() {
        let s = spec();
        // 0.21 W at 4.2 V is 0.05 A, i.e. 1/72 mAh per second
        let st = BatteryState::new(1000.0 - 1.0 / 144.0, &s).unwrap();
        let step = charge(st, 0.21, 1.0, &s).unwrap();
        assert_eq!(step.state.residual, 1000.0);
        assert_relative_eq!(step.active_time, 0.5, max_relative = 1e-9);
        assert_relative_eq!(step.energy, 0.105, max_relative = 1e-9);
    }

    #[test]
    fn reference_time_matches_closed_form() {
        // TC: 100 mAh at 0.1 A; CC: 700 mAh at 1 A; CV: exponential taper
        // with time constant 720 s down to the 0.05C floor, then 10 mAh at
        // 0.05 A.
        let closed_form = 3600.0 + 2520.0 + 720.0 * 20f64.ln() + 720.0;
        let t = reference_charge_time(BatteryState::empty(), 0.1, &spec()).unwrap();
        assert!((t - closed_form).abs() < 1.0, "{t} vs {closed_form}");
        let coarse = reference_charge_time(BatteryState::empty(), 1.0, &spec()).unwrap();
        assert!((coarse - t).abs() <= 2.0, "{coarse} vs {t}");
    }

    #[test]
    fn reference_time_from_full_is_zero() {
        let s = spec();
        let full = BatteryState::new(1000.0, &s).unwrap();
        assert_eq!(reference_charge_time(full, 0.1, &s).unwrap(), 0.0);
    }

    #[test]
    fn single_precision_profile() {
        let s = BatterySpec::<f32>::default();
        assert!((desired_power(0.8f32, &s).unwrap() - 4.2).abs() < 1e-6);
        let t = reference_charge_time(BatteryState::empty(), 1.0f32, &s).unwrap();
        assert!((t - 8996.9).abs() < 10.0, "{t}");
    }

    proptest! {
        #[test]
        fn power_bounded_by_peak(soc in 0.0f64..=1.0) {
            let s = spec();
            let p = desired_power(soc, &s).unwrap();
            prop_assert!(p >= 0.0);
            prop_assert!(p <= s.peak_power() * (1.0 + 1e-12));
        }

        #[test]
        fn cc_cv_boundary_continuous(eps in 1e-12f64..1e-6) {
            let s = spec();
            let left = desired_power(s.cc_soc_end - eps, &s).unwrap();
            let right = desired_power(s.cc_soc_end, &s).unwrap();
            prop_assert!((left - right).abs() < 1e-5);
        }

        #[test]
        fn integrate_monotone_and_bounded(
            c in 0.0f64..=1000.0, p in 0.0f64..10.0, dt in 0.0f64..5000.0,
        ) {
            let s = spec();
            let st = BatteryState::new(c, &s).unwrap();
            let out = integrate(st, p, dt, &s).unwrap();
            prop_assert!(out.residual >= st.residual);
            prop_assert!(out.residual <= s.full_capacity);
        }
    }
}
