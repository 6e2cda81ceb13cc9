//! Power conversion along the transmitter-to-battery chain.
//!
//! The chain multiplies six stage efficiencies into a single end-to-end
//! efficiency. A receiver's power buffer averages the PWM beam it sees into a
//! constant output, so the delivered charging power is
//! `efficiency * duty * drive_power`. Frames are quantised into slots, and a
//! receiver's duty cycle becomes a slot count by rounding up.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::Scalar;

/// Stage efficiencies from the driver to the battery terminals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyChain<T> {
    /// Electro-optical conversion at the transmitter.
    pub eta_s: T,
    /// Path controller (optical switch array).
    pub eta_pc: T,
    /// Propagation through air.
    pub eta_t: T,
    /// Photovoltaic conversion at the receiver.
    pub eta_r: T,
    /// Power buffer.
    pub eta_pb: T,
    /// DC-DC converter.
    pub eta_dc: T,
}

impl<T: Scalar> Default for EfficiencyChain<T> {
    /// 40% electro-optical and 50% photovoltaic conversion, all other stages
    /// lossless: 20% end to end.
    fn default() -> Self {
        Self {
            eta_s: T::lit(0.4),
            eta_pc: T::one(),
            eta_t: T::one(),
            eta_r: T::lit(0.5),
            eta_pb: T::one(),
            eta_dc: T::one(),
        }
    }
}

impl<T: Scalar> EfficiencyChain<T> {
    pub fn new(eta_s: T, eta_pc: T, eta_t: T, eta_r: T, eta_pb: T, eta_dc: T) -> Result<Self> {
        let chain = Self {
            eta_s,
            eta_pc,
            eta_t,
            eta_r,
            eta_pb,
            eta_dc,
        };
        chain.validate()?;
        Ok(chain)
    }

    /// A chain with every stage lossless.
    pub fn ideal() -> Self {
        Self {
            eta_s: T::one(),
            eta_pc: T::one(),
            eta_t: T::one(),
            eta_r: T::one(),
            eta_pb: T::one(),
            eta_dc: T::one(),
        }
    }

    pub fn fields(&self) -> [(&'static str, T); 6] {
        [
            ("eta_s", self.eta_s),
            ("eta_pc", self.eta_pc),
            ("eta_t", self.eta_t),
            ("eta_r", self.eta_r),
            ("eta_pb", self.eta_pb),
            ("eta_dc", self.eta_dc),
        ]
    }

    /// Every stage must lie in (0, 1].
    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.fields() {
            check_range(name, v, v > T::zero() && v <= T::one(), "(0,1]")?;
        }
        Ok(())
    }

    pub fn overall(&self) -> Result<T> {
        overall_efficiency(self)
    }
}

/// End-to-end efficiency: the product of all six stages.
pub fn overall_efficiency<T: Scalar>(chain: &EfficiencyChain<T>) -> Result<T> {
    chain.validate()?;
    Ok(chain.fields().iter().fold(T::one(), |acc, &(_, v)| acc * v))
}

/// A PWM power wave as seen at the input of a receiver's power buffer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PwmWave<T> {
    /// Peak input power during the ON stage, watts.
    pub peak_power: T,
    /// ON-stage width, seconds.
    pub pulse_width: T,
    /// Wave period, seconds.
    pub period: T,
}

impl<T: Scalar> PwmWave<T> {
    pub fn new(peak_power: T, pulse_width: T, period: T) -> Result<Self> {
        check_range("period", period, period > T::zero(), "(0,inf)")?;
        check_range(
            "pulse_width",
            pulse_width,
            pulse_width >= T::zero() && pulse_width <= period,
            "[0,period]",
        )?;
        check_range("peak_power", peak_power, peak_power >= T::zero(), "[0,inf)")?;
        Ok(Self {
            peak_power,
            pulse_width,
            period,
        })
    }

    /// Builds a wave from a duty cycle in [0, 1].
    pub fn from_duty(peak_power: T, duty: T, period: T) -> Result<Self> {
        check_range("duty", duty, duty >= T::zero() && duty <= T::one(), "[0,1]")?;
        Self::new(peak_power, duty * period, period)
    }

    pub fn duty(&self) -> T {
        self.pulse_width / self.period
    }

    /// Energy entering the buffer over one period, joules.
    pub fn input_energy(&self) -> T {
        self.peak_power * self.pulse_width
    }
}

/// Constant output power of a lossless power buffer fed by `wave`.
///
/// Equal to `duty * peak_power`: the only constant power whose energy over
/// one period matches the pulse energy.
pub fn buffer_output<T: Scalar>(wave: &PwmWave<T>) -> T {
    wave.duty() * wave.peak_power
}

/// Charging power delivered for drive power `drive_power` at duty `duty`
/// through a chain of efficiency `efficiency`.
pub fn charging_power<T: Scalar>(drive_power: T, duty: T, efficiency: T) -> T {
    efficiency * duty * drive_power
}

/// Duty cycle needed to deliver `charge_power`. Not clamped; values above 1
/// mean the drive power cannot satisfy the demand.
pub fn duty_for_power<T: Scalar>(charge_power: T, drive_power: T, efficiency: T) -> Result<T> {
    if !(drive_power > T::zero()) {
        return Err(Error::Domain("drive power must be positive"));
    }
    if !(efficiency > T::zero()) {
        return Err(Error::Domain("efficiency must be positive"));
    }
    if !(charge_power >= T::zero()) {
        return Err(Error::Domain("charging power must be non-negative"));
    }
    Ok(charge_power / (efficiency * drive_power))
}

/// Slot demand of one receiver within a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlotDemand {
    pub slots: usize,
    /// Set when the desired power exceeds what a whole frame can deliver and
    /// `slots` was clamped to the frame size.
    pub power_limited: bool,
}

/// Number of slots out of `slots_per_frame` that deliver at least
/// `charge_power`: the duty cycle times the frame size, rounded up.
///
/// Products within a few ulps of an integer are taken as that integer, so a
/// receiver asking for exactly the full-frame power gets `slots_per_frame`
/// slots rather than being flagged as limited by a rounding artefact.
pub fn slots_for_power<T: Scalar>(
    charge_power: T,
    drive_power: T,
    efficiency: T,
    slots_per_frame: usize,
) -> Result<SlotDemand> {
    if slots_per_frame == 0 {
        return Err(Error::Domain("slots per frame must be at least 1"));
    }
    let duty = duty_for_power(charge_power, drive_power, efficiency)?;
    let exact = duty * T::from_count(slots_per_frame);
    let nearest = exact.round();
    let tol = T::epsilon() * T::lit(64.0) * exact.max(T::one());
    let wanted = if (exact - nearest).abs() <= tol {
        nearest
    } else {
        exact.ceil()
    };
    let ns = T::from_count(slots_per_frame);
    if wanted > ns {
        Ok(SlotDemand {
            slots: slots_per_frame,
            power_limited: true,
        })
    } else {
        Ok(SlotDemand {
            slots: wanted.to_usize().unwrap_or(0),
            power_limited: false,
        })
    }
}

/// Transmitter timing and drive settings for TDMA operation.
///
/// The frame is the PWM period seen by every receiver; a segment repeats one
/// frame layout for `segment_width` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSettings<T> {
    /// Driving power, watts. Constant throughout TDMA operation.
    pub drive_power: T,
    pub slots_per_frame: usize,
    /// Slot width, seconds.
    pub slot_width: T,
    /// Segment width, seconds.
    pub segment_width: T,
}

impl<T: Scalar> Default for DriveSettings<T> {
    /// 21 W drive, 200 slots of 1 us (a 5 kHz PWM), 1 s segments.
    fn default() -> Self {
        Self {
            drive_power: T::lit(21.0),
            slots_per_frame: 200,
            slot_width: T::lit(1e-6),
            segment_width: T::one(),
        }
    }
}

impl<T: Scalar> DriveSettings<T> {
    pub fn frame_width(&self) -> T {
        self.slot_width * T::from_count(self.slots_per_frame)
    }

    /// PWM frequency seen by each receiver, hertz.
    pub fn pwm_frequency(&self) -> T {
        self.frame_width().recip()
    }

    /// Whole frames per segment.
    pub fn frames_per_segment(&self) -> usize {
        (self.segment_width / self.frame_width())
            .round()
            .to_usize()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        check_range(
            "drive_power_w",
            self.drive_power,
            self.drive_power > T::zero() && self.drive_power.is_finite(),
            "(0,inf)",
        )?;
        if self.slots_per_frame == 0 {
            return Err(Error::OutOfRange {
                field: "slots_per_frame",
                value: 0.0,
                range: "[1,inf)",
            });
        }
        check_range(
            "slot_width_s",
            self.slot_width,
            self.slot_width > T::zero() && self.slot_width.is_finite(),
            "(0,inf)",
        )?;
        check_range(
            "segment_width_s",
            self.segment_width,
            self.segment_width > T::zero() && self.segment_width.is_finite(),
            "(0,inf)",
        )?;
        // segment must hold a whole number of frames
        let frames = self.segment_width / self.frame_width();
        let tol = T::lit(1e-6) * frames.max(T::one());
        check_range(
            "segment_width_s",
            self.segment_width,
            frames >= T::one() - tol && (frames - frames.round()).abs() <= tol,
            "{k * frame width, k = 1, 2, ...}",
        )
    }

    /// Power a full-frame pulse delivers to a receiver.
    pub fn full_frame_power(&self, efficiency: T) -> T {
        charging_power(self.drive_power, T::one(), efficiency)
    }
}
