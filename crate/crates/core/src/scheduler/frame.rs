use serde::{Deserialize, Serialize};

use super::{DeviceId, Registry};
use crate::Scalar;

/// Consecutive slots handed to one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pulse {
    pub device: DeviceId,
    pub slots: usize,
}

/// Slot layout repeated for one segment. Pulses appear in allocation order
/// starting at slot 0; the slots after the last pulse are idle.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Frame {
    slots_per_frame: usize,
    pulses: Vec<Pulse>,
}

impl Frame {
    pub fn empty(slots_per_frame: usize) -> Self {
        Self {
            slots_per_frame,
            pulses: Vec::new(),
        }
    }

    pub fn slots_per_frame(&self) -> usize {
        self.slots_per_frame
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    /// Allocated slots.
    pub fn len(&self) -> usize {
        self.pulses.iter().map(|p| p.slots).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn idle_slots(&self) -> usize {
        self.slots_per_frame - self.len()
    }

    /// Multiplexing number: receivers sharing the frame.
    pub fn multiplexing(&self) -> usize {
        self.pulses.len()
    }

    pub fn slots_of(&self, device: DeviceId) -> usize {
        self.pulses
            .iter()
            .find(|p| p.device == device)
            .map_or(0, |p| p.slots)
    }

    /// Receiver owning each allocated slot, in transmission order.
    pub fn slot_assignment(&self) -> Vec<DeviceId> {
        self.pulses
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.device, p.slots))
            .collect()
    }
}

/// Forms the TDMA frame for the next segment.
///
/// Receivers are ranked by residual capacity, lowest first, with ties broken
/// by ascending id. The ranking is scanned once; a receiver is selected when
/// its desired slot number fits in the slots still free, and scanning
/// continues past receivers that do not fit. Receivers wanting zero slots are
/// skipped.
pub fn allocate_frame<T: Scalar>(registry: &Registry<T>, slots_per_frame: usize) -> Frame {
    let devices = registry.devices();
    let mut order: Vec<usize> = (0..devices.len()).collect();
    order.sort_by(|&a, &b| {
        let (da, db) = (&devices[a], &devices[b]);
        da.residual()
            .partial_cmp(&db.residual())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(da.id.cmp(&db.id))
    });

    let mut frame = Frame::empty(slots_per_frame);
    let mut free = slots_per_frame;
    for d in order.into_iter().map(|i| &devices[i]) {
        if d.slots == 0 || d.slots > free {
            continue;
        }
        free -= d.slots;
        frame.pulses.push(Pulse {
            device: d.id,
            slots: d.slots,
        });
        if free == 0 {
            break;
        }
    }
    frame
}
