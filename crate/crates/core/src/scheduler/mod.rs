//! Device registry and the two scheduling policies.
//!
//! [`allocate_frame`] is the TDMA allocator: receivers are ranked by residual
//! capacity and packed first-fit into a frame of `slots_per_frame` slots.
//! [`alternative_next`] is the baseline that hands whole frames to one
//! receiver at a time in cyclic id order.

mod alternative;
mod frame;
mod registry;

pub use alternative::alternative_next;
pub use frame::{allocate_frame, Frame, Pulse};
pub use registry::{AccessReport, AccessRequest, DeviceProfile, Registry};

use serde::{Deserialize, Serialize};

/// Receiver identity.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct DeviceId(pub u32);

impl std::fmt::Display for DeviceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "R{}", self.0)
    }
}
