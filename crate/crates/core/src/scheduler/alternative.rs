use super::{DeviceId, Registry};
use crate::battery::BatterySpec;
use crate::Scalar;

/// Next receiver to get a whole frame under the alternative scheduler: the
/// first non-full receiver after `cursor` in cyclic id order. With no cursor
/// the lowest id starts the rotation. `None` once every receiver is full.
pub fn alternative_next<T: Scalar>(
    registry: &Registry<T>,
    cursor: Option<DeviceId>,
    spec: &BatterySpec<T>,
) -> Option<DeviceId> {
    let devices = registry.devices();
    let start = cursor.map_or(0, |c| devices.partition_point(|d| d.id <= c));
    devices[start..]
        .iter()
        .chain(&devices[..start])
        .find(|d| !d.battery.is_full(spec))
        .map(|d| d.id)
}
