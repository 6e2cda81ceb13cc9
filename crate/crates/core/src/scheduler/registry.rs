use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::DeviceId;
use crate::battery::{BatterySpec, BatteryState};
use crate::error::{Error, Result};
use crate::power::{slots_for_power, DriveSettings};
use crate::Scalar;

/// What the transmitter knows about one accessed receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile<T> {
    pub id: DeviceId,
    pub battery: BatteryState<T>,
    /// Desired charging power at the last refresh, watts.
    pub desired_power: T,
    /// Desired slot number at the last refresh.
    pub slots: usize,
    /// The desired power exceeded a full frame at the last refresh.
    pub power_limited: bool,
}

impl<T: Scalar> DeviceProfile<T> {
    pub fn new(id: DeviceId, battery: BatteryState<T>) -> Self {
        Self {
            id,
            battery,
            desired_power: T::zero(),
            slots: 0,
            power_limited: false,
        }
    }

    pub fn residual(&self) -> T {
        self.battery.residual
    }
}

/// A receiver asking to be charged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccessRequest<T> {
    pub id: DeviceId,
    pub battery: BatteryState<T>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccessReport {
    pub accepted: Vec<DeviceId>,
    pub rejected: Vec<DeviceId>,
}

/// Accessed receivers plus requests waiting for access.
///
/// Accessed receivers are kept in ascending id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registry<T> {
    devices: Vec<DeviceProfile<T>>,
    pending: Vec<AccessRequest<T>>,
}

impl<T> Default for Registry<T> {
    fn default() -> Self {
        Self {
            devices: Vec::new(),
            pending: Vec::new(),
        }
    }
}

impl<T: Scalar> Registry<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Queues a request for the next [`Registry::access`].
    pub fn request(&mut self, request: AccessRequest<T>) {
        self.pending.push(request);
    }

    pub fn pending(&self) -> &[AccessRequest<T>] {
        &self.pending
    }

    pub fn devices(&self) -> &[DeviceProfile<T>] {
        &self.devices
    }

    pub fn devices_mut(&mut self) -> &mut [DeviceProfile<T>] {
        &mut self.devices
    }

    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }

    pub fn get(&self, id: DeviceId) -> Option<&DeviceProfile<T>> {
        self.position(id).map(|i| &self.devices[i])
    }

    pub fn get_mut(&mut self, id: DeviceId) -> Option<&mut DeviceProfile<T>> {
        self.position(id).map(move |i| &mut self.devices[i])
    }

    fn position(&self, id: DeviceId) -> Option<usize> {
        self.devices.binary_search_by_key(&id, |d| d.id).ok()
    }

    /// Handles every pending request: those passing `authenticate` become
    /// accessed receivers, the rest are dropped.
    ///
    /// A duplicate id, either among the pending requests or against an
    /// already accessed receiver, fails the whole batch and leaves the
    /// accessed set untouched. The pending queue is consumed either way.
    pub fn access<F>(&mut self, mut authenticate: F) -> Result<AccessReport>
    where
        F: FnMut(&AccessRequest<T>) -> bool,
    {
        let pending = std::mem::take(&mut self.pending);
        let mut seen: Vec<DeviceId> = pending.iter().map(|r| r.id).collect();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateId(w[0]));
        }
        if let Some(r) = pending.iter().find(|r| self.position(r.id).is_some()) {
            return Err(Error::DuplicateId(r.id));
        }

        let mut report = AccessReport::default();
        for req in pending {
            if authenticate(&req) {
                let at = self.devices.partition_point(|d| d.id < req.id);
                self.devices
                    .insert(at, DeviceProfile::new(req.id, req.battery));
                report.accepted.push(req.id);
            } else {
                info!("receiver {} failed authentication; request dropped", req.id);
                report.rejected.push(req.id);
            }
        }
        Ok(report)
    }

    /// Recomputes desired power and slot number for every receiver, then
    /// removes the ones that are full. Returns the removed profiles; an
    /// empty registry afterwards means scheduling is finished.
    pub fn refresh(
        &mut self,
        drive: &DriveSettings<T>,
        efficiency: T,
        spec: &BatterySpec<T>,
    ) -> Result<Vec<DeviceProfile<T>>> {
        for d in &mut self.devices {
            d.desired_power = d.battery.desired_power(spec);
            let demand = slots_for_power(
                d.desired_power,
                drive.drive_power,
                efficiency,
                drive.slots_per_frame,
            )?;
            d.slots = demand.slots;
            d.power_limited = demand.power_limited;
        }
        let mut removed = Vec::new();
        self.devices.retain(|d| {
            if d.battery.is_full(spec) {
                removed.push(*d);
                false
            } else {
                true
            }
        });
        for d in &removed {
            debug!("receiver {} full; removed", d.id);
        }
        Ok(removed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(id: u32, residual: f64) -> AccessRequest<f64> {
        AccessRequest {
            id: DeviceId(id),
            battery: BatteryState { residual },
        }
    }

    #[test]
    fn access_all_authenticated() {
        let mut r = Registry::new();
        for i in 0..3 {
            r.request(req(i, 0.0));
        }
        let rep = r.access(|_| true).unwrap();
        assert_eq!(rep.accepted.len(), 3);
        assert_eq!(r.len(), 3);
        assert!(r.pending().is_empty());
    }

    #[test]
    fn access_with_no_requests_is_noop() {
        let mut r: Registry<f64> = Registry::new();
        r.request(req(7, 0.0));
        r.access(|_| true).unwrap();
        let before = r.clone();
        let rep = r.access(|_| true).unwrap();
        assert!(rep.accepted.is_empty() && rep.rejected.is_empty());
        assert_eq!(r, before);
    }

    #[test]
    fn access_drops_failed_authentication() {
        let mut r = Registry::new();
        for i in 0..5 {
            r.request(req(i, 0.0));
        }
        let rep = r.access(|q| q.id.0 != 1 && q.id.0 != 3).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(rep.rejected, vec![DeviceId(1), DeviceId(3)]);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut r = Registry::new();
        r.request(req(1, 0.0));
        r.request(req(1, 5.0));
        assert_eq!(r.access(|_| true), Err(Error::DuplicateId(DeviceId(1))));
        assert!(r.is_empty());

        r.request(req(2, 0.0));
        r.access(|_| true).unwrap();
        r.request(req(3, 0.0));
        r.request(req(2, 0.0));
        assert_eq!(r.access(|_| true), Err(Error::DuplicateId(DeviceId(2))));
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn devices_kept_in_id_order() {
        let mut r = Registry::new();
        for i in [5, 2, 9, 0] {
            r.request(req(i, 0.0));
        }
        r.access(|_| true).unwrap();
        let ids: Vec<u32> = r.devices().iter().map(|d| d.id.0).collect();
        assert_eq!(ids, vec![0, 2, 5, 9]);
        assert!(r.get(DeviceId(9)).is_some());
        assert!(r.get(DeviceId(3)).is_none());
    }

    #[test]
    fn refresh_filters_and_computes_slots() {
        let spec = BatterySpec::default();
        let drive = DriveSettings::default();
        let mut r = Registry::new();
        r.request(req(0, 1000.0));
        r.request(req(1, 800.0));
        r.access(|_| true).unwrap();
        let removed = r.refresh(&drive, 0.2, &spec).unwrap();
        assert_eq!(removed.len(), 1);
        assert_eq!(removed[0].id, DeviceId(0));
        let d = r.get(DeviceId(1)).unwrap();
        assert!((d.desired_power - 4.2).abs() < 1e-12);
        assert_eq!(d.slots, 200);
        assert!(!d.power_limited);

        r.get_mut(DeviceId(1)).unwrap().battery.residual = 1000.0;
        r.refresh(&drive, 0.2, &spec).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn refresh_flags_power_limited() {
        let spec = BatterySpec::default();
        let drive = DriveSettings {
            drive_power: 10.0,
            ..DriveSettings::default()
        };
        let mut r = Registry::new();
        r.request(req(0, 800.0));
        r.access(|_| true).unwrap();
        r.refresh(&drive, 0.2, &spec).unwrap();
        let d = r.get(DeviceId(0)).unwrap();
        assert_eq!(d.slots, 200);
        assert!(d.power_limited);
    }
}
