use rbc_sched::battery::{reference_charge_time, BatteryState};
use rbc_sched::sim::{run, sweep, InitMode, SchedulerKind, SweepGrid};
use rbc_sched::{BatterySpec64, SimConfig64};

fn config(kind: SchedulerKind, n: usize) -> SimConfig64 {
    SimConfig64 {
        scheduler: kind,
        receivers: n,
        ..SimConfig64::default()
    }
}

/// Energy needed to take one battery from `from` to full, by midpoint
/// quadrature of V(soc) dC.
fn stored_energy(spec: &BatterySpec64, from: f64) -> f64 {
    let steps = 200_000;
    let span = spec.full_capacity - from;
    let dc = span / steps as f64;
    (0..steps)
        .map(|i| {
            let c = from + (i as f64 + 0.5) * dc;
            spec.charge_voltage(c / spec.full_capacity) * dc * 3.6
        })
        .sum()
}

#[test]
fn delivered_energy_matches_stored_energy() {
    for kind in [SchedulerKind::Tdma, SchedulerKind::Alternative] {
        let mut c = config(kind, 6);
        c.init_mode = InitMode::Uniform;
        c.seed = Some(7);
        let r = run(&c).unwrap();
        for d in &r.devices {
            let want = stored_energy(&c.battery, d.initial_residual);
            let rel = (d.delivered_energy - want).abs() / want;
            assert!(
                rel < 1e-3,
                "{kind} {}: {} vs {want}",
                d.id,
                d.delivered_energy
            );
        }
    }
}

#[test]
fn every_receiver_completes_no_later_than_the_run() {
    let mut c = config(SchedulerKind::Tdma, 12);
    c.init_mode = InitMode::Uniform;
    c.seed = Some(3);
    let r = run(&c).unwrap();
    assert!(r.complete);
    let last = r
        .devices
        .iter()
        .filter_map(|d| d.completed_at)
        .fold(0.0, f64::max);
    assert_eq!(last, r.t_charge);
    for d in &r.devices {
        assert_eq!(d.final_residual, c.battery.full_capacity);
    }
}

#[test]
fn active_receivers_never_increase() {
    let r = run(&config(SchedulerKind::Tdma, 10)).unwrap();
    assert!(r.series.windows(2).all(|w| w[1].active <= w[0].active));
    assert!(r.series.iter().all(|p| p.psi <= p.active && p.psi >= 1));
}

#[test]
fn multiplexing_bounded_by_receivers_and_slots() {
    let r = run(&config(SchedulerKind::Tdma, 40)).unwrap();
    let ns = SimConfig64::default().drive.slots_per_frame;
    assert!(r.series.iter().all(|p| p.psi <= 40 && p.psi <= ns));
    assert!(r.average_multiplexing >= 1.0 && r.average_multiplexing <= 40.0);
}

#[test]
fn transmitter_energy_covers_delivered_energy() {
    let r = run(&config(SchedulerKind::Tdma, 8)).unwrap();
    let eta = SimConfig64::default().efficiency.overall().unwrap();
    assert!(r.transmitter_energy * eta >= r.delivered_energy * (1.0 - 1e-12));
}

#[test]
fn tdma_beats_alternative_for_several_receivers() {
    for n in [2, 5, 10] {
        let t = run(&config(SchedulerKind::Tdma, n)).unwrap().t_charge;
        let a = run(&config(SchedulerKind::Alternative, n))
            .unwrap()
            .t_charge;
        assert!(t < a, "n={n}: tdma {t} alternative {a}");
    }
}

#[test]
fn identical_configs_serialize_identically() {
    let mut c = config(SchedulerKind::Tdma, 9);
    c.init_mode = InitMode::Uniform;
    c.seed = Some(42);
    let a = serde_json::to_string(&run(&c).unwrap()).unwrap();
    let b = serde_json::to_string(&run(&c).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweep_order_and_parallel_matches_serial() {
    let base = config(SchedulerKind::Tdma, 1);
    let grid = SweepGrid {
        receivers: vec![3, 1, 2],
        drive_powers: vec![50.0, 21.0],
        schedulers: vec![SchedulerKind::Alternative, SchedulerKind::Tdma],
        seeds: vec![],
    };
    let rows = sweep(&base, &grid).unwrap();
    assert_eq!(rows.len(), 12);
    for (row, cell) in rows.iter().zip(grid.cells(None)) {
        assert_eq!(row.cell, cell);
        let mut c = base.clone();
        c.scheduler = cell.scheduler;
        c.receivers = cell.receivers;
        c.drive.drive_power = cell.drive_power;
        assert_eq!(row.outcome.as_ref().unwrap(), &run(&c).unwrap());
    }
}

#[test]
fn single_receiver_reference_in_single_precision() {
    let spec = BatterySpec64::default();
    let t1 = reference_charge_time(BatteryState::empty(), 0.1, &spec).unwrap();
    let c = rbc_sched::SimConfig32 {
        receivers: 1,
        ..Default::default()
    };
    let r = run(&c).unwrap();
    assert!(
        (f64::from(r.t_charge) - t1).abs() <= 2.0,
        "{} vs {t1}",
        r.t_charge
    );
}
