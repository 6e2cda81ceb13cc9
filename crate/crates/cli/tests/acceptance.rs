//! Acceptance criteria. Every test prints one PASS/FAIL line straight to
//! stderr, so the lines show up with or without `--nocapture`.

use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rbc_sched::battery::{reference_charge_time, BatteryState};
use rbc_sched::power::{buffer_output, charging_power, duty_for_power, slots_for_power, PwmWave};
use rbc_sched::scheduler::{allocate_frame, AccessRequest, DeviceId, DeviceProfile};
use rbc_sched::sim::{run, InitMode, SchedulerKind};
use rbc_sched::{BatterySpec64, Registry64, SimConfig64, SimResult64};
use sha2::{Digest, Sha256};

const RATIO_ZERO_TARGET: f64 = 0.469;
const RATIO_UNIFORM_TARGET: f64 = 0.345;
const RATIO_TOL: f64 = 0.10;
const RUNTIME_LIMIT: Duration = Duration::from_secs(60);
const R2_MIN: f64 = 0.98;
const SLOPE_RATIO_TARGET: f64 = 0.5;
const SLOPE_RATIO_TOL: f64 = 0.1;
const FUZZ_CASES: usize = 10_000;
const T1_TOL_S: f64 = 2.0;
const T1_STEP_S: f64 = 0.1;
const POWER_CASES: usize = 100_000;
const POWER_REL_TOL: f64 = 1e-12;
const SEEDS: std::ops::Range<u64> = 0..10;

/// Prints the criterion's line, then fails the test if it did not pass.
fn check(id: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    // io::stderr() bypasses libtest's capture of print macros
    let _ = writeln!(std::io::stderr().lock(), "\n{verdict} {id:<9} {detail}");
    assert!(pass, "criterion {id}: {detail}");
}

fn config(kind: SchedulerKind, n: usize, pd: f64, seed: Option<u64>) -> SimConfig64 {
    let mut c = SimConfig64 {
        scheduler: kind,
        receivers: n,
        seed,
        init_mode: if seed.is_some() {
            InitMode::Uniform
        } else {
            InitMode::Zero
        },
        trace_stride: 0,
        ..SimConfig64::default()
    };
    c.drive.drive_power = pd;
    c
}

fn simulate(kind: SchedulerKind, n: usize, pd: f64, seed: Option<u64>) -> SimResult64 {
    run(&config(kind, n, pd, seed)).expect("run completes")
}

/// Zero-init N = 50, P_d = 21 W under both schedulers, with wall time.
fn baseline() -> &'static (SimResult64, SimResult64, Duration) {
    static CELL: OnceLock<(SimResult64, SimResult64, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let tdma = simulate(SchedulerKind::Tdma, 50, 21.0, None);
        let alt = simulate(SchedulerKind::Alternative, 50, 21.0, None);
        (tdma, alt, start.elapsed())
    })
}

/// (mean T_tdma, mean T_alt) over the fixed seeds, uniform init, N = 50.
fn uniform_means() -> (f64, f64) {
    static CELL: OnceLock<(f64, f64)> = OnceLock::new();
    *CELL.get_or_init(|| {
        let k = SEEDS.count() as f64;
        let mean = |kind| {
            SEEDS
                .map(|s| simulate(kind, 50, 21.0, Some(s)).t_charge)
                .sum::<f64>()
                / k
        };
        (mean(SchedulerKind::Tdma), mean(SchedulerKind::Alternative))
    })
}

/// Least-squares slope and R² of T_charge against N, TDMA, zero init.
fn linear_fit(pd: f64) -> (f64, f64) {
    let xs: Vec<f64> = (1..=8).map(|i| (5 * i) as f64).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&n| simulate(SchedulerKind::Tdma, n as usize, pd, None).t_charge)
        .collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    (sxy / sxx, sxy * sxy / (sxx * syy))
}

fn fits() -> &'static [(f64, f64, f64); 4] {
    static CELL: OnceLock<[(f64, f64, f64); 4]> = OnceLock::new();
    CELL.get_or_init(|| {
        [25.0, 50.0, 100.0, 150.0].map(|pd| {
            let (slope, r2) = linear_fit(pd);
            (pd, slope, r2)
        })
    })
}

#[test]
fn c1_ratio_zero_init() {
    let (tdma, alt, elapsed) = baseline();
    let ratio = tdma.t_charge / alt.t_charge;
    let pass = (ratio - RATIO_ZERO_TARGET).abs() <= RATIO_TOL && *elapsed < RUNTIME_LIMIT;
    check(
        "1",
        pass,
        format!(
            "zero init N=50 Pd=21W: T_tdma/T_alt = {}/{} = {ratio:.4} (target {RATIO_ZERO_TARGET} ± {RATIO_TOL}); runtime {:.1} s (limit {} s)",
            tdma.t_charge,
            alt.t_charge,
            elapsed.as_secs_f64(),
            RUNTIME_LIMIT.as_secs()
        )
    );
}

#[test]
fn c2_ratio_uniform_init() {
    let (tdma, alt) = uniform_means();
    let ratio = tdma / alt;
    let pass = (ratio - RATIO_UNIFORM_TARGET).abs() <= RATIO_TOL;
    check(
        "2",
        pass,
        format!(
            "uniform init N=50 Pd=21W seeds {SEEDS:?}: mean T_tdma/mean T_alt = {tdma}/{alt} = {ratio:.4} (target {RATIO_UNIFORM_TARGET} ± {RATIO_TOL})"
        )
    );
}

#[test]
fn c3_linearity() {
    let fits = fits();
    let pass = fits.iter().all(|&(_, _, r2)| r2 >= R2_MIN);
    let detail: Vec<String> = fits
        .iter()
        .map(|(pd, _, r2)| format!("{pd}W {r2:.4}"))
        .collect();
    check(
        "3",
        pass,
        format!(
            "R² of T_charge vs N=5..40: {} (min {R2_MIN})",
            detail.join(", ")
        ),
    );
}

#[test]
fn c4_slope_halving() {
    let fits = fits();
    let ratio = fits[1].1 / fits[0].1;
    let pass = (ratio - SLOPE_RATIO_TARGET).abs() <= SLOPE_RATIO_TOL;
    check(
        "4",
        pass,
        format!(
            "slope(50W)/slope(25W) = {:.2}/{:.2} = {ratio:.4} (target {SLOPE_RATIO_TARGET} ± {SLOPE_RATIO_TOL})",
            fits[1].1, fits[0].1
        )
    );
}

#[test]
fn c5_multiplexing_shape() {
    let mut pass = true;
    let mut detail = Vec::new();
    for pd in [50.0, 100.0, 150.0] {
        let zero = simulate(SchedulerKind::Tdma, 50, pd, None);
        let t = zero.t_charge;
        let first = zero.mean_psi_between(0.0, t / 10.0).unwrap();
        let middle = zero.mean_psi_between(t / 3.0, 2.0 * t / 3.0).unwrap();
        let last = zero.mean_psi_between(0.9 * t, t).unwrap();
        let uniform = SEEDS
            .map(|s| simulate(SchedulerKind::Tdma, 50, pd, Some(s)).average_multiplexing)
            .sum::<f64>()
            / SEEDS.count() as f64;
        let three_stage = middle < first && middle < last;
        let uniform_higher = uniform > zero.average_multiplexing;
        pass &= three_stage && uniform_higher;
        detail.push(format!(
            "{pd}W ψ first/middle/last {first:.2}/{middle:.2}/{last:.2} [{}], Ψ uniform {uniform:.3} vs zero {:.3} [{}]",
            if three_stage { "ok" } else { "x" },
            zero.average_multiplexing,
            if uniform_higher { "ok" } else { "x" },
        ));
    }
    check("5", pass, detail.join("; "));
}

/// Literal transcription of the allocation pseudocode, one slot at a time.
fn transcription(devices: &[DeviceProfile<f64>], ns: usize) -> Vec<DeviceId> {
    let mut s = devices.to_vec();
    s.sort_by(|a, b| a.battery.residual.partial_cmp(&b.battery.residual).unwrap());
    let mut f: Vec<DeviceId> = Vec::new();
    for i in 1..=s.len() {
        if s[i - 1].slots <= ns - f.len() {
            for _ in 1..=s[i - 1].slots {
                f.push(s[i - 1].id);
            }
        }
    }
    f
}

#[test]
fn c6_allocation_oracle() {
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let mut mismatches = 0;
    for _ in 0..FUZZ_CASES {
        let ns = rng.random_range(1..=200);
        let n = rng.random_range(0..=60);
        // coarse residuals force ties
        let coarse = rng.random_bool(0.5);
        let mut registry = Registry64::new();
        for i in 0..n {
            let residual = if coarse {
                rng.random_range(0..10) as f64 * 100.0
            } else {
                rng.random_range(0.0..1000.0)
            };
            registry.request(AccessRequest {
                id: DeviceId(i),
                battery: BatteryState { residual },
            });
        }
        registry.access(|_| true).unwrap();
        for d in registry.devices_mut() {
            d.slots = rng.random_range(0..=ns);
        }
        let frame = allocate_frame(&registry, ns);
        if frame.slot_assignment() != transcription(registry.devices(), ns) {
            mismatches += 1;
        }
    }
    check(
        "6",
        mismatches == 0,
        format!("allocate_frame vs transcription: {mismatches} mismatches in {FUZZ_CASES} fuzzed registries")
    );
}

#[test]
fn c7_single_receiver() {
    let t1 =
        reference_charge_time(BatteryState::empty(), T1_STEP_S, &BatterySpec64::default()).unwrap();
    let tdma = simulate(SchedulerKind::Tdma, 1, 21.0, None).t_charge;
    let alt = simulate(SchedulerKind::Alternative, 1, 21.0, None).t_charge;
    let pass = (tdma - t1).abs() <= T1_TOL_S && (alt - t1).abs() <= T1_TOL_S;
    check(
        "7",
        pass,
        format!("T1 = {t1:.2} s; tdma {tdma} s, alternative {alt} s (tolerance {T1_TOL_S} s)"),
    );
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[test]
fn c8_power_chain() {
    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    let (mut round_trip, mut ceiling, mut buffer) = (0.0f64, 0usize, 0.0f64);
    for _ in 0..POWER_CASES {
        let pd = rng.random_range(0.1..500.0);
        let eta = rng.random_range(1e-3..=1.0);
        let duty = rng.random_range(0.0..=1.0);
        let ns = rng.random_range(1..=1000);

        let pc = charging_power(pd, duty, eta);
        round_trip = round_trip.max(rel_err(duty_for_power(pc, pd, eta).unwrap(), duty));

        let demand = slots_for_power(pc, pd, eta, ns).unwrap();
        let k = demand.slots as f64 / ns as f64;
        let enough = charging_power(pd, k, eta) >= pc * (1.0 - POWER_REL_TOL);
        let minimal = demand.slots == 0
            || charging_power(pd, (demand.slots - 1) as f64 / ns as f64, eta)
                < pc * (1.0 + POWER_REL_TOL);
        if demand.power_limited || !enough || !minimal {
            ceiling += 1;
        }

        let period = rng.random_range(1e-9..1.0);
        let wave = PwmWave::from_duty(rng.random_range(0.0..500.0), duty, period).unwrap();
        let out = buffer_output(&wave) * wave.period;
        if wave.input_energy() > 0.0 {
            buffer = buffer.max(rel_err(out, wave.input_energy()));
        }
    }
    let pass = round_trip <= POWER_REL_TOL && ceiling == 0 && buffer <= POWER_REL_TOL;
    check(
        "8",
        pass,
        format!(
            "{POWER_CASES} inputs: round-trip max rel err {round_trip:.2e}, ceiling violations {ceiling}, buffer max rel err {buffer:.2e} (tolerance {POWER_REL_TOL:e})"
        )
    );
}

fn hashes(dir: &std::path::Path) -> Vec<(String, String)> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("summary") || n.starts_with("timeseries"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let digest = Sha256::digest(std::fs::read(dir.join(&n)).unwrap());
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            (n, hex)
        })
        .collect()
}

#[test]
fn c9_determinism() {
    let root = tempfile::tempdir().unwrap();
    let cfg = root.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "init_mode = \"uniform\"\nseed = 2024\nseed_count = 2\ndrive_power_w = 50\n",
    )
    .unwrap();
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out = root.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_rbc-sched"))
            .args(["--config", cfg.to_str().unwrap()])
            .args(["--out", out.to_str().unwrap()])
            .args(["--n", "5,20", "sweep", "--scheduler", "both"])
            .status()
            .unwrap();
        assert!(status.success());
        runs.push(hashes(&out));
    }
    // summary plus 2 schedulers x 2 receiver counts x 2 seeds
    let pass = runs[0] == runs[1] && runs[0].len() == 9;
    check(
        "9",
        pass,
        format!(
            "two sweeps, {} summary/timeseries files, sha256 {}",
            runs[0].len(),
            if runs[0] == runs[1] {
                "identical"
            } else {
                "differ"
            }
        ),
    );
}

#[test]
fn direction_tdma_faster() {
    let mut slower = Vec::new();
    for n in [2, 5, 10, 20, 50] {
        for seed in [None, Some(0)] {
            let tdma = simulate(SchedulerKind::Tdma, n, 21.0, seed).t_charge;
            let alt = simulate(SchedulerKind::Alternative, n, 21.0, seed).t_charge;
            if tdma >= alt {
                slower.push(format!("N={n} seed {seed:?}: {tdma} >= {alt}"));
            }
        }
    }
    check(
        "direction",
        slower.is_empty(),
        format!(
            "T_tdma < T_alt for N in {{2,5,10,20,50}}, zero and uniform init{}",
            if slower.is_empty() {
                String::new()
            } else {
                format!(": {}", slower.join("; "))
            }
        ),
    );
}
