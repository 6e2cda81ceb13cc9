//! Flat `key = value` experiment configuration (TOML syntax).
//!
//! Every key is optional; missing keys take the defaults below. Unknown keys
//! are rejected.
//!
//! | key                  | default     | meaning                                      |
//! |----------------------|-------------|----------------------------------------------|
//! | `schema_version`     | 1           | must be 1                                    |
//! | `scheduler`          | "tdma"      | `tdma` or `alternative`                      |
//! | `n_receivers`        | 1           | receivers charged together                   |
//! | `init_mode`          | "zero"      | `zero` or `uniform` initial capacity         |
//! | `seed`               | unset       | base seed, required for `uniform`            |
//! | `seed_count`         | 10          | seeds `seed..seed+seed_count` averaged       |
//! | `eta_s` .. `eta_dc`  | 0.4,1,1,0.5,1,1 | stage efficiencies in (0,1]              |
//! | `drive_power_w`      | 21          | transmitter driving power                    |
//! | `slots_per_frame`    | 200         | slots per TDMA frame                         |
//! | `slot_width_s`       | 1e-6        | slot width                                   |
//! | `segment_width_s`    | 1           | TDMA segment (refresh) width                 |
//! | `refresh_period_s`   | segment     | alternative scheduler macro step             |
//! | `max_time_s`         | 1e7         | simulated time cap                           |
//! | `trace_stride`       | 60          | refreshes between trace points, 0 = off      |
//! | `full_capacity_mah`  | 1000        | battery capacity                             |
//! | `c_rate_current_a`   | 1           | 1C current                                   |
//! | `tc_soc_end`         | 0.1         | trickle to CC boundary                       |
//! | `cc_soc_end`         | 0.8         | CC to CV boundary                            |
//! | `v_min` / `v_max`    | 3.0 / 4.2   | CC start voltage / CV voltage                |
//! | `tc_current_c`       | 0.1         | trickle current, fraction of 1C              |
//! | `cv_current_floor_c` | 0.05        | lowest CV current, fraction of 1C            |
//!
//! Seeds above 2^63 - 1 do not fit a TOML integer and are written as
//! decimal strings, e.g. `seed = "18446744073709551615"`.

use std::fmt::Write as _;
use std::path::Path;

use rbc_sched::sim::{InitMode, SchedulerKind};
use rbc_sched::{Error as SimError, SimConfig64};
use thiserror::Error;
use toml::{Table, Value};

pub const SCHEMA_VERSION: i64 = 1;
pub const DEFAULT_SEED_COUNT: usize = 10;

const KEYS: &[&str] = &[
    "schema_version",
    "scheduler",
    "n_receivers",
    "init_mode",
    "seed",
    "seed_count",
    "eta_s",
    "eta_pc",
    "eta_t",
    "eta_r",
    "eta_pb",
    "eta_dc",
    "drive_power_w",
    "slots_per_frame",
    "slot_width_s",
    "segment_width_s",
    "refresh_period_s",
    "max_time_s",
    "trace_stride",
    "full_capacity_mah",
    "c_rate_current_a",
    "tc_soc_end",
    "cc_soc_end",
    "v_min",
    "v_max",
    "tc_current_c",
    "cv_current_floor_c",
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Syntax(String),
    #[error("line {line}: {message}")]
    Key {
        key: String,
        line: usize,
        message: String,
    },
    #[error("{message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            Self::Key { key, .. } | Self::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub sim: SimConfig64,
    /// Seeds averaged for uniform initial capacities.
    pub seed_count: usize,
}

impl Default for Experiment {
    fn default() -> Self {
        Self {
            sim: SimConfig64::default(),
            seed_count: DEFAULT_SEED_COUNT,
        }
    }
}

impl Experiment {
    /// Seeds used for averaging: none in zero mode (the seed is unused).
    pub fn seeds(&self) -> Vec<u64> {
        match (self.sim.init_mode, self.sim.seed) {
            (InitMode::Uniform, Some(base)) => (0..self.seed_count as u64)
                .map(|i| base.wrapping_add(i))
                .collect(),
            _ => Vec::new(),
        }
    }
}

pub fn parse_config(path: &Path) -> Result<Experiment, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_with(&text, None)
}

/// [`parse_config`] with `seed` taking precedence over the file's seed, so
/// a command-line seed can complete a uniform-mode file that lacks one.
pub fn parse_config_seeded(path: &Path, seed: Option<u64>) -> Result<Experiment, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_with(&text, seed)
}

/// 1-based line on which `key` is assigned.
fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            l.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

struct Reader<'a> {
    text: &'a str,
    table: Table,
}

impl Reader<'_> {
    fn error(&self, key: &str, message: String) -> ConfigError {
        match line_of(self.text, key) {
            Some(line) => ConfigError::Key {
                key: key.to_owned(),
                line,
                message,
            },
            None => ConfigError::Invalid {
                key: key.to_owned(),
                message,
            },
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(self.error(key, format!("{key} must be a number"))),
        }
    }

    fn uint(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(self.error(key, format!("{key} must be a non-negative integer"))),
        }
    }

    /// TOML integers stop at i64::MAX, so larger seeds are written as
    /// decimal strings.
    fn seed(&self) -> Result<Option<u64>, ConfigError> {
        match self.table.get("seed") {
            Some(Value::String(s)) => s.parse().map(Some).map_err(|_| {
                self.error(
                    "seed",
                    format!("seed must be a non-negative integer: {s:?}"),
                )
            }),
            _ => self.uint("seed"),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&str>, ConfigError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.error(key, format!("{key} must be a string"))),
        }
    }
}

pub fn parse_config_str(text: &str) -> Result<Experiment, ConfigError> {
    parse_with(text, None)
}

fn parse_with(text: &str, seed_override: Option<u64>) -> Result<Experiment, ConfigError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string().trim_end().to_owned()))?;
    let r = Reader { text, table };

    let mut unknown: Vec<&String> = r
        .table
        .keys()
        .filter(|k| !KEYS.contains(&k.as_str()))
        .collect();
    unknown.sort_by_key(|k| line_of(text, k).unwrap_or(usize::MAX));
    if let Some(k) = unknown.first() {
        return Err(r.error(k, format!("unknown key `{k}`")));
    }

    if let Some(v) = r.table.get("schema_version") {
        if v.as_integer() != Some(SCHEMA_VERSION) {
            return Err(r.error(
                "schema_version",
                format!("unsupported schema_version {v} (expected {SCHEMA_VERSION})"),
            ));
        }
    }

    let mut exp = Experiment::default();
    let sim = &mut exp.sim;
    if let Some(s) = r.string("scheduler")? {
        sim.scheduler = s
            .parse::<SchedulerKind>()
            .map_err(|m| r.error("scheduler", m))?;
    }
    if let Some(s) = r.string("init_mode")? {
        sim.init_mode = s.parse::<InitMode>().map_err(|m| r.error("init_mode", m))?;
    }
    if let Some(n) = r.uint("n_receivers")? {
        sim.receivers = n as usize;
    }
    sim.seed = seed_override.or(r.seed()?);
    if let Some(n) = r.uint("seed_count")? {
        if n == 0 {
            return Err(r.error("seed_count", "seed_count out of range [1,inf): 0".into()));
        }
        exp.seed_count = n as usize;
    }

    let floats: [(&str, &mut f64); 17] = [
        ("eta_s", &mut sim.efficiency.eta_s),
        ("eta_pc", &mut sim.efficiency.eta_pc),
        ("eta_t", &mut sim.efficiency.eta_t),
        ("eta_r", &mut sim.efficiency.eta_r),
        ("eta_pb", &mut sim.efficiency.eta_pb),
        ("eta_dc", &mut sim.efficiency.eta_dc),
        ("drive_power_w", &mut sim.drive.drive_power),
        ("slot_width_s", &mut sim.drive.slot_width),
        ("segment_width_s", &mut sim.drive.segment_width),
        ("max_time_s", &mut sim.max_time),
        ("full_capacity_mah", &mut sim.battery.full_capacity),
        ("c_rate_current_a", &mut sim.battery.c_rate_current),
        ("tc_soc_end", &mut sim.battery.tc_soc_end),
        ("cc_soc_end", &mut sim.battery.cc_soc_end),
        ("v_min", &mut sim.battery.v_min),
        ("v_max", &mut sim.battery.v_max),
        ("tc_current_c", &mut sim.battery.tc_current_c),
    ];
    for (key, slot) in floats {
        if let Some(v) = r.float(key)? {
            *slot = v;
        }
    }
    if let Some(v) = r.float("cv_current_floor_c")? {
        sim.battery.cv_current_floor_c = v;
    }
    sim.refresh_period = r.float("refresh_period_s")?;
    if let Some(n) = r.uint("slots_per_frame")? {
        sim.drive.slots_per_frame = n as usize;
    }
    if let Some(n) = r.uint("trace_stride")? {
        sim.trace_stride = n as usize;
    }

    exp.sim.validate().map_err(|e| match e {
        SimError::OutOfRange { field, .. } => r.error(field, e.to_string()),
        SimError::MissingSeed => r.error(
            "init_mode",
            "seed is required when init_mode = \"uniform\"".into(),
        ),
        other => ConfigError::Invalid {
            key: String::new(),
            message: other.to_string(),
        },
    })?;
    Ok(exp)
}

/// Writes `exp` back out as a configuration file that parses to the same
/// experiment.
pub fn render_config(exp: &Experiment) -> String {
    let s = &exp.sim;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("schema_version", SCHEMA_VERSION.to_string());
    kv("scheduler", format!("\"{}\"", s.scheduler));
    kv("n_receivers", s.receivers.to_string());
    kv("init_mode", format!("\"{}\"", s.init_mode));
    if let Some(seed) = s.seed {
        if i64::try_from(seed).is_ok() {
            kv("seed", seed.to_string());
        } else {
            kv("seed", format!("\"{seed}\""));
        }
    }
    kv("seed_count", exp.seed_count.to_string());
    for (k, v) in s.efficiency.fields() {
        kv(k, format!("{v:?}"));
    }
    kv("drive_power_w", format!("{:?}", s.drive.drive_power));
    kv("slots_per_frame", s.drive.slots_per_frame.to_string());
    kv("slot_width_s", format!("{:?}", s.drive.slot_width));
    kv("segment_width_s", format!("{:?}", s.drive.segment_width));
    if let Some(p) = s.refresh_period {
        kv("refresh_period_s", format!("{p:?}"));
    }
    kv("max_time_s", format!("{:?}", s.max_time));
    kv("trace_stride", s.trace_stride.to_string());
    let b = &s.battery;
    kv("full_capacity_mah", format!("{:?}", b.full_capacity));
    kv("c_rate_current_a", format!("{:?}", b.c_rate_current));
    kv("tc_soc_end", format!("{:?}", b.tc_soc_end));
    kv("cc_soc_end", format!("{:?}", b.cc_soc_end));
    kv("v_min", format!("{:?}", b.v_min));
    kv("v_max", format!("{:?}", b.v_max));
    kv("tc_current_c", format!("{:?}", b.tc_current_c));
    kv("cv_current_floor_c", format!("{:?}", b.cv_current_floor_c));
    out
}
