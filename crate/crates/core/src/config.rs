//! Scenario configuration: TOML file, dotted-key overrides, validation.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::abc::AbcParams;
use crate::beecup::{FitnessMode, FitnessWeights, DEFAULT_INIT_DENSITY};
use crate::energy::{RadioParams, WorkloadParams};
use crate::error::{Error, Result};
use crate::geometry::RegionKind;
use crate::mobility::MobilityParams;
use crate::world::{ClusterLimits, DEFAULT_R_B, DEFAULT_S_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    BeeCup,
    Leach,
    Sep,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::BeeCup, Protocol::Leach, Protocol::Sep];

    pub fn name(&self) -> &'static str {
        match self {
            Protocol::BeeCup => "beecup",
            Protocol::Leach => "leach",
            Protocol::Sep => "sep",
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beecup" => Ok(Protocol::BeeCup),
            "leach" => Ok(Protocol::Leach),
            "sep" => Ok(Protocol::Sep),
            other => Err(Error::UnknownProtocol(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeachParams {
    pub p: f64,
}

impl Default for LeachParams {
    fn default() -> Self {
        Self { p: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SepParams {
    pub p: f64,
    /// Fraction of advanced nodes.
    pub m: f64,
    /// Extra energy of advanced nodes, as a multiple of the base energy.
    pub alpha: f64,
}

impl Default for SepParams {
    fn default() -> Self {
        Self {
            p: 0.1,
            m: 0.2,
            alpha: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub region: RegionKind,
    pub node_count: usize,
    pub protocol: Protocol,
    /// Joules per (normal) node.
    pub initial_energy: f64,
    /// Give a fraction `sep.m` of nodes `(1 + sep.alpha)` times the energy.
    /// Always on for SEP.
    pub heterogeneous: bool,
    /// Seconds.
    pub sim_duration: f64,
    pub recluster_interval: f64,
    pub tiny_period: f64,
    /// Keep simulating past `sim_duration` until the first death, up to
    /// this many seconds. Zero disables the extension.
    pub lifetime_horizon: f64,
    pub replicates: usize,
    pub seed: u64,
    pub fitness_mode: FitnessMode,
    pub ewma_alpha: f64,
    /// Meters: heads closer than this are adjacent for load balancing.
    pub r_n: f64,
    pub s_max: usize,
    pub r_b: f64,
    /// Probability of a head bit in fresh head-count layouts.
    pub ch_init_density: f64,
    /// Check every partition the run produces and count violations.
    pub validate: bool,
    pub weights: FitnessWeights,
    pub abc: AbcParams,
    pub leach: LeachParams,
    pub sep: SepParams,
    pub radio: RadioParams,
    #[serde(flatten)]
    pub workload: WorkloadParams,
    #[serde(flatten)]
    pub mobility: MobilityParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            region: RegionKind::Rect80,
            node_count: 120,
            protocol: Protocol::BeeCup,
            initial_energy: 10_000.0,
            heterogeneous: false,
            sim_duration: 7200.0,
            recluster_interval: 600.0,
            tiny_period: 60.0,
            lifetime_horizon: DEFAULT_LIFETIME_HORIZON,
            replicates: 20,
            seed: 1,
            fitness_mode: FitnessMode::Corrected,
            ewma_alpha: 0.5,
            r_n: 15.0,
            s_max: DEFAULT_S_MAX,
            r_b: DEFAULT_R_B,
            ch_init_density: DEFAULT_INIT_DENSITY,
            validate: false,
            weights: FitnessWeights::default(),
            abc: AbcParams::default(),
            leach: LeachParams::default(),
            sep: SepParams::default(),
            radio: RadioParams::default(),
            workload: WorkloadParams::default(),
            mobility: MobilityParams::default(),
        }
    }
}

/// Upper bound for lifetime runs: ten simulated hours.
pub const DEFAULT_LIFETIME_HORIZON: f64 = 36_000.0;

/// Keys whose default is absent from the serialized form.
const OPTIONAL_KEYS: [&str; 1] = ["abc.limit"];

fn divides(small: f64, large: f64) -> bool {
    let q = (large / small).round();
    q >= 1.0 && (q * small - large).abs() <= 1e-9 * large.max(1.0)
}

impl ScenarioConfig {
    pub fn limits(&self) -> ClusterLimits {
        ClusterLimits {
            s_max: self.s_max,
            r_b: self.r_b,
        }
    }

    pub fn is_heterogeneous(&self) -> bool {
        self.heterogeneous || self.protocol == Protocol::Sep
    }

    /// Tiny periods per round.
    pub fn periods_per_round(&self) -> usize {
        (self.recluster_interval / self.tiny_period).round() as usize
    }

    /// Rounds within `sim_duration`.
    pub fn rounds(&self) -> usize {
        (self.sim_duration / self.recluster_interval).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.abc.validate()?;
        for (name, v) in [
            ("sim_duration", self.sim_duration),
            ("recluster_interval", self.recluster_interval),
            ("tiny_period", self.tiny_period),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Timing(format!("{name} must be positive, got {v}")));
            }
        }
        if !divides(self.tiny_period, self.recluster_interval) {
            return Err(Error::Timing(format!(
                "tiny_period {} does not divide recluster_interval {}",
                self.tiny_period, self.recluster_interval
            )));
        }
        if !divides(self.recluster_interval, self.sim_duration) {
            return Err(Error::Timing(format!(
                "recluster_interval {} does not divide sim_duration {}",
                self.recluster_interval, self.sim_duration
            )));
        }
        if !(self.lifetime_horizon >= 0.0 && self.lifetime_horizon.is_finite()) {
            return Err(Error::Timing(format!(
                "lifetime_horizon must be a non-negative number of seconds, got {}",
                self.lifetime_horizon
            )));
        }
        if self.node_count == 0 {
            return Err(Error::InvalidValue("node_count must be positive".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidValue("replicates must be positive".into()));
        }
        if !(self.initial_energy > 0.0 && self.initial_energy.is_finite()) {
            return Err(Error::InvalidValue("initial_energy must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.ewma_alpha) {
            return Err(Error::InvalidValue(format!(
                "ewma_alpha must lie in [0, 1], got {}",
                self.ewma_alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.ch_init_density) {
            return Err(Error::InvalidValue(format!(
                "ch_init_density must lie in [0, 1], got {}",
                self.ch_init_density
            )));
        }
        if self.s_max == 0 || self.r_b.is_nan() || self.r_b <= 0.0 || self.r_n.is_nan() || self.r_n < 0.0 {
            return Err(Error::InvalidValue(
                "s_max, r_b must be positive and r_n non-negative".into(),
            ));
        }
        let m = &self.mobility;
        if !(0.0..=1.0).contains(&m.mobile_fraction)
            || m.speed_min <= 0.0
            || m.speed_max < m.speed_min
            || m.pause_min < 0.0
            || m.pause_max < m.pause_min
        {
            return Err(Error::InvalidValue("mobility parameters out of range".into()));
        }
        let w = &self.workload;
        if w.file_mb_min < 0.0
            || w.file_mb_max < w.file_mb_min
            || w.realtime_s_min < 0.0
            || w.realtime_s_max < w.realtime_s_min
        {
            return Err(Error::InvalidValue("workload ranges out of order".into()));
        }
        let r = &self.radio;
        if r.rate_wlan <= 0.0
            || r.rate_bt <= 0.0
            || [r.p_wlan_active, r.p_wlan_idle, r.p_bt_active, r.p_bt_idle]
                .iter()
                .any(|p| *p < 0.0)
        {
            return Err(Error::InvalidValue(
                "radio rates must be positive and powers non-negative".into(),
            ));
        }
        crate::baselines::LeachState::new(self.leach.p, 0)?;
        crate::baselines::SepState::new(self.sep.p, self.sep.m, self.sep.alpha, Vec::new())?;
        Ok(())
    }

    /// Parses a TOML document on top of the defaults, then applies `overrides`
    /// (`dotted.key`, raw value) and validates.
    pub fn from_toml_str(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        for (key, raw) in overrides {
            set_dotted(&mut table, key, parse_value(raw))?;
        }
        Self::from_table(table)
    }

    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
            None => String::new(),
        };
        Self::from_toml_str(&text, overrides)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        check_known_keys(&table)?;
        if let Some(v) = table.get("protocol") {
            match v.as_str() {
                Some(s) => {
                    Protocol::from_str(s)?;
                }
                None => return Err(Error::UnknownProtocol(v.to_string())),
            }
        }
        if let Some(v) = table.get("region") {
            match v.as_str() {
                Some(s) => {
                    RegionKind::from_str(s)?;
                }
                None => return Err(Error::UnknownRegion(v.to_string())),
            }
        }
        let cfg: ScenarioConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one dotted key on an already loaded configuration.
    pub fn with_override(&self, key: &str, raw: &str) -> Result<Self> {
        let mut table = self.to_table();
        set_dotted(&mut table, key, parse_value(raw))?;
        Self::from_table(table)
    }

    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("configuration serializes to TOML")
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }
}

/// Interprets a flag value as a TOML value, falling back to a bare string.
pub fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::UnknownKey(key.to_string()))?;
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| Error::UnknownKey(key.to_string()))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn collect_keys(table: &toml::Table, prefix: &str, out: &mut Vec<String>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => collect_keys(t, &key, out),
            _ => out.push(key),
        }
    }
}

/// Every dotted key a configuration accepts.
pub fn known_keys() -> Vec<String> {
    let mut keys = Vec::new();
    collect_keys(&ScenarioConfig::default().to_table(), "", &mut keys);
    keys.extend(OPTIONAL_KEYS.iter().map(|s| s.to_string()));
    keys.sort();
    keys
}

fn check_known_keys(table: &toml::Table) -> Result<()> {
    let known = known_keys();
    let mut given = Vec::new();
    collect_keys(table, "", &mut given);
    match given.into_iter().find(|k| known.binary_search(k).is_err()) {
        Some(k) => Err(Error::UnknownKey(k)),
        None => Ok(()),
    }
}
