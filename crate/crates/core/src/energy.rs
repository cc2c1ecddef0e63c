//! Dual-radio power model, traffic workload and per-node joule accounting.
//!
//! Every node carries a WLAN radio (long range, to the server) and a
//! Bluetooth radio (short range, inside a piconet). Which radios are powered
//! depends on the node's role:
//!
//! | role          | WLAN | Bluetooth |
//! |---------------|------|-----------|
//! | cluster head  | on   | on        |
//! | regular node  | off  | on        |
//! | single head   | on   | off       |
//!
//! A powered radio draws its active power while transferring and its idle
//! power for the rest of the time.

use std::ops::{Add, AddAssign, Mul};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::world::{Cluster, Node, NodeId, Role};

/// One megabyte, as used for workload volumes.
pub const MB: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioParams {
    /// Watts.
    pub p_wlan_active: f64,
    pub p_wlan_idle: f64,
    pub p_bt_active: f64,
    pub p_bt_idle: f64,
    /// Bits per second.
    pub rate_wlan: f64,
    pub rate_bt: f64,
    /// Meters.
    pub r_wlan: f64,
    pub r_bt: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            p_wlan_active: 1.100,
            p_wlan_idle: 0.880,
            p_bt_active: 0.220,
            p_bt_idle: 0.120,
            rate_wlan: 54.0e6,
            rate_bt: 2.0e6,
            r_wlan: 100.0,
            r_bt: 10.0,
        }
    }
}

impl RadioParams {
    pub fn wlan_transfer_time(&self, bytes: f64) -> f64 {
        8.0 * bytes / self.rate_wlan
    }

    pub fn bt_transfer_time(&self, bytes: f64) -> f64 {
        8.0 * bytes / self.rate_bt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadParams {
    pub file_mb_min: f64,
    pub file_mb_max: f64,
    pub realtime_s_min: f64,
    pub realtime_s_max: f64,
    /// Bill the same file volume a second time for learner-to-server traffic.
    pub uplink_mirror: bool,
}

impl Default for WorkloadParams {
    fn default() -> Self {
        Self {
            file_mb_min: 30.0,
            file_mb_max: 60.0,
            realtime_s_min: 50.0,
            realtime_s_max: 100.0,
            uplink_mirror: false,
        }
    }
}

/// Traffic delivered to every cluster during one re-clustering round.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Workload {
    pub file_bytes: f64,
    pub realtime_seconds: f64,
}

impl Workload {
    pub fn draw<R: Rng + ?Sized>(params: &WorkloadParams, rng: &mut R) -> Self {
        let mb = uniform(rng, params.file_mb_min, params.file_mb_max);
        let rt = uniform(rng, params.realtime_s_min, params.realtime_s_max);
        let mirror = if params.uplink_mirror { 2.0 } else { 1.0 };
        Self {
            file_bytes: mb * MB * mirror,
            realtime_seconds: rt,
        }
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// Even share of this workload for one of `parts` sub-periods.
    pub fn share(&self, parts: usize) -> Self {
        let parts = parts.max(1) as f64;
        Self {
            file_bytes: self.file_bytes / parts,
            realtime_seconds: self.realtime_seconds / parts,
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Joules split by radio and activity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub wlan_active: f64,
    pub wlan_idle: f64,
    pub bt_active: f64,
    pub bt_idle: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.wlan_active + self.wlan_idle + self.bt_active + self.bt_idle
    }
}

impl Add for EnergyBreakdown {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            wlan_active: self.wlan_active + o.wlan_active,
            wlan_idle: self.wlan_idle + o.wlan_idle,
            bt_active: self.bt_active + o.bt_active,
            bt_idle: self.bt_idle + o.bt_idle,
        }
    }
}

impl AddAssign for EnergyBreakdown {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Mul<f64> for EnergyBreakdown {
    type Output = Self;

    fn mul(self, k: f64) -> Self {
        Self {
            wlan_active: self.wlan_active * k,
            wlan_idle: self.wlan_idle * k,
            bt_active: self.bt_active * k,
            bt_idle: self.bt_idle * k,
        }
    }
}

/// Per-node cumulative drain, indexed by node id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    pub entries: Vec<EnergyBreakdown>,
}

impl EnergyLedger {
    pub fn new(node_count: usize) -> Self {
        Self {
            entries: vec![EnergyBreakdown::default(); node_count],
        }
    }

    pub fn total(&self, id: NodeId) -> f64 {
        self.entries[id].total()
    }
}

/// Active energy for one file pushed from the server through a cluster.
///
/// The head receives over WLAN and then serves its regular nodes one after
/// another over Bluetooth; each member listens idle while a sibling is served.
pub fn file_dissemination_energy(cluster: &Cluster, bytes: f64, radio: &RadioParams) -> Vec<(NodeId, EnergyBreakdown)> {
    let t_wlan = radio.wlan_transfer_time(bytes);
    let t_bt = radio.bt_transfer_time(bytes);
    let size = cluster.size() as f64;

    let mut out = Vec::with_capacity(cluster.size() + 1);
    out.push((
        cluster.head,
        EnergyBreakdown {
            wlan_active: radio.p_wlan_active * t_wlan,
            bt_active: radio.p_bt_active * size * t_bt,
            ..Default::default()
        },
    ));
    for &m in &cluster.members {
        out.push((
            m,
            EnergyBreakdown {
                bt_active: radio.p_bt_active * t_bt,
                bt_idle: radio.p_bt_idle * (size - 1.0) * t_bt,
                ..Default::default()
            },
        ));
    }
    out
}

/// Active energy for a live stream of `duration` seconds, broadcast to the piconet.
pub fn realtime_session_energy(
    cluster: &Cluster,
    duration: f64,
    radio: &RadioParams,
) -> Vec<(NodeId, EnergyBreakdown)> {
    let mut out = Vec::with_capacity(cluster.size() + 1);
    let head_bt = if cluster.is_single() {
        0.0
    } else {
        radio.p_bt_active * duration
    };
    out.push((
        cluster.head,
        EnergyBreakdown {
            wlan_active: radio.p_wlan_active * duration,
            bt_active: head_bt,
            ..Default::default()
        },
    ));
    for &m in &cluster.members {
        out.push((
            m,
            EnergyBreakdown {
                bt_active: radio.p_bt_active * duration,
                ..Default::default()
            },
        ));
    }
    out
}

/// Idle listening energy over `dt` seconds for a node in `role`; `None` means dead.
pub fn baseline_idle_energy(role: Option<Role>, dt: f64, radio: &RadioParams) -> f64 {
    match role {
        Some(Role::ClusterHead) => (radio.p_wlan_idle + radio.p_bt_idle) * dt,
        Some(Role::Regular) => radio.p_bt_idle * dt,
        Some(Role::SingleHead) => radio.p_wlan_idle * dt,
        None => 0.0,
    }
}

/// Seconds each radio of one node spends active during a period.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RadioActivity {
    pub wlan_on: bool,
    pub bt_on: bool,
    pub wlan_active_s: f64,
    pub bt_active_s: f64,
}

impl RadioActivity {
    /// Active power while transferring, idle power for the rest of `dt`.
    pub fn bill(&self, dt: f64, radio: &RadioParams) -> EnergyBreakdown {
        let mut e = EnergyBreakdown::default();
        if self.wlan_on {
            e.wlan_active = radio.p_wlan_active * self.wlan_active_s;
            e.wlan_idle = radio.p_wlan_idle * (dt - self.wlan_active_s);
        }
        if self.bt_on {
            e.bt_active = radio.p_bt_active * self.bt_active_s;
            e.bt_idle = radio.p_bt_idle * (dt - self.bt_active_s);
        }
        e
    }
}

/// Radio schedule of one cluster over a period of `dt` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSchedule {
    pub head: RadioActivity,
    /// Identical for every regular node of the cluster.
    pub member: RadioActivity,
    /// The Bluetooth demand did not fit into `dt` and was truncated.
    pub overflow: bool,
}

/// Active times for a cluster with `size` regular nodes that carries `load`
/// within a period of `dt` seconds. Active time never exceeds `dt`.
pub fn cluster_schedule(size: usize, load: &Workload, dt: f64, radio: &RadioParams) -> ClusterSchedule {
    let rt = load.realtime_seconds.min(dt);
    let t_wlan = radio.wlan_transfer_time(load.file_bytes);
    let wlan_demand = t_wlan + rt;
    let mut overflow = wlan_demand > dt;
    let wlan_active = wlan_demand.min(dt);

    if size == 0 {
        return ClusterSchedule {
            head: RadioActivity {
                wlan_on: true,
                bt_on: false,
                wlan_active_s: wlan_active,
                bt_active_s: 0.0,
            },
            member: RadioActivity::default(),
            overflow,
        };
    }

    let t_bt = radio.bt_transfer_time(load.file_bytes);
    let bt_demand = size as f64 * t_bt + rt;
    let slot = if bt_demand > dt {
        overflow = true;
        (dt - rt).max(0.0) / size as f64
    } else {
        t_bt
    };
    ClusterSchedule {
        head: RadioActivity {
            wlan_on: true,
            bt_on: true,
            wlan_active_s: wlan_active,
            bt_active_s: bt_demand.min(dt),
        },
        member: RadioActivity {
            wlan_on: false,
            bt_on: true,
            wlan_active_s: 0.0,
            bt_active_s: (slot + rt).min(dt),
        },
        overflow,
    }
}

/// Drains up to `bill.total()` joules from `node`, never below zero, records
/// the amount actually drained in `entry` and refreshes the alive flag.
/// Returns the joules drained.
pub fn apply_drain(node: &mut Node, bill: EnergyBreakdown, entry: &mut EnergyBreakdown) -> f64 {
    let requested = bill.total();
    let drained = if requested <= node.residual_energy {
        *entry += bill;
        node.residual_energy -= requested;
        requested
    } else {
        let have = node.residual_energy.max(0.0);
        if requested > 0.0 {
            *entry += bill * (have / requested);
        }
        node.residual_energy = 0.0;
        have
    };
    if node.alive && !node.is_above_death_threshold() {
        node.alive = false;
    }
    drained
}
