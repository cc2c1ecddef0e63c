//! Round-driven simulation of one replicate.
//!
//! Each round re-clusters with the configured protocol, then steps through
//! its tiny periods: mobility, workload and idle billing, BeeCup maintenance,
//! and death pruning, in that order.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baselines::{leach_round, sep_round, LeachState, SepState};
use crate::beecup::{self, ch_shift, rn_adjustment, AdjustParams, BeeCupParams, EnergyHistory, ShiftAction};
use crate::config::{Protocol, ScenarioConfig};
use crate::energy::{apply_drain, cluster_schedule, EnergyLedger, RadioParams, Workload};
use crate::error::Result;
use crate::geometry::{distance, sample_positions, Region};
use crate::membership::{rehome, Topology};
use crate::mobility::{advance, assign_waypoint, select_mobile_subset, WaypointState};
use crate::rng::{node_rng, search_seed, stream_rng, Stream};
use crate::world::{validate_partition, ClusterSet, Node, NodeId, Role, Violation};

/// Per-round observations. Cluster figures are sampled right after clustering.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RoundMetrics {
    pub round: usize,
    pub start_time: f64,
    pub alive: usize,
    /// Joules drained from all nodes during the round.
    pub energy_consumed: f64,
    /// `energy_consumed` divided by the nodes alive at the round start.
    pub energy_per_alive: f64,
    /// Mean residual energy of heads that have regular nodes.
    pub ch_residual: f64,
    pub non_single_clusters: usize,
    pub single_clusters: usize,
    pub avg_cluster_size: f64,
    pub ch_shifts: usize,
    pub rn_moves: usize,
    /// Cluster-periods whose Bluetooth or WLAN demand exceeded the period.
    pub overflows: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    /// Rounds within the simulated duration (lifetime extension excluded).
    pub rounds: Vec<RoundMetrics>,
    /// Time of the first death, if any occurred before the run stopped.
    pub first_death: Option<f64>,
    pub simulated_until: f64,
    /// Mean joules drained per node over the simulated duration.
    pub energy_per_node: f64,
    pub nodes: Vec<Node>,
    pub ledger: EnergyLedger,
    pub partitions_checked: usize,
    pub violations: Vec<String>,
}

impl RunResult {
    /// Largest per-node gap between drained energy and the ledger.
    pub fn conservation_error(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| ((n.initial_energy - n.residual_energy) - self.ledger.total(n.id)).abs())
            .fold(0.0, f64::max)
    }
}

enum Election {
    BeeCup {
        params: BeeCupParams,
        histories: Vec<Option<EnergyHistory>>,
    },
    Leach(LeachState),
    Sep(SepState),
}

/// Bills one tiny period of traffic and idle listening to every cluster.
/// Returns the joules drained per node and the number of overflowing clusters.
pub fn bill_period(
    clusters: &ClusterSet,
    nodes: &mut [Node],
    ledger: &mut EnergyLedger,
    share: &Workload,
    dt: f64,
    radio: &RadioParams,
    drained: &mut Vec<f64>,
) -> usize {
    drained.clear();
    drained.resize(nodes.len(), 0.0);
    let mut overflows = 0;
    for c in &clusters.clusters {
        let sched = cluster_schedule(c.members.len(), share, dt, radio);
        overflows += sched.overflow as usize;
        drained[c.head] += apply_drain(
            &mut nodes[c.head],
            sched.head.bill(dt, radio),
            &mut ledger.entries[c.head],
        );
        let member_bill = sched.member.bill(dt, radio);
        for &m in &c.members {
            drained[m] += apply_drain(&mut nodes[m], member_bill, &mut ledger.entries[m]);
        }
    }
    overflows
}

/// Sets every node's role from the partition.
pub fn assign_roles(clusters: &ClusterSet, nodes: &mut [Node]) {
    for c in &clusters.clusters {
        nodes[c.head].role = if c.is_single() {
            Role::SingleHead
        } else {
            Role::ClusterHead
        };
        for &m in &c.members {
            nodes[m].role = Role::Regular;
        }
    }
}

pub struct Engine {
    cfg: ScenarioConfig,
    seed: u64,
    region: Region,
    nodes: Vec<Node>,
    waypoints: Vec<Option<WaypointState>>,
    node_rngs: Vec<ChaCha8Rng>,
    subset_rng: ChaCha8Rng,
    workload_rng: ChaCha8Rng,
    election_rng: ChaCha8Rng,
    election: Election,
    clusters: ClusterSet,
    ledger: EnergyLedger,
    round: usize,
    time: f64,
    first_death: Option<f64>,
    drained: Vec<f64>,
    partitions_checked: usize,
    violations: Vec<String>,
}

impl Engine {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.node_count;
        let region = Region::new(cfg.region);
        let positions = sample_positions(&region, n, &mut stream_rng(seed, Stream::Topology))?;

        let mut advanced = vec![false; n];
        if cfg.is_heterogeneous() {
            let count = ((cfg.sep.m * n as f64) + 1e-9).floor() as usize;
            for i in index::sample(&mut stream_rng(seed, Stream::Heterogeneity), n, count.min(n)) {
                advanced[i] = true;
            }
        }
        let nodes: Vec<Node> = positions
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let factor = if advanced[i] { 1.0 + cfg.sep.alpha } else { 1.0 };
                Node::new(i, p, cfg.initial_energy * factor)
            })
            .collect();

        let election = match cfg.protocol {
            Protocol::BeeCup => Election::BeeCup {
                params: BeeCupParams {
                    weights: cfg.weights,
                    mode: cfg.fitness_mode,
                    abc: cfg.abc,
                    init_density: cfg.ch_init_density,
                },
                histories: vec![None; n],
            },
            Protocol::Leach => Election::Leach(LeachState::new(cfg.leach.p, n)?),
            Protocol::Sep => Election::Sep(SepState::new(cfg.sep.p, cfg.sep.m, cfg.sep.alpha, advanced)?),
        };

        Ok(Self {
            cfg: cfg.clone(),
            seed,
            region,
            waypoints: vec![None; n],
            node_rngs: (0..n).map(|i| node_rng(seed, i)).collect(),
            subset_rng: stream_rng(seed, Stream::MobileSubset),
            workload_rng: stream_rng(seed, Stream::Workload),
            election_rng: stream_rng(seed, Stream::Election),
            election,
            clusters: ClusterSet::default(),
            ledger: EnergyLedger::new(n),
            round: 0,
            time: 0.0,
            first_death: None,
            drained: Vec::with_capacity(n),
            partitions_checked: 0,
            violations: Vec::new(),
            nodes,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn clusters(&self) -> &ClusterSet {
        &self.clusters
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn first_death(&self) -> Option<f64> {
        self.first_death
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    fn check(&mut self, stage: &str) {
        if self.cfg.validate {
            let report = validate_partition(&self.clusters, &self.nodes, &self.cfg.limits());
            self.record_check(stage, report.violations);
        }
    }

    fn record_check(&mut self, stage: &str, violations: Vec<Violation>) {
        self.partitions_checked += 1;
        for v in violations {
            self.violations
                .push(format!("round {} t={} {stage}: {v}", self.round, self.time));
        }
    }

    fn recluster(&mut self) -> Result<()> {
        let limits = self.cfg.limits();
        let base = self.region.base_station;
        let mut layout = None;
        self.clusters = match &mut self.election {
            Election::BeeCup { params, histories } => {
                let topo = Topology::new(&self.nodes, base, limits);
                params.abc.seed = search_seed(self.seed, self.cfg.abc.seed, self.round as u64);
                let clustering = beecup::cluster(&topo, params)?;
                if self.cfg.validate {
                    layout = Some(validate_partition(&clustering.estimate.layout, &self.nodes, &limits).violations);
                }
                let cs = clustering.clusters().clone();
                histories.iter_mut().for_each(|h| *h = None);
                for head in cs.heads() {
                    histories[head] = Some(EnergyHistory::new(self.cfg.ewma_alpha));
                }
                cs
            }
            Election::Leach(state) => leach_round(&self.nodes, state, &mut self.election_rng, base, limits),
            Election::Sep(state) => sep_round(&self.nodes, state, &mut self.election_rng, base, limits),
        };
        if let Some(violations) = layout {
            self.record_check("head-count layout", violations);
        }
        assign_roles(&self.clusters, &mut self.nodes);
        self.check("clustering");
        Ok(())
    }

    fn start_mobility(&mut self) {
        let alive: Vec<NodeId> = self.nodes.iter().filter(|n| n.alive).map(|n| n.id).collect();
        let mobile = select_mobile_subset(&alive, self.cfg.mobility.mobile_fraction, &mut self.subset_rng);
        for (wp, node) in self.waypoints.iter_mut().zip(self.nodes.iter_mut()) {
            *wp = None;
            node.speed = 0.0;
        }
        for id in mobile {
            let wp = assign_waypoint(&self.region, &self.cfg.mobility, &mut self.node_rngs[id]);
            self.nodes[id].speed = wp.current_speed();
            self.waypoints[id] = Some(wp);
        }
    }

    fn move_nodes(&mut self, dt: f64) {
        for id in 0..self.nodes.len() {
            if !self.nodes[id].alive {
                continue;
            }
            if let Some(wp) = self.waypoints[id].as_mut() {
                let node = &mut self.nodes[id];
                node.position = advance(
                    node.position,
                    wp,
                    dt,
                    &self.region,
                    &self.cfg.mobility,
                    &mut self.node_rngs[id],
                );
                node.speed = wp.current_speed();
            }
        }
    }

    /// Drops members that are dead or out of their head's range; orphans of
    /// dead heads and out-of-range members are re-homed.
    fn prune(&mut self) {
        let r_b = self.cfg.r_b;
        let mut orphans = Vec::new();
        let nodes = &self.nodes;
        self.clusters.clusters.retain_mut(|c| {
            let head_alive = nodes[c.head].alive;
            let head_pos = nodes[c.head].position;
            c.members.retain(|&m| {
                if !nodes[m].alive {
                    return false;
                }
                if !head_alive || distance(nodes[m].position, head_pos) >= r_b {
                    orphans.push(m);
                    return false;
                }
                true
            });
            head_alive
        });
        if !orphans.is_empty() {
            rehome(&mut self.clusters, &self.nodes, &mut orphans, &self.cfg.limits());
        }
        if let Election::BeeCup { histories, .. } = &mut self.election {
            for c in &self.clusters.clusters {
                histories[c.head].get_or_insert_with(|| EnergyHistory::new(self.cfg.ewma_alpha));
            }
            for c in &self.clusters.clusters {
                for &m in &c.members {
                    histories[m] = None;
                }
            }
        }
        assign_roles(&self.clusters, &mut self.nodes);
    }

    fn maintain(&mut self, share: &Workload, metrics: &mut RoundMetrics) {
        let mut histories = match &mut self.election {
            Election::BeeCup { histories, .. } => std::mem::take(histories),
            _ => return,
        };
        let limits = self.cfg.limits();
        let alpha = self.cfg.ewma_alpha;
        let mut heads: Vec<NodeId> = self.clusters.heads().collect();
        heads.sort_unstable();
        for &h in &heads {
            histories[h]
                .get_or_insert_with(|| EnergyHistory::new(alpha))
                .record(self.drained[h]);
        }

        for &h in &heads {
            if !self.nodes[h].alive {
                continue;
            }
            let Some(e_current) = histories[h].map(|x| x.predict()) else {
                continue;
            };
            match ch_shift(&mut self.clusters, h, e_current, &self.nodes, &limits) {
                ShiftAction::Keep | ShiftAction::StaySingle => {}
                ShiftAction::Promoted {
                    old_head,
                    new_head,
                    singles,
                } => {
                    metrics.ch_shifts += 1;
                    histories[old_head] = None;
                    histories[new_head] = Some(EnergyHistory::new(alpha));
                    for s in singles {
                        histories[s] = Some(EnergyHistory::new(alpha));
                    }
                }
                ShiftAction::Joined { node, .. } => {
                    metrics.ch_shifts += 1;
                    histories[node] = None;
                }
            }
        }
        assign_roles(&self.clusters, &mut self.nodes);
        self.check("head shift");

        let radio = &self.cfg.radio;
        let params = AdjustParams {
            r_n: self.cfg.r_n,
            r_wlan: radio.r_wlan,
            tiny_period: self.cfg.tiny_period,
            per_member_cost: (radio.p_bt_active - radio.p_bt_idle) * radio.bt_transfer_time(share.file_bytes),
        };
        let moves = rn_adjustment(
            &mut self.clusters,
            &self.nodes,
            |h| histories[h].map_or(0.0, |x| x.predict()),
            &params,
            &limits,
        );
        metrics.rn_moves += moves.len();
        assign_roles(&self.clusters, &mut self.nodes);
        if let Election::BeeCup { histories: slot, .. } = &mut self.election {
            *slot = histories;
        }
        self.check("regular-node adjustment");
    }

    fn tiny_period(&mut self, share: &Workload, metrics: &mut RoundMetrics) {
        let dt = self.cfg.tiny_period;
        self.move_nodes(dt);
        self.prune();
        self.check("mobility");

        metrics.overflows += bill_period(
            &self.clusters,
            &mut self.nodes,
            &mut self.ledger,
            share,
            dt,
            &self.cfg.radio,
            &mut self.drained,
        );

        self.maintain(share, metrics);

        self.time += dt;
        self.prune();
        if self.first_death.is_none() && self.nodes.iter().any(|n| !n.alive) {
            self.first_death = Some(self.time);
        }
        self.check("death pruning");
    }

    /// Runs one re-clustering round.
    pub fn step_round(&mut self) -> Result<RoundMetrics> {
        let mut m = RoundMetrics {
            round: self.round,
            start_time: self.time,
            alive: self.alive_count(),
            ..Default::default()
        };
        let periods = self.cfg.periods_per_round();
        let load = Workload::draw(&self.cfg.workload, &mut self.workload_rng);
        if m.alive == 0 {
            self.clusters = ClusterSet::default();
            self.time += periods as f64 * self.cfg.tiny_period;
            self.round += 1;
            return Ok(m);
        }

        self.start_mobility();
        self.recluster()?;
        m.single_clusters = self.clusters.single_count();
        m.non_single_clusters = self.clusters.non_single_count();
        m.avg_cluster_size = self.clusters.avg_cluster_size();
        let heads: Vec<f64> = self
            .clusters
            .clusters
            .iter()
            .filter(|c| !c.is_single())
            .map(|c| self.nodes[c.head].residual_energy)
            .collect();
        m.ch_residual = if heads.is_empty() {
            0.0
        } else {
            heads.iter().sum::<f64>() / heads.len() as f64
        };

        let before: f64 = self.nodes.iter().map(|n| n.residual_energy).sum();
        let share = load.share(periods);
        for _ in 0..periods {
            self.tiny_period(&share, &mut m);
        }
        let after: f64 = self.nodes.iter().map(|n| n.residual_energy).sum();
        m.energy_consumed = before - after;
        m.energy_per_alive = m.energy_consumed / m.alive as f64;
        self.round += 1;
        Ok(m)
    }

    /// Runs the configured duration, then keeps going until the first death
    /// or the lifetime horizon.
    pub fn run(mut self) -> Result<RunResult> {
        let rounds = self.cfg.rounds();
        let extra = if self.cfg.lifetime_horizon > self.cfg.sim_duration {
            (self.cfg.lifetime_horizon / self.cfg.recluster_interval).ceil() as usize
        } else {
            rounds
        };
        let mut series = Vec::with_capacity(rounds);
        let mut energy_per_node = 0.0;
        let n = self.nodes.len() as f64;
        let mut r = 0;
        loop {
            let more_lifetime = self.first_death.is_none() && r < extra && self.alive_count() > 0;
            if r >= rounds && !more_lifetime {
                break;
            }
            let m = self.step_round()?;
            if r < rounds {
                series.push(m);
            }
            r += 1;
            if r == rounds {
                energy_per_node = self
                    .nodes
                    .iter()
                    .map(|x| x.initial_energy - x.residual_energy)
                    .sum::<f64>()
                    / n;
            }
        }
        Ok(RunResult {
            seed: self.seed,
            rounds: series,
            first_death: self.first_death,
            simulated_until: self.time,
            energy_per_node,
            nodes: self.nodes,
            ledger: self.ledger,
            partitions_checked: self.partitions_checked,
            violations: self.violations,
        })
    }
}

/// Round-zero BeeCup clustering of a replicate's topology, with both phases
/// exposed. The protocol field of `cfg` is ignored.
pub fn first_clustering(cfg: &ScenarioConfig, seed: u64) -> Result<beecup::Clustering> {
    let mut engine = Engine::new(cfg, seed)?;
    engine.start_mobility();
    let topo = Topology::new(&engine.nodes, engine.region.base_station, cfg.limits());
    let params = BeeCupParams {
        weights: cfg.weights,
        mode: cfg.fitness_mode,
        abc: cfg.abc.with_seed(search_seed(seed, cfg.abc.seed, 0)),
        init_density: cfg.ch_init_density,
    };
    beecup::cluster(&topo, &params)
}

/// Runs one replicate.
pub fn run_replicate(cfg: &ScenarioConfig, seed: u64) -> Result<RunResult> {
    Engine::new(cfg, seed)?.run()
}
