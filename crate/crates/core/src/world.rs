//! Node state, clusters and the structural partition constraints.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{distance, Point};

pub type NodeId = usize;

/// A node counts as dead once it has lost 99.9% of its initial energy.
pub const DEATH_FRACTION: f64 = 0.001;

/// Maximum number of regular nodes in a Bluetooth piconet.
pub const DEFAULT_S_MAX: usize = 7;

/// Bluetooth range, and thus the cluster radius, in meters.
pub const DEFAULT_R_B: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    /// Head of a cluster with at least one regular node: WLAN and Bluetooth on.
    ClusterHead,
    /// Member of a cluster: Bluetooth only.
    Regular,
    /// Head of a cluster without members: WLAN only.
    SingleHead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub position: Point,
    /// Instantaneous speed in m/s; zero while paused or stationary.
    pub speed: f64,
    pub residual_energy: f64,
    pub initial_energy: f64,
    pub alive: bool,
    pub role: Role,
}

impl Node {
    pub fn new(id: NodeId, position: Point, initial_energy: f64) -> Self {
        Self {
            id,
            position,
            speed: 0.0,
            residual_energy: initial_energy,
            initial_energy,
            alive: initial_energy > 0.0,
            role: Role::SingleHead,
        }
    }

    /// Energy level at or below which the node is dead.
    pub fn death_threshold(&self) -> f64 {
        DEATH_FRACTION * self.initial_energy
    }

    pub fn is_above_death_threshold(&self) -> bool {
        self.residual_energy > self.death_threshold()
    }
}

/// Cluster size and radius limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterLimits {
    pub s_max: usize,
    pub r_b: f64,
}

impl Default for ClusterLimits {
    fn default() -> Self {
        Self {
            s_max: DEFAULT_S_MAX,
            r_b: DEFAULT_R_B,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub head: NodeId,
    pub members: Vec<NodeId>,
}

impl Cluster {
    pub fn new(head: NodeId) -> Self {
        Self {
            head,
            members: Vec::new(),
        }
    }

    pub fn with_members(head: NodeId, members: Vec<NodeId>) -> Self {
        Self { head, members }
    }

    /// Number of regular nodes.
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn is_single(&self) -> bool {
        self.members.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::once(self.head).chain(self.members.iter().copied())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
}

impl ClusterSet {
    pub fn new(clusters: Vec<Cluster>) -> Self {
        Self { clusters }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn single_count(&self) -> usize {
        count_single_node_clusters(self)
    }

    /// Number of clusters with at least one regular node.
    pub fn non_single_count(&self) -> usize {
        self.clusters.len() - self.single_count()
    }

    /// Mean cluster size (head included) over non-single clusters, or 0.
    pub fn avg_cluster_size(&self) -> f64 {
        let non_single: Vec<&Cluster> = self.clusters.iter().filter(|c| !c.is_single()).collect();
        if non_single.is_empty() {
            return 0.0;
        }
        let nodes: usize = non_single.iter().map(|c| c.size() + 1).sum();
        nodes as f64 / non_single.len() as f64
    }

    pub fn heads(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.clusters.iter().map(|c| c.head)
    }

    /// Index of the cluster containing each node (as head or member).
    pub fn membership(&self, node_count: usize) -> Vec<Option<usize>> {
        let mut of = vec![None; node_count];
        for (ci, c) in self.clusters.iter().enumerate() {
            for id in c.nodes() {
                if id < node_count {
                    of[id] = Some(ci);
                }
            }
        }
        of
    }

    /// Sorts clusters by head id and members ascending.
    pub fn normalize(&mut self) {
        for c in &mut self.clusters {
            c.members.sort_unstable();
        }
        self.clusters.sort_by_key(|c| c.head);
    }
}

/// Number of clusters that have no regular nodes.
pub fn count_single_node_clusters(cs: &ClusterSet) -> usize {
    cs.clusters.iter().filter(|c| c.is_single()).count()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// An alive node belongs to no cluster.
    Uncovered(NodeId),
    /// A node appears more than once across the partition.
    Duplicate(NodeId),
    /// An id that does not exist in the node list.
    Unknown(NodeId),
    /// A cluster has more than `s_max` regular nodes.
    Oversized { head: NodeId, size: usize },
    /// A regular node lies beyond `r_b` from its head.
    OutOfRange {
        head: NodeId,
        member: NodeId,
        distance: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Uncovered(id) => write!(f, "coverage: alive node {id} is in no cluster"),
            Violation::Duplicate(id) => write!(f, "disjointness: node {id} appears more than once"),
            Violation::Unknown(id) => write!(f, "unknown node id {id}"),
            Violation::Oversized { head, size } => {
                write!(f, "capacity: cluster of {head} has {size} regular nodes")
            }
            Violation::OutOfRange { head, member, distance } => {
                write!(f, "radius: node {member} is {distance:.3} m from head {head}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid partition");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks coverage, disjointness, capacity and radius of `cs` against
/// `nodes` (indexed by id). Only alive nodes need a cluster; a dead node
/// awaiting pruning is not a violation.
pub fn validate_partition(cs: &ClusterSet, nodes: &[Node], limits: &ClusterLimits) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = vec![0u32; nodes.len()];

    for c in &cs.clusters {
        for id in c.nodes() {
            match nodes.get(id) {
                None => violations.push(Violation::Unknown(id)),
                Some(_) => {
                    seen[id] += 1;
                    if seen[id] == 2 {
                        violations.push(Violation::Duplicate(id));
                    }
                }
            }
        }
        if c.size() > limits.s_max {
            violations.push(Violation::Oversized {
                head: c.head,
                size: c.size(),
            });
        }
        if let Some(head) = nodes.get(c.head) {
            for &m in &c.members {
                if let Some(member) = nodes.get(m) {
                    let d = distance(head.position, member.position);
                    if d > limits.r_b {
                        violations.push(Violation::OutOfRange {
                            head: c.head,
                            member: m,
                            distance: d,
                        });
                    }
                }
            }
        }
    }

    for node in nodes {
        if node.alive && seen[node.id] == 0 {
            violations.push(Violation::Uncovered(node.id));
        }
    }

    ValidationReport { violations }
}
