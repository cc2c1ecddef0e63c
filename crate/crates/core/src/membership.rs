//! Shared membership rule: given a set of cluster heads, every other alive
//! node (ascending id) joins the nearest head closer than `r_b` that still
//! has room, ties going to the lower head id. Nodes with no feasible head
//! form single-node clusters of their own.

use crate::geometry::{distance, Point, Region};
use crate::world::{Cluster, ClusterLimits, ClusterSet, Node, NodeId};

const NONE: u32 = u32::MAX;

/// Read-only view of the alive nodes at one instant, with neighbor lists
/// precomputed for fast repeated assignment.
///
/// Nodes are addressed by *local* index `0..len()`, in ascending id order.
#[derive(Debug, Clone)]
pub struct Topology {
    ids: Vec<NodeId>,
    positions: Vec<Point>,
    speeds: Vec<f64>,
    residual: Vec<f64>,
    base_dist: Vec<f64>,
    base_dist_total: f64,
    speed_total: f64,
    max_initial_energy: f64,
    /// Heads a node could join: local index and distance, sorted by (distance, id).
    neighbors: Vec<Vec<(u32, f64)>>,
    limits: ClusterLimits,
}

impl Topology {
    pub fn new(nodes: &[Node], base_station: Point, limits: ClusterLimits) -> Self {
        let alive: Vec<&Node> = nodes.iter().filter(|n| n.alive).collect();
        let ids: Vec<NodeId> = alive.iter().map(|n| n.id).collect();
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        let positions: Vec<Point> = alive.iter().map(|n| n.position).collect();
        let speeds: Vec<f64> = alive.iter().map(|n| n.speed).collect();
        let residual: Vec<f64> = alive.iter().map(|n| n.residual_energy).collect();
        let base_dist: Vec<f64> = positions.iter().map(|p| distance(*p, base_station)).collect();
        let max_initial_energy = nodes.iter().map(|n| n.initial_energy).fold(0.0, f64::max);

        let n = ids.len();
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = distance(positions[i], positions[j]);
                if d < limits.r_b {
                    neighbors[i].push((j as u32, d));
                    neighbors[j].push((i as u32, d));
                }
            }
        }
        for list in &mut neighbors {
            list.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        }

        Self {
            base_dist_total: base_dist.iter().sum(),
            speed_total: speeds.iter().sum(),
            ids,
            positions,
            speeds,
            residual,
            base_dist,
            max_initial_energy,
            neighbors,
            limits,
        }
    }

    pub fn from_region(nodes: &[Node], region: &Region, limits: ClusterLimits) -> Self {
        Self::new(nodes, region.base_station, limits)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, local: usize) -> NodeId {
        self.ids[local]
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn local_of(&self, id: NodeId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn position(&self, local: usize) -> Point {
        self.positions[local]
    }

    pub fn speed(&self, local: usize) -> f64 {
        self.speeds[local]
    }

    pub fn speed_total(&self) -> f64 {
        self.speed_total
    }

    pub fn residual(&self, local: usize) -> f64 {
        self.residual[local]
    }

    pub fn max_initial_energy(&self) -> f64 {
        self.max_initial_energy
    }

    pub fn base_distance(&self, local: usize) -> f64 {
        self.base_dist[local]
    }

    pub fn base_distance_total(&self) -> f64 {
        self.base_dist_total
    }

    pub fn limits(&self) -> ClusterLimits {
        self.limits
    }

    pub fn neighbors(&self, local: usize) -> &[(u32, f64)] {
        &self.neighbors[local]
    }

    /// Applies the membership rule for the heads flagged in `is_head`.
    pub fn assign(&self, is_head: &[bool]) -> Assignment {
        let n = self.len();
        debug_assert_eq!(is_head.len(), n);
        let mut head_of = vec![NONE; n];
        let mut sizes = vec![0u16; n];
        let s_max = self.limits.s_max.min(u16::MAX as usize) as u16;
        for j in 0..n {
            if is_head[j] {
                continue;
            }
            for &(h, _) in &self.neighbors[j] {
                let h = h as usize;
                if is_head[h] && sizes[h] < s_max {
                    head_of[j] = h as u32;
                    sizes[h] += 1;
                    break;
                }
            }
        }
        Assignment {
            is_head: is_head.to_vec(),
            head_of,
            sizes,
        }
    }

    /// Membership for heads given by local index.
    pub fn assign_heads(&self, heads: &[usize]) -> Assignment {
        let mut is_head = vec![false; self.len()];
        for &h in heads {
            is_head[h] = true;
        }
        self.assign(&is_head)
    }
}

/// Aggregates of the membership rule that the cost functions need, computed
/// without materializing an [`Assignment`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoverSummary {
    pub heads: usize,
    /// Heads without members plus forced singles.
    pub singles: usize,
    pub head_speed: f64,
    pub head_residual: f64,
    /// Member-to-head distances plus the base distance of every head and
    /// forced single.
    pub path: f64,
}

impl Topology {
    /// Same rule as [`Topology::assign`], reduced to a [`CoverSummary`].
    /// `sizes` is scratch space and is left zeroed.
    pub fn summarize(&self, is_head: &[bool], sizes: &mut Vec<u16>) -> CoverSummary {
        let n = self.len();
        debug_assert_eq!(is_head.len(), n);
        sizes.clear();
        sizes.resize(n, 0);
        let s_max = self.limits.s_max.min(u16::MAX as usize) as u16;
        let mut out = CoverSummary::default();
        for j in 0..n {
            if is_head[j] {
                out.heads += 1;
                out.head_speed += self.speeds[j];
                out.head_residual += self.residual[j];
                out.path += self.base_dist[j];
                continue;
            }
            let mut joined = false;
            for &(h, d) in &self.neighbors[j] {
                let h = h as usize;
                if is_head[h] && sizes[h] < s_max {
                    sizes[h] += 1;
                    out.path += d;
                    joined = true;
                    break;
                }
            }
            if !joined {
                out.singles += 1;
                out.path += self.base_dist[j];
            }
        }
        for j in 0..n {
            if is_head[j] && sizes[j] == 0 {
                out.singles += 1;
            }
            sizes[j] = 0;
        }
        out
    }
}

/// Result of the membership rule, in local indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    is_head: Vec<bool>,
    head_of: Vec<u32>,
    sizes: Vec<u16>,
}

impl Assignment {
    pub fn is_head(&self, local: usize) -> bool {
        self.is_head[local]
    }

    /// Head a regular node joined; `None` for heads and forced singles.
    pub fn head_of(&self, local: usize) -> Option<usize> {
        match self.head_of[local] {
            NONE => None,
            h => Some(h as usize),
        }
    }

    /// Regular nodes attached to `local` (zero for non-heads).
    pub fn size(&self, local: usize) -> usize {
        self.sizes[local] as usize
    }

    /// Non-head nodes that found no head.
    pub fn forced_single_count(&self) -> usize {
        (0..self.is_head.len())
            .filter(|&j| !self.is_head[j] && self.head_of[j] == NONE)
            .count()
    }

    /// Heads without members plus forced singles.
    pub fn single_count(&self) -> usize {
        (0..self.is_head.len())
            .filter(|&j| {
                if self.is_head[j] {
                    self.sizes[j] == 0
                } else {
                    self.head_of[j] == NONE
                }
            })
            .count()
    }

    /// Heads with at least one member.
    pub fn non_single_count(&self) -> usize {
        (0..self.is_head.len())
            .filter(|&j| self.is_head[j] && self.sizes[j] > 0)
            .count()
    }

    pub fn to_cluster_set(&self, topo: &Topology) -> ClusterSet {
        let n = self.is_head.len();
        let mut slot = vec![usize::MAX; n];
        let mut clusters = Vec::new();
        for (j, s) in slot.iter_mut().enumerate() {
            if self.is_head[j] || self.head_of[j] == NONE {
                *s = clusters.len();
                clusters.push(Cluster::new(topo.id(j)));
            }
        }
        for j in 0..n {
            if let Some(h) = self.head_of(j) {
                clusters[slot[h]].members.push(topo.id(j));
            }
        }
        ClusterSet::new(clusters)
    }
}

/// The membership rule applied to an explicit head list (ids). Ids that are
/// dead or unknown are ignored.
pub fn assign_members(ch_ids: &[NodeId], nodes: &[Node], base_station: Point, limits: ClusterLimits) -> ClusterSet {
    let topo = Topology::new(nodes, base_station, limits);
    let heads: Vec<usize> = ch_ids.iter().filter_map(|&id| topo.local_of(id)).collect();
    topo.assign_heads(&heads).to_cluster_set(&topo)
}

/// Nearest head (by position) within `r_b` of `node` that has spare
/// capacity, excluding the cluster at index `skip`. Returns the cluster index.
pub fn nearest_open_cluster(
    cs: &ClusterSet,
    nodes: &[Node],
    node: NodeId,
    skip: Option<usize>,
    limits: &ClusterLimits,
) -> Option<usize> {
    let p = nodes[node].position;
    let mut best: Option<(f64, NodeId, usize)> = None;
    for (ci, c) in cs.clusters.iter().enumerate() {
        if Some(ci) == skip || c.head == node || c.size() >= limits.s_max {
            continue;
        }
        let d = distance(p, nodes[c.head].position);
        if d >= limits.r_b {
            continue;
        }
        let better = match best {
            None => true,
            Some((bd, bh, _)) => d < bd || (d == bd && c.head < bh),
        };
        if better {
            best = Some((d, c.head, ci));
        }
    }
    best.map(|(_, _, ci)| ci)
}

/// Re-homes `orphans` (ascending id): each joins the nearest open cluster or
/// becomes a single-node cluster.
pub fn rehome(cs: &mut ClusterSet, nodes: &[Node], orphans: &mut Vec<NodeId>, limits: &ClusterLimits) {
    orphans.sort_unstable();
    for &id in orphans.iter() {
        match nearest_open_cluster(cs, nodes, id, None, limits) {
            Some(ci) => cs.clusters[ci].members.push(id),
            None => cs.clusters.push(Cluster::new(id)),
        }
    }
    orphans.clear();
}
