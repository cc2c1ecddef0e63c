//! Between re-clusterings: heads that cannot last another period hand over
//! their role (head shift), and overloaded heads pass regular nodes to
//! nearby heads (regular-node adjustment).

use crate::geometry::distance;
use crate::membership::nearest_open_cluster;
use crate::world::{Cluster, ClusterLimits, ClusterSet, Node, NodeId};

/// Smoothed per-period consumption of one head.
///
/// Starts at period `k = 1` with no observations. The first observation
/// bootstraps both the last and the average value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyHistory {
    pub e_last: f64,
    pub e_average: f64,
    pub k: u32,
    pub alpha: f64,
}

impl EnergyHistory {
    pub fn new(alpha: f64) -> Self {
        Self {
            e_last: 0.0,
            e_average: 0.0,
            k: 1,
            alpha,
        }
    }

    /// Expected consumption of the coming period.
    pub fn predict(&self) -> f64 {
        self.alpha * self.e_last + (1.0 - self.alpha) * self.e_average
    }

    /// Records the consumption of period `k` and returns the estimate that
    /// was in force before it.
    pub fn record(&mut self, consumed: f64) -> f64 {
        let e_current = self.predict();
        if self.k >= 2 {
            let k = self.k as f64;
            self.e_average = ((k - 2.0) * self.e_average + self.e_last) / (k - 1.0);
        } else {
            self.e_average = consumed;
        }
        self.e_last = consumed;
        self.k += 1;
        e_current
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShiftAction {
    /// The head has enough energy for another period.
    Keep,
    /// The richest regular node took over; `singles` could not stay in range.
    Promoted {
        old_head: NodeId,
        new_head: NodeId,
        singles: Vec<NodeId>,
    },
    /// A single-node head joined a neighboring cluster.
    Joined { node: NodeId, head: NodeId },
    /// A single-node head found nowhere to go.
    StaySingle,
}

/// Head shift for the cluster headed by `head`.
pub fn ch_shift(
    cs: &mut ClusterSet,
    head: NodeId,
    e_current: f64,
    nodes: &[Node],
    limits: &ClusterLimits,
) -> ShiftAction {
    let Some(ci) = cs.clusters.iter().position(|c| c.head == head) else {
        return ShiftAction::Keep;
    };
    if nodes[head].residual_energy >= e_current {
        return ShiftAction::Keep;
    }

    let cluster = &cs.clusters[ci];
    if cluster.members.is_empty() {
        return match nearest_open_cluster(cs, nodes, head, Some(ci), limits) {
            Some(target) => {
                let new_head = cs.clusters[target].head;
                cs.clusters[target].members.push(head);
                cs.clusters.remove(ci);
                ShiftAction::Joined {
                    node: head,
                    head: new_head,
                }
            }
            None => ShiftAction::StaySingle,
        };
    }

    let new_head = cluster
        .members
        .iter()
        .copied()
        .reduce(|a, b| {
            let (ea, eb) = (nodes[a].residual_energy, nodes[b].residual_energy);
            if eb > ea || (eb == ea && b < a) {
                b
            } else {
                a
            }
        })
        .expect("non-empty members");

    let mut rest: Vec<NodeId> = cluster.nodes().filter(|&id| id != new_head).collect();
    rest.sort_unstable();
    let mut promoted = Cluster::new(new_head);
    let mut singles = Vec::new();
    let center = nodes[new_head].position;
    for id in rest {
        if promoted.size() < limits.s_max && distance(nodes[id].position, center) < limits.r_b {
            promoted.members.push(id);
        } else {
            singles.push(id);
        }
    }
    cs.clusters[ci] = promoted;
    cs.clusters.extend(singles.iter().map(|&id| Cluster::new(id)));
    ShiftAction::Promoted {
        old_head: head,
        new_head,
        singles,
    }
}

/// One entry of a head's neighbor table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborChEntry {
    pub ch_id: NodeId,
    pub distance: f64,
    pub remaining_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustParams {
    /// Only heads closer than this count as adjacent.
    pub r_n: f64,
    /// Range of the HELLO exchange.
    pub r_wlan: f64,
    pub tiny_period: f64,
    /// Predicted per-period consumption one regular node adds to its head.
    pub per_member_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RnMove {
    pub node: NodeId,
    pub from: NodeId,
    pub to: NodeId,
}

/// Periods of head duty left, expressed in seconds.
pub fn remaining_time(residual: f64, e_current: f64, tiny_period: f64) -> f64 {
    if e_current > 0.0 {
        residual / e_current * tiny_period
    } else {
        f64::INFINITY
    }
}

/// Neighbor table of the head of cluster `ci`: every other head in WLAN range.
pub fn neighbor_table(
    cs: &ClusterSet,
    ci: usize,
    nodes: &[Node],
    remaining: &[f64],
    r_wlan: f64,
) -> Vec<NeighborChEntry> {
    let here = nodes[cs.clusters[ci].head].position;
    cs.clusters
        .iter()
        .enumerate()
        .filter(|&(cj, _)| cj != ci)
        .filter_map(|(cj, c)| {
            let d = distance(here, nodes[c.head].position);
            (d <= r_wlan).then_some(NeighborChEntry {
                ch_id: c.head,
                distance: d,
                remaining_time: remaining[cj],
            })
        })
        .collect()
}

/// Average remaining time over a head and its adjacent heads (closer than `r_n`).
pub fn average_remaining_time(own: f64, table: &[NeighborChEntry], r_n: f64) -> Option<f64> {
    let adjacent: Vec<f64> = table
        .iter()
        .filter(|e| e.distance < r_n && e.remaining_time.is_finite())
        .map(|e| e.remaining_time)
        .collect();
    if adjacent.is_empty() || !own.is_finite() {
        return None;
    }
    Some((own + adjacent.iter().sum::<f64>()) / (adjacent.len() + 1) as f64)
}

/// Regular-node adjustment over all clusters.
///
/// `e_current(head)` gives each head's predicted per-period consumption.
/// A head below the local average remaining time releases its farthest
/// regular nodes, one at a time, to the nearest adjacent head with room
/// (and within `r_b` of the node), until it reaches the average or no move
/// is possible. Receivers must outlast the donor and do not donate in the
/// same pass. A head always keeps at least one regular node, so the number
/// of single-node clusters never grows.
pub fn rn_adjustment<F>(
    cs: &mut ClusterSet,
    nodes: &[Node],
    e_current: F,
    params: &AdjustParams,
    limits: &ClusterLimits,
) -> Vec<RnMove>
where
    F: Fn(NodeId) -> f64,
{
    let mut load: Vec<f64> = cs.clusters.iter().map(|c| e_current(c.head)).collect();
    let rt = |cs: &ClusterSet, load: &[f64], ci: usize| {
        remaining_time(
            nodes[cs.clusters[ci].head].residual_energy,
            load[ci],
            params.tiny_period,
        )
    };
    let remaining: Vec<f64> = (0..cs.len()).map(|ci| rt(cs, &load, ci)).collect();

    let mut order: Vec<usize> = (0..cs.len()).collect();
    order.sort_by_key(|&ci| cs.clusters[ci].head);

    let mut received = vec![false; cs.len()];
    let mut moves = Vec::new();
    for ci in order {
        if cs.clusters[ci].size() < 2 || received[ci] {
            continue;
        }
        let table = neighbor_table(cs, ci, nodes, &remaining, params.r_wlan);
        let Some(t_avg) = average_remaining_time(remaining[ci], &table, params.r_n) else {
            continue;
        };
        if remaining[ci] >= t_avg {
            continue;
        }
        let head = cs.clusters[ci].head;
        let head_pos = nodes[head].position;
        let adjacent: Vec<usize> = (0..cs.len())
            .filter(|&cj| cj != ci && distance(head_pos, nodes[cs.clusters[cj].head].position) < params.r_n)
            .collect();

        while rt(cs, &load, ci) < t_avg && cs.clusters[ci].size() >= 2 {
            let own = rt(cs, &load, ci);
            let mut members = cs.clusters[ci].members.clone();
            members.sort_by(|&a, &b| {
                let da = distance(nodes[a].position, head_pos);
                let db = distance(nodes[b].position, head_pos);
                db.total_cmp(&da).then(a.cmp(&b))
            });
            let found = members.iter().find_map(|&m| {
                adjacent
                    .iter()
                    .copied()
                    .filter(|&cj| cs.clusters[cj].size() < limits.s_max && rt(cs, &load, cj) > own)
                    .map(|cj| (cj, distance(nodes[m].position, nodes[cs.clusters[cj].head].position)))
                    .filter(|&(_, d)| d < limits.r_b)
                    .min_by(|a, b| {
                        a.1.total_cmp(&b.1)
                            .then(cs.clusters[a.0].head.cmp(&cs.clusters[b.0].head))
                    })
                    .map(|(cj, _)| (m, cj))
            });
            let Some((m, cj)) = found else { break };
            cs.clusters[ci].members.retain(|&x| x != m);
            cs.clusters[cj].members.push(m);
            load[ci] = (load[ci] - params.per_member_cost).max(f64::MIN_POSITIVE);
            load[cj] += params.per_member_cost;
            received[cj] = true;
            moves.push(RnMove {
                node: m,
                from: head,
                to: cs.clusters[cj].head,
            });
        }
    }
    moves
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::world::validate_partition;

    fn node(id: usize, x: f64, y: f64, e: f64) -> Node {
        let mut n = Node::new(id, Point::new(x, y), 10_000.0);
        n.residual_energy = e;
        n
    }

    #[test]
    fn ewma_examples() {
        let h = EnergyHistory {
            e_last: 20.0,
            e_average: 10.0,
            k: 3,
            alpha: 0.5,
        };
        assert_eq!(h.predict(), 15.0);
        let mut h2 = h;
        assert_eq!(h2.record(7.0), 15.0);
        assert_eq!(h2.e_average, 15.0);
        assert_eq!(h2.e_last, 7.0);
        assert_eq!(h2.k, 4);

        let h = EnergyHistory {
            e_last: 12.5,
            e_average: 99.0,
            k: 5,
            alpha: 1.0,
        };
        assert_eq!(h.predict(), 12.5);
    }

    #[test]
    fn ewma_bootstrap_and_convergence() {
        let mut h = EnergyHistory::new(0.5);
        h.record(42.0);
        assert_eq!(h.e_average, 42.0);
        assert_eq!(h.predict(), 42.0);

        let mut h = EnergyHistory::new(0.3);
        h.record(100.0);
        for _ in 0..500 {
            h.record(8.0);
        }
        assert!((h.predict() - 8.0).abs() < 0.25);
        for _ in 0..50_000 {
            h.record(8.0);
        }
        assert!((h.predict() - 8.0).abs() < 0.01);
    }

    #[test]
    fn shift_keeps_rich_head() {
        let nodes = vec![node(0, 10.0, 10.0, 100.0), node(1, 12.0, 10.0, 500.0)];
        let mut cs = ClusterSet::new(vec![Cluster::with_members(0, vec![1])]);
        assert_eq!(
            ch_shift(&mut cs, 0, 50.0, &nodes, &ClusterLimits::default()),
            ShiftAction::Keep
        );
        assert_eq!(cs.clusters[0].head, 0);
    }

    #[test]
    fn shift_promotes_richest_member() {
        let nodes = vec![
            node(0, 10.0, 10.0, 10.0),
            node(1, 12.0, 10.0, 200.0),
            node(2, 8.0, 10.0, 80.0),
        ];
        let mut cs = ClusterSet::new(vec![Cluster::with_members(0, vec![1, 2])]);
        let action = ch_shift(&mut cs, 0, 50.0, &nodes, &ClusterLimits::default());
        assert_eq!(
            action,
            ShiftAction::Promoted {
                old_head: 0,
                new_head: 1,
                singles: vec![]
            }
        );
        assert_eq!(cs.clusters, vec![Cluster::with_members(1, vec![0, 2])]);
        assert!(validate_partition(&cs, &nodes, &ClusterLimits::default()).is_valid());
    }

    #[test]
    fn promotion_drops_out_of_range_members_to_singles() {
        let nodes = vec![
            node(0, 10.0, 10.0, 10.0),
            node(1, 17.0, 10.0, 200.0),
            node(2, 3.0, 10.0, 80.0),
        ];
        let mut cs = ClusterSet::new(vec![Cluster::with_members(0, vec![1, 2])]);
        let action = ch_shift(&mut cs, 0, 50.0, &nodes, &ClusterLimits::default());
        assert!(matches!(action, ShiftAction::Promoted { ref singles, .. } if singles == &vec![2]));
        assert!(validate_partition(&cs, &nodes, &ClusterLimits::default()).is_valid());
        assert_eq!(cs.single_count(), 1);
    }

    #[test]
    fn weak_single_joins_neighbor_with_room() {
        let mut nodes = vec![node(0, 10.0, 10.0, 9_000.0)];
        for i in 1..=5 {
            nodes.push(node(i, 10.0 + i as f64, 12.0, 9_000.0));
        }
        nodes.push(node(6, 18.0, 10.0, 5.0));
        let mut cs = ClusterSet::new(vec![Cluster::with_members(0, vec![1, 2, 3, 4, 5]), Cluster::new(6)]);
        let action = ch_shift(&mut cs, 6, 50.0, &nodes, &ClusterLimits::default());
        assert_eq!(action, ShiftAction::Joined { node: 6, head: 0 });
        assert_eq!(cs.len(), 1);
        assert_eq!(cs.clusters[0].size(), 6);
        assert!(validate_partition(&cs, &nodes, &ClusterLimits::default()).is_valid());
    }

    #[test]
    fn weak_single_without_neighbor_stays() {
        let nodes = vec![node(0, 10.0, 10.0, 5.0), node(1, 60.0, 60.0, 900.0)];
        let mut cs = ClusterSet::new(vec![Cluster::new(0), Cluster::new(1)]);
        assert_eq!(
            ch_shift(&mut cs, 0, 50.0, &nodes, &ClusterLimits::default()),
            ShiftAction::StaySingle
        );
        assert_eq!(cs.len(), 2);
    }

    fn adjust_params() -> AdjustParams {
        AdjustParams {
            r_n: 15.0,
            r_wlan: 100.0,
            tiny_period: 60.0,
            per_member_cost: 0.5,
        }
    }

    /// Three heads 6 m apart, each with members, and residual energies giving
    /// remaining times of 100, 200 and 300 s at 60 J per period.
    fn three_clusters() -> (Vec<Node>, ClusterSet) {
        let mut nodes = vec![
            node(0, 20.0, 20.0, 100.0),
            node(1, 26.0, 20.0, 200.0),
            node(2, 32.0, 20.0, 300.0),
        ];
        for (i, (x, y)) in [(22.0, 23.0), (23.0, 20.5), (21.0, 17.0), (27.0, 23.0), (33.0, 23.0)]
            .iter()
            .enumerate()
        {
            nodes.push(node(3 + i, *x, *y, 9_000.0));
        }
        let cs = ClusterSet::new(vec![
            Cluster::with_members(0, vec![3, 4, 5]),
            Cluster::with_members(1, vec![6]),
            Cluster::with_members(2, vec![7]),
        ]);
        (nodes, cs)
    }

    #[test]
    fn average_remaining_time_example() {
        let (nodes, cs) = three_clusters();
        let remaining: Vec<f64> = cs
            .clusters
            .iter()
            .map(|c| remaining_time(nodes[c.head].residual_energy, 60.0, 60.0))
            .collect();
        assert_eq!(remaining, vec![100.0, 200.0, 300.0]);
        let table = neighbor_table(&cs, 0, &nodes, &remaining, 100.0);
        assert_eq!(average_remaining_time(remaining[0], &table, 15.0), Some(200.0));
    }

    #[test]
    fn overloaded_head_sheds_members() {
        let (nodes, mut cs) = three_clusters();
        let singles_before = cs.single_count();
        let moves = rn_adjustment(&mut cs, &nodes, |_| 60.0, &adjust_params(), &ClusterLimits::default());
        assert!(!moves.is_empty());
        assert!(moves.iter().all(|m| m.from == 0));
        assert!(cs.clusters[0].size() >= 1);
        assert!(cs.single_count() <= singles_before);
        assert!(validate_partition(&cs, &nodes, &ClusterLimits::default()).is_valid());
    }

    #[test]
    fn equal_remaining_times_move_nothing() {
        let (mut nodes, mut cs) = three_clusters();
        for node in nodes.iter_mut().take(3) {
            node.residual_energy = 500.0;
        }
        let moves = rn_adjustment(&mut cs, &nodes, |_| 60.0, &adjust_params(), &ClusterLimits::default());
        assert!(moves.is_empty());
    }

    #[test]
    fn isolated_head_is_left_alone() {
        let (mut nodes, mut cs) = three_clusters();
        for id in [1, 2, 6, 7] {
            nodes[id].position.y += 40.0;
        }
        let before = cs.clone();
        let moves = rn_adjustment(&mut cs, &nodes, |_| 60.0, &adjust_params(), &ClusterLimits::default());
        assert!(moves.is_empty());
        assert_eq!(cs, before);
    }
}
