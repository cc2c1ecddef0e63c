//! Cost functions for the two clustering phases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::membership::{CoverSummary, Topology};

/// Guards the mobility normalization when no node is moving.
pub const MOBILITY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FitnessMode {
    /// Mobility enters as the CHs' share of total speed, so slow heads are preferred.
    #[default]
    #[serde(rename = "corrected")]
    Corrected,
    /// Mobility enters as `1 / (sum of CH speeds + 1)`, which rewards fast heads.
    #[serde(rename = "reciprocal")]
    Reciprocal,
}

impl std::str::FromStr for FitnessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(FitnessMode::Corrected),
            "reciprocal" => Ok(FitnessMode::Reciprocal),
            other => Err(Error::InvalidValue(format!("unknown fitness mode `{other}`"))),
        }
    }
}

/// Weights of both cost functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitnessWeights {
    /// Head-count phase: single-node share.
    pub omega1: f64,
    /// Head-count phase: mobility.
    pub omega2: f64,
    /// Head-selection phase.
    pub dist: f64,
    pub energy: f64,
    pub mob: f64,
    pub single: f64,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        Self {
            omega1: 0.5,
            omega2: 0.5,
            dist: 0.3,
            energy: 0.3,
            mob: 0.2,
            single: 0.2,
        }
    }
}

impl FitnessWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.omega1, self.omega2, self.dist, self.energy, self.mob, self.single];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidValue("weights must be finite and non-negative".into()));
        }
        let count = self.omega1 + self.omega2;
        if (count - 1.0).abs() > 1e-9 {
            return Err(Error::WeightSum {
                which: "head-count (omega1 + omega2)",
                sum: count,
            });
        }
        let select = self.dist + self.energy + self.mob + self.single;
        if (select - 1.0).abs() > 1e-9 {
            return Err(Error::WeightSum {
                which: "head-selection (dist + energy + mob + single)",
                sum: select,
            });
        }
        Ok(())
    }
}

fn mobility_term(topo: &Topology, head_speed: f64, mode: FitnessMode) -> f64 {
    match mode {
        FitnessMode::Corrected => head_speed / (topo.speed_total() + MOBILITY_EPS),
        FitnessMode::Reciprocal => 1.0 / (head_speed + 1.0),
    }
}

/// Head-count cost from a precomputed cover summary.
pub fn ch_number_cost_from(topo: &Topology, cover: &CoverSummary, weights: &FitnessWeights, mode: FitnessMode) -> f64 {
    let n = topo.len().max(1) as f64;
    weights.omega1 * cover.singles as f64 / n + weights.omega2 * mobility_term(topo, cover.head_speed, mode)
}

/// Head-count cost of a 0/1 vector over the alive nodes (local order).
pub fn ch_number_cost(solution: &[bool], topo: &Topology, weights: &FitnessWeights, mode: FitnessMode) -> Result<f64> {
    if solution.len() != topo.len() {
        return Err(Error::DimensionMismatch {
            expected: topo.len(),
            got: solution.len(),
        });
    }
    let cover = topo.summarize(solution, &mut Vec::new());
    Ok(ch_number_cost_from(topo, &cover, weights, mode))
}

/// The four normalized terms of the head-selection cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectTerms {
    pub distance: f64,
    pub energy: f64,
    pub mobility: f64,
    pub single: f64,
}

impl SelectTerms {
    pub fn weighted(&self, w: &FitnessWeights) -> f64 {
        w.dist * self.distance + w.energy * self.energy + w.mob * self.mobility + w.single * self.single
    }
}

/// Normalized distance, energy, mobility and single-node terms.
///
/// Distance sums member-to-head and head-to-base lengths over every cluster
/// of the partition (single-node clusters reach the base directly), divided
/// by the sum of every node's distance to the base.
pub fn select_terms_from(topo: &Topology, cover: &CoverSummary, mode: FitnessMode) -> SelectTerms {
    let total = topo.base_distance_total();
    let distance = if total > 0.0 { cover.path / total } else { 0.0 };
    let energy = if cover.heads > 0 && topo.max_initial_energy() > 0.0 {
        1.0 - cover.head_residual / topo.max_initial_energy() / cover.heads as f64
    } else {
        1.0
    };
    SelectTerms {
        distance,
        energy,
        mobility: mobility_term(topo, cover.head_speed, mode),
        single: cover.singles as f64 / topo.len().max(1) as f64,
    }
}

/// [`select_terms_from`] for a head set given as local indices.
pub fn select_terms(topo: &Topology, heads: &[usize], mode: FitnessMode) -> SelectTerms {
    let mut is_head = vec![false; topo.len()];
    for &h in heads {
        is_head[h] = true;
    }
    select_terms_from(topo, &topo.summarize(&is_head, &mut Vec::new()), mode)
}

/// Head-selection cost for `heads` (distinct local indices).
pub fn ch_select_cost(heads: &[usize], topo: &Topology, weights: &FitnessWeights, mode: FitnessMode) -> Result<f64> {
    let mut seen = vec![false; topo.len()];
    for &h in heads {
        if h >= topo.len() {
            return Err(Error::InvalidValue(format!("head index {h} out of range")));
        }
        if std::mem::replace(&mut seen[h], true) {
            return Err(Error::DuplicateHead(topo.id(h)));
        }
    }
    Ok(select_terms(topo, heads, mode).weighted(weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::world::{ClusterLimits, Node};

    fn topo(nodes: &[Node]) -> Topology {
        Topology::new(nodes, Point::new(40.0, 0.0), ClusterLimits::default())
    }

    fn node(id: usize, x: f64, y: f64) -> Node {
        Node::new(id, Point::new(x, y), 10_000.0)
    }

    #[test]
    fn every_node_a_head_is_all_single() {
        let nodes: Vec<Node> = (0..6).map(|i| node(i, 10.0 + 3.0 * i as f64, 20.0)).collect();
        let t = topo(&nodes);
        let c = ch_number_cost(&[true; 6], &t, &FitnessWeights::default(), FitnessMode::Corrected).unwrap();
        assert!((c - 0.5).abs() < 1e-12);
    }

    #[test]
    fn perfect_cover_costs_nothing() {
        let nodes = vec![
            node(0, 10.0, 10.0),
            node(1, 12.0, 10.0),
            node(2, 30.0, 10.0),
            node(3, 32.0, 10.0),
        ];
        let t = topo(&nodes);
        let c = ch_number_cost(
            &[true, false, true, false],
            &t,
            &FitnessWeights::default(),
            FitnessMode::Corrected,
        )
        .unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn reciprocal_head_count_example() {
        // 39 three-node groups plus 3 isolated nodes: p1 = 3, n = 120, p2 = 0.
        let mut nodes = Vec::new();
        let mut bits = Vec::new();
        for g in 0..39 {
            let (x, y) = (5.0 + 12.0 * (g % 6) as f64, 5.0 + 11.0 * (g / 6) as f64);
            for dx in [0.0, 2.0, 4.0] {
                bits.push(dx == 0.0);
                nodes.push(node(nodes.len(), x + dx, y));
            }
        }
        for x in [45.0, 58.0, 71.0] {
            bits.push(false);
            nodes.push(node(nodes.len(), x, 71.0));
        }
        let t = topo(&nodes);
        assert_eq!(t.assign(&bits).single_count(), 3);
        let value = ch_number_cost(&bits, &t, &FitnessWeights::default(), FitnessMode::Reciprocal).unwrap();
        assert!((value - 0.5125).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let nodes = vec![node(0, 1.0, 1.0), node(1, 2.0, 2.0)];
        let t = topo(&nodes);
        assert!(matches!(
            ch_number_cost(&[true], &t, &FitnessWeights::default(), FitnessMode::Corrected),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distance_term_example() {
        let nodes = vec![node(0, 40.0, 10.0), node(1, 40.0, 5.0)];
        let t = topo(&nodes);
        let terms = select_terms(&t, &[0], FitnessMode::Corrected);
        assert!((terms.distance - 1.0).abs() < 1e-12);
        assert_eq!(terms.energy, 0.0);
        assert_eq!(terms.single, 0.0);
    }

    #[test]
    fn single_term_example() {
        let mut nodes: Vec<Node> = (0..9).map(|i| node(i, 10.0 + i as f64, 10.0)).collect();
        nodes.push(node(9, 70.0, 70.0));
        let t = topo(&nodes);
        let terms = select_terms(&t, &[4, 5], FitnessMode::Corrected);
        assert!((terms.single - 0.1).abs() < 1e-12);
    }

    #[test]
    fn duplicate_heads_rejected() {
        let nodes = vec![node(0, 1.0, 1.0), node(1, 2.0, 2.0)];
        let t = topo(&nodes);
        assert!(matches!(
            ch_select_cost(&[1, 1], &t, &FitnessWeights::default(), FitnessMode::Corrected),
            Err(Error::DuplicateHead(1))
        ));
    }

    #[test]
    fn weight_sums_validated() {
        assert!(FitnessWeights::default().validate().is_ok());
        let bad = FitnessWeights {
            dist: 0.2,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::WeightSum { .. })));
        let bad = FitnessWeights {
            omega1: 0.4,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::WeightSum { .. })));
    }
}
