//! LEACH and SEP cluster-head election. Membership, energy and mobility are
//! shared with BeeCup; only the choice of heads differs.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::membership::assign_members;
use crate::world::{ClusterLimits, ClusterSet, Node, NodeId};

/// Rounds after which an elected node becomes eligible again.
pub fn epoch_length(p: f64) -> u64 {
    (1.0 / p).ceil() as u64
}

/// Election threshold of a node in round `round`.
pub fn leach_threshold(p: f64, round: u64, eligible: bool) -> f64 {
    if !eligible {
        return 0.0;
    }
    let phase = (round % epoch_length(p)) as f64;
    (p / (1.0 - p * phase)).min(1.0)
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidValue(format!(
            "{name} must lie strictly between 0 and 1, got {p}"
        )))
    }
}

/// Eligibility bookkeeping shared by both protocols.
#[derive(Debug, Clone, PartialEq)]
struct Eligibility {
    last_elected: Vec<Option<u64>>,
}

impl Eligibility {
    fn new(n: usize) -> Self {
        Self {
            last_elected: vec![None; n],
        }
    }

    fn is_eligible(&self, id: NodeId, round: u64, window: u64) -> bool {
        self.last_elected[id].is_none_or(|r| round - r >= window)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeachState {
    pub p: f64,
    pub round: u64,
    eligibility: Eligibility,
}

impl LeachState {
    pub fn new(p: f64, node_count: usize) -> Result<Self> {
        check_probability("leach.p", p)?;
        Ok(Self {
            p,
            round: 0,
            eligibility: Eligibility::new(node_count),
        })
    }

    /// Whether `id` is in the eligible set for the current round.
    pub fn is_eligible(&self, id: NodeId) -> bool {
        self.eligibility.is_eligible(id, self.round, epoch_length(self.p))
    }
}

/// Draws one uniform number per alive node (ascending id) and elects those
/// below their threshold.
fn elect<R, F>(nodes: &[Node], rng: &mut R, mut threshold: F) -> Vec<NodeId>
where
    R: Rng + ?Sized,
    F: FnMut(NodeId) -> f64,
{
    let mut heads = Vec::new();
    for node in nodes.iter().filter(|n| n.alive) {
        let u: f64 = rng.gen();
        if u < threshold(node.id) {
            heads.push(node.id);
        }
    }
    heads
}

/// One LEACH round: self-election, then the shared membership rule.
pub fn leach_round<R: Rng + ?Sized>(
    nodes: &[Node],
    state: &mut LeachState,
    rng: &mut R,
    base_station: Point,
    limits: ClusterLimits,
) -> ClusterSet {
    let (p, round) = (state.p, state.round);
    let window = epoch_length(p);
    let heads = elect(nodes, rng, |id| {
        leach_threshold(p, round, state.eligibility.is_eligible(id, round, window))
    });
    for &h in &heads {
        state.eligibility.last_elected[h] = Some(round);
    }
    state.round += 1;
    assign_members(&heads, nodes, base_station, limits)
}

/// Election probabilities of normal and advanced nodes.
pub fn sep_probabilities(p: f64, m: f64, alpha: f64) -> (f64, f64) {
    let p_normal = p / (1.0 + alpha * m);
    (p_normal, p_normal * (1.0 + alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SepState {
    pub p: f64,
    pub m: f64,
    pub alpha: f64,
    pub round: u64,
    advanced: Vec<bool>,
    eligibility: Eligibility,
}

impl SepState {
    /// `advanced[id]` marks nodes that carry the extra energy.
    pub fn new(p: f64, m: f64, alpha: f64, advanced: Vec<bool>) -> Result<Self> {
        check_probability("sep.p", p)?;
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::InvalidValue(format!("sep.m must lie in [0, 1], got {m}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "sep.alpha must be non-negative, got {alpha}"
            )));
        }
        let (_, p_adv) = sep_probabilities(p, m, alpha);
        if p_adv >= 1.0 {
            return Err(Error::InvalidValue(format!(
                "advanced-node probability {p_adv} must stay below 1; lower sep.p or sep.alpha"
            )));
        }
        let n = advanced.len();
        Ok(Self {
            p,
            m,
            alpha,
            round: 0,
            advanced,
            eligibility: Eligibility::new(n),
        })
    }

    pub fn is_advanced(&self, id: NodeId) -> bool {
        self.advanced[id]
    }

    /// Probability and eligibility window of `id`.
    fn class_params(&self, id: NodeId) -> (f64, u64) {
        let (p_nm, p_adv) = sep_probabilities(self.p, self.m, self.alpha);
        let p = if self.advanced[id] { p_adv } else { p_nm };
        (p, epoch_length(p))
    }

    pub fn threshold(&self, id: NodeId) -> f64 {
        let (p, window) = self.class_params(id);
        leach_threshold(p, self.round, self.eligibility.is_eligible(id, self.round, window))
    }
}

/// One SEP round: class-specific thresholds, then the shared membership rule.
pub fn sep_round<R: Rng + ?Sized>(
    nodes: &[Node],
    state: &mut SepState,
    rng: &mut R,
    base_station: Point,
    limits: ClusterLimits,
) -> ClusterSet {
    let heads = elect(nodes, rng, |id| state.threshold(id));
    for &h in &heads {
        state.eligibility.last_elected[h] = Some(state.round);
    }
    state.round += 1;
    assign_members(&heads, nodes, base_station, limits)
}
