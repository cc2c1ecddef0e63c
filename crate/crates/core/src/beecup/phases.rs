//! Head-count estimation (binary encoding) and head selection (index encoding).

use crate::abc::{run_abc_with, AbcParams, AbcProblem, BinaryEncoding, IndexEncoding};
use crate::error::{Error, Result};
use crate::membership::Topology;
use crate::world::{ClusterSet, NodeId};

use std::cell::RefCell;

use super::fitness::{ch_number_cost_from, select_terms_from, FitnessMode, FitnessWeights};

struct ChNumberProblem<'a> {
    topo: &'a Topology,
    weights: &'a FitnessWeights,
    mode: FitnessMode,
    encoding: BinaryEncoding,
    sizes: RefCell<Vec<u16>>,
}

impl AbcProblem for ChNumberProblem<'_> {
    type Encoding = BinaryEncoding;

    fn encoding(&self) -> &BinaryEncoding {
        &self.encoding
    }

    fn cost(&self, solution: &Vec<bool>) -> f64 {
        let cover = self.topo.summarize(solution, &mut self.sizes.borrow_mut());
        ch_number_cost_from(self.topo, &cover, self.weights, self.mode)
    }
}

struct ChSelectProblem<'a> {
    topo: &'a Topology,
    weights: &'a FitnessWeights,
    mode: FitnessMode,
    encoding: IndexEncoding,
    is_head: RefCell<Vec<bool>>,
    sizes: RefCell<Vec<u16>>,
}

impl AbcProblem for ChSelectProblem<'_> {
    type Encoding = IndexEncoding;

    fn encoding(&self) -> &IndexEncoding {
        &self.encoding
    }

    fn cost(&self, solution: &Vec<usize>) -> f64 {
        let mut is_head = self.is_head.borrow_mut();
        for &h in solution {
            is_head[h] = true;
        }
        let cover = self.topo.summarize(&is_head, &mut self.sizes.borrow_mut());
        for &h in solution {
            is_head[h] = false;
        }
        select_terms_from(self.topo, &cover, self.mode).weighted(self.weights)
    }
}

#[derive(Debug, Clone)]
pub struct ChCountEstimate {
    /// Clusters with at least one regular node.
    pub k_nonsingle: usize,
    pub single_count: usize,
    pub layout: ClusterSet,
    /// Heads of the non-single clusters, as local indices of the topology.
    pub nonsingle_heads: Vec<usize>,
    pub cost: f64,
    pub history: Vec<f64>,
}

impl ChCountEstimate {
    pub fn avg_cluster_size(&self) -> f64 {
        self.layout.avg_cluster_size()
    }
}

/// Searches 0/1 head layouts over the alive nodes for the lowest head-count
/// cost. `density` is the probability of a set bit in fresh layouts.
pub fn estimate_ch_count(
    topo: &Topology,
    weights: &FitnessWeights,
    mode: FitnessMode,
    abc: &AbcParams,
    density: f64,
) -> Result<ChCountEstimate> {
    if topo.is_empty() {
        return Err(Error::EmptyUniverse);
    }
    let problem = ChNumberProblem {
        topo,
        weights,
        mode,
        encoding: BinaryEncoding::new(topo.len(), density),
        sizes: RefCell::new(Vec::with_capacity(topo.len())),
    };
    let out = run_abc_with(&problem, abc, &[], |_| {})?;
    let asg = topo.assign(&out.best.solution);
    let nonsingle_heads: Vec<usize> = (0..topo.len()).filter(|&j| asg.is_head(j) && asg.size(j) > 0).collect();
    Ok(ChCountEstimate {
        k_nonsingle: nonsingle_heads.len(),
        single_count: asg.single_count(),
        layout: asg.to_cluster_set(topo),
        nonsingle_heads,
        cost: out.best.cost,
        history: out.history,
    })
}

#[derive(Debug, Clone)]
pub struct HeadSelection {
    pub clusters: ClusterSet,
    /// Selected head ids, ascending.
    pub heads: Vec<NodeId>,
    pub cost: f64,
    pub history: Vec<f64>,
}

/// Searches sets of `k` distinct heads for the lowest selection cost.
/// `warm_start` (local indices) seeds one food source when it has exactly `k`
/// distinct entries.
pub fn select_cluster_heads(
    topo: &Topology,
    k: usize,
    weights: &FitnessWeights,
    mode: FitnessMode,
    abc: &AbcParams,
    warm_start: Option<&[usize]>,
) -> Result<HeadSelection> {
    if k == 0 {
        return Err(Error::InvalidValue("at least one cluster head is required".into()));
    }
    if k > topo.len() {
        return Err(Error::TooManyHeads {
            requested: k,
            alive: topo.len(),
        });
    }
    let problem = ChSelectProblem {
        topo,
        weights,
        mode,
        encoding: IndexEncoding::new(k, topo.len()),
        is_head: RefCell::new(vec![false; topo.len()]),
        sizes: RefCell::new(Vec::with_capacity(topo.len())),
    };
    let seeds: Vec<Vec<usize>> = warm_start.map(|w| vec![w.to_vec()]).unwrap_or_default();
    let out = run_abc_with(&problem, abc, &seeds, |_| {})?;
    let asg = topo.assign_heads(&out.best.solution);
    let mut heads: Vec<NodeId> = out.best.solution.iter().map(|&l| topo.id(l)).collect();
    heads.sort_unstable();
    Ok(HeadSelection {
        clusters: asg.to_cluster_set(topo),
        heads,
        cost: out.best.cost,
        history: out.history,
    })
}
