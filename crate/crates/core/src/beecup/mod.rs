//! Two-phase bee-colony clustering and its between-round maintenance.

pub mod fitness;
pub mod maintenance;
pub mod phases;

pub use fitness::{ch_number_cost, ch_select_cost, select_terms, FitnessMode, FitnessWeights, SelectTerms};
pub use maintenance::{ch_shift, rn_adjustment, AdjustParams, EnergyHistory, NeighborChEntry, RnMove, ShiftAction};
pub use phases::{estimate_ch_count, select_cluster_heads, ChCountEstimate, HeadSelection};

use crate::abc::AbcParams;
use crate::error::{Error, Result};
use crate::membership::Topology;
use crate::world::ClusterSet;

/// Everything the clustering step needs besides the network itself.
#[derive(Debug, Clone, PartialEq)]
pub struct BeeCupParams {
    pub weights: FitnessWeights,
    pub mode: FitnessMode,
    pub abc: AbcParams,
    /// Probability of a set bit in fresh head-count layouts.
    pub init_density: f64,
}

impl Default for BeeCupParams {
    fn default() -> Self {
        Self {
            weights: FitnessWeights::default(),
            mode: FitnessMode::default(),
            abc: AbcParams::default(),
            init_density: DEFAULT_INIT_DENSITY,
        }
    }
}

/// Roughly one head per nine nodes to start; the search adds heads where
/// singles remain.
pub const DEFAULT_INIT_DENSITY: f64 = 0.11;

#[derive(Debug, Clone)]
pub struct Clustering {
    pub estimate: ChCountEstimate,
    pub selection: Option<HeadSelection>,
}

impl Clustering {
    /// Final partition: the selected one, or the head-count layout when no
    /// node could form a multi-node cluster.
    pub fn clusters(&self) -> &ClusterSet {
        match &self.selection {
            Some(s) => &s.clusters,
            None => &self.estimate.layout,
        }
    }
}

/// Runs both phases. Phase two searches with seed `seed + 1` and starts from
/// the non-single heads found by phase one.
pub fn cluster(topo: &Topology, params: &BeeCupParams) -> Result<Clustering> {
    params.weights.validate()?;
    if !(0.0..=1.0).contains(&params.init_density) {
        return Err(Error::InvalidValue(format!(
            "init_density must lie in [0, 1], got {}",
            params.init_density
        )));
    }
    let estimate = estimate_ch_count(topo, &params.weights, params.mode, &params.abc, params.init_density)?;
    if estimate.k_nonsingle == 0 {
        return Ok(Clustering {
            estimate,
            selection: None,
        });
    }
    let abc = params.abc.with_seed(params.abc.seed.wrapping_add(1));
    let selection = select_cluster_heads(
        topo,
        estimate.k_nonsingle,
        &params.weights,
        params.mode,
        &abc,
        Some(&estimate.nonsingle_heads),
    )?;
    Ok(Clustering {
        estimate,
        selection: Some(selection),
    })
}
