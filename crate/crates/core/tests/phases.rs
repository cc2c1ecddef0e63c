//! Head-count estimation and head selection on hand-built instances.

use beecup::abc::AbcParams;
use beecup::beecup::{
    ch_select_cost, cluster, estimate_ch_count, select_cluster_heads, BeeCupParams, FitnessMode, FitnessWeights,
};
use beecup::geometry::{Point, Region};
use beecup::membership::Topology;
use beecup::world::{validate_partition, ClusterLimits, Node};
use beecup::Error;
use proptest::prelude::*;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn topo(nodes: &[Node]) -> Topology {
    Topology::from_region(nodes, &Region::rect80(), ClusterLimits::default())
}

fn at(id: usize, x: f64, y: f64) -> Node {
    Node::new(id, Point::new(x, y), 10_000.0)
}

fn quick(seed: u64) -> AbcParams {
    AbcParams {
        mcn: 100,
        seed,
        ..Default::default()
    }
}

#[test]
fn two_groups_get_one_head_each() {
    let nodes = vec![
        at(0, 10.0, 30.0),
        at(1, 12.0, 31.0),
        at(2, 11.0, 33.0),
        at(3, 65.0, 30.0),
        at(4, 67.0, 32.0),
        at(5, 66.0, 29.0),
    ];
    let t = topo(&nodes);
    let w = FitnessWeights::default();
    // Exhaustive scan over all 15 pairs: the optimum splits the groups.
    let mut best = (f64::INFINITY, (0, 0));
    for a in 0..6 {
        for b in a + 1..6 {
            let c = ch_select_cost(&[a, b], &t, &w, FitnessMode::Corrected).unwrap();
            if c < best.0 {
                best = (c, (a, b));
            }
        }
    }
    assert!(best.1 .0 < 3 && best.1 .1 >= 3);

    let sel = select_cluster_heads(&t, 2, &w, FitnessMode::Corrected, &quick(1), None).unwrap();
    assert_eq!(sel.heads.iter().filter(|&&h| h < 3).count(), 1);
    assert_eq!(sel.heads.iter().filter(|&&h| h >= 3).count(), 1);
    assert!((sel.cost - best.0).abs() < 1e-12);
    assert_eq!(sel.clusters.single_count(), 0);
}

#[test]
fn line_selection_beats_random_subsets() {
    let nodes: Vec<Node> = (0..10).map(|i| at(i, 20.0 + 3.0 * i as f64, 25.0)).collect();
    let t = topo(&nodes);
    let w = FitnessWeights::default();
    let sel = select_cluster_heads(&t, 2, &w, FitnessMode::Corrected, &quick(2), None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let pick = index::sample(&mut rng, 10, 2).into_vec();
        let c = ch_select_cost(&pick, &t, &w, FitnessMode::Corrected).unwrap();
        assert!(sel.cost <= c + 1e-12);
    }
}

#[test]
fn every_node_a_head() {
    let nodes: Vec<Node> = (0..8).map(|i| at(i, 10.0 + 2.0 * i as f64, 10.0)).collect();
    let t = topo(&nodes);
    let sel = select_cluster_heads(
        &t,
        8,
        &FitnessWeights::default(),
        FitnessMode::Corrected,
        &quick(3),
        None,
    )
    .unwrap();
    assert_eq!(sel.clusters.single_count(), 8);
    assert!(validate_partition(&sel.clusters, &nodes, &ClusterLimits::default()).is_valid());
}

#[test]
fn selection_rejects_bad_head_counts() {
    let nodes: Vec<Node> = (0..4).map(|i| at(i, 10.0 + i as f64, 10.0)).collect();
    let t = topo(&nodes);
    let w = FitnessWeights::default();
    assert!(matches!(
        select_cluster_heads(&t, 5, &w, FitnessMode::Corrected, &quick(0), None),
        Err(Error::TooManyHeads { requested: 5, alive: 4 })
    ));
    assert!(select_cluster_heads(&t, 0, &w, FitnessMode::Corrected, &quick(0), None).is_err());
}

#[test]
fn lone_node_is_one_single() {
    let nodes = vec![at(0, 40.0, 40.0)];
    let est = estimate_ch_count(
        &topo(&nodes),
        &FitnessWeights::default(),
        FitnessMode::Corrected,
        &quick(4),
        0.5,
    )
    .unwrap();
    assert_eq!(est.k_nonsingle, 0);
    assert_eq!(est.single_count, 1);
    let c = cluster(&topo(&nodes), &BeeCupParams::default()).unwrap();
    assert!(c.selection.is_none());
    assert_eq!(c.clusters().single_count(), 1);
}

#[test]
fn empty_network_is_rejected() {
    let r = estimate_ch_count(
        &topo(&[]),
        &FitnessWeights::default(),
        FitnessMode::Corrected,
        &quick(0),
        0.1,
    );
    assert!(matches!(r, Err(Error::EmptyUniverse)));
}

#[test]
fn dense_field_has_few_singles() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let region = Region::rect80();
    let nodes: Vec<Node> = (0..150)
        .map(|i| Node::new(i, region.sample_point(&mut rng), 10_000.0))
        .collect();
    let t = topo(&nodes);
    let c = cluster(&t, &BeeCupParams::default()).unwrap();
    let cs = c.clusters();
    assert!(validate_partition(cs, &nodes, &ClusterLimits::default()).is_valid());
    assert!(cs.single_count() * 5 < nodes.len());
    assert!(cs.avg_cluster_size() > 4.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn best_so_far_never_rises(seed in 0u64..1000, n in 5usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes: Vec<Node> = (0..n)
            .map(|i| {
                let mut node = at(i, rng.gen_range(10.0..50.0), rng.gen_range(5.0..45.0));
                node.residual_energy = rng.gen_range(100.0..10_000.0);
                node
            })
            .collect();
        let t = topo(&nodes);
        let w = FitnessWeights::default();
        let params = AbcParams { mcn: 40, sn: 8, seed, limit: None };
        let est = estimate_ch_count(&t, &w, FitnessMode::Corrected, &params, 0.2).unwrap();
        prop_assert!(est.history.windows(2).all(|h| h[1] <= h[0]));
        prop_assert!(validate_partition(&est.layout, &nodes, &ClusterLimits::default()).is_valid());
        if est.k_nonsingle > 0 {
            let sel = select_cluster_heads(&t, est.k_nonsingle, &w, FitnessMode::Corrected, &params, Some(&est.nonsingle_heads)).unwrap();
            prop_assert!(sel.history.windows(2).all(|h| h[1] <= h[0]));
            prop_assert!(validate_partition(&sel.clusters, &nodes, &ClusterLimits::default()).is_valid());
            let warm = ch_select_cost(&est.nonsingle_heads, &t, &w, FitnessMode::Corrected).unwrap();
            prop_assert!(sel.cost <= warm + 1e-12);
        }
    }
}
