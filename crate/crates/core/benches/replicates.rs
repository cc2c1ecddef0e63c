//! Replicate throughput on one thread versus the thread pool.

use beecup::experiments::{run_scenario, Exec};
use beecup::{Protocol, ScenarioConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn replicates(c: &mut Criterion) {
    let mut group = c.benchmark_group("replicates");
    group.sample_size(10);
    for protocol in [Protocol::BeeCup, Protocol::Leach] {
        let cfg = ScenarioConfig {
            protocol,
            node_count: 90,
            replicates: 8,
            sim_duration: 3600.0,
            lifetime_horizon: 0.0,
            ..Default::default()
        };
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(
                BenchmarkId::new(protocol.name(), format!("{exec:?}")),
                &cfg,
                |b, cfg| b.iter(|| run_scenario(cfg, exec).unwrap()),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, replicates);
criterion_main!(benches);
