//! Replicated scenarios and the sweeps built on them.
//!
//! Every job (one replicate of one sweep point) runs in its own engine, so
//! jobs can be spread over threads and merged back by index.

use serde::Serialize;

use crate::config::{Protocol, ScenarioConfig};
use crate::engine::{first_clustering, run_replicate};
use crate::error::Result;
use crate::metrics::{mean, RoundFamily, ScenarioSeries};

/// How independent jobs are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Thread pool when built with the `parallel` feature, otherwise the
    /// same as `Sequential`.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Applies `f` to `0..jobs`, returning results in index order.
pub fn map_jobs<T, F>(jobs: usize, exec: Exec, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..jobs).into_par_iter().map(f).collect()
        }
        _ => (0..jobs).map(f).collect(),
    }
}

/// Seed of replicate `index`.
pub fn replicate_seed(cfg: &ScenarioConfig, index: usize) -> u64 {
    cfg.seed.wrapping_add(index as u64)
}

pub fn run_scenario(cfg: &ScenarioConfig, exec: Exec) -> Result<ScenarioSeries> {
    cfg.validate()?;
    let replicates = map_jobs(cfg.replicates, exec, |i| run_replicate(cfg, replicate_seed(cfg, i)))?;
    Ok(ScenarioSeries { replicates })
}

/// Runs several configurations as one job pool; results follow `configs`.
pub fn run_many(configs: &[ScenarioConfig], exec: Exec) -> Result<Vec<ScenarioSeries>> {
    for cfg in configs {
        cfg.validate()?;
    }
    let offsets: Vec<usize> = configs
        .iter()
        .scan(0, |acc, c| {
            let start = *acc;
            *acc += c.replicates;
            Some(start)
        })
        .collect();
    let total: usize = configs.iter().map(|c| c.replicates).sum();
    let locate = |job: usize| {
        let point = offsets.partition_point(|&o| o <= job) - 1;
        (point, job - offsets[point])
    };
    let mut runs = map_jobs(total, exec, |job| {
        let (point, rep) = locate(job);
        run_replicate(&configs[point], replicate_seed(&configs[point], rep))
    })?
    .into_iter();
    Ok(configs
        .iter()
        .map(|c| ScenarioSeries {
            replicates: runs.by_ref().take(c.replicates).collect(),
        })
        .collect())
}

/// Head-count estimate of one replicate's round-zero topology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChnumSample {
    pub node_count: usize,
    pub replicate: usize,
    pub seed: u64,
    /// Non-single clusters chosen by the head-count search.
    pub ch_number: usize,
    /// Figures of the deployed clustering after head selection.
    pub single_clusters: usize,
    pub avg_cluster_size: f64,
    /// Figures of the head-count search's own layout.
    pub layout_single_clusters: usize,
    pub layout_avg_cluster_size: f64,
}

/// Replicate means for one node count, in the layout of the head-count table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChnumRow {
    pub node_count: usize,
    pub ch_number: f64,
    pub single_clusters: f64,
    pub avg_cluster_size: f64,
    pub layout_single_clusters: f64,
    pub layout_avg_cluster_size: f64,
}

impl ChnumRow {
    pub fn from_samples(node_count: usize, samples: &[ChnumSample]) -> Self {
        let avg = |f: fn(&ChnumSample) -> f64| mean(&samples.iter().map(f).collect::<Vec<_>>());
        Self {
            node_count,
            ch_number: avg(|s| s.ch_number as f64),
            single_clusters: avg(|s| s.single_clusters as f64),
            avg_cluster_size: avg(|s| s.avg_cluster_size),
            layout_single_clusters: avg(|s| s.layout_single_clusters as f64),
            layout_avg_cluster_size: avg(|s| s.layout_avg_cluster_size),
        }
    }
}

/// Round-zero clustering statistics for each node count.
pub fn chnum(cfg: &ScenarioConfig, node_counts: &[usize], exec: Exec) -> Result<Vec<ChnumSample>> {
    cfg.validate()?;
    let reps = cfg.replicates;
    map_jobs(node_counts.len() * reps, exec, |job| {
        let (node_count, replicate) = (node_counts[job / reps], job % reps);
        let point = ScenarioConfig {
            node_count,
            ..cfg.clone()
        };
        let seed = replicate_seed(&point, replicate);
        let c = first_clustering(&point, seed)?;
        let deployed = c.clusters();
        Ok(ChnumSample {
            node_count,
            replicate,
            seed,
            ch_number: c.estimate.k_nonsingle,
            single_clusters: deployed.single_count(),
            avg_cluster_size: deployed.avg_cluster_size(),
            layout_single_clusters: c.estimate.single_count,
            layout_avg_cluster_size: c.estimate.avg_cluster_size(),
        })
    })
}

pub fn chnum_rows(node_counts: &[usize], samples: &[ChnumSample]) -> Vec<ChnumRow> {
    node_counts
        .iter()
        .map(|&n| {
            let at: Vec<ChnumSample> = samples.iter().filter(|s| s.node_count == n).copied().collect();
            ChnumRow::from_samples(n, &at)
        })
        .collect()
}

/// Replicate means of one scenario, flattened for tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub protocol: Protocol,
    pub node_count: usize,
    pub replicates: usize,
    pub energy_per_node_j: f64,
    /// Mean first-death time; survivors enter at their simulated time.
    pub lifetime_s: f64,
    pub survived: usize,
    pub single_clusters_per_round: f64,
    pub ch_residual_per_round: f64,
    pub avg_cluster_size_per_round: f64,
}

impl ScenarioSummary {
    pub fn new(cfg: &ScenarioConfig, series: &ScenarioSeries) -> Self {
        Self {
            protocol: cfg.protocol,
            node_count: cfg.node_count,
            replicates: series.replicates.len(),
            energy_per_node_j: series.mean_energy_per_node(),
            lifetime_s: series.mean_lifetime(),
            survived: series.survivors(),
            single_clusters_per_round: mean(&series.family_mean(RoundFamily::SingleClusters)),
            ch_residual_per_round: mean(&series.family_mean(RoundFamily::ChResidual)),
            avg_cluster_size_per_round: mean(&series.family_mean(RoundFamily::AvgClusterSize)),
        }
    }
}

/// One protocol at one node count.
#[derive(Debug, Clone)]
pub struct ComparePoint {
    pub config: ScenarioConfig,
    pub series: ScenarioSeries,
}

impl ComparePoint {
    pub fn summary(&self) -> ScenarioSummary {
        ScenarioSummary::new(&self.config, &self.series)
    }
}

/// Every protocol at every node count, protocol-major.
pub fn compare(
    cfg: &ScenarioConfig,
    protocols: &[Protocol],
    node_counts: &[usize],
    exec: Exec,
) -> Result<Vec<ComparePoint>> {
    let configs: Vec<ScenarioConfig> = protocols
        .iter()
        .flat_map(|&protocol| {
            node_counts.iter().map(move |&node_count| ScenarioConfig {
                protocol,
                node_count,
                ..cfg.clone()
            })
        })
        .collect();
    let series = run_many(&configs, exec)?;
    Ok(configs
        .into_iter()
        .zip(series)
        .map(|(config, series)| ComparePoint { config, series })
        .collect())
}

/// One axis of a sweep grid: a dotted key and the raw values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

impl std::str::FromStr for Axis {
    type Err = crate::error::Error;

    /// Parses `key=v1,v2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (key, values) = s
            .split_once('=')
            .ok_or_else(|| crate::error::Error::Parse(format!("axis `{s}` is not of the form key=v1,v2")))?;
        let values: Vec<String> = values
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if key.trim().is_empty() || values.is_empty() {
            return Err(crate::error::Error::Parse(format!(
                "axis `{s}` needs a key and at least one value"
            )));
        }
        Ok(Axis {
            key: key.trim().to_string(),
            values,
        })
    }
}

/// A grid point: the axis settings applied and the scenario it produced.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub settings: Vec<(String, String)>,
    pub point: ComparePoint,
}

/// Cartesian product of `axes` over `cfg`, first axis varying slowest.
pub fn sweep(cfg: &ScenarioConfig, axes: &[Axis], exec: Exec) -> Result<Vec<SweepPoint>> {
    let mut grid: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in axes {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut s = prefix.clone();
                    s.push((axis.key.clone(), v.clone()));
                    s
                })
            })
            .collect();
    }
    let configs = grid
        .iter()
        .map(|settings| settings.iter().try_fold(cfg.clone(), |c, (k, v)| c.with_override(k, v)))
        .collect::<Result<Vec<_>>>()?;
    let series = run_many(&configs, exec)?;
    Ok(grid
        .into_iter()
        .zip(configs.into_iter().zip(series))
        .map(|(settings, (config, series))| SweepPoint {
            settings,
            point: ComparePoint { config, series },
        })
        .collect())
}

/// Parses `a..b:step` (inclusive) or a comma list into node counts.
pub fn parse_node_range(text: &str) -> Result<Vec<usize>> {
    let bad = || crate::error::Error::Parse(format!("node range `{text}` is not `start..end:step` or a comma list"));
    if let Some((range, step)) = text.split_once(':') {
        let (a, b) = range.split_once("..").ok_or_else(bad)?;
        let (a, b, step): (usize, usize, usize) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
            step.trim().parse().map_err(|_| bad())?,
        );
        if step == 0 || a == 0 || b < a {
            return Err(bad());
        }
        return Ok((a..=b).step_by(step).collect());
    }
    let list: Vec<usize> = text
        .split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    if list.is_empty() || list.contains(&0) {
        return Err(bad());
    }
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ScenarioConfig {
        ScenarioConfig {
            node_count: 20,
            sim_duration: 1200.0,
            lifetime_horizon: 0.0,
            replicates: 3,
            ..Default::default()
        }
    }

    #[test]
    fn node_ranges() {
        assert_eq!(
            parse_node_range("30..270:30").unwrap(),
            vec![30, 60, 90, 120, 150, 180, 210, 240, 270]
        );
        assert_eq!(parse_node_range("20..180:20").unwrap().len(), 9);
        assert_eq!(parse_node_range("5, 7").unwrap(), vec![5, 7]);
        for bad in ["", "10..5:1", "1..5:0", "a", "0,3"] {
            assert!(parse_node_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn axis_parsing() {
        let a: Axis = "sep.alpha=2,3".parse().unwrap();
        assert_eq!(a.key, "sep.alpha");
        assert_eq!(a.values, vec!["2", "3"]);
        assert!("sep.alpha".parse::<Axis>().is_err());
        assert!("=1".parse::<Axis>().is_err());
    }

    #[test]
    fn single_replicate_passes_through() {
        let cfg = ScenarioConfig {
            replicates: 1,
            ..quick()
        };
        let s = run_scenario(&cfg, Exec::Sequential).unwrap();
        let direct = run_replicate(&cfg, cfg.seed).unwrap();
        assert_eq!(s.replicates.len(), 1);
        assert_eq!(s.replicates[0].rounds, direct.rounds);
        assert_eq!(
            s.family_mean(RoundFamily::SingleClusters),
            s.family(RoundFamily::SingleClusters)[0]
        );
    }

    #[test]
    fn parallel_matches_sequential() {
        let cfg = quick();
        let a = compare(&cfg, &[Protocol::BeeCup, Protocol::Leach], &[15, 25], Exec::Sequential).unwrap();
        let b = compare(&cfg, &[Protocol::BeeCup, Protocol::Leach], &[15, 25], Exec::Parallel).unwrap();
        assert_eq!(a.len(), 4);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.config, y.config);
            for (r, s) in x.series.replicates.iter().zip(&y.series.replicates) {
                assert_eq!(r.rounds, s.rounds);
                assert_eq!(r.seed, s.seed);
            }
        }
        assert_eq!(a[1].config.node_count, 25);
        assert_eq!(a[2].config.protocol, Protocol::Leach);
    }

    #[test]
    fn chnum_matches_first_round() {
        let cfg = ScenarioConfig {
            replicates: 2,
            ..quick()
        };
        let samples = chnum(&cfg, &[20], Exec::Sequential).unwrap();
        for s in &samples {
            let run = run_replicate(
                &ScenarioConfig {
                    node_count: 20,
                    ..cfg.clone()
                },
                s.seed,
            )
            .unwrap();
            assert_eq!(run.rounds[0].single_clusters, s.single_clusters);
            assert_eq!(run.rounds[0].avg_cluster_size, s.avg_cluster_size);
        }
        let rows = chnum_rows(&[20], &samples);
        assert_eq!(
            rows[0].ch_number,
            mean(&samples.iter().map(|s| s.ch_number as f64).collect::<Vec<_>>())
        );
    }

    #[test]
    fn sweep_grid_order() {
        let cfg = ScenarioConfig {
            replicates: 1,
            ..quick()
        };
        let axes = vec![
            "node_count=10,12".parse().unwrap(),
            "protocol=leach,sep".parse().unwrap(),
        ];
        let pts = sweep(&cfg, &axes, Exec::default()).unwrap();
        let got: Vec<(usize, Protocol)> = pts
            .iter()
            .map(|p| (p.point.config.node_count, p.point.config.protocol))
            .collect();
        assert_eq!(
            got,
            vec![
                (10, Protocol::Leach),
                (10, Protocol::Sep),
                (12, Protocol::Leach),
                (12, Protocol::Sep)
            ]
        );
        assert!(sweep(&cfg, &["nope=1".parse().unwrap()], Exec::Sequential).is_err());
    }
}
