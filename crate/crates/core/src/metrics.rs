//! Aggregation of replicate runs and CSV output.
//!
//! Per-round families are written one file each, with a `round_index` column,
//! one column per replicate and a trailing `mean`. Numbers use the shortest
//! representation that round-trips, so identical runs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::engine::{RoundMetrics, RunResult};
use crate::error::{Error, Result};

/// Placeholder written where a replicate saw no death.
pub const SURVIVED: &str = "survived";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundFamily {
    EnergyPerAlive,
    ChResidual,
    SingleClusters,
    NonSingleClusters,
    AvgClusterSize,
    Alive,
}

impl RoundFamily {
    pub const ALL: [RoundFamily; 6] = [
        RoundFamily::EnergyPerAlive,
        RoundFamily::ChResidual,
        RoundFamily::SingleClusters,
        RoundFamily::NonSingleClusters,
        RoundFamily::AvgClusterSize,
        RoundFamily::Alive,
    ];

    /// File stem of the family's CSV.
    pub fn name(&self) -> &'static str {
        match self {
            RoundFamily::EnergyPerAlive => "energy_per_alive",
            RoundFamily::ChResidual => "ch_residual",
            RoundFamily::SingleClusters => "single_clusters",
            RoundFamily::NonSingleClusters => "non_single_clusters",
            RoundFamily::AvgClusterSize => "avg_cluster_size",
            RoundFamily::Alive => "alive",
        }
    }

    pub fn value(&self, m: &RoundMetrics) -> f64 {
        match self {
            RoundFamily::EnergyPerAlive => m.energy_per_alive,
            RoundFamily::ChResidual => m.ch_residual,
            RoundFamily::SingleClusters => m.single_clusters as f64,
            RoundFamily::NonSingleClusters => m.non_single_clusters as f64,
            RoundFamily::AvgClusterSize => m.avg_cluster_size,
            RoundFamily::Alive => m.alive as f64,
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Replicate runs of one scenario, in replicate order.
#[derive(Debug, Clone)]
pub struct ScenarioSeries {
    pub replicates: Vec<RunResult>,
}

impl ScenarioSeries {
    pub fn round_count(&self) -> usize {
        self.replicates.iter().map(|r| r.rounds.len()).max().unwrap_or(0)
    }

    /// `[replicate][round]` values of one family.
    pub fn family(&self, family: RoundFamily) -> Vec<Vec<f64>> {
        self.replicates
            .iter()
            .map(|r| r.rounds.iter().map(|m| family.value(m)).collect())
            .collect()
    }

    /// Per-round mean across replicates.
    pub fn family_mean(&self, family: RoundFamily) -> Vec<f64> {
        let cols = self.family(family);
        (0..self.round_count())
            .map(|i| mean(&cols.iter().filter_map(|c| c.get(i).copied()).collect::<Vec<_>>()))
            .collect()
    }

    pub fn energy_per_node(&self) -> Vec<f64> {
        self.replicates.iter().map(|r| r.energy_per_node).collect()
    }

    pub fn mean_energy_per_node(&self) -> f64 {
        mean(&self.energy_per_node())
    }

    /// First-death time per replicate; survivors count as the time they were
    /// simulated to, which bounds their lifetime from below.
    pub fn lifetimes(&self) -> Vec<f64> {
        self.replicates
            .iter()
            .map(|r| r.first_death.unwrap_or(r.simulated_until))
            .collect()
    }

    pub fn mean_lifetime(&self) -> f64 {
        mean(&self.lifetimes())
    }

    pub fn survivors(&self) -> usize {
        self.replicates.iter().filter(|r| r.first_death.is_none()).count()
    }

    pub fn max_conservation_error(&self) -> f64 {
        self.replicates
            .iter()
            .map(RunResult::conservation_error)
            .fold(0.0, f64::max)
    }

    pub fn violations(&self) -> usize {
        self.replicates.iter().map(|r| r.violations.len()).sum()
    }

    /// Writes every per-round family, `lifetime.csv` and `ledger.csv` into
    /// `dir`, creating it if needed. Returns the files written.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for family in RoundFamily::ALL {
            let path = dir.join(format!("{}.csv", family.name()));
            write_round_family(&path, &self.family(family))?;
            written.push(path);
        }
        let path = dir.join("lifetime.csv");
        self.write_lifetime(&path)?;
        written.push(path);
        let path = dir.join("ledger.csv");
        self.write_ledger(&path)?;
        written.push(path);
        Ok(written)
    }

    fn write_lifetime(&self, path: &Path) -> Result<()> {
        let mut w = writer(path)?;
        let mut header = vec!["metric".to_string()];
        header.extend(replicate_columns(self.replicates.len()));
        header.push("mean".into());
        w.write_record(&header).map_err(|e| csv_error(path, e))?;

        let mut row = vec!["first_death_s".to_string()];
        row.extend(self.replicates.iter().map(|r| match r.first_death {
            Some(t) => t.to_string(),
            None => SURVIVED.to_string(),
        }));
        row.push(if self.survivors() == 0 {
            self.mean_lifetime().to_string()
        } else {
            SURVIVED.to_string()
        });
        w.write_record(&row).map_err(|e| csv_error(path, e))?;

        let mut row = vec!["energy_per_node_j".to_string()];
        row.extend(self.energy_per_node().iter().map(f64::to_string));
        row.push(self.mean_energy_per_node().to_string());
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    fn write_ledger(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct LedgerRow {
            replicate: usize,
            node_id: usize,
            initial_j: f64,
            residual_j: f64,
            wlan_active_j: f64,
            wlan_idle_j: f64,
            bt_active_j: f64,
            bt_idle_j: f64,
        }
        let rows = self.replicates.iter().enumerate().flat_map(|(rep, r)| {
            r.nodes.iter().map(move |n| {
                let e = r.ledger.entries[n.id];
                LedgerRow {
                    replicate: rep,
                    node_id: n.id,
                    initial_j: n.initial_energy,
                    residual_j: n.residual_energy,
                    wlan_active_j: e.wlan_active,
                    wlan_idle_j: e.wlan_idle,
                    bt_active_j: e.bt_active,
                    bt_idle_j: e.bt_idle,
                }
            })
        });
        write_rows(path, rows)
    }
}

fn replicate_columns(count: usize) -> impl Iterator<Item = String> {
    (0..count).map(|i| format!("rep_{i}"))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Writes `[replicate][round]` values as `round_index, rep_0.., mean`.
/// Replicates shorter than the longest leave their cells empty.
pub fn write_round_family(path: &Path, columns: &[Vec<f64>]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["round_index".to_string()];
    header.extend(replicate_columns(columns.len()));
    header.push("mean".into());
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    let rounds = columns.iter().map(Vec::len).max().unwrap_or(0);
    for i in 0..rounds {
        let present: Vec<f64> = columns.iter().filter_map(|c| c.get(i).copied()).collect();
        let mut row = vec![i.to_string()];
        row.extend(columns.iter().map(|c| c.get(i).map(f64::to_string).unwrap_or_default()));
        row.push(mean(&present).to_string());
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes serializable rows with a header taken from the field names.
pub fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
