//! Command-line front end: head-count tables, single scenarios, protocol
//! comparisons and configuration sweeps, all written as CSV.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beecup::config::known_keys;
use beecup::experiments::{self, Axis, Exec};
use beecup::geometry::RegionKind;
use beecup::metrics::write_rows;
use beecup::{Error, Protocol, ScenarioConfig};
use clap::{Args, Parser, Subcommand};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "BEECUP_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "beecup-out";

#[derive(Parser, Debug)]
#[command(
    name = "beecup",
    version,
    about = "Bee-colony clustering simulator with LEACH and SEP baselines",
    after_help = "Any configuration key can be set as a long flag of the same dotted name, e.g. `--sep.alpha 3` or `--abc.mcn=500`."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: $BEECUP_OUT_DIR or ./beecup-out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run replicates on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Head-count table: clusters found on fresh topologies per node count.
    Chnum {
        #[command(flatten)]
        common: Common,
        /// Node counts as `start..end:step` or a comma list [default: the region's sweep].
        #[arg(long)]
        nodes: Option<String>,
    },
    /// One scenario with per-round series.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Protocols side by side over node counts.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Node counts as `start..end:step` or a comma list [default: the region's sweep].
        #[arg(long)]
        nodes: Option<String>,
        /// Comma list of protocols.
        #[arg(long, default_value = "beecup,leach")]
        protocols: String,
        /// Also write the per-round series of every point.
        #[arg(long)]
        series: bool,
    },
    /// Grid over configuration keys.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `key=v1,v2,..`; repeat for a multi-axis grid.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Chnum { common, .. }
            | Command::Run { common }
            | Command::Compare { common, .. }
            | Command::Sweep { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Chnum { .. } => "chnum",
            Command::Run { .. } => "run",
            Command::Compare { .. } => "compare",
            Command::Sweep { .. } => "sweep",
        }
    }
}

/// Pulls `--dotted.key value` and `--key=value` flags naming configuration
/// keys out of `args`, leaving the rest for clap. Flags with a dot that are
/// not configuration keys are kept as overrides so loading reports them.
fn split_overrides(args: Vec<String>) -> (Vec<String>, Vec<(String, String)>) {
    let keys = known_keys();
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        if !(keys.contains(&name) || name.contains('.')) {
            rest.push(arg);
            continue;
        }
        match inline.or_else(|| it.next()) {
            Some(value) => overrides.push((name, value)),
            None => rest.push(arg),
        }
    }
    (rest, overrides)
}

fn default_nodes(region: RegionKind) -> &'static str {
    match region {
        RegionKind::Rect80 => "30..270:30",
        RegionKind::Classroom => "20..180:20",
    }
}

fn out_dir(common: &Common, command: &str) -> PathBuf {
    let base = common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    base.join(command)
}

fn write_config(dir: &Path, cfg: &ScenarioConfig) -> beecup::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("config.toml");
    std::fs::write(&path, cfg.to_toml_string()).map_err(|e| Error::io(&path, e))
}

fn parse_protocols(list: &str) -> beecup::Result<Vec<Protocol>> {
    list.split(',').map(|p| p.trim().parse()).collect()
}

fn run(cli: Cli, overrides: &[(String, String)]) -> beecup::Result<()> {
    let common = cli.command.common();
    let cfg = ScenarioConfig::load(common.config.as_deref(), overrides)?;
    let exec = if common.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    let dir = out_dir(common, cli.command.name());
    write_config(&dir, &cfg)?;

    match &cli.command {
        Command::Chnum { nodes, .. } => {
            let counts = experiments::parse_node_range(nodes.as_deref().unwrap_or(default_nodes(cfg.region)))?;
            let samples = experiments::chnum(&cfg, &counts, exec)?;
            let rows = experiments::chnum_rows(&counts, &samples);
            write_rows(&dir.join("chnum.csv"), &rows)?;
            write_rows(&dir.join("chnum_replicates.csv"), &samples)?;
            println!("region {} ({} replicates)", cfg.region.name(), cfg.replicates);
            println!(
                "{:>6} {:>12} {:>12} {:>10}",
                "nodes", "non-single", "single", "avg size"
            );
            for r in &rows {
                println!(
                    "{:>6} {:>12.2} {:>12.2} {:>10.2}",
                    r.node_count, r.ch_number, r.single_clusters, r.avg_cluster_size
                );
            }
        }
        Command::Run { .. } => {
            let series = experiments::run_scenario(&cfg, exec)?;
            series.write_csv(&dir)?;
            let s = experiments::ScenarioSummary::new(&cfg, &series);
            println!(
                "{} in {} with {} nodes, {} replicates",
                cfg.protocol,
                cfg.region.name(),
                cfg.node_count,
                cfg.replicates
            );
            println!(
                "energy per node over {} s: {:.1} J",
                cfg.sim_duration, s.energy_per_node_j
            );
            println!(
                "first death: {:.0} s ({} replicates survived)",
                s.lifetime_s, s.survived
            );
            println!("single clusters per round: {:.2}", s.single_clusters_per_round);
            println!("head residual per round: {:.1} J", s.ch_residual_per_round);
        }
        Command::Compare {
            nodes,
            protocols,
            series,
            ..
        } => {
            let counts = experiments::parse_node_range(nodes.as_deref().unwrap_or(default_nodes(cfg.region)))?;
            let protocols = parse_protocols(protocols)?;
            let points = experiments::compare(&cfg, &protocols, &counts, exec)?;
            let summaries: Vec<_> = points.iter().map(|p| p.summary()).collect();
            write_rows(&dir.join("compare_summary.csv"), &summaries)?;
            write_wide(&dir.join("lifetime.csv"), &protocols, &counts, &summaries, |s| {
                s.lifetime_s
            })?;
            write_wide(&dir.join("energy.csv"), &protocols, &counts, &summaries, |s| {
                s.energy_per_node_j
            })?;
            if *series {
                for p in &points {
                    let sub = dir.join(format!("{}_n{}", p.config.protocol, p.config.node_count));
                    p.series.write_csv(&sub)?;
                }
            }
            println!(
                "{:>8} {:>6} {:>12} {:>12} {:>8}",
                "protocol", "nodes", "energy J", "lifetime s", "singles"
            );
            for s in &summaries {
                println!(
                    "{:>8} {:>6} {:>12.1} {:>12.0} {:>8.2}",
                    s.protocol.name(),
                    s.node_count,
                    s.energy_per_node_j,
                    s.lifetime_s,
                    s.single_clusters_per_round
                );
            }
        }
        Command::Sweep { axes, .. } => {
            let axes: Vec<Axis> = axes.iter().map(|a| a.parse()).collect::<beecup::Result<_>>()?;
            let points = experiments::sweep(&cfg, &axes, exec)?;
            let path = dir.join("sweep.csv");
            let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
            let mut header: Vec<String> = axes.iter().map(|a| a.key.clone()).collect();
            header.extend(
                [
                    "energy_per_node_j",
                    "lifetime_s",
                    "survived",
                    "single_clusters_per_round",
                    "ch_residual_per_round",
                ]
                .map(String::from),
            );
            w.write_record(&header).map_err(|e| csv_err(&path, e))?;
            for p in &points {
                let s = p.point.summary();
                let mut row: Vec<String> = p.settings.iter().map(|(_, v)| v.clone()).collect();
                row.extend([
                    s.energy_per_node_j.to_string(),
                    s.lifetime_s.to_string(),
                    s.survived.to_string(),
                    s.single_clusters_per_round.to_string(),
                    s.ch_residual_per_round.to_string(),
                ]);
                w.write_record(&row).map_err(|e| csv_err(&path, e))?;
                let label: Vec<String> = p.settings.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!(
                    "{:<40} energy {:>9.1} J  lifetime {:>7.0} s  singles {:>6.2}",
                    label.join(" "),
                    s.energy_per_node_j,
                    s.lifetime_s,
                    s.single_clusters_per_round
                );
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source: e,
    }
}

/// One row per node count, one column per protocol.
fn write_wide(
    path: &Path,
    protocols: &[Protocol],
    counts: &[usize],
    summaries: &[experiments::ScenarioSummary],
    value: fn(&experiments::ScenarioSummary) -> f64,
) -> beecup::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["node_count".to_string()];
    header.extend(protocols.iter().map(|p| p.name().to_string()));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for &n in counts {
        let mut row = vec![n.to_string()];
        for &p in protocols {
            let s = summaries.iter().find(|s| s.protocol == p && s.node_count == n);
            row.push(s.map(|s| value(s).to_string()).unwrap_or_default());
        }
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn main() -> ExitCode {
    let (args, overrides) = split_overrides(std::env::args().collect());
    let cli = Cli::parse_from(args);
    match run(cli, &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
