use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn beecup(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beecup"))
        .args(args)
        .env("BEECUP_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

#[test]
fn chnum_writes_one_row_per_node_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = beecup(&["chnum", "--nodes", "30..90:30", "--replicates", "2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("chnum/chnum.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("node_count,ch_number,single_clusters,avg_cluster_size"));
    assert!(lines[1].starts_with("30,"));
    assert!(dir.path().join("chnum/config.toml").exists());
}

#[test]
fn run_applies_dotted_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = beecup(
        &[
            "run",
            "--protocol",
            "sep",
            "--sep.alpha",
            "3",
            "--node_count=30",
            "--replicates",
            "2",
            "--sim_duration",
            "1200",
            "--lifetime_horizon",
            "0",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = fs::read_to_string(dir.path().join("run/config.toml")).unwrap();
    assert!(cfg.contains("protocol = \"sep\""));
    assert!(cfg.contains("alpha = 3.0"));
    let energy = fs::read_to_string(dir.path().join("run/energy_per_alive.csv")).unwrap();
    assert_eq!(energy.lines().count(), 3);
    let ledger = fs::read_to_string(dir.path().join("run/ledger.csv")).unwrap();
    // Six advanced nodes per replicate carry four times the energy.
    assert_eq!(
        ledger
            .lines()
            .skip(1)
            .filter(|l| l.split(',').nth(2).and_then(|v| v.parse::<f64>().ok()) == Some(40_000.0))
            .count(),
        12
    );
}

#[test]
fn compare_emits_per_protocol_lifetimes() {
    let dir = tempfile::tempdir().unwrap();
    let o = beecup(
        &[
            "compare",
            "--region",
            "classroom",
            "--nodes",
            "20,40",
            "--protocols",
            "beecup,leach",
            "--replicates",
            "2",
            "--abc.mcn",
            "40",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let life = fs::read_to_string(dir.path().join("compare/lifetime.csv")).unwrap();
    let lines: Vec<&str> = life.lines().collect();
    assert_eq!(lines[0], "node_count,beecup,leach");
    assert_eq!(lines.len(), 3);
}

#[test]
fn sweep_covers_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = beecup(
        &[
            "sweep",
            "--axis",
            "protocol=leach,sep",
            "--axis",
            "node_count=20,30",
            "--replicates",
            "1",
            "--sim_duration",
            "600",
            "--lifetime_horizon",
            "0",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("protocol,node_count,energy_per_node_j"));
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("sep,30,"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "--weights.dist", "0.9"],
        vec!["run", "--tiny_period", "70"],
        vec!["run", "--protocol", "pso"],
        vec!["run", "--no.such", "1"],
    ] {
        let o = beecup(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let o = beecup(&["run", "--replicates", "1", "--sim_duration", "600"], &blocker);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn out_flag_beats_environment() {
    let (env_dir, flag_dir) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o = beecup(
        &[
            "run",
            "--out",
            flag_dir.path().to_str().unwrap(),
            "--replicates",
            "1",
            "--sim_duration",
            "600",
            "--node_count",
            "10",
        ],
        env_dir.path(),
    );
    assert!(o.status.success());
    assert!(flag_dir.path().join("run/lifetime.csv").exists());
    assert!(!env_dir.path().join("run").exists());
}
