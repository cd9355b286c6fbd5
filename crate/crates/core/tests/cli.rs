use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use opnet::cli::FileConfig;

const SMALL: &str = r#"
seed = 11

[network]
n = 30
gamma = 6.0        # γ
alpha = 0.01       # α
d_rate = 20.0      # D

[opinion]
lambda = 0.01
beta = 1.0
delta = 0.4

[control]
w_d = 0.8
nu = 5.0
kappa = 0.1
c_star = 6

[sim]
tf = 2.0
dt = 0.01
snapshot_times = [0.0, 1.0]
output_every = 10

[degree_dist]
graphs = 20
times = [10.0, 40.0]
pool_from = 40.0
"#;

fn opnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opnet")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run_in(dir: &Path, cmd: &str, config: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.join(format!("out-{cmd}-{}", extra.join("-").replace(',', "_")));
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (opnet(&args), out)
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

fn listed_files(out: &Path) -> Vec<String> {
    let m = manifest(out);
    m["files"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect()
}

#[test]
fn every_command_writes_a_complete_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    for (cmd, extra) in [("simulate", vec![]), ("degree-dist", vec![]), ("sweep", vec!["--c-star", "4,6,8"])] {
        let (output, out) = run_in(tmp.path(), cmd, &config, &extra);
        assert!(output.status.success(), "{cmd}: {}", String::from_utf8_lossy(&output.stderr));
        let m = manifest(&out);
        assert_eq!(m["status"], "complete");
        assert_eq!(m["seed"], 11);
        assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
        // no orphans, no missing files
        let mut on_disk: Vec<String> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|f| f != "manifest.json")
            .collect();
        on_disk.sort();
        let mut listed = listed_files(&out);
        listed.sort();
        assert_eq!(on_disk, listed, "{cmd}");
    }
}

#[test]
fn simulate_outputs_have_expected_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let (output, out) = run_in(tmp.path(), "simulate", &config, &[]);
    assert!(output.status.success());
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = traj.lines().collect();
    assert_eq!(lines[0], "t,u,consensus,controlled_fraction,w_min,w_max,w_mean");
    assert_eq!(lines.len(), 1 + 21);
    assert!(!traj.contains('\r'));
    let opinions = fs::read_to_string(out.join("opinions.csv")).unwrap();
    assert_eq!(opinions.lines().next().unwrap().split(',').count(), 31);
    let snap: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("snapshot_001.json")).unwrap()).unwrap();
    assert_eq!(snap["time"], 1.0);
    assert_eq!(snap["nodes"].as_array().unwrap().len(), 30);
    assert_eq!(snap["edges"].as_array().unwrap().len(), 90);
}

#[test]
fn degree_dist_reports_all_four_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let (output, out) = run_in(tmp.path(), "degree-dist", &config, &[]);
    assert!(output.status.success());
    for f in ["mc_histogram.csv", "master.csv", "power_law.csv", "poisson.csv", "summary.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert!(rows[0].starts_with("observation,t,samples,tv_mc_master"));
    assert_eq!(rows.iter().filter(|r| r.starts_with("snapshot")).count(), 2);
    assert_eq!(rows.iter().filter(|r| r.starts_with("pooled")).count(), 1);
    // mass is conserved exactly; the mean only up to what leaks into the
    // truncation boundary at c = E
    for r in rows.iter().filter(|r| r.starts_with("snapshot")) {
        let cells: Vec<&str> = r.split(',').collect();
        let mass: f64 = cells[7].parse().unwrap();
        let mean: f64 = cells[8].parse().unwrap();
        assert!((mass - 1.0).abs() < 1e-10 && (mean - 6.0).abs() < 1e-2);
    }
}

#[test]
fn stationary_only_outputs_without_times() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("times = [10.0, 40.0]\npool_from = 40.0", "");
    let config = write_config(tmp.path(), &text);
    let (output, out) = run_in(tmp.path(), "degree-dist", &config, &[]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert_eq!(fs::read_to_string(out.join("mc_histogram.csv")).unwrap(), "t,c,p\n");
    assert_eq!(fs::read_to_string(out.join("power_law.csv")).unwrap().lines().count(), 1 + 91);
}

#[test]
fn single_threshold_sweep_equals_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let (_, sim) = run_in(tmp.path(), "simulate", &config, &[]);
    let (output, sweep) = run_in(tmp.path(), "sweep", &config, &["--c-star", "6"]);
    assert!(output.status.success());
    let table = fs::read_to_string(sweep.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    let controls = fs::read_to_string(sweep.join("controls.csv")).unwrap();
    let from_sweep: Vec<&str> = controls.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    let traj = fs::read_to_string(sim.join("trajectory.csv")).unwrap();
    let from_sim: Vec<&str> = traj.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    // the trajectory keeps every 10th row
    for (k, u) in from_sim.iter().enumerate() {
        assert_eq!(*u, from_sweep[k * 10]);
    }
    let final_v = table.lines().nth(1).unwrap().split(',').nth(2).unwrap();
    assert_eq!(final_v, traj.lines().last().unwrap().split(',').nth(2).unwrap());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        let status = opnet(&["sweep", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--c-star", "4,8"]).status;
        assert!(status.success());
    }
    for f in listed_files(&a) {
        assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_flag_overrides_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let (_, plain) = run_in(tmp.path(), "simulate", &config, &[]);
    let (output, seeded) = run_in(tmp.path(), "simulate", &config, &["--seed", "12"]);
    assert!(output.status.success());
    assert_eq!(manifest(&seeded)["seed"], 12);
    assert_ne!(manifest(&plain)["config_sha256"], manifest(&seeded)["config_sha256"]);
    assert!(fs::read_to_string(seeded.join("config.toml")).unwrap().contains("seed = 12"));
    assert_ne!(
        fs::read(plain.join("opinions.csv")).unwrap(),
        fs::read(seeded.join("opinions.csv")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.toml");
    let out = opnet(&["simulate", "--config", missing.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toml"));

    let bad = write_config(tmp.path(), &SMALL.replace("tf = 2.0", "t0 = 3.0\ntf = 2.0"));
    let (out, _) = run_in(tmp.path(), "simulate", &bad, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tf"));

    let unknown = write_config(tmp.path(), &SMALL.replace("gamma = 6.0", "gamma = 6.0\ngama = 1.0"));
    let (out, _) = run_in(tmp.path(), "simulate", &unknown, &[]);
    assert_eq!(out.status.code(), Some(2));

    let out = opnet(&["sweep", "--config", "x.toml"]);
    assert_eq!(out.status.code(), Some(2));

    let unstable = write_config(tmp.path(), &SMALL.replace("pool_from = 40.0", "pool_from = 40.0\nmaster_dt = 1000.0"));
    let (out, dir) = run_in(tmp.path(), "degree-dist", &unstable, &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(manifest(&dir)["status"], "failed");

    let good = write_config(tmp.path(), SMALL);
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let target = blocker.join("sub");
    let out = opnet(&["simulate", "--config", good.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bundled_configs_parse_and_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = FileConfig::load(&path).unwrap();
        assert_eq!(FileConfig::parse(&cfg.to_toml()).unwrap(), cfg, "{}", path.display());
        if cfg.sim.is_some() {
            cfg.sim_config().unwrap();
        }
        if cfg.degree_dist.is_some() {
            cfg.degree_config().unwrap();
        }
        seen += 1;
    }
    assert!(seen >= 5);
}
