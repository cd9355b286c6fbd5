//! Acceptance run: one PASS/FAIL line per criterion, with the measured
//! numbers. Exits non-zero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;

use opnet::cli::{self, CommonArgs, Command, FileConfig};
use opnet::control::{horizon_cost, instantaneous_control, mpc_control, ControlConfig, RkTableau};
use opnet::degree_master::{
    integrate_master_at, log_log_slope, stationary_poisson, stationary_power_law, total_variation,
    windowed_total_variation, MasterParams,
};
use opnet::graph::{EdgePolicy, Network};
use opnet::opinion::KernelParams;
use opnet::rng::stream_rng;
use opnet::sim::{run_degree_ensemble, run_simulation, sweep_c_star, InitOpinion};

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn load(name: &str) -> FileConfig {
    FileConfig::load(&config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

struct Report {
    failures: usize,
}

impl Report {
    fn verdict(&mut self, id: &str, title: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {id} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn info(&self, text: String) {
        println!("     {text}");
    }
}

fn power_law_regime(report: &mut Report) {
    let file = load("power_law.toml");
    let dd = file.degree_dist.clone().unwrap();
    let cfg = file.degree_config().unwrap();
    let started = Instant::now();
    let out = run_degree_ensemble(&cfg).unwrap();
    let pooled = out.pooled.as_ref().unwrap();
    let law = stationary_power_law(cfg.rewire.alpha, cfg.gamma, cfg.c_max()).unwrap();
    let [lo, hi] = dd.slope_window;
    let [tlo, thi] = dd.tv_window;
    let slope = log_log_slope(pooled, lo, hi).unwrap_or(f64::NAN);
    let tv = windowed_total_variation(pooled, &law, tlo, thi).unwrap();
    report.verdict(
        "C1",
        "power-law regime",
        (slope + 1.0).abs() <= 0.15 && tv < 0.05,
        format!(
            "slope over [{lo},{hi}] = {slope:.4} (target -1 ± 0.15), TV over [{tlo},{thi}] = {tv:.4} (< 0.05); \
             {} graphs, {} pooled samples from t >= {}, {:.1}s",
            cfg.graphs,
            out.pooled_samples,
            cfg.pool_from.unwrap(),
            started.elapsed().as_secs_f64()
        ),
    );
    for (t, h) in out.times.iter().zip(&out.histograms) {
        if *t == 20_000.0 {
            report.info(format!(
                "single snapshot at t = 50 E/D: slope = {:.4}, TV = {:.4}",
                log_log_slope(h, lo, hi).unwrap_or(f64::NAN),
                windowed_total_variation(h, &law, tlo, thi).unwrap()
            ));
        }
    }
    // the same protocol on simple graphs, for comparison
    let mut simple = cfg.clone();
    simple.edge_policy = EdgePolicy::Simple;
    simple.graphs = 50;
    let s = run_degree_ensemble(&simple).unwrap();
    let sp = s.pooled.as_ref().unwrap();
    let slaw = stationary_power_law(cfg.rewire.alpha, cfg.gamma, simple.c_max()).unwrap();
    report.info(format!(
        "simple-graph policy, same protocol (50 graphs): slope = {:.4}, TV = {:.4}, p(0) = {:.3}",
        log_log_slope(sp, lo, hi).unwrap_or(f64::NAN),
        windowed_total_variation(sp, &slaw, tlo, thi).unwrap(),
        sp.probs()[0]
    ));
}

fn poisson_regime(report: &mut Report) {
    let cfg = load("poisson.toml").degree_config().unwrap();
    let out = run_degree_ensemble(&cfg).unwrap();
    let pooled = out.pooled.as_ref().unwrap();
    let poisson = stationary_poisson(cfg.gamma, cfg.c_max()).unwrap();
    let tv = total_variation(pooled, &poisson).unwrap();
    report.verdict(
        "C2",
        "Poisson regime",
        tv < 0.05,
        format!("alpha = {}, TV(pooled, Poisson(4)) = {tv:.4} (< 0.05), {} samples", cfg.rewire.alpha, out.pooled_samples),
    );
    let mut simple = cfg.clone();
    simple.edge_policy = EdgePolicy::Simple;
    simple.graphs = 50;
    let s = run_degree_ensemble(&simple).unwrap();
    let sp = stationary_poisson(cfg.gamma, simple.c_max()).unwrap();
    report.info(format!(
        "simple-graph policy: TV = {:.4}",
        total_variation(s.pooled.as_ref().unwrap(), &sp).unwrap()
    ));
}

fn master_consistency(report: &mut Report) {
    let cfg = load("master_consistency.toml").degree_config().unwrap();
    let out = run_degree_ensemble(&cfg).unwrap();
    let params = MasterParams {
        d_rate: cfg.rewire.d_rate,
        n_edges: cfg.n_edges(),
        n_nodes: cfg.n,
        alpha: cfg.rewire.alpha,
    };
    let dt = params.recommended_dt(cfg.c_max());
    let at = integrate_master_at(&out.initial, &params, &cfg.times, dt).unwrap();
    let tvs: Vec<f64> = out.histograms.iter().zip(&at).map(|(h, m)| total_variation(h, m).unwrap()).collect();

    // conservation along a dense grid up to the last time
    let t_end = *cfg.times.last().unwrap();
    let grid: Vec<f64> = (1..=400).map(|k| t_end * k as f64 / 400.0).collect();
    let dense = integrate_master_at(&out.initial, &params, &grid, dt).unwrap();
    let gamma = params.gamma();
    let mass_err = dense.iter().map(|p| (p.total_mass() - 1.0).abs()).fold(0.0, f64::max);
    let mean_err = dense.iter().map(|p| (p.mean() - gamma).abs()).fold(0.0, f64::max);

    let pass = tvs.iter().all(|&tv| tv < 0.05) && mass_err < 1e-10 && mean_err < 1e-3;
    let cells: Vec<String> = cfg.times.iter().zip(&tvs).map(|(t, tv)| format!("t={t}: {tv:.4}")).collect();
    report.verdict(
        "C3",
        "master equation consistency",
        pass,
        format!(
            "TV(MC, master) {} (< 0.05) over {} graphs; max |mass - 1| = {mass_err:.1e} (< 1e-10), max |mean - γ| = {mean_err:.1e} (< 1e-3)",
            cells.join(", "),
            cfg.graphs
        ),
    );
    report.info(format!("edge policy: {:?}", cfg.edge_policy));
}

/// Random instance with at most 50 agents.
fn random_instance(seed: u32) -> (Network, Vec<f64>, KernelParams, ControlConfig) {
    let mut rng = stream_rng(2024, 40, seed);
    let n = rng.random_range(1..=50);
    let density: f64 = rng.random_range(0.05..0.6);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < density {
                edges.push((a, b));
            }
        }
    }
    let net = Network::from_edges(n, &edges).unwrap();
    let w = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let kernel = KernelParams::new(rng.random_range(0.0..0.1), rng.random_range(0.1..2.0), rng.random_range(0.1..2.0)).unwrap();
    let max_degree = net.degrees().into_iter().max().unwrap_or(0);
    let cc = ControlConfig {
        w_d: rng.random_range(-1.0..=1.0),
        nu: rng.random_range(0.01..10.0),
        nu_p: None,
        kappa: f64::INFINITY,
        c_star: rng.random_range(0..=max_degree),
        horizon: 1,
        dt: rng.random_range(0.001..0.1),
    };
    (net, w, kernel, cc)
}

fn instantaneous_control_correctness(report: &mut Report) {
    let euler = RkTableau::explicit_euler();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for k in 0..100 {
        let (net, w, kernel, cc) = random_instance(k);
        let d = instantaneous_control(&w, &net, &kernel, &cc);
        assert!(!d.uncontrollable, "c* never exceeds the max degree");
        let cost = |u: f64| horizon_cost(&w, &net, &kernel, &cc, &euler, &[u]);
        let h = 1e-3 * (1.0 + d.raw.abs());
        let slope = (cost(d.raw + h) - cost(d.raw - h)) / (2.0 * h);
        worst = worst.max(slope.abs() / (1.0 + cost(d.raw).abs()));
        checked += 1;
    }

    let single = Network::empty(1);
    let kernel = KernelParams::new(0.01, 1.0, 0.4).unwrap();
    let cc = ControlConfig {
        w_d: 0.8,
        nu: 0.0,
        nu_p: None,
        kappa: f64::INFINITY,
        c_star: 0,
        horizon: 1,
        dt: 0.05,
    };
    let d = instantaneous_control(&[0.0], &single, &kernel, &cc);
    let next = opnet::control::step_opinions_rk(&[0.0], &single, &kernel, d.u, &[true], &euler, cc.dt);
    let err = (next[0] - 0.8).abs();
    report.verdict(
        "C4",
        "instantaneous control",
        worst < 1e-8 && err < 1e-12,
        format!(
            "max |dJ/du| / (1 + |J|) over {checked} instances = {worst:.2e} (< 1e-8); single agent u = {}, |w1 - w_d| = {err:.1e} (< 1e-12)",
            d.u
        ),
    );
}

fn mpc_reduction(report: &mut Report) {
    let euler = RkTableau::explicit_euler();
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let (net, w, kernel, cc) = random_instance(1_000 + k);
        let closed = instantaneous_control(&w, &net, &kernel, &cc);
        let sol = mpc_control(&w, &net, &kernel, &cc, &euler);
        worst = worst.max((sol.controls[0] - closed.u).abs());
    }
    report.verdict(
        "C5",
        "MPC reduction",
        worst < 1e-8,
        format!("max |u_mpc - u_closed| over 100 instances = {worst:.2e} (< 1e-8)"),
    );
}

fn consensus_trend(report: &mut Report) {
    let file = load("consensus.toml");
    let cfg = file.sim_config().unwrap();
    let started = Instant::now();
    let rows = sweep_c_star(&cfg, &[10, 20, 30]).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let v: Vec<f64> = rows.iter().map(|r| r.final_consensus).collect();
    let f: Vec<f64> = rows.iter().map(|r| r.final_controlled_fraction).collect();
    let v0 = rows[0].initial_consensus;
    let pass = v[0] < v[1] && v[1] < v[2] && f[0] >= f[1] && f[1] >= f[2] && v[0] < v0 / 10.0;
    report.verdict(
        "C6",
        "consensus trend",
        pass,
        format!(
            "seed {}: V(tf) = {:.3e} < {:.3e} < {:.3e}, controlled share = {:.2} >= {:.2} >= {:.2}, V0/10 = {:.3e}; 3 runs in {elapsed:.1}s",
            cfg.seed,
            v[0],
            v[1],
            v[2],
            f[0],
            f[1],
            f[2],
            v0 / 10.0
        ),
    );

    // how often the trend holds over other seeds
    let seeds = 20u64;
    let mut all = 0;
    let mut order = 0;
    let mut tenth = 0;
    let mut mean_v = [0.0; 3];
    for seed in 1..=seeds {
        let mut c = cfg.clone();
        c.seed = seed;
        let rows = sweep_c_star(&c, &[10, 20, 30]).unwrap();
        let v: Vec<f64> = rows.iter().map(|r| r.final_consensus).collect();
        let o = v[0] < v[1] && v[1] < v[2];
        let t = v[0] < rows[0].initial_consensus / 10.0;
        order += o as usize;
        tenth += t as usize;
        all += (o && t) as usize;
        for (m, x) in mean_v.iter_mut().zip(&v) {
            *m += x / seeds as f64;
        }
    }
    report.info(format!(
        "seeds 1..={seeds}: strict order {order}/{seeds}, V(tf) < V0/10 {tenth}/{seeds}, both {all}/{seeds}; mean V(tf) = {:.3e}, {:.3e}, {:.3e}",
        mean_v[0], mean_v[1], mean_v[2]
    ));
    let mut free = cfg.clone();
    free.project_opinions = false;
    let rows = sweep_c_star(&free, &[10]).unwrap();
    report.info(format!(
        "without projection onto [-1, 1]: c* = 10 gives V(tf) = {:.3e} (V0/10 = {:.3e})",
        rows[0].final_consensus,
        v0 / 10.0
    ));
}

fn uncontrolled_structure(report: &mut Report) {
    let base = load("uncontrolled.toml").sim_config().unwrap();
    let mut violations = 0usize;
    let mut steps = 0usize;
    let seeds: Vec<u64> = (0..10).collect();
    for &seed in &seeds {
        let mut cfg = base.clone();
        cfg.seed = seed;
        let rec = run_simulation(&cfg).unwrap();
        let max: Vec<f64> = rec.opinions.iter().map(|w| w.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
        let min: Vec<f64> = rec.opinions.iter().map(|w| w.iter().copied().fold(f64::INFINITY, f64::min)).collect();
        violations += max.windows(2).filter(|p| p[1] > p[0]).count();
        violations += min.windows(2).filter(|p| p[1] < p[0]).count();
        steps += rec.len() - 1;
    }

    let mut drift: f64 = 0.0;
    for value in [-0.7, 0.0, 0.35, 1.0] {
        let mut cfg = base.clone();
        cfg.init_opinion = InitOpinion::Explicit(vec![value; cfg.n]);
        let rec = run_simulation(&cfg).unwrap();
        for pair in rec.opinions.windows(2) {
            for (a, b) in pair[0].iter().zip(&pair[1]) {
                drift = drift.max((a - b).abs());
            }
        }
    }
    report.verdict(
        "C7",
        "uncontrolled structure",
        violations == 0 && drift < 1e-14,
        format!(
            "{} seeds over [{}, {}], {steps} steps: {violations} monotonicity violations of max/min; max per-step drift from consensus = {drift:.1e} (< 1e-14)",
            seeds.len(),
            base.t0,
            base.tf
        ),
    );
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    files
}

fn determinism(report: &mut Report) {
    let tmp = tempfile::tempdir().unwrap();
    let mut compared = 0;
    let mut differing = Vec::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(config_path("")).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let file = FileConfig::load(&path).unwrap();
        let mut commands = Vec::new();
        let common = |tag: &str, run: usize| CommonArgs {
            config: path.clone(),
            out: tmp.path().join(format!("{name}-{tag}-{run}")),
            seed: None,
        };
        for run in 0..2 {
            let mut these = Vec::new();
            if file.degree_dist.is_some() {
                these.push(("degree-dist", Command::DegreeDist(common("dd", run))));
            }
            if file.sim.is_some() {
                these.push(("simulate", Command::Simulate(common("sim", run))));
                if file.control.is_some() {
                    these.push((
                        "sweep",
                        Command::Sweep {
                            common: common("sweep", run),
                            c_star: vec![10, 20, 30],
                        },
                    ));
                }
            }
            commands.push(these);
        }
        for ((tag, first), (_, second)) in commands[0].iter().zip(&commands[1]) {
            cli::run(first).unwrap();
            cli::run(second).unwrap();
            let (a, b) = match (first, second) {
                (Command::DegreeDist(a), Command::DegreeDist(b)) | (Command::Simulate(a), Command::Simulate(b)) => (&a.out, &b.out),
                (Command::Sweep { common: a, .. }, Command::Sweep { common: b, .. }) => (&a.out, &b.out),
                _ => unreachable!(),
            };
            let fa = csv_files(a);
            let fb = csv_files(b);
            assert_eq!(fa.len(), fb.len());
            for (x, y) in fa.iter().zip(&fb) {
                compared += 1;
                if fs::read(x).unwrap() != fs::read(y).unwrap() {
                    differing.push(format!("{name}/{tag}/{}", x.file_name().unwrap().to_string_lossy()));
                }
            }
        }
    }
    report.verdict(
        "C8",
        "determinism",
        differing.is_empty() && compared > 0,
        format!("{compared} CSV files from every bundled config compared across two runs; {} differ {:?}", differing.len(), differing),
    );
}

fn main() {
    let started = Instant::now();
    let mut report = Report { failures: 0 };
    power_law_regime(&mut report);
    poisson_regime(&mut report);
    master_consistency(&mut report);
    instantaneous_control_correctness(&mut report);
    mpc_reduction(&mut report);
    consensus_trend(&mut report);
    uncontrolled_structure(&mut report);
    determinism(&mut report);
    println!(
        "acceptance: {} of 8 criteria passed in {:.1}s",
        8 - report.failures,
        started.elapsed().as_secs_f64()
    );
    if report.failures > 0 {
        std::process::exit(1);
    }
}
