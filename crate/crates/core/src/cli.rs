//! Configuration files, run manifests and the three `opnet` commands.
//!
//! A config is a TOML file with one section per module. Every command writes
//! `manifest.json` first (status `running`), then its data files, then
//! rewrites the manifest with status `complete` (or `failed`), the file list
//! and the elapsed time.
//!
//! Exit codes: `0` success, `2` configuration error, `3` simulation error,
//! `4` I/O error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::control::{ControlConfig, TableauKind};
use crate::degree_master::{
    integrate_master_at, log_log_slope, stationary_poisson, stationary_power_law, total_variation,
    windowed_total_variation, power_law_raw, DegreeDistribution, MasterParams,
};
use crate::graph::{EdgePolicy, InitMode, RewireParams};
use crate::opinion::KernelParams;
use crate::sim::{run_degree_ensemble, run_simulation, sweep_c_star, DegreeEnsembleConfig, InitOpinion, SimConfig};

/// Seed used when a config file does not set one.
pub const DEFAULT_SEED: u64 = 42;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Failure of a command, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation error: {0}")]
    Simulation(#[from] crate::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Simulation(_) => EXIT_SIMULATION,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn default_true() -> bool {
    true
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_horizon() -> usize {
    1
}

fn default_init_graph() -> InitMode {
    InitMode::UniformDegree
}

fn default_slope_window() -> [usize; 2] {
    [2, 40]
}

fn default_tv_window() -> [usize; 2] {
    [1, 50]
}

/// `[network]`: size and rewiring process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub n: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub d_rate: f64,
    #[serde(default = "default_init_graph")]
    pub init: InitMode,
    #[serde(default)]
    pub edge_policy: EdgePolicy,
}

/// `[opinion]`: interaction kernels and initial opinions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpinionSection {
    pub lambda: f64,
    pub beta: f64,
    pub delta: f64,
    /// Explicit initial opinions; uniform on `[−1, 1]` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(default = "default_true")]
    pub project: bool,
}

/// `[control]`: the degree-selective controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub w_d: f64,
    pub nu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_p: Option<f64>,
    pub kappa: f64,
    pub c_star: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub tableau: TableauKind,
}

/// `[sim]`: time grid and outputs of `simulate` and `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default)]
    pub t0: f64,
    pub tf: f64,
    pub dt: f64,
    /// Reference opinion of the consensus metric; defaults to `w_d`, or 0
    /// without control.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Write every k-th row of the per-step CSVs.
    #[serde(default = "default_output_every")]
    pub output_every: usize,
}

fn default_output_every() -> usize {
    1
}

/// `[degree_dist]`: Monte Carlo ensemble and master equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeDistSection {
    pub graphs: usize,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_from: Option<f64>,
    #[serde(default = "default_true")]
    pub master: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_dt: Option<f64>,
    #[serde(default = "default_slope_window")]
    pub slope_window: [usize; 2],
    #[serde(default = "default_tv_window")]
    pub tv_window: [usize; 2],
}

/// Parsed config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub network: NetworkSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opinion: Option<OpinionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_dist: Option<DegreeDistSection>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(config_err)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Canonical TOML text. Floats are written in shortest round-trip form.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn rewire(&self) -> Result<RewireParams, CliError> {
        RewireParams::new(self.network.alpha, self.network.d_rate).map_err(config_err)
    }

    /// Coupled-run configuration; needs `[opinion]` and `[sim]`.
    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let op = self.opinion.as_ref().ok_or_else(|| config_err("missing [opinion] section"))?;
        let sim = self.sim.as_ref().ok_or_else(|| config_err("missing [sim] section"))?;
        if sim.output_every == 0 {
            return Err(config_err("invalid parameter `output_every`: must be at least 1"));
        }
        let control = self.control.as_ref().map(|c| ControlConfig {
            w_d: c.w_d,
            nu: c.nu,
            nu_p: c.nu_p,
            kappa: c.kappa,
            c_star: c.c_star,
            horizon: c.horizon,
            dt: sim.dt,
        });
        let cfg = SimConfig {
            n: self.network.n,
            gamma: self.network.gamma,
            rewire: self.rewire()?,
            init_graph: self.network.init,
            edge_policy: self.network.edge_policy,
            t0: sim.t0,
            tf: sim.tf,
            dt: sim.dt,
            kernel: KernelParams::new(op.lambda, op.beta, op.delta).map_err(config_err)?,
            control,
            tableau: self.control.as_ref().map_or(TableauKind::Euler, |c| c.tableau),
            project_opinions: op.project,
            init_opinion: op.initial.clone().map_or(InitOpinion::Uniform, InitOpinion::Explicit),
            target: sim.target.or(control.map(|c| c.w_d)).unwrap_or(0.0),
            seed: self.seed,
            snapshot_times: sim.snapshot_times.clone(),
        };
        cfg.validate().map_err(config_err)?;
        crate::graph::edge_count(cfg.n, cfg.gamma).map_err(config_err)?;
        cfg.initial_opinions().map_err(config_err)?;
        Ok(cfg)
    }

    /// Ensemble configuration; needs `[degree_dist]`.
    pub fn degree_config(&self) -> Result<DegreeEnsembleConfig, CliError> {
        let dd = self
            .degree_dist
            .as_ref()
            .ok_or_else(|| config_err("missing [degree_dist] section"))?;
        for (name, [lo, hi]) in [("slope_window", dd.slope_window), ("tv_window", dd.tv_window)] {
            if lo > hi {
                return Err(config_err(format!("invalid parameter `{name}`: lower end exceeds upper end")));
            }
        }
        if let Some(dt) = dd.master_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(config_err("invalid parameter `master_dt`: must be positive and finite"));
            }
        }
        let cfg = DegreeEnsembleConfig {
            n: self.network.n,
            gamma: self.network.gamma,
            rewire: self.rewire()?,
            init_graph: self.network.init,
            edge_policy: self.network.edge_policy,
            graphs: dd.graphs,
            times: dd.times.clone(),
            pool_from: dd.pool_from,
            seed: self.seed,
        };
        cfg.validate().map_err(config_err)?;
        Ok(cfg)
    }

    /// Every parameter with its model symbol, for the manifest.
    pub fn parameter_echo(&self) -> Vec<serde_json::Value> {
        let mut out = Vec::new();
        let mut put = |key: &str, symbol: &str, value: serde_json::Value| {
            out.push(json!({ "key": key, "symbol": symbol, "value": value }));
        };
        let net = &self.network;
        put("seed", "", json!(self.seed));
        put("network.n", "N", json!(net.n));
        put("network.gamma", "γ", json!(net.gamma));
        put("network.alpha", "α", json!(net.alpha));
        put("network.d_rate", "D", json!(net.d_rate));
        put("network.init", "", json!(net.init));
        put("network.edge_policy", "", json!(net.edge_policy));
        if let Some(op) = &self.opinion {
            put("opinion.lambda", "λ", json!(op.lambda));
            put("opinion.beta", "β", json!(op.beta));
            put("opinion.delta", "Δ", json!(op.delta));
            put("opinion.initial", "w(t_0)", json!(op.initial.as_ref().map_or(json!("uniform"), |w| json!(w))));
            put("opinion.project", "", json!(op.project));
        }
        if let Some(c) = &self.control {
            put("control.w_d", "w_d", json!(c.w_d));
            put("control.nu", "ν", json!(c.nu));
            put("control.nu_p", "ν_p", json!(c.nu_p));
            put("control.kappa", "κ", json!(if c.kappa.is_finite() { json!(c.kappa) } else { json!("inf") }));
            put("control.c_star", "c*", json!(c.c_star));
            put("control.horizon", "p", json!(c.horizon));
            put("control.tableau", "(a, b, θ)", json!(c.tableau));
        }
        if let Some(s) = &self.sim {
            put("sim.t0", "t_0", json!(s.t0));
            put("sim.tf", "t_f", json!(s.tf));
            put("sim.dt", "Δt", json!(s.dt));
            put("sim.target", "w_d", json!(s.target));
            put("sim.snapshot_times", "", json!(s.snapshot_times));
        }
        if let Some(d) = &self.degree_dist {
            put("degree_dist.graphs", "", json!(d.graphs));
            put("degree_dist.times", "t", json!(d.times));
            put("degree_dist.pool_from", "", json!(d.pool_from));
        }
        out
    }
}

/// `opnet` command line.
#[derive(Debug, Parser)]
#[command(name = "opnet", version, about = "Opinion dynamics on rewiring networks with degree-selective control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed of the config file.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the coupled network / opinion / control dynamics once.
    Simulate(CommonArgs),
    /// Monte Carlo degree histograms against the master equation and the
    /// stationary laws.
    DegreeDist(CommonArgs),
    /// One controlled run per degree threshold, sharing all random draws.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated thresholds, e.g. `10,20,30`. Defaults to the
        /// config's `c_star`.
        #[arg(long = "c-star", value_delimiter = ',')]
        c_star: Vec<usize>,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors are reported on stderr.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("opnet: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::DegreeDist(args) => cmd_degree_dist(args),
        Command::Sweep { common, c_star } => cmd_sweep(common, c_star),
    }
}

fn load_with_seed(args: &CommonArgs) -> Result<FileConfig, CliError> {
    let mut cfg = FileConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Writes the run directory: manifest first, data files, final manifest.
struct RunDir {
    dir: PathBuf,
    command: &'static str,
    config: FileConfig,
    files: Vec<String>,
    started: Instant,
}

impl RunDir {
    fn open(dir: &Path, command: &'static str, config: FileConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let run = Self {
            dir: dir.to_path_buf(),
            command,
            config,
            files: Vec::new(),
            started: Instant::now(),
        };
        run.write_manifest("running")?;
        Ok(run)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_manifest(&self, status: &str) -> Result<(), CliError> {
        let manifest = json!({
            "command": self.command,
            "status": status,
            "version": env!("CARGO_PKG_VERSION"),
            "config_sha256": self.config.hash(),
            "seed": self.config.seed,
            "parameters": self.config.parameter_echo(),
            "files": self.files,
            "elapsed_seconds": self.started.elapsed().as_secs_f64(),
        });
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail");
        fs::write(&path, text + "\n").map_err(io_err(&path))
    }

    /// Final manifest: `complete`, or `failed` if the command errored.
    fn finish(self, outcome: Result<(), CliError>) -> Result<(), CliError> {
        match outcome {
            Ok(()) => self.write_manifest("complete"),
            Err(e) => {
                let _ = self.write_manifest("failed");
                Err(e)
            }
        }
    }
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_row<I: IntoIterator<Item = String>>(out: &mut String, cells: I) {
    let mut first = true;
    for cell in cells {
        if !first {
            out.push(',');
        }
        out.push_str(&cell);
        first = false;
    }
    out.push('\n');
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn cmd_simulate(args: &CommonArgs) -> Result<(), CliError> {
    let config = load_with_seed(args)?;
    let sim = config.sim_config()?;
    let every = config.sim.as_ref().map_or(1, |s| s.output_every);
    let mut run = RunDir::open(&args.out, "simulate", config)?;
    let outcome = write_simulation(&mut run, &sim, every);
    run.finish(outcome)
}

fn write_simulation(run: &mut RunDir, sim: &SimConfig, every: usize) -> Result<(), CliError> {
    run.write("config.toml", &run.config.to_toml())?;
    let record = run_simulation(sim)?;
    let rows: Vec<usize> = (0..record.len())
        .filter(|&k| k % every == 0 || k + 1 == record.len())
        .collect();

    let mut traj = String::new();
    csv_row(
        &mut traj,
        ["t", "u", "consensus", "controlled_fraction", "w_min", "w_max", "w_mean"].map(String::from),
    );
    for &k in &rows {
        let w = &record.opinions[k];
        let min = w.iter().copied().fold(f64::INFINITY, f64::min);
        let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        csv_row(
            &mut traj,
            [
                record.times[k],
                record.controls[k],
                record.consensus[k],
                record.controlled_fraction[k],
                min,
                max,
                mean,
            ]
            .map(fmt_f64),
        );
    }
    run.write("trajectory.csv", &traj)?;

    let mut opinions = String::new();
    let mut degrees = String::new();
    let header = std::iter::once("t".to_string());
    csv_row(&mut opinions, header.clone().chain((0..sim.n).map(|i| format!("w{i}"))));
    csv_row(&mut degrees, header.chain((0..sim.n).map(|i| format!("c{i}"))));
    for &k in &rows {
        let t = fmt_f64(record.times[k]);
        csv_row(&mut opinions, std::iter::once(t.clone()).chain(record.opinions[k].iter().map(|&x| fmt_f64(x))));
        csv_row(&mut degrees, std::iter::once(t).chain(record.degrees[k].iter().map(|c| c.to_string())));
    }
    run.write("opinions.csv", &opinions)?;
    run.write("degrees.csv", &degrees)?;

    let summary = json!({
        "initial_consensus": record.consensus[0],
        "final_consensus": record.final_consensus(),
        "final_controlled_fraction": record.final_controlled_fraction(),
        "uncontrollable_steps": record.uncontrollable_steps,
        "unconverged_steps": record.unconverged_steps,
    });
    run.write("summary.json", &(serde_json::to_string_pretty(&summary).expect("serializable") + "\n"))?;

    for (k, snap) in record.snapshots.iter().enumerate() {
        run.write(&format!("snapshot_{k:03}.json"), &(snap.to_json() + "\n"))?;
    }
    Ok(())
}

pub fn cmd_degree_dist(args: &CommonArgs) -> Result<(), CliError> {
    let config = load_with_seed(args)?;
    let ens_cfg = config.degree_config()?;
    let dd = config.degree_dist.clone().expect("checked by degree_config");
    let mut run = RunDir::open(&args.out, "degree-dist", config)?;
    let outcome = write_degree_dist(&mut run, &ens_cfg, &dd);
    run.finish(outcome)
}

fn write_degree_dist(run: &mut RunDir, ens_cfg: &DegreeEnsembleConfig, dd: &DegreeDistSection) -> Result<(), CliError> {
    run.write("config.toml", &run.config.to_toml())?;

    let c_max = ens_cfg.c_max();
    let alpha = ens_cfg.rewire.alpha;
    let gamma = ens_cfg.gamma;
    let power_law = stationary_power_law(alpha, gamma, c_max)?;
    let poisson = stationary_poisson(gamma, c_max)?;
    let [tv_lo, tv_hi] = dd.tv_window;
    let [sl_lo, sl_hi] = dd.slope_window;

    let ensemble = run_degree_ensemble(ens_cfg)?;
    let master: Option<Vec<DegreeDistribution>> = if dd.master && !ens_cfg.times.is_empty() {
        let params = MasterParams {
            d_rate: ens_cfg.rewire.d_rate,
            n_edges: ens_cfg.n_edges(),
            n_nodes: ens_cfg.n,
            alpha,
        };
        let dt = dd.master_dt.unwrap_or_else(|| params.recommended_dt(c_max));
        Some(integrate_master_at(&ensemble.initial, &params, &ens_cfg.times, dt)?)
    } else {
        None
    };

    let mut hist = String::new();
    csv_row(&mut hist, ["t", "c", "p"].map(String::from));
    for (t, h) in ensemble.times.iter().zip(&ensemble.histograms) {
        for (c, &p) in h.probs().iter().enumerate() {
            csv_row(&mut hist, [fmt_f64(*t), c.to_string(), fmt_f64(p)]);
        }
    }
    run.write("mc_histogram.csv", &hist)?;

    let mut master_csv = String::new();
    csv_row(&mut master_csv, ["t", "c", "p"].map(String::from));
    for (t, m) in ensemble.times.iter().zip(master.iter().flatten()) {
        for (c, &p) in m.probs().iter().enumerate() {
            csv_row(&mut master_csv, [fmt_f64(*t), c.to_string(), fmt_f64(p)]);
        }
    }
    run.write("master.csv", &master_csv)?;

    let mut pl = String::new();
    csv_row(&mut pl, ["c", "raw", "normalized"].map(String::from));
    for (c, &p) in power_law.probs().iter().enumerate() {
        let raw = if c == 0 { 0.0 } else { power_law_raw(alpha, gamma, c) };
        csv_row(&mut pl, [c.to_string(), fmt_f64(raw), fmt_f64(p)]);
    }
    run.write("power_law.csv", &pl)?;

    let mut po = String::new();
    csv_row(&mut po, ["c", "p"].map(String::from));
    for (c, &p) in poisson.probs().iter().enumerate() {
        csv_row(&mut po, [c.to_string(), fmt_f64(p)]);
    }
    run.write("poisson.csv", &po)?;

    let mut summary = String::new();
    csv_row(
        &mut summary,
        [
            "observation",
            "t",
            "samples",
            "tv_mc_master",
            "tv_mc_power_law_window",
            "tv_mc_poisson",
            "slope_mc",
            "master_mass",
            "master_mean",
        ]
        .map(String::from),
    );
    let samples = (ens_cfg.graphs * ens_cfg.n).to_string();
    for (k, (t, h)) in ensemble.times.iter().zip(&ensemble.histograms).enumerate() {
        let m = master.as_ref().map(|m| &m[k]);
        csv_row(
            &mut summary,
            [
                "snapshot".to_string(),
                fmt_f64(*t),
                samples.clone(),
                opt_cell(m.map(|m| total_variation(h, m)).transpose()?),
                fmt_f64(windowed_total_variation(h, &power_law, tv_lo, tv_hi)?),
                fmt_f64(total_variation(h, &poisson)?),
                opt_cell(log_log_slope(h, sl_lo, sl_hi)),
                opt_cell(m.map(|m| m.total_mass())),
                opt_cell(m.map(|m| m.mean())),
            ],
        );
    }
    if let Some(p) = &ensemble.pooled {
        csv_row(
            &mut summary,
            [
                "pooled".to_string(),
                opt_cell(ens_cfg.pool_from),
                ensemble.pooled_samples.to_string(),
                String::new(),
                fmt_f64(windowed_total_variation(p, &power_law, tv_lo, tv_hi)?),
                fmt_f64(total_variation(p, &poisson)?),
                opt_cell(log_log_slope(p, sl_lo, sl_hi)),
                String::new(),
                String::new(),
            ],
        );
    }
    // the two stationary laws against each other
    csv_row(
        &mut summary,
        [
            "power_law".to_string(),
            String::new(),
            String::new(),
            String::new(),
            fmt_f64(0.0),
            fmt_f64(total_variation(&power_law, &poisson)?),
            opt_cell(log_log_slope(&power_law, sl_lo, sl_hi)),
            String::new(),
            String::new(),
        ],
    );
    run.write("summary.csv", &summary)?;
    Ok(())
}

pub fn cmd_sweep(args: &CommonArgs, c_star: &[usize]) -> Result<(), CliError> {
    let config = load_with_seed(args)?;
    let sim = config.sim_config()?;
    let Some(cc) = sim.control else {
        return Err(config_err("sweep needs a [control] section"));
    };
    let values = if c_star.is_empty() { vec![cc.c_star] } else { c_star.to_vec() };
    let mut run = RunDir::open(&args.out, "sweep", config)?;
    let outcome = write_sweep(&mut run, &sim, &values);
    run.finish(outcome)
}

fn write_sweep(run: &mut RunDir, sim: &SimConfig, values: &[usize]) -> Result<(), CliError> {
    run.write("config.toml", &run.config.to_toml())?;
    let rows = sweep_c_star(sim, values)?;
    let mut table = String::new();
    csv_row(
        &mut table,
        ["c_star", "initial_consensus", "final_consensus", "final_controlled_fraction"].map(String::from),
    );
    for r in &rows {
        csv_row(
            &mut table,
            [
                r.c_star.to_string(),
                fmt_f64(r.initial_consensus),
                fmt_f64(r.final_consensus),
                fmt_f64(r.final_controlled_fraction),
            ],
        );
    }
    run.write("sweep.csv", &table)?;

    let mut controls = String::new();
    csv_row(&mut controls, ["c_star", "t", "u"].map(String::from));
    for r in &rows {
        for (t, u) in r.times.iter().zip(&r.controls) {
            csv_row(&mut controls, [r.c_star.to_string(), fmt_f64(*t), fmt_f64(*u)]);
        }
    }
    run.write("controls.csv", &controls)?;
    Ok(())
}
