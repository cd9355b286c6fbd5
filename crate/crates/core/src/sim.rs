//! Coupled network / opinion / control loop.
//!
//! Each sampling step of length Δt runs, in order: the rewiring process over
//! Δt, the controller on the updated degrees, and one Runge–Kutta step of the
//! opinions with the network frozen.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{instantaneous_control_from, mpc_control, selector_q, step_opinions_rk, ControlConfig, TableauKind};
use crate::error::{Error, Result};
use crate::degree_master::DegreeDistribution;
use crate::graph::{edge_count, evolve_network, init_network, EdgePolicy, GraphSnapshot, InitMode, Network, RewireParams};
use crate::opinion::{opinion_rhs, KernelParams, OpinionState};
use crate::rng::{stream_rng, GRAPH_INIT, NETWORK_EVOLUTION, OPINION_INIT};

/// Initial opinion profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitOpinion {
    /// I.i.d. uniform on `[−1, 1]`.
    Uniform,
    Explicit(Vec<f64>),
}

/// Full description of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Number of agents N.
    pub n: usize,
    /// Density of connectivity γ = 2E/N.
    pub gamma: f64,
    pub rewire: RewireParams,
    pub init_graph: InitMode,
    pub edge_policy: EdgePolicy,
    pub t0: f64,
    pub tf: f64,
    /// Sampling step Δt.
    pub dt: f64,
    pub kernel: KernelParams,
    /// `None` runs the uncontrolled dynamics.
    pub control: Option<ControlConfig>,
    pub tableau: TableauKind,
    /// Project opinions back onto `[−1, 1]` after every step.
    pub project_opinions: bool,
    pub init_opinion: InitOpinion,
    /// Reference opinion for the consensus metric.
    pub target: f64,
    pub seed: u64,
    pub snapshot_times: Vec<f64>,
}

impl SimConfig {
    /// Number of sampling steps `M` with `t0 + M·Δt = tf`.
    pub fn steps(&self) -> Result<usize> {
        let span = self.tf - self.t0;
        if !(span > 0.0 && span.is_finite()) {
            return Err(Error::invalid("tf", format!("tf = {} must exceed t0 = {}", self.tf, self.t0)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive and finite"));
        }
        let ratio = span / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::invalid(
                "dt",
                format!("Δt = {} does not divide tf − t0 = {span}", self.dt),
            ));
        }
        Ok(steps as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.steps()?;
        if self.n < 2 {
            return Err(Error::invalid("n", "need at least two agents"));
        }
        self.rewire.validate()?;
        self.kernel.validate()?;
        if let Some(cc) = &self.control {
            cc.validate()?;
            if (cc.dt - self.dt).abs() > 1e-15 * self.dt {
                return Err(Error::invalid("control.dt", "must equal the sampling step"));
            }
        }
        if let InitOpinion::Explicit(w) = &self.init_opinion {
            if w.len() != self.n {
                return Err(Error::invalid("initial opinions", format!("expected {} values, got {}", self.n, w.len())));
            }
        }
        Ok(())
    }

    /// Copy with a different degree threshold. No-op for uncontrolled runs.
    pub fn with_c_star(&self, c_star: usize) -> Self {
        let mut cfg = self.clone();
        if let Some(cc) = cfg.control.as_mut() {
            cc.c_star = c_star;
        }
        cfg
    }

    pub fn initial_network(&self) -> Result<Network> {
        init_network(self.n, self.gamma, self.init_graph, &mut stream_rng(self.seed, GRAPH_INIT, 0))?
            .with_policy(self.edge_policy)
    }

    pub fn initial_opinions(&self) -> Result<OpinionState> {
        match &self.init_opinion {
            InitOpinion::Uniform => Ok(OpinionState::uniform(self.n, self.t0, &mut stream_rng(self.seed, OPINION_INIT, 0))),
            InitOpinion::Explicit(w) => OpinionState::new(w.clone(), self.t0),
        }
    }
}

/// Time series produced by [`run_simulation`]. Row `n` holds the state at
/// `t_n`; `controls[n]` is the control applied over `[t_{n−1}, t_n]` (zero
/// for the initial row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub opinions: Vec<Vec<f64>>,
    pub degrees: Vec<Vec<usize>>,
    pub controls: Vec<f64>,
    pub consensus: Vec<f64>,
    pub controlled_fraction: Vec<f64>,
    pub snapshots: Vec<GraphSnapshot>,
    /// Steps on which no agent met the degree threshold.
    pub uncontrollable_steps: usize,
    /// Steps on which the predictive solver stopped without converging.
    pub unconverged_steps: usize,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_consensus(&self) -> f64 {
        *self.consensus.last().expect("record has an initial row")
    }

    pub fn final_controlled_fraction(&self) -> f64 {
        *self.controlled_fraction.last().expect("record has an initial row")
    }
}

/// `V = 1/(N−1) Σ (w_i − w_d)²`.
pub fn consensus_metric(w: &[f64], w_d: f64) -> Result<f64> {
    if w.len() < 2 {
        return Err(Error::invalid("opinions", "consensus metric needs N ≥ 2"));
    }
    Ok(w.iter().map(|x| (x - w_d) * (x - w_d)).sum::<f64>() / (w.len() - 1) as f64)
}

/// Share of agents with degree at least `c*`.
pub fn controlled_fraction(net: &Network, c_star: usize) -> f64 {
    let q = selector_q(net, c_star);
    q.iter().filter(|&&x| x).count() as f64 / q.len() as f64
}

/// Runs the coupled dynamics from `t0` to `tf`.
pub fn run_simulation(cfg: &SimConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let steps = cfg.steps()?;
    let net = cfg.initial_network()?;
    let state = cfg.initial_opinions()?;
    simulate_from(cfg, net, state.w, steps)
}

fn simulate_from(cfg: &SimConfig, mut net: Network, mut w: Vec<f64>, steps: usize) -> Result<TrajectoryRecord> {
    let tab = cfg.tableau.tableau();
    let mut rng = stream_rng(cfg.seed, NETWORK_EVOLUTION, 0);
    let snapshot_steps: Vec<usize> = cfg
        .snapshot_times
        .iter()
        .map(|&t| (((t - cfg.t0) / cfg.dt).round().max(0.0) as usize).min(steps))
        .collect();

    let rows = steps + 1;
    let mut record = TrajectoryRecord {
        times: Vec::with_capacity(rows),
        opinions: Vec::with_capacity(rows),
        degrees: Vec::with_capacity(rows),
        controls: Vec::with_capacity(rows),
        consensus: Vec::with_capacity(rows),
        controlled_fraction: Vec::with_capacity(rows),
        snapshots: Vec::new(),
        uncontrollable_steps: 0,
        unconverged_steps: 0,
    };

    let push_row = |record: &mut TrajectoryRecord, step: usize, net: &Network, w: &[f64], u: f64| -> Result<()> {
        let time = cfg.t0 + step as f64 * cfg.dt;
        record.times.push(time);
        record.opinions.push(w.to_vec());
        record.degrees.push(net.degrees());
        record.controls.push(u);
        record.consensus.push(consensus_metric(w, cfg.target)?);
        record
            .controlled_fraction
            .push(cfg.control.map_or(0.0, |cc| controlled_fraction(net, cc.c_star)));
        for _ in snapshot_steps.iter().filter(|&&s| s == step) {
            record.snapshots.push(GraphSnapshot::capture(net, time, Some(w)));
        }
        Ok(())
    };

    push_row(&mut record, 0, &net, &w, 0.0)?;
    for step in 0..steps {
        evolve_network(&mut net, &cfg.rewire, cfg.dt, &mut rng).map_err(|e| e.at_step(step))?;
        let (u, q) = match &cfg.control {
            None => (0.0, vec![false; cfg.n]),
            Some(cc) => {
                let q = selector_q(&net, cc.c_star);
                let u = if cc.horizon == 1 {
                    let f = opinion_rhs(&w, &net, &cfg.kernel);
                    let decision = instantaneous_control_from(&w, &f, &q, cc);
                    record.uncontrollable_steps += decision.uncontrollable as usize;
                    decision.u
                } else {
                    let solution = mpc_control(&w, &net, &cfg.kernel, cc, &tab);
                    record.uncontrollable_steps += solution.uncontrollable as usize;
                    record.unconverged_steps += !solution.converged as usize;
                    solution.controls[0]
                };
                (u, q)
            }
        };
        w = step_opinions_rk(&w, &net, &cfg.kernel, u, &q, &tab, cfg.dt);
        if cfg.project_opinions {
            w.iter_mut().for_each(|x| *x = x.clamp(-1.0, 1.0));
        }
        push_row(&mut record, step + 1, &net, &w, u).map_err(|e| e.at_step(step))?;
    }
    Ok(record)
}

/// One row of a threshold sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c_star: usize,
    pub initial_consensus: f64,
    pub final_consensus: f64,
    pub final_controlled_fraction: f64,
    pub times: Vec<f64>,
    pub controls: Vec<f64>,
}

/// Runs one controlled simulation per threshold. All runs share the seed,
/// hence the initial graph, the initial opinions and the rewiring trajectory.
/// Runs execute in parallel; rows come back in input order.
pub fn sweep_c_star(cfg: &SimConfig, c_star_values: &[usize]) -> Result<Vec<SweepRow>> {
    if cfg.control.is_none() {
        return Err(Error::invalid("control", "a threshold sweep needs a controlled configuration"));
    }
    c_star_values
        .par_iter()
        .map(|&c_star| {
            let record = run_simulation(&cfg.with_c_star(c_star))?;
            Ok(SweepRow {
                c_star,
                initial_consensus: record.consensus[0],
                final_consensus: record.final_consensus(),
                final_controlled_fraction: record.final_controlled_fraction(),
                times: record.times,
                controls: record.controls,
            })
        })
        .collect()
}

/// Monte Carlo ensemble of rewiring processes, used to sample the degree
/// distribution over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeEnsembleConfig {
    pub n: usize,
    pub gamma: f64,
    pub rewire: RewireParams,
    pub init_graph: InitMode,
    pub edge_policy: EdgePolicy,
    /// Number of independent graphs.
    pub graphs: usize,
    /// Sorted, non-negative observation times.
    pub times: Vec<f64>,
    /// Observations at or after this time are pooled into one stationary
    /// histogram.
    pub pool_from: Option<f64>,
    pub seed: u64,
}

/// Histograms produced by [`run_degree_ensemble`].
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeEnsemble {
    /// Ensemble histogram of the initial graphs.
    pub initial: DegreeDistribution,
    pub times: Vec<f64>,
    /// Ensemble histogram at each observation time, over `0..=c_max`.
    pub histograms: Vec<DegreeDistribution>,
    /// Pooled histogram of all observations at or after `pool_from`.
    pub pooled: Option<DegreeDistribution>,
    /// Number of node observations behind `pooled`.
    pub pooled_samples: usize,
    pub c_max: usize,
}

impl DegreeEnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        self.rewire.validate()?;
        edge_count(self.n, self.gamma)?;
        if self.graphs == 0 {
            return Err(Error::invalid("graphs", "need at least one graph"));
        }
        if self.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || self.times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("times", "must be finite, non-negative and sorted"));
        }
        if let Some(t) = self.pool_from {
            if !self.times.iter().any(|&s| s >= t) {
                return Err(Error::invalid("pool_from", format!("no observation time at or after {t}")));
            }
        }
        Ok(())
    }

    pub fn n_edges(&self) -> usize {
        (self.n as f64 * self.gamma / 2.0).round() as usize
    }

    /// Largest degree the histograms must hold.
    pub fn c_max(&self) -> usize {
        match self.edge_policy {
            EdgePolicy::Pseudograph => 2 * self.n_edges(),
            _ => self.n_edges(),
        }
    }

    /// Graph `g` of the ensemble, as drawn at time 0.
    pub fn initial_network(&self, g: usize) -> Result<Network> {
        let mut rng = stream_rng(self.seed, GRAPH_INIT, g as u32);
        init_network(self.n, self.gamma, self.init_graph, &mut rng)?.with_policy(self.edge_policy)
    }
}

/// Evolves every graph of the ensemble and histograms the degrees at each
/// observation time. Graph `g` draws from its own streams, so the result does
/// not depend on thread scheduling.
pub fn run_degree_ensemble(cfg: &DegreeEnsembleConfig) -> Result<DegreeEnsemble> {
    cfg.validate()?;
    let c_max = cfg.c_max();
    let histogram = |net: &Network| {
        let mut hist = vec![0u64; c_max + 1];
        for c in net.degrees() {
            hist[c] += 1;
        }
        hist
    };
    // one histogram for t = 0, then one per observation time
    let per_graph: Vec<Vec<Vec<u64>>> = (0..cfg.graphs)
        .into_par_iter()
        .map(|g| {
            let mut net = cfg.initial_network(g)?;
            let mut rng = stream_rng(cfg.seed, NETWORK_EVOLUTION, g as u32);
            let mut now = 0.0;
            let mut counts = Vec::with_capacity(cfg.times.len() + 1);
            counts.push(histogram(&net));
            for &t in &cfg.times {
                evolve_network(&mut net, &cfg.rewire, t - now, &mut rng)?;
                now = t;
                counts.push(histogram(&net));
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;

    let mut totals = vec![vec![0u64; c_max + 1]; cfg.times.len() + 1];
    for counts in &per_graph {
        for (total, hist) in totals.iter_mut().zip(counts) {
            total.iter_mut().zip(hist).for_each(|(a, b)| *a += b);
        }
    }
    let to_dist = |h: &[u64]| DegreeDistribution::from_weights(h.iter().map(|&x| x as f64).collect());
    let initial = to_dist(&totals[0])?;
    let totals = &totals[1..];
    let histograms = totals.iter().map(|h| to_dist(h)).collect::<Result<Vec<_>>>()?;

    let (pooled, pooled_samples) = match cfg.pool_from {
        None => (None, 0),
        Some(from) => {
            let mut pool = vec![0u64; c_max + 1];
            for (h, _) in totals.iter().zip(&cfg.times).filter(|(_, &t)| t >= from) {
                pool.iter_mut().zip(h).for_each(|(a, b)| *a += b);
            }
            let samples = pool.iter().sum::<u64>() as usize;
            (Some(to_dist(&pool)?), samples)
        }
    };
    Ok(DegreeEnsemble {
        initial,
        times: cfg.times.clone(),
        histograms,
        pooled,
        pooled_samples,
        c_max,
    })
}
