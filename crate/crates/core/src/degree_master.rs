//! Degree-distribution master equation and its stationary laws.
//!
//! For a network with `N` nodes and `E` edges, `p(c, t)` evolves by
//!
//! ```text
//! dp(c)/dt = D/E            [(c+1) p(c+1) - c p(c)]
//!          + 2D/(2E + Nα)   [(c-1+α) p(c-1) - (c+α) p(c)]
//! ```
//!
//! on `c = 0..=c_max`. The top index is a reflecting boundary: nothing flows
//! in from `c_max + 1` and the attachment loss out of `c_max` is suppressed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;

const MASS_TOLERANCE: f64 = 1e-10;
/// Entries below this after an integration step are a stability failure.
const NEGATIVITY_LIMIT: f64 = -1e-9;

/// Probability vector over degrees `0..=c_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    probs: Vec<f64>,
}

impl DegreeDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Distribution("empty support".into()));
        }
        if let Some((c, &p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::Distribution(format!("p({c}) = {p} is not a non-negative number")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Distribution(format!("total mass {total} differs from 1")));
        }
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Distribution(format!("weights sum to {total}")));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// All mass on degree `c`, support `0..=c_max`.
    pub fn point_mass(c: usize, c_max: usize) -> Result<Self> {
        if c > c_max {
            return Err(Error::Distribution(format!("degree {c} exceeds c_max = {c_max}")));
        }
        let mut probs = vec![0.0; c_max + 1];
        probs[c] = 1.0;
        Ok(Self { probs })
    }

    /// Histogram of integer degrees over support `0..=c_max`. Degrees above
    /// `c_max` are an error.
    pub fn from_degrees<I>(degrees: I, c_max: usize) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut counts = vec![0u64; c_max + 1];
        let mut total = 0u64;
        for c in degrees {
            if c > c_max {
                return Err(Error::Distribution(format!("degree {c} exceeds c_max = {c_max}")));
            }
            counts[c] += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::Distribution("no degrees to histogram".into()));
        }
        let total = total as f64;
        Ok(Self {
            probs: counts.into_iter().map(|k| k as f64 / total).collect(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn c_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(c, p)| c as f64 * p).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Copy restricted to degrees `lo..=hi` and renormalized there.
    pub fn window(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo > hi || hi > self.c_max() {
            return Err(Error::Distribution(format!(
                "window [{lo}, {hi}] is not inside 0..={}",
                self.c_max()
            )));
        }
        let mut weights = vec![0.0; self.probs.len()];
        weights[lo..=hi].copy_from_slice(&self.probs[lo..=hi]);
        Self::from_weights(weights)
    }
}

/// Coefficients of the master equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MasterParams {
    /// Relaxation rate D.
    pub d_rate: f64,
    pub n_edges: usize,
    pub n_nodes: usize,
    pub alpha: f64,
}

impl MasterParams {
    pub fn for_network(net: &Network, d_rate: f64, alpha: f64) -> Self {
        Self {
            d_rate,
            n_edges: net.n_edges(),
            n_nodes: net.n_nodes(),
            alpha,
        }
    }

    pub fn gamma(&self) -> f64 {
        2.0 * self.n_edges as f64 / self.n_nodes as f64
    }

    fn removal_rate(&self) -> f64 {
        self.d_rate / self.n_edges as f64
    }

    fn attachment_rate(&self) -> f64 {
        2.0 * self.d_rate / (2.0 * self.n_edges as f64 + self.n_nodes as f64 * self.alpha)
    }

    /// Step size satisfying the `dt ≤ 0.1·E/(D·c_max)` heuristic.
    pub fn recommended_dt(&self, c_max: usize) -> f64 {
        0.1 * self.n_edges as f64 / (self.d_rate * c_max.max(1) as f64)
    }
}

/// Right-hand side `dp/dt` of the master equation.
pub fn master_rhs(p: &[f64], params: &MasterParams) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    master_rhs_into(p, params, &mut out);
    out
}

fn master_rhs_into(p: &[f64], params: &MasterParams, out: &mut [f64]) {
    let removal = params.removal_rate();
    let attach = params.attachment_rate();
    let alpha = params.alpha;
    let top = p.len() - 1;
    for c in 0..=top {
        let cf = c as f64;
        let mut rate = -removal * cf * p[c];
        if c < top {
            rate += removal * (cf + 1.0) * p[c + 1];
            rate -= attach * (cf + alpha) * p[c];
        }
        if c > 0 {
            rate += attach * (cf - 1.0 + alpha) * p[c - 1];
        }
        out[c] = rate;
    }
}

/// Classical RK4 integration of the master equation from `p0` to `t_end`.
///
/// The step is `t_end / ceil(t_end / dt)`.
pub fn integrate_master(
    p0: &DegreeDistribution,
    params: &MasterParams,
    t_end: f64,
    dt: f64,
) -> Result<DegreeDistribution> {
    let mut out = integrate_master_at(p0, params, &[t_end], dt)?;
    Ok(out.pop().expect("one output time"))
}

/// Integrates once and returns the distribution at each of `times`
/// (non-decreasing, starting from `t = 0`). Between consecutive output times
/// the step is shrunk uniformly so each output lands exactly on a step.
pub fn integrate_master_at(
    p0: &DegreeDistribution,
    params: &MasterParams,
    times: &[f64],
    dt: f64,
) -> Result<Vec<DegreeDistribution>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be positive and finite"));
    }
    let n = p0.probs.len();
    let mut p = p0.probs.clone();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];

    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut step = 0usize;
    for &target in times {
        if !(target >= t && target.is_finite()) {
            return Err(Error::invalid("times", format!("output time {target} is not ≥ {t}")));
        }
        let span = target - t;
        let steps = (span / dt).ceil() as usize;
        let h = if steps > 0 { span / steps as f64 } else { 0.0 };
        for k in 0..steps {
            master_rhs_into(&p, params, &mut k1);
            axpy(&p, 0.5 * h, &k1, &mut stage);
            master_rhs_into(&stage, params, &mut k2);
            axpy(&p, 0.5 * h, &k2, &mut stage);
            master_rhs_into(&stage, params, &mut k3);
            axpy(&p, h, &k3, &mut stage);
            master_rhs_into(&stage, params, &mut k4);
            for c in 0..n {
                p[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            step += 1;
            let time = t + (k + 1) as f64 * h;
            enforce_positivity(&mut p, step, time)?;
        }
        t = target;
        out.push(DegreeDistribution { probs: p.clone() });
    }
    Ok(out)
}

fn axpy(x: &[f64], a: f64, y: &[f64], out: &mut [f64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

fn enforce_positivity(p: &mut [f64], step: usize, time: f64) -> Result<()> {
    if let Some((degree, &value)) = p.iter().enumerate().find(|(_, v)| **v < NEGATIVITY_LIMIT) {
        return Err(Error::Stability {
            step,
            time,
            degree,
            value,
        });
    }
    if p.iter().any(|v| *v < 0.0) {
        p.iter_mut().filter(|v| **v < 0.0).for_each(|v| *v = 0.0);
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
    }
    Ok(())
}

/// Un-normalized power law `(α/γ)^α · α/c` for `c ≥ 1`.
pub fn power_law_raw(alpha: f64, gamma: f64, c: usize) -> f64 {
    (alpha / gamma).powf(alpha) * alpha / c as f64
}

/// Power-law shape for `α ≪ 1`, truncated to `1..=c_max` and renormalized;
/// `p(0) = 0`.
pub fn stationary_power_law(alpha: f64, gamma: f64, c_max: usize) -> Result<DegreeDistribution> {
    if c_max < 1 {
        return Err(Error::invalid("c_max", "power law needs c_max ≥ 1"));
    }
    let weights = (0..=c_max)
        .map(|c| if c == 0 { 0.0 } else { power_law_raw(alpha, gamma, c) })
        .collect();
    DegreeDistribution::from_weights(weights)
}

/// Poisson(γ) truncated to `0..=c_max` and renormalized.
pub fn stationary_poisson(gamma: f64, c_max: usize) -> Result<DegreeDistribution> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    let ln_gamma = gamma.ln();
    let mut ln_factorial = 0.0;
    let weights = (0..=c_max)
        .map(|c| {
            if c > 0 {
                ln_factorial += (c as f64).ln();
            }
            (-gamma + c as f64 * ln_gamma - ln_factorial).exp()
        })
        .collect();
    DegreeDistribution::from_weights(weights)
}

/// Degree histogram of a network over `0..=net.degree_bound()`.
pub fn empirical_degree_distribution(net: &Network) -> DegreeDistribution {
    DegreeDistribution::from_degrees(net.degrees(), net.degree_bound()).expect("degrees never exceed the bound")
}

/// Pooled degree histogram of an ensemble of networks over `0..=c_max`.
pub fn ensemble_degree_distribution(nets: &[Network], c_max: usize) -> Result<DegreeDistribution> {
    DegreeDistribution::from_degrees(nets.iter().flat_map(Network::degrees), c_max)
}

/// Total variation distance `½ Σ |p − q|`.
pub fn total_variation(p: &DegreeDistribution, q: &DegreeDistribution) -> Result<f64> {
    if p.probs.len() != q.probs.len() {
        return Err(Error::LengthMismatch {
            left: p.probs.len(),
            right: q.probs.len(),
        });
    }
    Ok(0.5 * p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Total variation between `p` and `q` after both are restricted to
/// `lo..=hi` and renormalized there.
pub fn windowed_total_variation(
    p: &DegreeDistribution,
    q: &DegreeDistribution,
    lo: usize,
    hi: usize,
) -> Result<f64> {
    total_variation(&p.window(lo, hi)?, &q.window(lo, hi)?)
}

/// Least-squares slope of `ln p(c)` against `ln c` over `lo..=hi`, skipping
/// empty bins. `None` with fewer than two usable points.
pub fn log_log_slope(p: &DegreeDistribution, lo: usize, hi: usize) -> Option<f64> {
    let points: Vec<(f64, f64)> = (lo.max(1)..=hi.min(p.c_max()))
        .filter(|&c| p.probs[c] > 0.0)
        .map(|c| ((c as f64).ln(), p.probs[c].ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}
