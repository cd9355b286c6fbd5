//! Degree-selective control of the alignment dynamics.
//!
//! A single scalar control `u` acts on every agent whose degree reaches the
//! threshold `c*`: `ẇ_i = F_i + u·Q_i` with `Q_i = χ(c_i ≥ c*)`. Two
//! controllers are provided: the closed-form one-step law obtained from an
//! explicit Euler prediction, and a finite-horizon predictive controller over
//! `p` piecewise-constant values solved by projected gradient descent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::opinion::{opinion_rhs, opinion_rhs_into, KernelParams};

/// Butcher tableau of an explicit Runge–Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct RkTableau {
    /// Stage coupling `a[l][k]`, strictly lower triangular.
    pub a: Vec<Vec<f64>>,
    /// Weights `b_l`.
    pub b: Vec<f64>,
    /// Abscissae `θ_l`.
    pub theta: Vec<f64>,
}

impl RkTableau {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        let s = b.len();
        if s == 0 || a.len() != s || theta.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::invalid("tableau", "a must be s×s with s weights and abscissae"));
        }
        if ((b.iter().sum::<f64>()) - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("tableau", "weights must sum to 1"));
        }
        let implicit = a
            .iter()
            .enumerate()
            .any(|(l, row)| row[l..].iter().any(|&v| v != 0.0));
        if implicit {
            return Err(Error::invalid("tableau", "only explicit methods are supported"));
        }
        Ok(Self { a, b, theta })
    }

    pub fn explicit_euler() -> Self {
        Self {
            a: vec![vec![0.0]],
            b: vec![1.0],
            theta: vec![0.0],
        }
    }

    pub fn heun() -> Self {
        Self {
            a: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            b: vec![0.5, 0.5],
            theta: vec![0.0, 1.0],
        }
    }

    pub fn rk4() -> Self {
        Self {
            a: vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            theta: vec![0.0, 0.5, 0.5, 1.0],
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
}

/// Named tableaus selectable from configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableauKind {
    #[default]
    Euler,
    Heun,
    Rk4,
}

impl TableauKind {
    pub fn tableau(self) -> RkTableau {
        match self {
            TableauKind::Euler => RkTableau::explicit_euler(),
            TableauKind::Heun => RkTableau::heun(),
            TableauKind::Rk4 => RkTableau::rk4(),
        }
    }
}

/// Controller settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlConfig {
    /// Target opinion `w_d`.
    pub w_d: f64,
    /// Control penalty ν of the running cost.
    pub nu: f64,
    /// Penalty ν_p over the prediction horizon; `None` means `Δt·ν`.
    pub nu_p: Option<f64>,
    /// Admissible controls are `[−κ, κ]`; `f64::INFINITY` disables the bound.
    pub kappa: f64,
    /// Degree threshold `c*`.
    pub c_star: usize,
    /// Prediction steps `p`.
    pub horizon: usize,
    /// Sampling step Δt.
    pub dt: f64,
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.w_d) {
            return Err(Error::invalid("w_d", "target must lie in [-1, 1]"));
        }
        // ν = 0 is admitted: the one-step law stays well defined while some
        // agent is controlled.
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::invalid("nu", "must be finite and non-negative"));
        }
        if let Some(nu_p) = self.nu_p {
            if !(nu_p >= 0.0 && nu_p.is_finite()) {
                return Err(Error::invalid("nu_p", "must be finite and non-negative"));
            }
        }
        if self.kappa.is_nan() || self.kappa <= 0.0 {
            return Err(Error::invalid("kappa", "control bound must be positive"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "needs at least one prediction step"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive and finite"));
        }
        Ok(())
    }

    pub fn horizon_penalty(&self) -> f64 {
        self.nu_p.unwrap_or(self.dt * self.nu)
    }

    pub fn clamp(&self, u: f64) -> f64 {
        u.clamp(-self.kappa, self.kappa)
    }
}

/// `Q_i = χ(c_i ≥ c*)`.
pub fn selector_q(net: &Network, c_star: usize) -> Vec<bool> {
    net.degrees().into_iter().map(|c| c >= c_star).collect()
}

/// Output of the one-step controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlDecision {
    /// Applied control, inside `[−κ, κ]`.
    pub u: f64,
    /// Unconstrained minimizer before clamping.
    pub raw: f64,
    /// No agent meets the degree threshold.
    pub uncontrollable: bool,
}

/// Closed-form control minimizing the one-step Euler-predicted cost
///
/// ```text
/// ū = −(Σ Q_j (w_j − w_d) + Δt Σ Q_j F_j) / (Nν + Δt Σ Q_j²)
/// ```
///
/// clamped to `[−κ, κ]`.
pub fn instantaneous_control(w: &[f64], net: &Network, kernel: &KernelParams, cc: &ControlConfig) -> ControlDecision {
    let f = opinion_rhs(w, net, kernel);
    let q = selector_q(net, cc.c_star);
    instantaneous_control_from(w, &f, &q, cc)
}

/// [`instantaneous_control`] with the alignment field and selector supplied.
pub fn instantaneous_control_from(w: &[f64], f: &[f64], q: &[bool], cc: &ControlConfig) -> ControlDecision {
    let controlled = q.iter().filter(|&&qi| qi).count();
    if controlled == 0 {
        return ControlDecision {
            u: 0.0,
            raw: 0.0,
            uncontrollable: true,
        };
    }
    let mut offset = 0.0;
    let mut drift = 0.0;
    for ((&wi, &fi), _) in w.iter().zip(f).zip(q).filter(|(_, &qi)| qi) {
        offset += wi - cc.w_d;
        drift += fi;
    }
    let denom = w.len() as f64 * cc.nu + cc.dt * controlled as f64;
    let raw = -(offset + cc.dt * drift) / denom;
    ControlDecision {
        u: cc.clamp(raw),
        raw,
        uncontrollable: false,
    }
}

/// One explicit Runge–Kutta step of `ẇ = F(w) + u·Q` with the network,
/// selector and control frozen over the step.
pub fn step_opinions_rk(
    w: &[f64],
    net: &Network,
    kernel: &KernelParams,
    u: f64,
    q: &[bool],
    tab: &RkTableau,
    dt: f64,
) -> Vec<f64> {
    let n = w.len();
    let s = tab.stages();
    let mut slopes = vec![vec![0.0; n]; s];
    let mut stage = vec![0.0; n];
    for l in 0..s {
        stage.copy_from_slice(w);
        for (k, slope) in slopes.iter().enumerate().take(l) {
            let a = tab.a[l][k];
            if a != 0.0 {
                for (x, y) in stage.iter_mut().zip(slope) {
                    *x += dt * a * y;
                }
            }
        }
        opinion_rhs_into(&stage, net, kernel, &mut slopes[l]);
        for (x, &qi) in slopes[l].iter_mut().zip(q) {
            if qi {
                *x += u;
            }
        }
    }
    let mut next = w.to_vec();
    for (l, slope) in slopes.iter().enumerate() {
        let b = tab.b[l];
        for (x, y) in next.iter_mut().zip(slope) {
            *x += dt * b * y;
        }
    }
    next
}

/// Running cost `½[(1/N) Σ (w_j − w_d)² + ν u²]`.
pub fn running_cost(w: &[f64], u: f64, cc: &ControlConfig) -> f64 {
    stage_cost(w, u, cc.w_d, cc.nu)
}

fn stage_cost(w: &[f64], u: f64, w_d: f64, penalty: f64) -> f64 {
    let spread = w.iter().map(|x| (x - w_d) * (x - w_d)).sum::<f64>() / w.len() as f64;
    0.5 * (spread + penalty * u * u)
}

/// Discrete predictive cost of a control sequence over `controls.len()`
/// steps: `Σ_k Δt·½[(1/N) Σ (w_j^{k+1} − w_d)² + ν_p (ū^k)²]`, with the state
/// predicted by `tab` on the frozen network.
pub fn horizon_cost(
    w: &[f64],
    net: &Network,
    kernel: &KernelParams,
    cc: &ControlConfig,
    tab: &RkTableau,
    controls: &[f64],
) -> f64 {
    let q = selector_q(net, cc.c_star);
    horizon_cost_with(w, net, kernel, cc, tab, &q, controls)
}

fn horizon_cost_with(
    w: &[f64],
    net: &Network,
    kernel: &KernelParams,
    cc: &ControlConfig,
    tab: &RkTableau,
    q: &[bool],
    controls: &[f64],
) -> f64 {
    let penalty = cc.horizon_penalty();
    let mut state = w.to_vec();
    let mut cost = 0.0;
    for &u in controls {
        state = step_opinions_rk(&state, net, kernel, u, q, tab, cc.dt);
        cost += cc.dt * stage_cost(&state, u, cc.w_d, penalty);
    }
    cost
}

/// Result of the predictive controller.
#[derive(Debug, Clone, PartialEq)]
pub struct MpcSolution {
    /// Open-loop controls `ū^0 … ū^{p−1}`, each inside `[−κ, κ]`.
    pub controls: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    /// `false` when the iteration cap was hit or the line search stalled;
    /// `controls` then holds the best iterate found.
    pub converged: bool,
    pub uncontrollable: bool,
}

const MAX_ITERATIONS: usize = 500;
/// Stop once the scaled projected gradient step is this small (relative).
const STEP_TOLERANCE: f64 = 1e-10;
const FD_STEP: f64 = 1e-4;
const ARMIJO: f64 = 1e-4;

/// Finite-horizon predictive control over `cc.horizon` steps.
///
/// Minimizes [`horizon_cost`] over the box `[−κ, κ]^p` by spectral projected
/// gradient descent with central finite-difference gradients.
pub fn mpc_control(
    w: &[f64],
    net: &Network,
    kernel: &KernelParams,
    cc: &ControlConfig,
    tab: &RkTableau,
) -> MpcSolution {
    let p = cc.horizon;
    let q = selector_q(net, cc.c_star);
    if !q.iter().any(|&qi| qi) {
        return MpcSolution {
            controls: vec![0.0; p],
            cost: horizon_cost_with(w, net, kernel, cc, tab, &q, &vec![0.0; p]),
            iterations: 0,
            converged: true,
            uncontrollable: true,
        };
    }

    let cost = |x: &[f64]| horizon_cost_with(w, net, kernel, cc, tab, &q, x);
    let gradient = |x: &[f64]| -> Vec<f64> {
        let mut probe = x.to_vec();
        (0..x.len())
            .map(|i| {
                let h = FD_STEP * x[i].abs().max(1.0);
                probe[i] = x[i] + h;
                let up = cost(&probe);
                probe[i] = x[i] - h;
                let down = cost(&probe);
                probe[i] = x[i];
                (up - down) / (2.0 * h)
            })
            .collect()
    };
    let project = |x: &mut [f64]| x.iter_mut().for_each(|v| *v = cc.clamp(*v));
    let norm_inf = |x: &[f64]| x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();

    let mut x = vec![0.0; p];
    let mut fx = cost(&x);
    let mut g = gradient(&x);
    let mut step = initial_step(&cost, &x, fx, &g);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        let mut d: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
        project(&mut d);
        d.iter_mut().zip(&x).for_each(|(di, xi)| *di -= xi);
        if norm_inf(&d) <= STEP_TOLERANCE * (1.0 + norm_inf(&x)) {
            converged = true;
            break;
        }
        iterations += 1;

        let slope = dot(&g, &d);
        let mut lambda = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + lambda * di).collect();
            let ft = cost(&trial);
            if ft <= fx + ARMIJO * lambda * slope {
                break Some((trial, ft));
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                break None;
            }
        };
        let Some((next, fnext)) = accepted else {
            break;
        };

        let g_next = gradient(&next);
        let s: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { (dot(&s, &s) / sy).clamp(1e-12, 1e12) } else { step * 2.0 };
        x = next;
        fx = fnext;
        g = g_next;
    }

    MpcSolution {
        controls: x,
        cost: fx,
        iterations,
        converged,
        uncontrollable: false,
    }
}

/// Inverse curvature of the cost along the gradient direction, used as the
/// first step length.
fn initial_step(cost: &impl Fn(&[f64]) -> f64, x: &[f64], fx: f64, g: &[f64]) -> f64 {
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 1.0;
    }
    let eps = 1e-3;
    let along = |t: f64| -> Vec<f64> { x.iter().zip(g).map(|(xi, gi)| xi + t * gi / norm).collect() };
    let curvature = (cost(&along(eps)) - 2.0 * fx + cost(&along(-eps))) / (eps * eps);
    if curvature > 0.0 {
        1.0 / curvature
    } else {
        1.0
    }
}
