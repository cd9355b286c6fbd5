//! Opinion alignment on the current graph.
//!
//! Agent `i` moves toward its neighbors as
//! `F_i = (1/c_i) Σ_{j ∈ S_i} P_ij (w_j − w_i)` with
//! `P_ij = H(w_i, w_j) · K(c_i, c_j)`, where `H` is a bounded-confidence
//! indicator and `K` weights the pair by degree.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;

/// Parameters of the interaction kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Receiver damping λ in `e^{−λ c_i}`.
    pub lambda: f64,
    /// Sender saturation β in `1 − e^{−β c_j}`.
    pub beta: f64,
    /// Confidence bound Δ.
    pub delta: f64,
}

impl KernelParams {
    pub fn new(lambda: f64, beta: f64, delta: f64) -> Result<Self> {
        let params = Self { lambda, beta, delta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("lambda", self.lambda), ("beta", self.beta), ("delta", self.delta)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::invalid(name, "must be finite and non-negative"));
            }
        }
        if self.delta > 2.0 {
            return Err(Error::invalid("delta", "confidence bound must lie in [0, 2]"));
        }
        Ok(())
    }
}

/// Opinions of all agents at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionState {
    pub w: Vec<f64>,
    pub time: f64,
}

impl OpinionState {
    /// Initial state; every opinion must lie in `[−1, 1]`.
    pub fn new(w: Vec<f64>, time: f64) -> Result<Self> {
        if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::invalid("opinions", format!("w[{i}] = {v} is outside [-1, 1]")));
        }
        Ok(Self { w, time })
    }

    /// I.i.d. uniform opinions on `[−1, 1]`.
    pub fn uniform<R: Rng + ?Sized>(n: usize, time: f64, rng: &mut R) -> Self {
        let w = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self { w, time }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Bounded-confidence indicator `χ(|w_i − w_j| ≤ Δ)`.
pub fn kernel_h(wi: f64, wj: f64, delta: f64) -> f64 {
    if (wi - wj).abs() <= delta {
        1.0
    } else {
        0.0
    }
}

/// Degree weighting `e^{−λ c_i} (1 − e^{−β c_j})`.
pub fn kernel_k(ci: usize, cj: usize, params: &KernelParams) -> f64 {
    (-params.lambda * ci as f64).exp() * (1.0 - (-params.beta * cj as f64).exp())
}

/// Interaction weight `P_ij = H · K`, always in `[0, 1]`.
pub fn interaction(wi: f64, wj: f64, ci: usize, cj: usize, params: &KernelParams) -> f64 {
    kernel_h(wi, wj, params.delta) * kernel_k(ci, cj, params)
}

/// Alignment field `F` on the (frozen) network. Isolated agents have `F_i = 0`;
/// parallel edges count once per copy.
pub fn opinion_rhs(w: &[f64], net: &Network, params: &KernelParams) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    opinion_rhs_into(w, net, params, &mut out);
    out
}

/// In-place variant of [`opinion_rhs`].
pub fn opinion_rhs_into(w: &[f64], net: &Network, params: &KernelParams, out: &mut [f64]) {
    assert_eq!(w.len(), net.n_nodes(), "opinion vector and network disagree on N");
    let degrees = net.degrees();
    let receive: Vec<f64> = degrees.iter().map(|&c| (-params.lambda * c as f64).exp()).collect();
    let send: Vec<f64> = degrees.iter().map(|&c| 1.0 - (-params.beta * c as f64).exp()).collect();
    for (i, slot) in out.iter_mut().enumerate() {
        let ci = degrees[i];
        if ci == 0 {
            *slot = 0.0;
            continue;
        }
        let wi = w[i];
        let pull: f64 = net
            .neighbor_multiplicities(i)
            .map(|(j, m)| m as f64 * kernel_h(wi, w[j], params.delta) * send[j] * (w[j] - wi))
            .sum();
        *slot = receive[i] * pull / ci as f64;
    }
}
