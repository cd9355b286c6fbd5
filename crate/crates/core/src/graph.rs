//! Non-growing preferential-attachment network.
//!
//! The graph keeps its node count `N` and edge count `E` fixed. Each rewiring
//! event removes one edge chosen uniformly at random and reconnects two nodes
//! drawn with probability `(c_i + α) / (2E + Nα)`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether the rewiring process may create parallel edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgePolicy {
    /// Simple graph: a new edge must join two non-adjacent nodes.
    #[default]
    Simple,
    /// Parallel edges allowed; a new edge only needs two distinct endpoints.
    /// Degrees and neighbor sums count multiplicity.
    Multi,
    /// Parallel edges and self-loops allowed: both endpoints are independent
    /// preferential draws. A self-loop adds 2 to its node's degree. This is
    /// the process whose single-node statistics the master equation tracks.
    Pseudograph,
}

/// Undirected graph with a fixed number of nodes and edges.
///
/// Adjacency is stored in ordered maps (neighbor to multiplicity) so that
/// every traversal, and therefore every floating point reduction over
/// neighbors, is reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    adjacency: Vec<BTreeMap<usize, u32>>,
    degrees: Vec<usize>,
    edges: Vec<(usize, usize)>,
    policy: EdgePolicy,
}

/// Rate parameters of the rewiring process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewireParams {
    /// Attraction coefficient α.
    pub alpha: f64,
    /// Rewiring events per unit time (D).
    pub d_rate: f64,
}

impl RewireParams {
    pub fn new(alpha: f64, d_rate: f64) -> Result<Self> {
        let params = Self { alpha, d_rate };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha", "must be a positive finite number"));
        }
        if !(self.d_rate > 0.0 && self.d_rate.is_finite()) {
            return Err(Error::invalid("d_rate", "must be a positive finite number"));
        }
        Ok(())
    }
}

/// How the initial graph is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// `E` distinct edges drawn uniformly among all node pairs.
    UniformRandom,
    /// Every node has degree exactly γ.
    UniformDegree,
}

/// Result of a single rewiring event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewireOutcome {
    /// `removed` was deleted and `added` was created.
    Rewired {
        removed: (usize, usize),
        added: (usize, usize),
    },
    /// The attachment step drew the endpoints of the removed edge again.
    Reinserted { edge: (usize, usize) },
    /// No admissible partner was found; the removed edge was put back.
    Restored { edge: (usize, usize) },
}

impl RewireOutcome {
    pub fn changed_topology(&self) -> bool {
        matches!(self, RewireOutcome::Rewired { .. })
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Network {
    /// Simple graph on `n` nodes without edges.
    pub fn empty(n: usize) -> Self {
        Self {
            adjacency: vec![BTreeMap::new(); n],
            degrees: vec![0; n],
            edges: Vec::new(),
            policy: EdgePolicy::Simple,
        }
    }

    /// Builds a simple graph from an explicit edge list, rejecting
    /// self-loops, duplicates and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut net = Self::empty(n);
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Graph(format!("edge ({a}, {b}) references a node outside 0..{n}")));
            }
            if a == b {
                return Err(Error::Graph(format!("self-loop at node {a}")));
            }
            if !net.insert_edge(a, b) {
                return Err(Error::Graph(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(net)
    }

    /// Switches the edge policy. Fails if the graph already holds edges the
    /// new policy forbids.
    pub fn with_policy(mut self, policy: EdgePolicy) -> Result<Self> {
        let loops = self.edges.iter().any(|&(a, b)| a == b);
        let parallel = self
            .adjacency
            .iter()
            .enumerate()
            .any(|(i, adj)| adj.iter().any(|(&j, &m)| j != i && m > 1));
        let ok = match policy {
            EdgePolicy::Simple => !loops && !parallel,
            EdgePolicy::Multi => !loops,
            EdgePolicy::Pseudograph => true,
        };
        if !ok {
            return Err(Error::Graph(format!("graph holds edges not allowed under {policy:?}")));
        }
        self.policy = policy;
        Ok(self)
    }

    pub fn policy(&self) -> EdgePolicy {
        self.policy
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Density of connectivity γ = 2E/N.
    /// Largest degree any node can reach under the edge policy: `E`, or
    /// `2E` when self-loops are allowed.
    pub fn degree_bound(&self) -> usize {
        match self.policy {
            EdgePolicy::Pseudograph => 2 * self.n_edges(),
            _ => self.n_edges(),
        }
    }

    pub fn gamma(&self) -> f64 {
        2.0 * self.n_edges() as f64 / self.n_nodes() as f64
    }

    pub fn degree(&self, node: usize) -> usize {
        self.degrees[node]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.degrees.clone()
    }

    /// Distinct neighbors in increasing order.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[node].keys().copied()
    }

    /// Distinct neighbors with the number of parallel edges to each.
    pub fn neighbor_multiplicities(&self, node: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.adjacency[node].iter().map(|(&j, &m)| (j, m))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains_key(&b)
    }

    /// Edges as `(min, max)` pairs, in internal order. Parallel edges appear
    /// once per copy.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn admits(&self, a: usize, b: usize) -> bool {
        match self.policy {
            EdgePolicy::Simple => a != b && !self.has_edge(a, b),
            EdgePolicy::Multi => a != b,
            EdgePolicy::Pseudograph => true,
        }
    }

    fn insert_edge(&mut self, a: usize, b: usize) -> bool {
        if !self.admits(a, b) {
            return false;
        }
        *self.adjacency[a].entry(b).or_insert(0) += 1;
        *self.adjacency[b].entry(a).or_insert(0) += 1;
        self.degrees[a] += 1;
        self.degrees[b] += 1;
        self.edges.push(ordered(a, b));
        true
    }

    fn detach(&mut self, a: usize, b: usize) {
        for (x, y) in [(a, b), (b, a)] {
            let slot = self.adjacency[x].get_mut(&y).expect("edge present in adjacency");
            *slot -= 1;
            if *slot == 0 {
                self.adjacency[x].remove(&y);
            }
            self.degrees[x] -= 1;
        }
    }

    /// Checks every structural invariant. Intended for tests and debug
    /// assertions; cost is `O(E log E)`.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n_nodes();
        let mut copies: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        let mut counts = vec![0usize; n];
        for &(a, b) in &self.edges {
            let loop_ok = a == b && self.policy == EdgePolicy::Pseudograph;
            if (a >= b && !loop_ok) || b >= n {
                return Err(Error::Graph(format!("malformed edge ({a}, {b})")));
            }
            *copies.entry((a, b)).or_insert(0) += 1;
            counts[a] += 1;
            counts[b] += 1;
        }
        for (&(a, b), &m) in &copies {
            if m > 1 && self.policy == EdgePolicy::Simple {
                return Err(Error::Graph(format!("duplicate edge ({a}, {b})")));
            }
            // a loop is recorded from both of its ends
            let m = if a == b { 2 * m } else { m };
            if self.adjacency[a].get(&b) != Some(&m) || self.adjacency[b].get(&a) != Some(&m) {
                return Err(Error::Graph(format!("edge ({a}, {b}) disagrees with adjacency")));
            }
        }
        for (i, &count) in counts.iter().enumerate() {
            let listed: usize = self.adjacency[i].values().map(|&m| m as usize).sum();
            if listed != count || self.degrees[i] != count {
                return Err(Error::Graph(format!(
                    "node {i}: degree {} / adjacency {listed} / edge entries {count}",
                    self.degrees[i]
                )));
            }
        }
        let degree_sum: usize = self.degrees.iter().sum();
        if degree_sum != 2 * self.edges.len() {
            return Err(Error::Graph("degree sum differs from 2E".into()));
        }
        Ok(())
    }
}

/// Selection probabilities `Π_i = (c_i + α) / (2E + Nα)`.
pub fn attachment_probabilities(net: &Network, alpha: f64) -> Vec<f64> {
    selection_probabilities(&net.degrees(), alpha)
}

/// Same as [`attachment_probabilities`] for a bare degree sequence; `2E` is
/// taken to be the degree sum.
pub fn selection_probabilities(degrees: &[usize], alpha: f64) -> Vec<f64> {
    let total = degrees.iter().sum::<usize>() as f64 + degrees.len() as f64 * alpha;
    degrees.iter().map(|&c| (c as f64 + alpha) / total).collect()
}

/// Draws one node with probability `Π_α(c_i)`.
///
/// Sampling is `O(1)`: the weight `c_i + α` splits into the `c_i` edge
/// endpoints incident to `i` and a uniform share `α`, so a draw picks either a
/// uniformly random edge endpoint or a uniformly random node.
pub fn sample_node_preferential<R: Rng + ?Sized>(net: &Network, alpha: f64, rng: &mut R) -> usize {
    let n = net.n_nodes();
    let endpoints = 2 * net.n_edges();
    let total = endpoints as f64 + n as f64 * alpha;
    let x = rng.random::<f64>() * total;
    if x < endpoints as f64 {
        let k = (x as usize).min(endpoints - 1);
        let (a, b) = net.edges[k / 2];
        if k.is_multiple_of(2) {
            a
        } else {
            b
        }
    } else {
        rng.random_range(0..n)
    }
}

/// Number of resampling attempts for the second endpoint, per node.
const RESAMPLE_FACTOR: usize = 100;

/// One rewiring event: remove a uniformly chosen edge, then connect two
/// nodes drawn preferentially from the post-removal degrees. The second node
/// is redrawn until the pair is admissible under the network's
/// [`EdgePolicy`], at most `100·N` times.
pub fn rewire_step<R: Rng + ?Sized>(net: &mut Network, alpha: f64, rng: &mut R) -> Result<RewireOutcome> {
    let n = net.n_nodes();
    let e = net.n_edges();
    if e == 0 || n < 2 {
        return Err(Error::Graph("rewiring needs at least one edge and two nodes".into()));
    }

    let idx = rng.random_range(0..e);
    let removed = net.edges.swap_remove(idx);
    net.detach(removed.0, removed.1);

    let first = sample_node_preferential(net, alpha, rng);
    let saturated = net.policy == EdgePolicy::Simple && net.adjacency[first].len() == n - 1;
    if !saturated {
        for _ in 0..RESAMPLE_FACTOR * n {
            let second = sample_node_preferential(net, alpha, rng);
            if net.admits(first, second) {
                net.insert_edge(first, second);
                let added = ordered(first, second);
                return Ok(if added == removed {
                    RewireOutcome::Reinserted { edge: added }
                } else {
                    RewireOutcome::Rewired { removed, added }
                });
            }
        }
    }

    // Put the edge back at its original slot so the network is bit-identical.
    net.insert_edge(removed.0, removed.1);
    let last = net.edges.len() - 1;
    net.edges.swap(idx, last);
    Ok(RewireOutcome::Restored { edge: removed })
}

/// Advances the network over `dt` time units: `K ~ Poisson(D·dt)` rewiring
/// events. Returns the number of events applied.
pub fn evolve_network<R: Rng + ?Sized>(
    net: &mut Network,
    params: &RewireParams,
    dt: f64,
    rng: &mut R,
) -> Result<usize> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be a non-negative finite number"));
    }
    let mean = params.d_rate * dt;
    if mean == 0.0 {
        return Ok(0);
    }
    let poisson = Poisson::new(mean).map_err(|e| Error::invalid("d_rate * dt", e.to_string()))?;
    let events = poisson.sample(rng) as usize;
    for _ in 0..events {
        rewire_step(net, params.alpha, rng)?;
    }
    Ok(events)
}

/// Edge count implied by `n` nodes at density `gamma`.
pub fn edge_count(n: usize, gamma: f64) -> Result<usize> {
    let e = n as f64 * gamma / 2.0;
    let rounded = e.round();
    if gamma.is_nan() || gamma <= 0.0 || (e - rounded).abs() > 1e-9 || rounded < 1.0 {
        return Err(Error::Construction(format!(
            "N·γ/2 = {e} is not a positive integer edge count (N = {n}, γ = {gamma})"
        )));
    }
    let e = rounded as usize;
    let max = n * n.saturating_sub(1) / 2;
    if e > max {
        return Err(Error::Construction(format!(
            "{e} edges do not fit in a simple graph on {n} nodes (max {max})"
        )));
    }
    Ok(e)
}

/// Draws the initial network.
pub fn init_network<R: Rng + ?Sized>(n: usize, gamma: f64, mode: InitMode, rng: &mut R) -> Result<Network> {
    let e = edge_count(n, gamma)?;
    match mode {
        InitMode::UniformRandom => Ok(uniform_random(n, e, rng)),
        InitMode::UniformDegree => {
            if (gamma - gamma.round()).abs() > 1e-9 {
                return Err(Error::Construction(format!(
                    "uniform_degree needs an integer γ, got {gamma}"
                )));
            }
            regular_graph(n, gamma.round() as usize, rng)
        }
    }
}

fn uniform_random<R: Rng + ?Sized>(n: usize, e: usize, rng: &mut R) -> Network {
    let pairs = n * (n - 1) / 2;
    let mut picked = rand::seq::index::sample(rng, pairs, e).into_vec();
    picked.sort_unstable();
    let mut net = Network::empty(n);
    for k in picked {
        let (a, b) = pair_from_index(n, k);
        net.insert_edge(a, b);
    }
    net
}

/// Maps `0..n(n-1)/2` onto pairs `(a, b)` with `a < b`, row by row.
fn pair_from_index(n: usize, mut k: usize) -> (usize, usize) {
    let mut a = 0;
    loop {
        let row = n - 1 - a;
        if k < row {
            return (a, a + 1 + k);
        }
        k -= row;
        a += 1;
    }
}

const PAIRING_RESTARTS: usize = 10_000;

/// Random `degree`-regular graph by sequential stub pairing: two free stubs
/// are drawn uniformly and joined unless that would create a loop or a
/// multi-edge. A stuck pairing is discarded and restarted.
fn regular_graph<R: Rng + ?Sized>(n: usize, degree: usize, rng: &mut R) -> Result<Network> {
    if !(n * degree).is_multiple_of(2) {
        return Err(Error::Construction(format!(
            "N·γ = {} is odd; no {degree}-regular graph on {n} nodes",
            n * degree
        )));
    }
    'restart: for _ in 0..PAIRING_RESTARTS {
        let mut net = Network::empty(n);
        let mut stubs: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, degree)).collect();
        while !stubs.is_empty() {
            if !has_admissible_pair(&net, &stubs) {
                continue 'restart;
            }
            loop {
                let i = rng.random_range(0..stubs.len());
                let j = rng.random_range(0..stubs.len());
                let (a, b) = (stubs[i], stubs[j]);
                if i != j && a != b && !net.has_edge(a, b) {
                    net.insert_edge(a, b);
                    let (hi, lo) = if i > j { (i, j) } else { (j, i) };
                    stubs.swap_remove(hi);
                    stubs.swap_remove(lo);
                    break;
                }
            }
        }
        return Ok(net);
    }
    Err(Error::Construction(format!(
        "stub pairing for a {degree}-regular graph on {n} nodes failed {PAIRING_RESTARTS} times"
    )))
}

fn has_admissible_pair(net: &Network, stubs: &[usize]) -> bool {
    let nodes: BTreeSet<usize> = stubs.iter().copied().collect();
    let nodes: Vec<usize> = nodes.into_iter().collect();
    nodes
        .iter()
        .enumerate()
        .any(|(k, &a)| nodes[k + 1..].iter().any(|&b| !net.has_edge(a, b)))
}

/// JSON graph snapshot: `{time, nodes: [{id, degree, opinion?}], edges}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSnapshot {
    pub time: f64,
    pub nodes: Vec<SnapshotNode>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotNode {
    pub id: usize,
    pub degree: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub opinion: Option<f64>,
}

impl GraphSnapshot {
    /// Captures the graph; pass `opinions` to attach one opinion per node.
    pub fn capture(net: &Network, time: f64, opinions: Option<&[f64]>) -> Self {
        let nodes = (0..net.n_nodes())
            .map(|id| SnapshotNode {
                id,
                degree: net.degree(id),
                opinion: opinions.map(|w| w[id]),
            })
            .collect();
        let mut edges: Vec<[usize; 2]> = net.edges().iter().map(|&(a, b)| [a, b]).collect();
        edges.sort_unstable();
        Self { time, nodes, edges }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serialization cannot fail")
    }
}
