//! Rewire a uniform-degree graph and watch hubs form.
//!
//! ```text
//! cargo run --release --example rewiring -- [alpha]
//! ```

use opnet::degree_master::{empirical_degree_distribution, log_log_slope};
use opnet::graph::{evolve_network, init_network, GraphSnapshot, InitMode, RewireParams};
use opnet::rng::{stream_rng, GRAPH_INIT, NETWORK_EVOLUTION};

fn main() -> opnet::Result<()> {
    let alpha: f64 = std::env::args().nth(1).map_or(0.01, |s| s.parse().expect("alpha must be a number"));
    let params = RewireParams::new(alpha, 1.0)?;
    let mut net = init_network(200, 4.0, InitMode::UniformDegree, &mut stream_rng(1, GRAPH_INIT, 0))?;
    let mut rng = stream_rng(1, NETWORK_EVOLUTION, 0);

    println!("{:>8} {:>6} {:>8} {:>10}", "t", "c_max", "p(0)", "slope");
    let mut now = 0.0;
    for t in [0.0, 100.0, 1_000.0, 10_000.0, 50_000.0] {
        evolve_network(&mut net, &params, t - now, &mut rng)?;
        now = t;
        let p = empirical_degree_distribution(&net);
        let c_max = net.degrees().into_iter().max().unwrap_or(0);
        let slope = log_log_slope(&p, 2, 40).map_or("-".into(), |s| format!("{s:.3}"));
        println!("{t:>8} {c_max:>6} {:>8.3} {slope:>10}", p.probs()[0]);
    }
    net.check_invariants()?;

    let snapshot = GraphSnapshot::capture(&net, now, None);
    println!("final snapshot: {} nodes, {} edges, {} bytes of JSON", snapshot.nodes.len(), snapshot.edges.len(), snapshot.to_json().len());
    Ok(())
}
