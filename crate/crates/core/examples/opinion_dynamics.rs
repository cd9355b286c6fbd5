//! Uncontrolled bounded-confidence dynamics on a slowly rewiring graph.
//! Opinions split into clusters roughly 2Δ apart.

use opnet::control::TableauKind;
use opnet::graph::{EdgePolicy, InitMode, RewireParams};
use opnet::opinion::KernelParams;
use opnet::sim::{run_simulation, InitOpinion, SimConfig};

fn main() -> opnet::Result<()> {
    let cfg = SimConfig {
        n: 100,
        gamma: 30.0,
        rewire: RewireParams::new(0.01, 20.0)?,
        init_graph: InitMode::UniformRandom,
        edge_policy: EdgePolicy::Simple,
        t0: 0.0,
        tf: 50.0,
        dt: 0.005,
        kernel: KernelParams::new(0.01, 1.0, 0.4)?,
        control: None,
        tableau: TableauKind::Euler,
        project_opinions: true,
        init_opinion: InitOpinion::Uniform,
        target: 0.0,
        seed: 3,
        snapshot_times: vec![],
    };
    let record = run_simulation(&cfg)?;
    for k in (0..record.len()).step_by(2_000) {
        let w = &record.opinions[k];
        let lo = w.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("t = {:>5.1}  range [{lo:+.3}, {hi:+.3}]  V_0 = {:.4}", record.times[k], record.consensus[k]);
    }

    let mut last = record.opinions.last().expect("non-empty").clone();
    last.sort_by(f64::total_cmp);
    let mut clusters = vec![vec![last[0]]];
    for pair in last.windows(2) {
        if pair[1] - pair[0] > 1e-3 {
            clusters.push(Vec::new());
        }
        clusters.last_mut().expect("non-empty").push(pair[1]);
    }
    println!("{} clusters at t = {}:", clusters.len(), cfg.tf);
    for c in clusters {
        println!("  {:>3} agents near {:+.4}", c.len(), c.iter().sum::<f64>() / c.len() as f64);
    }
    Ok(())
}
