//! Consensus versus degree threshold c*: every run shares the initial graph,
//! the initial opinions and the rewiring trajectory.
//!
//! ```text
//! cargo run --release --example threshold_sweep -- [seed]
//! ```

use opnet::control::{ControlConfig, TableauKind};
use opnet::graph::{EdgePolicy, InitMode, RewireParams};
use opnet::opinion::KernelParams;
use opnet::sim::{sweep_c_star, InitOpinion, SimConfig};

fn main() -> opnet::Result<()> {
    let seed = std::env::args().nth(1).map_or(42, |s| s.parse().expect("seed must be an integer"));
    let dt = 0.005;
    let cfg = SimConfig {
        n: 100,
        gamma: 30.0,
        rewire: RewireParams::new(0.01, 20.0)?,
        init_graph: InitMode::UniformDegree,
        edge_policy: EdgePolicy::Simple,
        t0: 0.0,
        tf: 50.0,
        dt,
        kernel: KernelParams::new(0.01, 1.0, 0.4)?,
        control: Some(ControlConfig {
            w_d: 0.8,
            nu: 5.0,
            nu_p: None,
            kappa: 0.1,
            c_star: 10,
            horizon: 1,
            dt,
        }),
        tableau: TableauKind::Euler,
        project_opinions: true,
        init_opinion: InitOpinion::Uniform,
        target: 0.8,
        seed,
        snapshot_times: vec![],
    };
    let rows = sweep_c_star(&cfg, &[10, 15, 20, 25, 30, 35, 40])?;
    println!("{:>4} {:>12} {:>12} {:>10} {:>12}", "c*", "V(t0)", "V(tf)", "share", "mean |u|");
    for r in rows {
        let mean_u = r.controls.iter().map(|u| u.abs()).sum::<f64>() / (r.controls.len() - 1) as f64;
        println!(
            "{:>4} {:>12.4e} {:>12.4e} {:>10.2} {:>12.4e}",
            r.c_star, r.initial_consensus, r.final_consensus, r.final_controlled_fraction, mean_u
        );
    }
    Ok(())
}
