//! Monte Carlo degree histograms against the master equation and the two
//! stationary laws.
//!
//! Self-loops are allowed here (`EdgePolicy::Pseudograph`), which makes the
//! two endpoints of a new edge independent draws, as the master equation
//! assumes.

use opnet::degree_master::{
    integrate_master_at, log_log_slope, stationary_poisson, stationary_power_law, total_variation,
    windowed_total_variation, MasterParams,
};
use opnet::graph::{EdgePolicy, InitMode, RewireParams};
use opnet::sim::{run_degree_ensemble, DegreeEnsembleConfig};

fn main() -> opnet::Result<()> {
    for alpha in [0.01, 100.0] {
        let cfg = DegreeEnsembleConfig {
            n: 200,
            gamma: 4.0,
            rewire: RewireParams::new(alpha, 1.0)?,
            init_graph: InitMode::UniformDegree,
            edge_policy: EdgePolicy::Pseudograph,
            graphs: 100,
            times: vec![100.0, 400.0, 2_000.0],
            pool_from: None,
            seed: 5,
        };
        let ensemble = run_degree_ensemble(&cfg)?;
        let params = MasterParams {
            d_rate: 1.0,
            n_edges: cfg.n_edges(),
            n_nodes: cfg.n,
            alpha,
        };
        let master = integrate_master_at(&ensemble.initial, &params, &cfg.times, params.recommended_dt(cfg.c_max()))?;
        let power_law = stationary_power_law(alpha, cfg.gamma, cfg.c_max())?;
        let poisson = stationary_poisson(cfg.gamma, cfg.c_max())?;

        println!("alpha = {alpha}");
        println!("{:>8} {:>12} {:>14} {:>12} {:>8}", "t", "TV(MC,ME)", "TV(MC,law)", "TV(MC,Poi)", "slope");
        for ((t, h), m) in cfg.times.iter().zip(&ensemble.histograms).zip(&master) {
            println!(
                "{t:>8} {:>12.4} {:>14.4} {:>12.4} {:>8}",
                total_variation(h, m)?,
                windowed_total_variation(h, &power_law, 1, 50)?,
                total_variation(h, &poisson)?,
                log_log_slope(h, 2, 40).map_or("-".into(), |s| format!("{s:.2}")),
            );
        }
    }
    Ok(())
}
