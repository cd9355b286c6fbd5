//! Receding-horizon control: longer horizons and higher-order tableaus,
//! compared with the one-step closed form.

use opnet::control::{horizon_cost, instantaneous_control, mpc_control, ControlConfig, RkTableau};
use opnet::graph::{init_network, InitMode};
use opnet::opinion::{KernelParams, OpinionState};
use opnet::rng::{stream_rng, GRAPH_INIT, OPINION_INIT};

fn main() -> opnet::Result<()> {
    let net = init_network(40, 6.0, InitMode::UniformRandom, &mut stream_rng(11, GRAPH_INIT, 0))?;
    let w = OpinionState::uniform(40, 0.0, &mut stream_rng(11, OPINION_INIT, 0)).w;
    let kernel = KernelParams::new(0.01, 1.0, 0.4)?;
    let base = ControlConfig {
        w_d: 0.8,
        nu: 1.0,
        nu_p: None,
        kappa: f64::INFINITY,
        c_star: 6,
        horizon: 1,
        dt: 0.05,
    };

    let closed = instantaneous_control(&w, &net, &kernel, &base);
    let one = mpc_control(&w, &net, &kernel, &base, &RkTableau::explicit_euler());
    println!("p = 1, Euler: closed form {:+.10}, solver {:+.10}", closed.u, one.controls[0]);

    for (name, tab) in [("euler", RkTableau::explicit_euler()), ("heun", RkTableau::heun()), ("rk4", RkTableau::rk4())] {
        for p in [1, 3, 6] {
            let cc = ControlConfig { horizon: p, kappa: 0.5, ..base };
            let sol = mpc_control(&w, &net, &kernel, &cc, &tab);
            let zero = horizon_cost(&w, &net, &kernel, &cc, &tab, &vec![0.0; p]);
            println!(
                "{name:>5} p = {p}: u0 = {:+.4}, cost {:.6} (u = 0: {zero:.6}), {} iterations, converged = {}",
                sol.controls[0], sol.cost, sol.iterations, sol.converged
            );
        }
    }
    Ok(())
}
