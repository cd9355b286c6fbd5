//! The closed-form one-step controller on a small graph.

use opnet::control::{instantaneous_control, selector_q, step_opinions_rk, ControlConfig, RkTableau};
use opnet::graph::Network;
use opnet::opinion::KernelParams;

fn main() -> opnet::Result<()> {
    // a hub (0) with five leaves, two of which also touch each other
    let net = Network::from_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 2)])?;
    let kernel = KernelParams::new(0.01, 1.0, 0.4)?;
    let mut w = vec![-0.2, -0.5, -0.3, 0.1, 0.0, -0.6];
    let cc = ControlConfig {
        w_d: 0.8,
        nu: 0.1,
        nu_p: None,
        kappa: 0.5,
        c_star: 2,
        horizon: 1,
        dt: 0.05,
    };
    let q = selector_q(&net, cc.c_star);
    println!("controlled agents: {:?}", q.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i).collect::<Vec<_>>());

    let euler = RkTableau::explicit_euler();
    for step in 0..=60 {
        let decision = instantaneous_control(&w, &net, &kernel, &cc);
        if step % 10 == 0 {
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            println!("step {step:>3}: mean w = {mean:+.4}, raw u = {:+.4}, applied u = {:+.4}", decision.raw, decision.u);
        }
        w = step_opinions_rk(&w, &net, &kernel, decision.u, &q, &euler, cc.dt);
    }

    // one agent, no penalty, no bound: a single Euler step lands on the target
    let single = Network::empty(1);
    let free = ControlConfig { nu: 0.0, kappa: f64::INFINITY, c_star: 0, ..cc };
    let d = instantaneous_control(&[0.0], &single, &kernel, &free);
    let next = step_opinions_rk(&[0.0], &single, &kernel, d.u, &[true], &euler, free.dt);
    println!("single agent: u = {}, w after one step = {}", d.u, next[0]);
    Ok(())
}
