//! Integrates the triple pendulum and reports how well energy, angular
//! momentum and the rod constraints are held.

use std::ops::ControlFlow;

use sectionscope::integrate::{integrate_trajectory, IntegratorConfig};
use sectionscope::reduction::from_angles;
use sectionscope::systems::pendulum::{project_to_manifold, PendulumParams, PendulumSystem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = PendulumParams::with_eps(1.0, 1.0)?;
    let cfg = IntegratorConfig {
        t_end: 200.0,
        ..IntegratorConfig::default()
    };
    let system = PendulumSystem::new(params, cfg.baumgarte_gamma, cfg.projection_tol);
    let s = from_angles(&params, [0.3, 1.4, -0.8], [0.6, -0.4, 0.9]);
    let s = project_to_manifold(&params, &s, cfg.projection_tol, 20)?;

    let summary = integrate_trajectory(&system, 0.0, s.to_array(), &cfg, |_| Ok(ControlFlow::Continue(())))?;
    println!("t = {} after {} steps ({} rejected)", summary.t_final, summary.steps, summary.rejected);
    println!("energy drift      {:.2e}", summary.energy_drift.unwrap_or(0.0));
    println!("momentum drift    {:.2e}", summary.momentum_drift.unwrap_or(0.0));
    println!("constraint resid. {:.2e}", summary.max_constraint_residual.unwrap_or(0.0));
    Ok(())
}
