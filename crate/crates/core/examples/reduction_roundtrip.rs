//! Reduces a pendulum state to the four relative-angle coordinates and
//! embeds it back.

use sectionscope::reduction::{embed, from_angles, reduce, segment_angles};
use sectionscope::systems::pendulum::{pendulum_angular_momentum, pendulum_energy, PendulumParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = PendulumParams::with_eps(0.4, 0.7)?;
    let s = from_angles(&params, [0.9, -0.2, 2.1], [0.3, 0.1, -0.5]);
    let r = reduce(&params, &s)?;
    println!("reduced: {:?}", r.to_array());

    let a = segment_angles(&params, &s)?;
    let back = embed(&params, &r, a.alpha[0], a.alpha_dot[0]);
    let err = s
        .to_array()
        .iter()
        .zip(back.to_array())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    println!("round-trip error {err:.2e}");
    println!(
        "E = {:.6}, L = {:.6}",
        pendulum_energy(&params, &back),
        pendulum_angular_momentum(&params, &back)
    );
    Ok(())
}
