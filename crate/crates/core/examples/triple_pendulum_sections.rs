//! Looks for curve-shaped sections of the triple pendulum with both
//! attachment parameters at 1.
//!
//! Run with `--release`; each attempt integrates to t = 3000.

use sectionscope::classify::{aggregate, classify_confirmed, ClassifierConfig, RunVerdict};
use sectionscope::integrate::IntegratorConfig;
use sectionscope::io::commands::attempt_rng;
use sectionscope::kamscan::sample_initial_state;
use sectionscope::reduction::{reduce, ReducedState};
use sectionscope::sections::{collect_sections, default_planes, SectionConfig};
use sectionscope::systems::pendulum::{PendulumParams, PendulumSystem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = PendulumParams::with_eps(1.0, 1.0)?;
    let integrator = IntegratorConfig {
        t_end: 3000.0,
        rel_tol: 1e-6,
        abs_tol: 1e-8,
        ..IntegratorConfig::default()
    };
    let section = SectionConfig {
        slab_halfwidth: 0.05,
        max_points: 5000,
    };
    let system = PendulumSystem::new(params, integrator.baumgarte_gamma, integrator.projection_tol);
    let classifier = ClassifierConfig::default();

    for attempt in 0..50 {
        let s = sample_initial_state(&params, 1.0, &mut attempt_rng(0, attempt))?;
        let reference = reduce(&params, &s)?.to_array();
        let planes = default_planes(&reference, section.slab_halfwidth, ReducedState::ANGULAR)?;
        let (_, clouds) = collect_sections(&system, s.to_array(), &planes, &integrator, &section)?;
        let verdicts: Vec<_> = clouds.iter().map(|c| classify_confirmed(c, &classifier)).collect();
        let labels: Vec<_> = verdicts.iter().map(|v| format!("{}({})", v.label, v.n_points)).collect();
        println!("attempt {attempt:2}: {}", labels.join(" "));
        if aggregate(&verdicts) == RunVerdict::NonIntegrabilityWitness {
            println!("curve-shaped section found");
            return Ok(());
        }
    }
    println!("no curve-shaped section in 50 attempts");
    Ok(())
}
