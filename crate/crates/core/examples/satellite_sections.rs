//! Sections of the rotating-satellite model near its reference point.

use sectionscope::classify::{classify_confirmed, ClassifierConfig};
use sectionscope::integrate::IntegratorConfig;
use sectionscope::io::commands::{plane_axes, SATELLITE_COORDS};
use sectionscope::sections::{collect_sections, default_planes, PhaseMap, SectionConfig};
use sectionscope::systems::satellite::{SatelliteParams, SatelliteState, SatelliteSystem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let system = SatelliteSystem {
        params: SatelliteParams::default(),
    };
    let integrator = IntegratorConfig {
        t_end: 1e4,
        rel_tol: 1e-8,
        abs_tol: 1e-10,
        ..IntegratorConfig::default()
    };
    let section = SectionConfig {
        slab_halfwidth: 0.01,
        max_points: 5000,
    };
    let y0 = SatelliteState::reference_point().to_array();
    let planes = default_planes(&system.phase(0.0, &y0)?, section.slab_halfwidth, system.angular_mask())?;
    let (summary, clouds) = collect_sections(&system, y0, &planes, &integrator, &section)?;
    println!("energy drift {:.2e} over t = {}", summary.energy_drift.unwrap_or(0.0), summary.t_final);

    let cfg = ClassifierConfig::default();
    for cloud in &clouds {
        let v = classify_confirmed(cloud, &cfg);
        let (fixed, _) = plane_axes(&cloud.plane);
        println!(
            "plane fixing {} and {}: {} with {} points, dimension {}",
            SATELLITE_COORDS[fixed[0]],
            SATELLITE_COORDS[fixed[1]],
            v.label,
            v.n_points,
            v.correlation_dimension.map_or("n/a".into(), |d| format!("{d:.2}"))
        );
    }
    Ok(())
}
