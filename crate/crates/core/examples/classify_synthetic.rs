//! Classifies two hand-made clouds: a few tight blobs and a noisy ellipse.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sectionscope::classify::{classify_confirmed, ClassifierConfig};
use sectionscope::sections::{PlaneSpec, SectionCloud};

const SLAB: f64 = 1e-3;

fn cloud(rng: &mut ChaCha8Rng, pts: impl IntoIterator<Item = [f64; 2]>) -> Result<SectionCloud, sectionscope::Error> {
    let plane = PlaneSpec::coordinate(0, 1, [0.0, 0.0], SLAB, [false; 4])?;
    let points = pts
        .into_iter()
        .map(|[x, y]| [0.0, rng.random_range(-SLAB..SLAB), x, y])
        .collect();
    Ok(SectionCloud::from_points(plane, points))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = ClassifierConfig::default();

    let centres = [[0.2, 0.4], [-0.6, 0.1], [0.5, -0.7]];
    let blobs: Vec<[f64; 2]> = (0..240)
        .map(|k| {
            let c = centres[k % 3];
            [c[0] + rng.random_range(-3e-4..3e-4), c[1] + rng.random_range(-3e-4..3e-4)]
        })
        .collect();
    let blobs = cloud(&mut rng, blobs)?;

    let ellipse: Vec<[f64; 2]> = (0..2000)
        .map(|_| {
            let s: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let r = 1.0 + rng.random_range(-SLAB..SLAB);
            [0.8 * r * s.cos(), 0.5 * r * s.sin()]
        })
        .collect();
    let ellipse = cloud(&mut rng, ellipse)?;

    for (name, c) in [("blobs", &blobs), ("ellipse", &ellipse)] {
        let v = classify_confirmed(c, &cfg);
        println!(
            "{name:8} {:12} clusters {:3}  widest {:.4}  dimension {}",
            v.label.as_str(),
            v.n_clusters,
            v.max_cluster_diameter,
            v.correlation_dimension.map_or("n/a".into(), |d| format!("{d:.2}"))
        );
    }
    Ok(())
}
