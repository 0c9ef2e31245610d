mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sectionscope::classify::{aggregate, classify, ClassifierConfig, Label, Verdict};
use sectionscope::integrate::IntegratorConfig;
use sectionscope::io::output::num;
use sectionscope::kamscan::sample_initial_state;
use sectionscope::reduction::from_angles;
use sectionscope::sections::{collect_sections, default_planes, PhaseMap, SectionCloud, SectionConfig};
use sectionscope::systems::pendulum::{
    constraint_jacobian, constraint_values, pendulum_rhs, CartesianState, PendulumParams,
};
use sectionscope::systems::synthetic::TorusFlow;

fn state(eps1: f64, eps2: f64, seed: u64) -> (PendulumParams, CartesianState) {
    let params = PendulumParams::with_eps(eps1, eps2).unwrap();
    let s = sample_initial_state(&params, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    (params, s)
}

fn rotate(cloud: &SectionCloud, angle: f64) -> SectionCloud {
    let (s, c) = angle.sin_cos();
    let points = cloud
        .points
        .iter()
        .map(|p| [p[0], p[1], c * p[2] - s * p[3], s * p[2] + c * p[3]])
        .collect();
    SectionCloud::from_points(cloud.plane.clone(), points)
}

fn torus_sections(y0: [f64; 2], t_end: f64) -> Vec<SectionCloud> {
    let flow = TorusFlow::default();
    let section = SectionConfig {
        slab_halfwidth: 0.01,
        max_points: usize::MAX,
    };
    let planes = default_planes(&flow.phase(0.0, &[0.0; 2]).unwrap(), section.slab_halfwidth, flow.angular_mask()).unwrap();
    let integrator = IntegratorConfig {
        t_end,
        ..IntegratorConfig::default()
    };
    collect_sections(&flow, y0, &planes, &integrator, &section).unwrap().1
}

fn label() -> impl Strategy<Value = Label> {
    prop_oneof![
        Just(Label::Empty),
        Just(Label::Points),
        Just(Label::Curves),
        Just(Label::Inconclusive)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobian_matches_finite_differences(eps1 in 0.0..=1.0, eps2 in 0.0..=1.0, seed in any::<u64>()) {
        let (p, s) = state(eps1, eps2, seed);
        let j = constraint_jacobian(&p, &s);
        let h = 1e-6;
        for col in 0..6 {
            let (mut plus, mut minus) = (s.to_array(), s.to_array());
            plus[col] += h;
            minus[col] -= h;
            let fp = constraint_values(&p, &CartesianState::from_array(0.0, &plus));
            let fm = constraint_values(&p, &CartesianState::from_array(0.0, &minus));
            for i in 0..3 {
                prop_assert!(((fp[i] - fm[i]) / (2.0 * h) - j[(i, col)]).abs() < 1e-6);
            }
        }
    }

    /// Constraint forces do no work and exert no torque about the pivot.
    #[test]
    fn free_accelerations_keep_energy_and_momentum(eps1 in 0.0..=1.0, eps2 in 0.0..=1.0, seed in any::<u64>()) {
        let (p, s) = state(eps1, eps2, seed);
        let a = pendulum_rhs(&p, &s, 10.0).unwrap().accel;
        let de: f64 = (0..3).map(|i| p.masses[i] * s.v[i].dot(&a[i])).sum();
        let dl: f64 = (0..3).map(|i| p.masses[i] * s.r[i].perp(&a[i])).sum();
        let scale: f64 = (0..3).map(|i| p.masses[i] * s.v[i].norm_squared()).sum::<f64>().max(1.0);
        prop_assert!(de.abs() <= 1e-10 * scale, "dE/dt = {de:e}");
        prop_assert!(dl.abs() <= 1e-10 * scale, "dL/dt = {dl:e}");
    }

    #[test]
    fn decoupled_first_mass_ignores_the_rest(
        eps2 in 0.0..=1.0,
        a1 in -3.0..3.0,
        w1 in -1.0..1.0,
        rest in proptest::array::uniform4(-3.0..3.0f64),
    ) {
        let p = PendulumParams::with_eps(0.0, eps2).unwrap();
        let base = from_angles(&p, [a1, 0.4, -1.1], [w1, 0.2, -0.3]);
        let other = from_angles(&p, [a1, rest[0], rest[1]], [w1, rest[2], rest[3]]);
        let (x, y) = (pendulum_rhs(&p, &base, 10.0).unwrap(), pendulum_rhs(&p, &other, 10.0).unwrap());
        prop_assert!((x.accel[0] - y.accel[0]).norm() < 1e-12);
    }

    #[test]
    fn run_verdict_ignores_plane_order(labels in proptest::collection::vec(label(), 0..8), k in 0usize..8) {
        let verdicts: Vec<Verdict> = labels
            .iter()
            .map(|&l| Verdict { label: l, ..Verdict::empty(0) })
            .collect();
        let mut rotated = verdicts.clone();
        rotated.reverse();
        if !rotated.is_empty() {
            let n = rotated.len();
            rotated.rotate_left(k % n);
        }
        prop_assert_eq!(aggregate(&verdicts), aggregate(&rotated));
    }

    #[test]
    fn numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn classify_ignores_order_and_rotation(seed in any::<u64>(), curve in any::<bool>(), angle in 0.0..std::f64::consts::TAU) {
        let cfg = ClassifierConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cloud = if curve { common::curve_cloud(&mut rng) } else { common::blob_cloud(&mut rng) };
        let base = classify(&cloud, &cfg);

        let mut reversed = cloud.clone();
        reversed.points.reverse();
        let reversed = SectionCloud::from_points(cloud.plane.clone(), reversed.points);
        prop_assert_eq!(classify(&reversed, &cfg).label, base.label);
        prop_assert_eq!(classify(&rotate(&cloud, angle), &cfg).label, base.label);
    }

    #[test]
    fn section_points_stay_in_the_slab(a in -3.0..3.0, b in -3.0..3.0) {
        for cloud in torus_sections([a, b], 2000.0) {
            for x in &cloud.points {
                for k in 0..2 {
                    prop_assert!(cloud.plane.functional(k, x).abs() <= cloud.plane.slab_halfwidth * (1.0 + 1e-9));
                }
            }
        }
    }

    #[test]
    fn longer_runs_keep_more_points(a in -3.0..3.0, b in -3.0..3.0) {
        let short = torus_sections([a, b], 1000.0);
        let long = torus_sections([a, b], 2000.0);
        for (s, l) in short.iter().zip(&long) {
            prop_assert!(l.len() >= s.len());
        }
    }
}
