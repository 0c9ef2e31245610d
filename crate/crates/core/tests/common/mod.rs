//! Synthetic section clouds with known labels.
#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sectionscope::classify::Label;
use sectionscope::sections::{PlaneSpec, SectionCloud};

pub const SLAB: f64 = 1e-3;

pub fn flat_plane() -> PlaneSpec {
    PlaneSpec::coordinate(0, 1, [0.0, 0.0], SLAB, [false; 4]).unwrap()
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random::<f64>().max(1e-300);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (TAU * v).cos()
}

/// Cloud on the plane `x0 = x1 = 0`; in-plane coordinates are `(x2, x3)` and
/// the second functional is uniform across the slab.
pub fn cloud(rng: &mut ChaCha8Rng, pts: Vec<[f64; 2]>) -> SectionCloud {
    let points = pts
        .into_iter()
        .map(|[x, y]| [0.0, rng.random_range(-SLAB..SLAB), x, y])
        .collect();
    SectionCloud::from_points(flat_plane(), points)
}

/// `k` in `[2, 20]` Gaussian blobs with radius (two standard deviations) at
/// most the slab half-width, centered uniformly in `[-1, 1]^2`.
pub fn blob_cloud(rng: &mut ChaCha8Rng) -> SectionCloud {
    let k = rng.random_range(2..=20);
    let mut pts = Vec::new();
    for _ in 0..k {
        let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let sigma = 0.5 * SLAB * rng.random_range(0.2..=1.0);
        let n = rng.random_range(20..=100);
        for _ in 0..n {
            pts.push([c[0] + sigma * gaussian(rng), c[1] + sigma * gaussian(rng)]);
        }
    }
    cloud(rng, pts)
}

/// Random smooth closed curve: a Fourier series with three harmonics per
/// coordinate and decaying amplitudes.
pub struct RandomCurve {
    coeffs: [[[f64; 2]; 3]; 2],
    center: [f64; 2],
}

impl RandomCurve {
    pub fn new(rng: &mut ChaCha8Rng) -> Self {
        let coeffs = std::array::from_fn(|_| {
            std::array::from_fn(|m| {
                let a = 1.0 / (m + 1) as f64;
                [a * rng.random_range(-1.0..1.0), a * rng.random_range(-1.0..1.0)]
            })
        });
        // keep the curve from collapsing to a point
        let mut c = Self {
            coeffs,
            center: [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)],
        };
        c.coeffs[0][0][0] += 0.5;
        c.coeffs[1][0][1] += 0.5;
        c
    }

    pub fn at(&self, s: f64) -> [f64; 2] {
        std::array::from_fn(|d| {
            self.center[d]
                + (0..3)
                    .map(|m| {
                        let w = (m + 1) as f64 * s;
                        self.coeffs[d][m][0] * w.cos() + self.coeffs[d][m][1] * w.sin()
                    })
                    .sum::<f64>()
        })
    }

    fn normal(&self, s: f64) -> [f64; 2] {
        let h = 1e-6;
        let (a, b) = (self.at(s - h), self.at(s + h));
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let n = dx.hypot(dy).max(1e-300);
        [-dy / n, dx / n]
    }

    /// `n` points at uniformly random parameters, each moved along the
    /// normal by up to `noise`.
    pub fn sample(&self, rng: &mut ChaCha8Rng, n: usize, noise: f64) -> Vec<[f64; 2]> {
        (0..n)
            .map(|_| {
                let s = rng.random_range(0.0..TAU);
                let p = self.at(s);
                let nv = self.normal(s);
                let d = noise * rng.random_range(-1.0..=1.0);
                [p[0] + d * nv[0], p[1] + d * nv[1]]
            })
            .collect()
    }
}

/// 500 to 5000 points on a random closed curve with transverse noise at
/// most the slab half-width.
pub fn curve_cloud(rng: &mut ChaCha8Rng) -> SectionCloud {
    let curve = RandomCurve::new(rng);
    let n = rng.random_range(500..=5000);
    let noise = SLAB * rng.random_range(0.0..=1.0);
    let pts = curve.sample(rng, n, noise);
    cloud(rng, pts)
}

/// The 200-cloud suite: 100 blob clouds followed by 100 curve clouds.
pub fn oracle_suite(rng: &mut ChaCha8Rng) -> Vec<(SectionCloud, Label)> {
    let mut suite: Vec<_> = (0..100).map(|_| (blob_cloud(rng), Label::Points)).collect();
    suite.extend((0..100).map(|_| (curve_cloud(rng), Label::Curves)));
    suite
}
