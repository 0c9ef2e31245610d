//! Intersections of trajectories with 2-planes of a 4-dimensional phase space.
//!
//! A plane is the common zero set of two linear functionals. Each step of a
//! trajectory is tested for a sign change of the first functional; the root
//! is refined on the dense interpolant and kept when the second functional is
//! within the slab half-width. Trajectories on invariant 2-tori leave a
//! finite set of point clusters, trajectories filling an energy shell leave
//! curves.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate_trajectory, DenseSegment, IntegratorConfig, OdeSystem, TrajectorySummary};
use crate::reduction::wrap_angle;

/// Maps an integrator state to the 4 phase coordinates used for sections.
pub trait PhaseMap<const N: usize> {
    fn phase(&self, t: f64, y: &[f64; N]) -> Result<[f64; 4]>;

    /// Coordinates that live on a circle and are compared modulo `2 pi`.
    fn angular_mask(&self) -> [bool; 4];
}

/// Componentwise `a - b`, taking the shorter arc on angular coordinates.
pub fn wrap_diff(a: &[f64; 4], b: &[f64; 4], angular: &[bool; 4]) -> [f64; 4] {
    std::array::from_fn(|i| {
        let d = a[i] - b[i];
        if angular[i] {
            wrap_angle(d)
        } else {
            d
        }
    })
}

fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneSpec {
    /// Coefficient rows `(a, b, c, d)` of the two functionals.
    pub rows: [[f64; 4]; 2],
    /// Right-hand sides `e1, e2`.
    pub offsets: [f64; 2],
    pub slab_halfwidth: f64,
    pub angular: [bool; 4],
}

impl PlaneSpec {
    pub fn new(rows: [[f64; 4]; 2], offsets: [f64; 2], slab_halfwidth: f64, angular: [bool; 4]) -> Result<Self> {
        let p = Self {
            rows,
            offsets,
            slab_halfwidth,
            angular,
        };
        p.validate()?;
        Ok(p)
    }

    /// The plane `{x_i = value_i, x_j = value_j}`.
    pub fn coordinate(i: usize, j: usize, values: [f64; 2], slab_halfwidth: f64, angular: [bool; 4]) -> Result<Self> {
        let mut rows = [[0.0; 4]; 2];
        rows[0][i] = 1.0;
        rows[1][j] = 1.0;
        Self::new(rows, values, slab_halfwidth, angular)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slab_halfwidth.is_finite() && self.slab_halfwidth > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "slab half-width {} must be > 0",
                self.slab_halfwidth
            )));
        }
        let [a, b] = &self.rows;
        let (aa, bb, ab) = (dot4(a, a), dot4(b, b), dot4(a, b));
        if !(aa * bb > 0.0) || (aa * bb - ab * ab) <= 1e-12 * aa * bb {
            return Err(Error::InvalidParameter("plane functionals must be linearly independent".into()));
        }
        Ok(())
    }

    /// Minimum-norm point of the plane; functionals are measured from here so
    /// angular seams sit opposite the plane.
    pub fn anchor(&self) -> [f64; 4] {
        let [a, b] = &self.rows;
        let (aa, bb, ab) = (dot4(a, a), dot4(b, b), dot4(a, b));
        let det = aa * bb - ab * ab;
        let [e1, e2] = self.offsets;
        let w1 = (bb * e1 - ab * e2) / det;
        let w2 = (aa * e2 - ab * e1) / det;
        std::array::from_fn(|i| w1 * a[i] + w2 * b[i])
    }

    /// Value of functional `k` (0 or 1) at `x`, wrap-aware.
    pub fn functional(&self, k: usize, x: &[f64; 4]) -> f64 {
        dot4(&self.rows[k], &wrap_diff(x, &self.anchor(), &self.angular))
    }

    /// Orthonormal basis of the plane's direction space.
    pub fn basis(&self) -> [[f64; 4]; 2] {
        let [a, b] = &self.rows;
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&i, &j| {
            let mi = a[i].abs() + b[i].abs();
            let mj = a[j].abs() + b[j].abs();
            mi.partial_cmp(&mj).unwrap().then(i.cmp(&j))
        });
        // orthonormal basis of the row space, to project it out
        let na = dot4(a, a).sqrt();
        let r1: [f64; 4] = a.map(|v| v / na);
        let b_perp: [f64; 4] = std::array::from_fn(|i| b[i] - dot4(b, &r1) * r1[i]);
        let nb = dot4(&b_perp, &b_perp).sqrt();
        let r2: [f64; 4] = b_perp.map(|v| v / nb);

        let mut basis: Vec<[f64; 4]> = Vec::with_capacity(2);
        for &k in &order {
            let mut e = [0.0; 4];
            e[k] = 1.0;
            for r in [&r1, &r2].into_iter().chain(basis.iter()) {
                let c = dot4(&e, r);
                for i in 0..4 {
                    e[i] -= c * r[i];
                }
            }
            let n = dot4(&e, &e).sqrt();
            if n > 1e-8 {
                basis.push(e.map(|v| v / n));
                if basis.len() == 2 {
                    break;
                }
            }
        }
        [basis[0], basis[1]]
    }

    /// Coordinates of a point in the plane basis.
    pub fn plane_coords(&self, x: &[f64; 4]) -> [f64; 2] {
        let [u, v] = self.basis();
        [dot4(&u, x), dot4(&v, x)]
    }

    /// Wrap-aware in-plane distance.
    pub fn distance(&self, x: &[f64; 4], y: &[f64; 4]) -> f64 {
        let d = wrap_diff(x, y, &self.angular);
        let [u, v] = self.basis();
        dot4(&u, &d).hypot(dot4(&v, &d))
    }

    /// Same plane with a different slab.
    pub fn with_slab(&self, slab_halfwidth: f64) -> Self {
        Self {
            slab_halfwidth,
            ..*self
        }
    }

    fn root_tolerance(&self) -> f64 {
        let scale = self.rows[0].iter().fold(self.offsets[0].abs().max(1.0), |m, v| m.max(v.abs()));
        1e-12 * scale
    }
}

/// All six planes parallel to pairs of coordinate axes through `reference`.
/// The first functional fixes the lower-index coordinate.
pub fn default_planes(reference: &[f64; 4], slab_halfwidth: f64, angular: [bool; 4]) -> Result<Vec<PlaneSpec>> {
    let mut planes = Vec::with_capacity(6);
    for i in 0..4 {
        for j in i + 1..4 {
            planes.push(PlaneSpec::coordinate(
                i,
                j,
                [reference[i], reference[j]],
                slab_halfwidth,
                angular,
            )?);
        }
    }
    Ok(planes)
}

/// A refined root of the first functional inside one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Fraction of the step at the root.
    pub theta: f64,
    pub point: [f64; 4],
}

/// Looks for a sign change of the plane's first functional between `start`
/// and `end`, and refines it by bisection on `interp(theta)`.
///
/// Angular coordinates are lifted along the step so passing the `+-pi` seam is
/// not mistaken for a crossing. A root exactly at `start` belongs to the
/// previous step and is not reported.
pub fn detect_crossing<F>(plane: &PlaneSpec, start: &[f64; 4], end: &[f64; 4], mut interp: F) -> Result<Option<Crossing>>
where
    F: FnMut(f64) -> Result<[f64; 4]>,
{
    let row = &plane.rows[0];
    let g0 = plane.functional(0, start);
    let lifted = |x: &[f64; 4]| g0 + dot4(row, &wrap_diff(x, start, &plane.angular));
    let g1 = lifted(end);
    let crosses = (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0);
    if !crosses {
        return Ok(None);
    }
    let tol = plane.root_tolerance();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut g_lo = g0;
    let mut best = (1.0, *end, g1);
    for _ in 0..200 {
        if best.2.abs() <= tol || hi - lo <= f64::EPSILON {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let x = interp(mid)?;
        let g = lifted(&x);
        if g.abs() < best.2.abs() || g.abs() <= tol {
            best = (mid, x, g);
        }
        if (g < 0.0) == (g_lo < 0.0) && g != 0.0 {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    let point = std::array::from_fn(|i| if plane.angular[i] { wrap_angle(best.1[i]) } else { best.1[i] });
    Ok(Some(Crossing { theta: best.0, point }))
}

/// Accumulated intersection of one trajectory with one plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionCloud {
    pub plane: PlaneSpec,
    pub points: Vec<[f64; 4]>,
    pub times: Vec<f64>,
    pub plane_coords: Vec<[f64; 2]>,
    /// Number of roots of the first functional found.
    pub crossings_tested: usize,
    pub trajectory_time: f64,
    /// Range of each functional over the sampled trajectory.
    pub functional_range: [(f64, f64); 2],
}

impl SectionCloud {
    pub fn new(plane: PlaneSpec) -> Self {
        Self {
            plane,
            points: Vec::new(),
            times: Vec::new(),
            plane_coords: Vec::new(),
            crossings_tested: 0,
            trajectory_time: 0.0,
            functional_range: [(f64::INFINITY, f64::NEG_INFINITY); 2],
        }
    }

    /// Builds a cloud directly from points on the plane; times are indices.
    pub fn from_points(plane: PlaneSpec, points: Vec<[f64; 4]>) -> Self {
        let mut cloud = Self::new(plane);
        for (k, p) in points.into_iter().enumerate() {
            cloud.push(k as f64, p);
        }
        cloud
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn push(&mut self, t: f64, point: [f64; 4]) {
        self.plane_coords.push(self.plane.plane_coords(&point));
        self.points.push(point);
        self.times.push(t);
    }

    fn observe_range(&mut self, x: &[f64; 4]) {
        for k in 0..2 {
            let f = self.plane.functional(k, x);
            let (lo, hi) = &mut self.functional_range[k];
            *lo = lo.min(f);
            *hi = hi.max(f);
        }
    }

    /// True when the trajectory never left the slab of one functional: the
    /// plane equations are then dependent on a first integral and the
    /// intersection is not transversal.
    pub fn is_degenerate(&self) -> bool {
        self.functional_range
            .iter()
            .any(|(lo, hi)| hi >= lo && hi - lo <= 2.0 * self.plane.slab_halfwidth)
    }

    /// The sub-cloud a collection with half the slab would have kept.
    pub fn halved(&self) -> Self {
        let mut out = self.band(0.0, 0.5);
        out.plane = self.plane.with_slab(0.5 * self.plane.slab_halfwidth);
        out
    }

    /// Points with `lo <= |f2| / slab <= hi`, on the same plane.
    pub fn band(&self, lo: f64, hi: f64) -> Self {
        let s = self.plane.slab_halfwidth;
        let mut out = Self {
            plane: self.plane,
            points: Vec::new(),
            times: Vec::new(),
            plane_coords: Vec::new(),
            crossings_tested: self.crossings_tested,
            trajectory_time: self.trajectory_time,
            functional_range: self.functional_range,
        };
        for (k, p) in self.points.iter().enumerate() {
            let f = self.plane.functional(1, p).abs();
            if f >= lo * s && f <= hi * s {
                out.push(self.times[k], *p);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectionConfig {
    pub slab_halfwidth: f64,
    /// Per-plane cap on stored points (0 = unlimited).
    pub max_points: usize,
}

impl Default for SectionConfig {
    fn default() -> Self {
        Self {
            slab_halfwidth: 1e-3,
            max_points: 5000,
        }
    }
}

/// Integrator observer that feeds every step to a set of planes.
pub struct SectionCollector<'a, M, const N: usize> {
    map: &'a M,
    pub clouds: Vec<SectionCloud>,
    max_points: usize,
    max_crossings: usize,
    last: Option<(f64, [f64; 4])>,
}

impl<'a, M: PhaseMap<N>, const N: usize> SectionCollector<'a, M, N> {
    pub fn new(map: &'a M, planes: &[PlaneSpec], max_points: usize, max_crossings: usize) -> Self {
        Self {
            map,
            clouds: planes.iter().map(|p| SectionCloud::new(*p)).collect(),
            max_points,
            max_crossings,
            last: None,
        }
    }

    pub fn observe(&mut self, seg: &DenseSegment<N>) -> Result<ControlFlow<()>> {
        let start = match self.last {
            Some((t, x)) if t == seg.t0 => x,
            _ => {
                let x = self.map.phase(seg.t0, &seg.start())?;
                for c in &mut self.clouds {
                    c.observe_range(&x);
                }
                x
            }
        };
        let end = self.map.phase(seg.t1(), &seg.end())?;
        let map = self.map;
        let mut all_full = true;
        let mut total_crossings = 0;
        for idx in 0..self.clouds.len() {
            let cloud = &mut self.clouds[idx];
            cloud.observe_range(&end);
            cloud.trajectory_time += seg.h;
            if self.max_points > 0 && cloud.len() >= self.max_points {
                total_crossings += cloud.crossings_tested;
                continue;
            }
            let hit = detect_crossing(&cloud.plane, &start, &end, |theta| {
                map.phase(seg.t0 + theta * seg.h, &seg.eval(theta))
            })?;
            if let Some(c) = hit {
                cloud.crossings_tested += 1;
                if cloud.plane.functional(1, &c.point).abs() <= cloud.plane.slab_halfwidth {
                    debug_assert!(cloud.plane.functional(0, &c.point).abs() <= 1e-9 * (1.0 + c.point[0].abs()));
                    cloud.push(seg.t0 + c.theta * seg.h, c.point);
                }
            }
            total_crossings += cloud.crossings_tested;
            all_full &= self.max_points > 0 && cloud.len() >= self.max_points;
        }
        self.last = Some((seg.t1(), end));
        if (self.max_points > 0 && all_full) || (self.max_crossings > 0 && total_crossings >= self.max_crossings) {
            Ok(ControlFlow::Break(()))
        } else {
            Ok(ControlFlow::Continue(()))
        }
    }
}

/// Integrates one trajectory and collects its sections with every plane.
pub fn collect_sections<S, const N: usize>(
    system: &S,
    y0: [f64; N],
    planes: &[PlaneSpec],
    integrator: &IntegratorConfig,
    section: &SectionConfig,
) -> Result<(TrajectorySummary<N>, Vec<SectionCloud>)>
where
    S: OdeSystem<N> + PhaseMap<N>,
{
    let mut collector = SectionCollector::new(system, planes, section.max_points, integrator.max_crossings);
    let summary = integrate_trajectory(system, 0.0, y0, integrator, |seg| collector.observe(seg))?;
    Ok((summary, collector.clouds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const LINEAR: [bool; 4] = [false; 4];

    #[test]
    fn linear_root() {
        let plane = PlaneSpec::new([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]], [0.5, 0.0], 1e-3, LINEAR).unwrap();
        let start = [0.0; 4];
        let end = [1.0, 0.0, 0.0, 0.0];
        let c = detect_crossing(&plane, &start, &end, |t| Ok([t, 0.0, 0.0, 0.0])).unwrap().unwrap();
        assert!((c.point[0] - 0.5).abs() < 1e-12);

        let none = detect_crossing(&plane, &start, &[0.4, 0.0, 0.0, 0.0], |t| Ok([0.4 * t, 0.0, 0.0, 0.0])).unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn cubic_root_on_dense_segment() {
        // x(theta) = theta^3 - 0.2 -> root at 0.2^(1/3)
        let plane = PlaneSpec::coordinate(0, 1, [0.0, 0.0], 1e-3, LINEAR).unwrap();
        let c = detect_crossing(&plane, &[-0.2, 0.0, 0.0, 0.0], &[0.8, 0.0, 0.0, 0.0], |t| {
            Ok([t * t * t - 0.2, 0.0, 0.0, 0.0])
        })
        .unwrap()
        .unwrap();
        assert!((c.theta - 0.2f64.cbrt()).abs() < 1e-10);
    }

    #[test]
    fn seam_is_not_a_crossing() {
        let angular = [true, false, false, false];
        let plane = PlaneSpec::coordinate(0, 1, [0.0, 0.0], 1e-3, angular).unwrap();
        // angle goes from 3.1 through pi to -3.1: no root of beta = 0
        let start = [3.1, 0.0, 0.0, 0.0];
        let end = [-3.1, 0.0, 0.0, 0.0];
        let hit = detect_crossing(&plane, &start, &end, |t| Ok([3.1 + t * (2.0 * PI - 6.2), 0.0, 0.0, 0.0])).unwrap();
        assert!(hit.is_none());

        // a plane at beta = pi is crossed there
        let plane = PlaneSpec::coordinate(0, 1, [PI, 0.0], 1e-3, angular).unwrap();
        let hit = detect_crossing(&plane, &start, &end, |t| Ok([3.1 + t * (2.0 * PI - 6.2), 0.0, 0.0, 0.0]))
            .unwrap()
            .unwrap();
        assert!((hit.theta - 0.5).abs() < 1e-9);
    }

    #[test]
    fn coordinate_plane_coords() {
        let plane = PlaneSpec::coordinate(0, 1, [0.0, 0.0], 1e-3, LINEAR).unwrap();
        assert_eq!(plane.plane_coords(&[0.0, 0.0, 0.3, -1.7]), [0.3, -1.7]);
    }

    #[test]
    fn basis_is_orthonormal_for_oblique_planes() {
        let plane = PlaneSpec::new([[1.0, 2.0, -0.5, 0.3], [0.2, -1.0, 1.5, 2.0]], [0.3, -0.1], 1e-3, LINEAR).unwrap();
        let [u, v] = plane.basis();
        assert!((dot4(&u, &u) - 1.0).abs() < 1e-14);
        assert!((dot4(&v, &v) - 1.0).abs() < 1e-14);
        assert!(dot4(&u, &v).abs() < 1e-14);
        for r in &plane.rows {
            assert!(dot4(r, &u).abs() < 1e-14 && dot4(r, &v).abs() < 1e-14);
        }
        // in-plane distances are preserved
        let p = plane.anchor();
        let x: [f64; 4] = std::array::from_fn(|i| p[i] + 0.3 * u[i] - 1.1 * v[i]);
        let y: [f64; 4] = std::array::from_fn(|i| p[i] - 0.7 * u[i] + 0.4 * v[i]);
        let cx = plane.plane_coords(&x);
        let cy = plane.plane_coords(&y);
        let d4 = wrap_diff(&x, &y, &LINEAR);
        assert!(((cx[0] - cy[0]).hypot(cx[1] - cy[1]) - dot4(&d4, &d4).sqrt()).abs() < 1e-12);
        assert!(plane.functional(0, &x).abs() < 1e-12 && plane.functional(1, &x).abs() < 1e-12);
    }

    #[test]
    fn default_plane_set() {
        let planes = default_planes(&[0.0; 4], 1e-3, [true, true, false, false]).unwrap();
        assert_eq!(planes.len(), 6);
        let beta_plane = planes.iter().find(|p| p.rows[0][0] == 1.0 && p.rows[1][1] == 1.0).unwrap();
        assert_eq!(beta_plane.offsets, [0.0, 0.0]);

        let planes = default_planes(&[0.0, 0.0, 1.0, 1.0], 1e-3, [true, true, false, false]).unwrap();
        let rates = planes.iter().find(|p| p.rows[0][2] == 1.0 && p.rows[1][3] == 1.0).unwrap();
        assert_eq!(rates.offsets, [1.0, 1.0]);
        for (a, p) in planes.iter().enumerate() {
            p.validate().unwrap();
            for q in &planes[a + 1..] {
                assert_ne!(p.rows, q.rows);
            }
        }
    }

    #[test]
    fn rejects_dependent_rows() {
        assert!(PlaneSpec::new([[1.0, 1.0, 0.0, 0.0], [2.0, 2.0, 0.0, 0.0]], [0.0, 0.0], 1e-3, LINEAR).is_err());
        assert!(PlaneSpec::coordinate(0, 1, [0.0, 0.0], 0.0, LINEAR).is_err());
    }

    #[test]
    fn halving_keeps_the_inner_slab() {
        let plane = PlaneSpec::coordinate(0, 1, [0.0, 0.0], 1e-2, LINEAR).unwrap();
        let cloud = SectionCloud::from_points(
            plane,
            vec![[0.0, 0.009, 1.0, 0.0], [0.0, -0.004, 2.0, 0.0], [0.0, 0.001, 3.0, 0.0]],
        );
        let half = cloud.halved();
        assert_eq!(half.len(), 2);
        assert_eq!(half.plane.slab_halfwidth, 5e-3);
    }
}
