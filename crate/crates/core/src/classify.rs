//! Points-versus-curves decision for section clouds.
//!
//! Two independent readings of the same cloud are combined: the geometry of
//! single-linkage clusters (are they all about as wide as the slab, or does
//! one stretch far beyond it?) and the correlation dimension over the scales
//! between the slab width and the cloud size. Anything in between is
//! reported as inconclusive rather than forced into either class.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sections::SectionCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Empty,
    Points,
    Curves,
    Inconclusive,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Empty => "Empty",
            Label::Points => "Points",
            Label::Curves => "Curves",
            Label::Inconclusive => "Inconclusive",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub n_min: usize,
    pub link_factor: f64,
    pub point_diam_factor: f64,
    pub curve_diam_factor: f64,
    pub dim_lo: f64,
    pub dim_hi: f64,
    /// Smallest accepted ratio between the extents of the points in the
    /// inner and the outer half of the slab for a confirmed curve.
    pub band_ratio_min: f64,
    /// Largest share of the first functional's crossings that the slab may
    /// accept into a confirmed curve.
    pub max_accepted_fraction: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            n_min: 10,
            link_factor: 5.0,
            point_diam_factor: 10.0,
            curve_diam_factor: 50.0,
            dim_lo: 0.3,
            dim_hi: 0.7,
            band_ratio_min: 0.8,
            max_accepted_fraction: 0.3,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.dim_lo && self.dim_lo < self.dim_hi) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < dim_lo ({}) < dim_hi ({})",
                self.dim_lo, self.dim_hi
            )));
        }
        for (name, v) in [
            ("link_factor", self.link_factor),
            ("point_diam_factor", self.point_diam_factor),
            ("curve_diam_factor", self.curve_diam_factor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be > 0")));
            }
        }
        if !(0.0..=1.0).contains(&self.band_ratio_min) {
            return Err(Error::InvalidParameter("band_ratio_min must lie in [0, 1]".into()));
        }
        if !(self.max_accepted_fraction > 0.0 && self.max_accepted_fraction <= 1.0) {
            return Err(Error::InvalidParameter("max_accepted_fraction must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Extra checks a Curves verdict must pass before it is reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confirmation {
    /// Verdict on the sub-cloud a half-width slab would have kept.
    pub half_label: Label,
    pub half_n_points: usize,
    pub half_max_cluster_diameter: f64,
    /// Extent of the points in the inner half of the slab relative to those
    /// in the outer half.
    pub band_ratio: f64,
    /// See [`slab_levels`].
    pub slab_levels: usize,
    /// Accepted points per crossing of the first functional, when the cloud
    /// records its crossings.
    pub accepted_fraction: Option<f64>,
    pub stable: bool,
    pub transversal: bool,
    pub thin: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: Label,
    pub n_points: usize,
    pub n_clusters: usize,
    pub max_cluster_diameter: f64,
    pub correlation_dimension: Option<f64>,
    pub delta: f64,
    /// The trajectory stayed inside one functional's slab throughout.
    pub degenerate: bool,
    pub confirmation: Option<Confirmation>,
}

impl Verdict {
    /// Verdict for a cloud too small to classify.
    pub fn empty(n_points: usize) -> Self {
        Self {
            label: Label::Empty,
            n_points,
            n_clusters: 0,
            max_cluster_diameter: 0.0,
            correlation_dimension: None,
            delta: 0.0,
            degenerate: false,
            confirmation: None,
        }
    }
}

/// Wrap-aware Euclidean metric inside a plane.
struct PlaneMetric {
    basis: [[f64; 4]; 2],
    angular: [bool; 4],
}

impl PlaneMetric {
    fn new(cloud: &SectionCloud) -> Self {
        Self {
            basis: cloud.plane.basis(),
            angular: cloud.plane.angular,
        }
    }

    #[inline]
    fn dist2(&self, a: &[f64; 4], b: &[f64; 4]) -> f64 {
        let mut u = 0.0;
        let mut v = 0.0;
        for i in 0..4 {
            let mut d = a[i] - b[i];
            if self.angular[i] {
                // stored angles are already in (-pi, pi]
                if d > PI {
                    d -= TAU;
                } else if d <= -PI {
                    d += TAU;
                }
            }
            u += self.basis[0][i] * d;
            v += self.basis[1][i] * d;
        }
        u * u + v * v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub members: Vec<usize>,
    pub diameter: f64,
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Single-linkage components of the graph joining points closer than `delta`.
/// Clusters are ordered by their smallest member index.
pub fn cluster(cloud: &SectionCloud, delta: f64) -> Vec<Cluster> {
    let metric = PlaneMetric::new(cloud);
    let pts = &cloud.points;
    let mut dsu = DisjointSet::new(pts.len());
    let delta2 = delta * delta;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if metric.dist2(&pts[i], &pts[j]) < delta2 {
                dsu.union(i, j);
            }
        }
    }
    components(dsu, pts, &metric)
}

fn components(mut dsu: DisjointSet, pts: &[[f64; 4]], metric: &PlaneMetric) -> Vec<Cluster> {
    let n = pts.len();
    let mut root_index = vec![usize::MAX; n];
    let mut clusters: Vec<Cluster> = Vec::new();
    for i in 0..n {
        let r = dsu.find(i);
        if root_index[r] == usize::MAX {
            root_index[r] = clusters.len();
            clusters.push(Cluster {
                members: Vec::new(),
                diameter: 0.0,
            });
        }
        clusters[root_index[r]].members.push(i);
    }
    for c in &mut clusters {
        let m = &c.members;
        let mut d2: f64 = 0.0;
        for a in 0..m.len() {
            for b in a + 1..m.len() {
                d2 = d2.max(metric.dist2(&pts[m[a]], &pts[m[b]]));
            }
        }
        c.diameter = d2.sqrt();
    }
    clusters
}

/// Squared nearest-neighbour distance of every point and the squared
/// diameter, from one pass over the pairs.
fn pair_extremes(pts: &[[f64; 4]], metric: &PlaneMetric) -> (Vec<f64>, f64) {
    let n = pts.len();
    let mut nn = vec![f64::INFINITY; n];
    let mut diam2: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d2 = metric.dist2(&pts[i], &pts[j]);
            nn[i] = nn[i].min(d2);
            nn[j] = nn[j].min(d2);
            diam2 = diam2.max(d2);
        }
    }
    (nn, diam2)
}

fn median_sqrt(mut v: Vec<f64>) -> f64 {
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    if n % 2 == 1 {
        v[n / 2].sqrt()
    } else {
        0.5 * (v[n / 2 - 1].sqrt() + v[n / 2].sqrt())
    }
}

const CORRELATION_RADII: usize = 16;

/// Correlation-sum slope fitted over the window `[r_lo, r_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub slope: f64,
    pub r_lo: f64,
    pub r_hi: f64,
}

/// Log-spaced radii and their squares.
fn correlation_radii(r_lo: f64, r_hi: f64) -> (Vec<f64>, Vec<f64>) {
    let k = CORRELATION_RADII;
    let log_lo = r_lo.ln();
    let step = (r_hi.ln() - log_lo) / (k - 1) as f64;
    let radii: Vec<f64> = (0..k).map(|i| (log_lo + step * i as f64).exp()).collect();
    let squared = radii.iter().map(|r| r * r).collect();
    (radii, squared)
}

/// Adds a pair at squared distance `d2` to `hist`, where `hist[b]` counts
/// the pairs whose distance first falls below radius `b`.
#[inline]
fn bin_pair(hist: &mut [u64], radii2: &[f64], d2: f64) {
    if d2 < radii2[radii2.len() - 1] {
        hist[radii2.partition_point(|&r2| r2 <= d2)] += 1;
    }
}

fn correlation_slope(hist: &[u64], radii: &[f64]) -> f64 {
    let mut xs = Vec::with_capacity(radii.len());
    let mut ys = Vec::with_capacity(radii.len());
    let mut cum = 0u64;
    for (h, r) in hist.iter().zip(radii) {
        cum += h;
        if cum > 0 {
            xs.push(r.ln());
            ys.push((cum as f64).ln());
        }
    }
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares slope of `log C(r)` against `log r` on log-spaced radii.
pub fn correlation_dimension_in(cloud: &SectionCloud, r_lo: f64, r_hi: f64) -> Result<DimensionEstimate> {
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return Err(Error::DegenerateWindow { lower: r_lo, upper: r_hi });
    }
    let metric = PlaneMetric::new(cloud);
    let pts = &cloud.points;
    let (radii, radii2) = correlation_radii(r_lo, r_hi);
    let mut hist = vec![0u64; radii.len()];
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            bin_pair(&mut hist, &radii2, metric.dist2(&pts[i], &pts[j]));
        }
    }
    Ok(DimensionEstimate {
        slope: correlation_slope(&hist, &radii),
        r_lo,
        r_hi,
    })
}

fn dimension_window(cloud: &SectionCloud, diameter: f64) -> Result<(f64, f64)> {
    let lower = 3.0 * cloud.plane.slab_halfwidth;
    let upper = diameter / 4.0;
    if upper <= lower {
        return Err(Error::DegenerateWindow { lower, upper });
    }
    Ok((lower, upper))
}

/// Correlation dimension over `[3 slab, diameter / 4]`.
pub fn correlation_dimension(cloud: &SectionCloud) -> Result<DimensionEstimate> {
    let (lower, upper) = dimension_window(cloud, diameter(cloud))?;
    correlation_dimension_in(cloud, lower, upper)
}

/// Largest wrap-aware distance between two points of the cloud.
pub fn diameter(cloud: &SectionCloud) -> f64 {
    let metric = PlaneMetric::new(cloud);
    let pts = &cloud.points;
    let mut d2: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d2 = d2.max(metric.dist2(&pts[i], &pts[j]));
        }
    }
    d2.sqrt()
}

/// Labels one cloud.
pub fn classify(cloud: &SectionCloud, cfg: &ClassifierConfig) -> Verdict {
    let n = cloud.len();
    if n < cfg.n_min {
        return Verdict::empty(n);
    }
    let slab = cloud.plane.slab_halfwidth;
    let metric = PlaneMetric::new(cloud);
    let pts = &cloud.points;
    let (nn, diam2) = pair_extremes(pts, &metric);
    // clusters link at `link_factor` times the median nearest-neighbour distance
    let delta = (cfg.link_factor * median_sqrt(nn)).max(1e-6 * slab);
    let delta2 = delta * delta;
    // a window that collapses below the slab scale means everything is one tight clump
    let window = dimension_window(cloud, diam2.sqrt()).ok().map(|(lo, hi)| correlation_radii(lo, hi));

    let mut dsu = DisjointSet::new(n);
    let mut hist = vec![0u64; CORRELATION_RADII];
    for i in 0..n {
        for j in i + 1..n {
            let d2 = metric.dist2(&pts[i], &pts[j]);
            if d2 < delta2 {
                dsu.union(i, j);
            }
            if let Some((_, radii2)) = &window {
                bin_pair(&mut hist, radii2, d2);
            }
        }
    }
    let clusters = components(dsu, pts, &metric);
    let max_diam = clusters.iter().map(|c| c.diameter).fold(0.0, f64::max);
    let dimension = window.map(|(radii, _)| correlation_slope(&hist, &radii));
    let dim = dimension.unwrap_or(0.0);
    let degenerate = cloud.is_degenerate();

    let label = if degenerate {
        Label::Inconclusive
    } else if max_diam > cfg.curve_diam_factor * slab && dim >= cfg.dim_hi {
        Label::Curves
    } else if max_diam <= cfg.point_diam_factor * slab && dim <= cfg.dim_lo {
        Label::Points
    } else {
        Label::Inconclusive
    };
    Verdict {
        label,
        n_points: n,
        n_clusters: clusters.len(),
        max_cluster_diameter: max_diam,
        correlation_dimension: dimension,
        delta,
        degenerate,
        confirmation: None,
    }
}

/// Number of equal-width levels of the second functional, out of
/// [`SLAB_LEVELS`] across the slab, that hold at least one accepted point.
///
/// A transversal crossing fills the slab evenly. When every crossing happens
/// at one of a few phases of the motion, the points sit on a handful of
/// discrete levels instead.
pub fn slab_levels(cloud: &SectionCloud) -> usize {
    let s = cloud.plane.slab_halfwidth;
    let mut occupied = [false; SLAB_LEVELS];
    for p in &cloud.points {
        let u = (cloud.plane.functional(1, p) + s) / (2.0 * s);
        let bin = ((u * SLAB_LEVELS as f64).floor().max(0.0) as usize).min(SLAB_LEVELS - 1);
        occupied[bin] = true;
    }
    occupied.iter().filter(|&&o| o).count()
}

pub const SLAB_LEVELS: usize = 16;

/// Fewest occupied levels accepted as a transversal crossing.
pub const MIN_SLAB_LEVELS: usize = 6;

/// Like [`classify`], with two extra conditions on a Curves verdict.
///
/// The curve must survive re-reading the cloud with half the slab, and the
/// points in the inner half of the slab must span about as much as those in
/// the outer half. A genuine curve looks the same at every level of the
/// slab; arcs cut out of a torus by the slab, including the long ones near a
/// tangency, shrink towards its middle.
///
/// The accepted points must also fill the slab. If they sit on a few levels
/// of the second functional, every crossing happens at the same phase of the
/// motion: the plane conditions are dependent along the trajectory and the
/// curve says nothing about a missing integral.
///
/// Finally the slab has to be thin next to the spread of the second
/// functional: it may accept only a minority of the crossings. A slab that
/// keeps most of them holds whole arcs of a torus lying almost along the
/// plane.
///
/// Curves failing any of these checks become Inconclusive.
pub fn classify_confirmed(cloud: &SectionCloud, cfg: &ClassifierConfig) -> Verdict {
    let mut v = classify(cloud, cfg);
    if v.label == Label::Curves {
        let half = classify(&cloud.halved(), cfg);
        let inner_extent = diameter(&cloud.halved());
        let outer_extent = diameter(&cloud.band(0.5, 1.0));
        let ratio = if outer_extent > 0.0 { inner_extent / outer_extent } else { 0.0 };
        let stable = half.label == Label::Curves && ratio >= cfg.band_ratio_min;
        let levels = slab_levels(cloud);
        let transversal = levels >= MIN_SLAB_LEVELS;
        let accepted_fraction = (cloud.crossings_tested > 0).then(|| cloud.len() as f64 / cloud.crossings_tested as f64);
        let thin = accepted_fraction.is_none_or(|f| f <= cfg.max_accepted_fraction);
        v.confirmation = Some(Confirmation {
            half_label: half.label,
            half_n_points: half.n_points,
            half_max_cluster_diameter: half.max_cluster_diameter,
            band_ratio: ratio,
            slab_levels: levels,
            accepted_fraction,
            stable,
            transversal,
            thin,
        });
        if !(stable && transversal && thin) {
            v.label = Label::Inconclusive;
        }
    }
    v
}

/// What a set of per-plane verdicts for one trajectory allows us to say.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunVerdict {
    /// Some plane shows curves: the trajectory is not confined to a 2-torus.
    NonIntegrabilityWitness,
    /// No curves anywhere. This is not evidence of integrability.
    NoObstructionFound,
}

pub fn aggregate(verdicts: &[Verdict]) -> RunVerdict {
    if verdicts.iter().any(|v| v.label == Label::Curves) {
        RunVerdict::NonIntegrabilityWitness
    } else {
        RunVerdict::NoObstructionFound
    }
}
