//! Monte-Carlo sweep over the attachment parameters of the pendulum family.
//!
//! Every grid node gets the same number of pseudo-random initial states.
//! A sample counts as *empty* when none of its sections shows confirmed
//! curves; the empty proportion estimates how much of phase space is still
//! filled by tori that keep their topology. Maxima of this proportion mark
//! candidate integrable parameters.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_confirmed, ClassifierConfig, Label, Verdict};
use crate::error::{Error, Result};
use crate::integrate::IntegratorConfig;
use crate::reduction::{from_angles, reduce, wrap_angle, ReducedState};
use crate::sections::{collect_sections, default_planes, SectionConfig};
use crate::systems::pendulum::{
    pendulum_angular_momentum, pendulum_energy, project_to_manifold, CartesianState, PendulumParams, PendulumSystem,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub eps1_range: [f64; 2],
    pub eps2_range: [f64; 2],
    pub grid_step: f64,
    pub samples_per_cell: usize,
    pub seed: u64,
    /// Angular velocities are drawn from `[-w, w]`.
    pub velocity_scale: f64,
    pub lengths: [f64; 3],
    pub masses: [f64; 3],
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub slab_halfwidth: f64,
    pub max_points: usize,
    pub classifier: ClassifierConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            eps1_range: [0.0, 1.0],
            eps2_range: [0.0, 1.0],
            grid_step: 0.1,
            samples_per_cell: 16,
            seed: 0,
            velocity_scale: 1.0,
            lengths: [1.0; 3],
            masses: [1.0; 3],
            t_end: 3000.0,
            rel_tol: 1e-6,
            abs_tol: 1e-8,
            slab_halfwidth: 0.05,
            max_points: 5000,
            classifier: ClassifierConfig::default(),
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("eps1_range", self.eps1_range), ("eps2_range", self.eps2_range)] {
            if !(0.0 <= r[0] && r[0] <= r[1] && r[1] <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = [{}, {}] must satisfy 0 <= lo <= hi <= 1",
                    r[0], r[1]
                )));
            }
        }
        if !(self.grid_step.is_finite() && self.grid_step > 0.0) {
            return Err(Error::InvalidParameter("grid_step must be > 0".into()));
        }
        if self.samples_per_cell == 0 {
            return Err(Error::InvalidParameter("samples_per_cell must be >= 1".into()));
        }
        if !(self.velocity_scale.is_finite() && self.velocity_scale >= 0.0) {
            return Err(Error::InvalidParameter("velocity_scale must be >= 0".into()));
        }
        if !(self.slab_halfwidth.is_finite() && self.slab_halfwidth > 0.0) {
            return Err(Error::InvalidParameter("slab_halfwidth must be > 0".into()));
        }
        if self.grid_axis(self.eps1_range).len() >= 1 << 20 || self.grid_axis(self.eps2_range).len() >= 1 << 20 {
            return Err(Error::InvalidParameter("grid too fine".into()));
        }
        self.params(0.0, 0.0)?;
        self.integrator().validate()?;
        self.classifier.validate()
    }

    pub fn params(&self, eps1: f64, eps2: f64) -> Result<PendulumParams> {
        let p = PendulumParams {
            lengths: self.lengths,
            masses: self.masses,
            eps: [eps1, eps2],
            gravity: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            t_end: self.t_end,
            ..IntegratorConfig::default()
        }
    }

    pub fn section(&self) -> SectionConfig {
        SectionConfig {
            slab_halfwidth: self.slab_halfwidth,
            max_points: self.max_points,
        }
    }

    fn grid_axis(&self, range: [f64; 2]) -> Vec<f64> {
        let n = ((range[1] - range[0]) / self.grid_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| {
                let v = range[0] + i as f64 * self.grid_step;
                ((v * 1e12).round() / 1e12).min(range[1])
            })
            .collect()
    }

    pub fn eps1_values(&self) -> Vec<f64> {
        self.grid_axis(self.eps1_range)
    }

    pub fn eps2_values(&self) -> Vec<f64> {
        self.grid_axis(self.eps2_range)
    }
}

/// Generator for sample `k` of grid node `(i, j)`.
///
/// Each sample owns a ChaCha stream, so results do not depend on the order
/// or the thread in which samples run, and adding samples leaves the earlier
/// ones untouched.
pub fn sample_rng(seed: u64, i: usize, j: usize, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((i as u64) << 40) | ((j as u64) << 20) | k as u64);
    rng
}

/// Uniform segment angles and angular velocities in `[-w, w]`, assembled
/// into an on-manifold Cartesian state.
pub fn sample_initial_state<R: Rng>(params: &PendulumParams, velocity_scale: f64, rng: &mut R) -> Result<CartesianState> {
    let alpha: [f64; 3] = std::array::from_fn(|_| wrap_angle(rng.random_range(-PI..PI)));
    let w = velocity_scale;
    let alpha_dot: [f64; 3] = std::array::from_fn(|_| if w > 0.0 { rng.random_range(-w..=w) } else { 0.0 });
    let s = from_angles(params, alpha, alpha_dot);
    project_to_manifold(params, &s, IntegratorConfig::default().projection_tol, 20)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub initial: ReducedState,
    pub energy: f64,
    pub angular_momentum: f64,
    /// One verdict per default plane; empty when the run failed.
    pub planes: Vec<Verdict>,
    pub steps: u64,
    pub error: Option<String>,
}

impl SampleRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    /// No plane shows confirmed curves.
    pub fn is_empty_or_points(&self) -> bool {
        !self.failed() && self.planes.iter().all(|v| v.label != Label::Curves)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub eps1: f64,
    pub eps2: f64,
    pub n_samples: usize,
    pub n_empty_or_points: usize,
    pub n_failed: usize,
    pub proportion: f64,
    pub samples: Vec<SampleRecord>,
}

impl ScanCell {
    fn from_samples(eps1: f64, eps2: f64, samples: Vec<SampleRecord>) -> Self {
        let n = samples.len();
        let empty = samples.iter().filter(|s| s.is_empty_or_points()).count();
        Self {
            eps1,
            eps2,
            n_samples: n,
            n_empty_or_points: empty,
            n_failed: samples.iter().filter(|s| s.failed()).count(),
            proportion: if n > 0 { empty as f64 / n as f64 } else { 0.0 },
            samples,
        }
    }
}

/// Integrates one sample and classifies its sections on the six coordinate
/// planes through its reduced initial point.
pub fn run_sample(cfg: &ScanConfig, params: &PendulumParams, i: usize, j: usize, k: usize) -> SampleRecord {
    let mut rng = sample_rng(cfg.seed, i, j, k);
    let mut record = SampleRecord {
        index: k,
        initial: ReducedState::new(0.0, 0.0, 0.0, 0.0),
        energy: 0.0,
        angular_momentum: 0.0,
        planes: Vec::new(),
        steps: 0,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let s = sample_initial_state(params, cfg.velocity_scale, &mut rng)?;
        record.initial = reduce(params, &s)?;
        record.energy = pendulum_energy(params, &s);
        record.angular_momentum = pendulum_angular_momentum(params, &s);
        let integrator = cfg.integrator();
        let system = PendulumSystem::new(*params, integrator.baumgarte_gamma, integrator.projection_tol);
        let planes = default_planes(&record.initial.to_array(), cfg.slab_halfwidth, ReducedState::ANGULAR)?;
        let (summary, clouds) = collect_sections(&system, s.to_array(), &planes, &integrator, &cfg.section())?;
        record.steps = summary.steps;
        record.planes = clouds.iter().map(|c| classify_confirmed(c, &cfg.classifier)).collect();
        Ok(())
    })();
    if let Err(e) = outcome {
        record.planes.clear();
        record.error = Some(e.to_string());
    }
    record
}

/// All samples of grid node `(i, j)`, sequentially.
pub fn run_cell(cfg: &ScanConfig, i: usize, j: usize) -> Result<ScanCell> {
    let eps1 = *cfg.eps1_values().get(i).ok_or(Error::InvalidParameter(format!("no eps1 node {i}")))?;
    let eps2 = *cfg.eps2_values().get(j).ok_or(Error::InvalidParameter(format!("no eps2 node {j}")))?;
    let params = cfg.params(eps1, eps2)?;
    let samples = (0..cfg.samples_per_cell).map(|k| run_sample(cfg, &params, i, j, k)).collect();
    Ok(ScanCell::from_samples(eps1, eps2, samples))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub config: ScanConfig,
    pub eps1: Vec<f64>,
    pub eps2: Vec<f64>,
    /// Row-major: `cells[i * eps2.len() + j]`.
    pub cells: Vec<ScanCell>,
    /// Mean proportion over `eps2` for each `eps1` column.
    pub marginal: Vec<f64>,
}

impl ScanResult {
    pub fn cell(&self, i: usize, j: usize) -> &ScanCell {
        &self.cells[i * self.eps2.len() + j]
    }

    /// `proportions[i][j]` for node `(eps1[i], eps2[j])`.
    pub fn proportions(&self) -> Vec<Vec<f64>> {
        (0..self.eps1.len())
            .map(|i| (0..self.eps2.len()).map(|j| self.cell(i, j).proportion).collect())
            .collect()
    }
}

/// Runs every sample of every node on `threads` worker threads (0 = all
/// cores). `progress` receives `(done, total)` after each sample.
pub fn scan_with_progress(
    cfg: &ScanConfig,
    threads: usize,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<ScanResult> {
    cfg.validate()?;
    let eps1 = cfg.eps1_values();
    let eps2 = cfg.eps2_values();
    let params: Vec<PendulumParams> = eps1
        .iter()
        .flat_map(|&a| eps2.iter().map(move |&b| (a, b)))
        .map(|(a, b)| cfg.params(a, b))
        .collect::<Result<_>>()?;
    let m = cfg.samples_per_cell;
    let total = params.len() * m;
    let done = AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let records: Vec<SampleRecord> = pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|task| {
                let (node, k) = (task / m, task % m);
                let (i, j) = (node / eps2.len(), node % eps2.len());
                let r = run_sample(cfg, &params[node], i, j, k);
                progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
                r
            })
            .collect()
    });

    let mut records = records.into_iter();
    let mut cells = Vec::with_capacity(params.len());
    for &a in &eps1 {
        for &b in &eps2 {
            cells.push(ScanCell::from_samples(a, b, records.by_ref().take(m).collect()));
        }
    }
    let marginal = (0..eps1.len())
        .map(|i| cells[i * eps2.len()..(i + 1) * eps2.len()].iter().map(|c| c.proportion).sum::<f64>() / eps2.len() as f64)
        .collect();
    Ok(ScanResult {
        config: cfg.clone(),
        eps1,
        eps2,
        cells,
        marginal,
    })
}

pub fn scan(cfg: &ScanConfig, threads: usize) -> Result<ScanResult> {
    scan_with_progress(cfg, threads, &|_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::pendulum::{constraint_rates, constraint_values};

    fn tiny() -> ScanConfig {
        ScanConfig {
            eps1_range: [0.5, 1.0],
            eps2_range: [0.5, 1.0],
            grid_step: 0.5,
            samples_per_cell: 2,
            t_end: 40.0,
            ..ScanConfig::default()
        }
    }

    #[test]
    fn grid_nodes() {
        let cfg = ScanConfig::default();
        let e = cfg.eps1_values();
        assert_eq!(e.len(), 11);
        assert_eq!(e[3], 0.3);
        assert_eq!(e[10], 1.0);
        let one = ScanConfig {
            eps1_range: [0.4, 0.4],
            ..cfg
        };
        assert_eq!(one.eps1_values(), vec![0.4]);
    }

    #[test]
    fn zero_samples_rejected() {
        let cfg = ScanConfig {
            samples_per_cell: 0,
            ..ScanConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(ScanConfig::default().validate().is_ok());
    }

    #[test]
    fn initial_states_are_reproducible() {
        let p = PendulumParams::with_eps(0.7, 0.3).unwrap();
        let a = sample_initial_state(&p, 1.0, &mut sample_rng(9, 1, 2, 3)).unwrap();
        let b = sample_initial_state(&p, 1.0, &mut sample_rng(9, 1, 2, 3)).unwrap();
        assert_eq!(a, b);
        let c = sample_initial_state(&p, 1.0, &mut sample_rng(9, 1, 2, 4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn initial_states_are_on_manifold_and_uniform() {
        let p = PendulumParams::with_eps(1.0, 0.5).unwrap();
        let tol = IntegratorConfig::default().projection_tol;
        let mut sums = [0.0; 3];
        let n = 1000;
        for k in 0..n {
            let s = sample_initial_state(&p, 1.0, &mut sample_rng(1, 0, 0, k)).unwrap();
            for r in constraint_values(&p, &s).iter().chain(constraint_rates(&p, &s).iter()) {
                assert!(r.abs() <= tol, "{r}");
            }
            let a = crate::reduction::segment_angles(&p, &s).unwrap();
            for i in 0..3 {
                sums[i] += a.alpha[i];
            }
        }
        // uniform on the circle: sd pi / sqrt(3)
        let sigma = PI / 3f64.sqrt() / (n as f64).sqrt();
        for s in sums {
            assert!((s / n as f64).abs() <= 3.0 * sigma, "{s}");
        }
    }

    #[test]
    fn single_node_matches_run_cell() {
        let cfg = ScanConfig {
            eps1_range: [1.0, 1.0],
            eps2_range: [1.0, 1.0],
            ..tiny()
        };
        let r = scan(&cfg, 1).unwrap();
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.cells[0], run_cell(&cfg, 0, 0).unwrap());
        assert_eq!(r.marginal, vec![r.cells[0].proportion]);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = tiny();
        let a = scan(&cfg, 1).unwrap();
        let b = scan(&cfg, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells.len(), 4);
    }

    #[test]
    fn more_samples_keep_earlier_ones() {
        let cfg = tiny();
        let a = run_cell(&cfg, 1, 0).unwrap();
        let b = run_cell(
            &ScanConfig {
                samples_per_cell: 3,
                ..cfg
            },
            1,
            0,
        )
        .unwrap();
        assert_eq!(a.samples[..], b.samples[..2]);
    }

    #[test]
    fn counting_rule() {
        let cfg = tiny();
        let cell = run_cell(&cfg, 0, 0).unwrap();
        assert!(cell.n_empty_or_points <= cell.n_samples);
        assert!((0.0..=1.0).contains(&cell.proportion));
        assert!(cell.samples.iter().all(|s| s.planes.len() == 6));
    }
}
