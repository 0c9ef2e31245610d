//! The `simulate`, `section`, `scan` and `report` commands.
//!
//! Each command computes all of its results in memory, then writes them in
//! one [`OutputSet`] commit together with a [`RunManifest`].

use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{aggregate, classify_confirmed, Label, RunVerdict, Verdict};
use crate::error::Error;
use crate::integrate::{integrate_trajectory, IntegratorConfig, TrajectorySummary};
use crate::kamscan::{sample_initial_state, scan_with_progress, ScanResult};
use crate::reduction::{from_angles, segment_angles};
use crate::sections::{collect_sections, default_planes, PhaseMap, PlaneSpec, SectionCloud};
use crate::systems::pendulum::{project_to_manifold, CartesianState, PendulumParams, PendulumSystem, PENDULUM_DIM};
use crate::systems::satellite::{SatelliteSystem, SATELLITE_DIM};

use super::config::{ConfigError, RunConfig, SystemKind};
use super::manifest::{now_unix_ms, FileDigest, RunManifest};
use super::output::{num, sha256_hex, to_csv, to_json, OutputSet, SCHEMA_VERSION};
use super::svg::{render_heatmap_svg, render_marginal_svg, render_scatter_svg, Panel};

pub const PENDULUM_COORDS: [&str; 4] = ["beta1", "beta2", "beta1_dot", "beta2_dot"];
pub const SATELLITE_COORDS: [&str; 4] = ["psi", "theta", "p_psi", "p_theta"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Section,
    Scan,
    Report,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Section => "section",
            Command::Scan => "scan",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    /// Worker threads for `scan` (0 = all cores).
    pub threads: usize,
    pub dump: bool,
    /// Print scan progress to stderr.
    pub progress: bool,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            config: None,
            out: PathBuf::from("out"),
            seed: None,
            threads: 0,
            dump: false,
            progress: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numeric(#[from] Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// Process exit status.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

/// Runs one command and returns a short human-readable summary.
pub fn run(command: Command, opts: &Options) -> Result<String, CliError> {
    let started = now_unix_ms();
    if command == Command::Report {
        return report(&opts.out);
    }
    let (cfg, inputs) = match &opts.config {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            let digest = FileDigest {
                path: path.display().to_string(),
                sha256: sha256_hex(&bytes),
            };
            (RunConfig::load(path)?, vec![digest])
        }
        None => (RunConfig::default(), Vec::new()),
    };
    let cfg = cfg.with_seed(opts.seed);
    cfg.validate()?;

    let (mut outputs, summary) = match command {
        Command::Simulate => simulate(&cfg, opts.dump)?,
        Command::Section => section(&cfg)?,
        Command::Scan => scan_command(&cfg, opts)?,
        Command::Report => unreachable!(),
    };
    let mut manifest = RunManifest::new(command.name(), &cfg, opts.threads, started);
    manifest.inputs = inputs;
    manifest.outputs = outputs
        .digests()
        .into_iter()
        .map(|(path, sha256)| FileDigest { path, sha256 })
        .collect();
    outputs.add("manifest.json", to_json(&manifest));
    outputs.commit(&opts.out)?;
    Ok(summary)
}

/// Generator for section-search attempt `k`.
pub fn attempt_rng(seed: u64, attempt: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt as u64);
    rng
}

/// Initial pendulum state of attempt `k`: the configured angles for the first
/// attempt when given, a seeded random state otherwise.
pub fn pendulum_initial(cfg: &RunConfig, attempt: usize) -> crate::error::Result<CartesianState> {
    let params = cfg.pendulum.params();
    match (attempt, cfg.pendulum.angles) {
        (0, Some(angles)) => {
            let s = from_angles(&params, angles, cfg.pendulum.angular_velocities.unwrap_or([0.0; 3]));
            project_to_manifold(&params, &s, cfg.integrator.projection_tol, 20)
        }
        _ => sample_initial_state(&params, cfg.pendulum.velocity_scale, &mut attempt_rng(cfg.seed, attempt)),
    }
}

/// Initial satellite state of attempt `k`: the configured point, perturbed
/// uniformly by up to `spread` per coordinate after the first attempt.
pub fn satellite_initial(cfg: &RunConfig, attempt: usize) -> [f64; SATELLITE_DIM] {
    let y = cfg.satellite.initial;
    if attempt == 0 || cfg.satellite.spread == 0.0 {
        return y;
    }
    let mut rng = attempt_rng(cfg.seed, attempt);
    let s = cfg.satellite.spread;
    std::array::from_fn(|i| y[i] + rng.random_range(-s..=s))
}

fn pendulum_system(params: PendulumParams, integrator: &IntegratorConfig) -> PendulumSystem {
    PendulumSystem::new(params, integrator.baumgarte_gamma, integrator.projection_tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub schema_version: u32,
    pub system: SystemKind,
    pub initial_state: Vec<f64>,
    pub final_state: Vec<f64>,
    pub t_final: f64,
    pub steps: u64,
    pub rejected: u64,
    pub energy_drift: Option<f64>,
    pub momentum_drift: Option<f64>,
    pub max_constraint_residual: Option<f64>,
}

impl SimulationSummary {
    fn new<const N: usize>(system: SystemKind, y0: &[f64; N], s: &TrajectorySummary<N>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            system,
            initial_state: y0.to_vec(),
            final_state: s.final_state.to_vec(),
            t_final: s.t_final,
            steps: s.steps,
            rejected: s.rejected,
            energy_drift: s.energy_drift,
            momentum_drift: s.momentum_drift,
            max_constraint_residual: s.max_constraint_residual,
        }
    }
}

fn simulate(cfg: &RunConfig, dump: bool) -> Result<(OutputSet, String), CliError> {
    let stride = cfg.dump_stride.max(1) as u64;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut k = 0u64;
    let (summary, header): (SimulationSummary, Vec<&str>) = match cfg.system {
        SystemKind::Pendulum => {
            let params = cfg.pendulum.params();
            let system = pendulum_system(params, &cfg.integrator);
            let y0 = pendulum_initial(cfg, 0)?.to_array();
            let rotating = params.gravity == 0.0;
            let s = integrate_trajectory(&system, 0.0, y0, &cfg.integrator, |seg| {
                k += 1;
                if dump && k % stride == 0 {
                    let t = seg.t1();
                    let y = seg.end();
                    let values = if rotating {
                        system.phase(t, &y)?.to_vec()
                    } else {
                        let a = segment_angles(&params, &CartesianState::from_array(t, &y))?;
                        a.alpha.iter().chain(a.alpha_dot.iter()).copied().collect()
                    };
                    rows.push(std::iter::once(num(t)).chain(values.into_iter().map(num)).collect());
                }
                Ok(ControlFlow::Continue(()))
            })?;
            let header = if rotating {
                [&["t"][..], &PENDULUM_COORDS[..]].concat()
            } else {
                vec!["t", "alpha1", "alpha2", "alpha3", "alpha1_dot", "alpha2_dot", "alpha3_dot"]
            };
            (SimulationSummary::new::<PENDULUM_DIM>(cfg.system, &y0, &s), header)
        }
        SystemKind::Satellite => {
            let system = SatelliteSystem {
                params: cfg.satellite.params(),
            };
            let y0 = satellite_initial(cfg, 0);
            let s = integrate_trajectory(&system, 0.0, y0, &cfg.integrator, |seg| {
                k += 1;
                if dump && k % stride == 0 {
                    rows.push(std::iter::once(seg.t1()).chain(seg.end()).map(num).collect());
                }
                Ok(ControlFlow::Continue(()))
            })?;
            let header = [&["t"][..], &SATELLITE_COORDS[..]].concat();
            (SimulationSummary::new::<SATELLITE_DIM>(cfg.system, &y0, &s), header)
        }
    };
    let mut out = OutputSet::new();
    out.add("summary.json", to_json(&summary));
    if dump {
        out.add("trajectory.csv", to_csv(&header, rows));
    }
    let text = format!(
        "t = {} after {} steps; energy drift {:.3e}, momentum drift {}, constraint residual {}",
        summary.t_final,
        summary.steps,
        summary.energy_drift.unwrap_or(0.0),
        summary.momentum_drift.map_or("n/a".into(), |d| format!("{d:.3e}")),
        summary.max_constraint_residual.map_or("n/a".into(), |d| format!("{d:.3e}")),
    );
    Ok((out, text))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: usize,
    pub initial_phase: Option<[f64; 4]>,
    pub labels: Vec<Label>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneRecord {
    pub index: usize,
    /// Coordinates held fixed, with their values.
    pub fixed: [String; 2],
    pub values: [f64; 2],
    pub slab_halfwidth: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionDocument {
    pub schema_version: u32,
    pub system: SystemKind,
    /// Attempt whose sections were written.
    pub attempt: usize,
    pub initial_state: Vec<f64>,
    pub initial_phase: [f64; 4],
    pub run_verdict: RunVerdict,
    pub planes: Vec<PlaneRecord>,
    pub attempts: Vec<AttemptRecord>,
}

struct SectionRun {
    initial_state: Vec<f64>,
    initial_phase: [f64; 4],
    clouds: Vec<SectionCloud>,
    verdicts: Vec<Verdict>,
}

fn section_attempt(cfg: &RunConfig, attempt: usize) -> crate::error::Result<SectionRun> {
    let section = cfg.section.section();
    match cfg.system {
        SystemKind::Pendulum => {
            let params = cfg.pendulum.params();
            let system = pendulum_system(params, &cfg.integrator);
            let y0 = pendulum_initial(cfg, attempt)?.to_array();
            let phase = system.phase(0.0, &y0)?;
            let planes = default_planes(&phase, section.slab_halfwidth, system.angular_mask())?;
            let (_, clouds) = collect_sections(&system, y0, &planes, &cfg.integrator, &section)?;
            Ok(finish_run(cfg, y0.to_vec(), phase, clouds))
        }
        SystemKind::Satellite => {
            let system = SatelliteSystem {
                params: cfg.satellite.params(),
            };
            let y0 = satellite_initial(cfg, attempt);
            let phase = system.phase(0.0, &y0)?;
            let planes = default_planes(&phase, section.slab_halfwidth, system.angular_mask())?;
            let (_, clouds) = collect_sections(&system, y0, &planes, &cfg.integrator, &section)?;
            Ok(finish_run(cfg, y0.to_vec(), phase, clouds))
        }
    }
}

fn finish_run(cfg: &RunConfig, initial_state: Vec<f64>, initial_phase: [f64; 4], clouds: Vec<SectionCloud>) -> SectionRun {
    let verdicts = clouds.iter().map(|c| classify_confirmed(c, &cfg.classifier)).collect();
    SectionRun {
        initial_state,
        initial_phase,
        clouds,
        verdicts,
    }
}

/// Indices of the two coordinates a plane holds fixed and the two it spans.
pub fn plane_axes(plane: &PlaneSpec) -> ([usize; 2], [usize; 2]) {
    let dominant = |v: &[f64; 4]| (0..4).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
    let [u, v] = plane.basis();
    ([dominant(&plane.rows[0]), dominant(&plane.rows[1])], [dominant(&u), dominant(&v)])
}

fn section(cfg: &RunConfig) -> Result<(OutputSet, String), CliError> {
    let names = match cfg.system {
        SystemKind::Pendulum => PENDULUM_COORDS,
        SystemKind::Satellite => SATELLITE_COORDS,
    };
    let mut attempts = Vec::new();
    let mut chosen: Option<(usize, SectionRun)> = None;
    let mut last_error = None;
    for k in 0..cfg.section.attempts {
        match section_attempt(cfg, k) {
            Ok(run) => {
                attempts.push(AttemptRecord {
                    attempt: k,
                    initial_phase: Some(run.initial_phase),
                    labels: run.verdicts.iter().map(|v| v.label).collect(),
                    error: None,
                });
                let witness = aggregate(&run.verdicts) == RunVerdict::NonIntegrabilityWitness;
                chosen = Some((k, run));
                if witness {
                    break;
                }
            }
            Err(e) => {
                attempts.push(AttemptRecord {
                    attempt: k,
                    initial_phase: None,
                    labels: Vec::new(),
                    error: Some(e.to_string()),
                });
                last_error = Some(e);
            }
        }
    }
    let Some((attempt, run)) = chosen else {
        return Err(CliError::Numeric(last_error.unwrap_or(Error::InvalidParameter("no attempts".into()))));
    };

    let mut out = OutputSet::new();
    let mut planes = Vec::new();
    let mut panels = Vec::new();
    for (idx, (cloud, verdict)) in run.clouds.iter().zip(&run.verdicts).enumerate() {
        let (fixed, free) = plane_axes(&cloud.plane);
        let values = [cloud.plane.offsets[0], cloud.plane.offsets[1]];
        planes.push(PlaneRecord {
            index: idx,
            fixed: fixed.map(|i| names[i].to_string()),
            values,
            slab_halfwidth: cloud.plane.slab_halfwidth,
            verdict: *verdict,
        });
        panels.push(Panel {
            title: format!(
                "{} = {:.3}, {} = {:.3}: {}",
                names[fixed[0]], values[0], names[fixed[1]], values[1], verdict.label
            ),
            x_label: names[free[0]].to_string(),
            y_label: names[free[1]].to_string(),
            points: cloud.plane_coords.clone(),
        });
        let header = ["t", names[0], names[1], names[2], names[3], "u", "v"];
        let rows = (0..cloud.len()).map(|i| {
            std::iter::once(cloud.times[i])
                .chain(cloud.points[i])
                .chain(cloud.plane_coords[i])
                .map(num)
                .collect()
        });
        out.add(format!("section_{idx}.csv"), to_csv(&header, rows));
    }
    let run_verdict = aggregate(&run.verdicts);
    let doc = SectionDocument {
        schema_version: SCHEMA_VERSION,
        system: cfg.system,
        attempt,
        initial_state: run.initial_state,
        initial_phase: run.initial_phase,
        run_verdict,
        planes,
        attempts,
    };
    out.add("verdicts.json", to_json(&doc));
    out.add("sections.svg", render_scatter_svg(&panels, 3).into_bytes());
    Ok((out, section_summary(&doc)))
}

fn section_summary(doc: &SectionDocument) -> String {
    let labels: Vec<String> = doc
        .planes
        .iter()
        .map(|p| format!("{} = {:.4}, {} = {:.4}: {}", p.fixed[0], p.values[0], p.fixed[1], p.values[1], p.verdict.label))
        .collect();
    format!(
        "attempt {} of {}: {:?}\n  {}",
        doc.attempt + 1,
        doc.attempts.len(),
        doc.run_verdict,
        labels.join("\n  ")
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDocument {
    pub schema_version: u32,
    pub result: ScanResult,
}

/// Matrix of proportions, one row per `eps1` node, plus the marginal.
pub fn scan_csv(r: &ScanResult) -> Vec<u8> {
    let header: Vec<String> = std::iter::once("eps1".to_string())
        .chain(r.eps2.iter().map(|e| format!("eps2={}", num(*e))))
        .chain(std::iter::once("marginal".to_string()))
        .collect();
    let props = r.proportions();
    let rows = r.eps1.iter().enumerate().map(|(i, e)| {
        std::iter::once(*e)
            .chain(props[i].iter().copied())
            .chain(std::iter::once(r.marginal[i]))
            .map(num)
            .collect()
    });
    to_csv(&header, rows)
}

fn scan_figures(out: &mut OutputSet, r: &ScanResult) {
    out.add("heatmap.svg", render_heatmap_svg(&r.eps1, &r.eps2, &r.proportions()).into_bytes());
    out.add("marginal.svg", render_marginal_svg(&r.eps1, &r.marginal).into_bytes());
}

fn scan_command(cfg: &RunConfig, opts: &Options) -> Result<(OutputSet, String), CliError> {
    let report_every = |done: usize, total: usize| {
        if opts.progress && (done == total || done % (total / 20).max(1) == 0) {
            eprintln!("scan: {done}/{total} samples");
        }
    };
    let result = scan_with_progress(&cfg.scan, opts.threads, &report_every)?;
    let mut out = OutputSet::new();
    out.add("scan.json", to_json(&ScanDocument {
        schema_version: SCHEMA_VERSION,
        result: result.clone(),
    }));
    out.add("scan.csv", scan_csv(&result));
    scan_figures(&mut out, &result);
    Ok((out, scan_summary(&result)))
}

fn scan_summary(r: &ScanResult) -> String {
    let mut lines = vec!["eps1      mean empty proportion".to_string()];
    for (e, m) in r.eps1.iter().zip(&r.marginal) {
        lines.push(format!("{:<9} {m:.4}", num(*e)));
    }
    let failed: usize = r.cells.iter().map(|c| c.n_failed).sum();
    let total: usize = r.cells.iter().map(|c| c.n_samples).sum();
    if let Some((i, _)) = r.marginal.iter().enumerate().rev().max_by(|a, b| a.1.total_cmp(b.1)) {
        lines.push(format!("largest marginal at eps1 = {}", num(r.eps1[i])));
    }
    lines.push(format!("{failed} of {total} samples failed numerically"));
    lines.join("\n")
}

/// Re-renders figures from results already in `dir` and summarizes them.
fn report(dir: &Path) -> Result<String, CliError> {
    let read = |name: &str| -> Result<Option<String>, CliError> {
        match std::fs::read_to_string(dir.join(name)) {
            Ok(s) => Ok(Some(s)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    };
    let bad = |name: &str, e: serde_json::Error| ConfigError(format!("{}: {e}", dir.join(name).display()));
    let mut out = OutputSet::new();
    let mut text = Vec::new();
    if let Some(s) = read("scan.json")? {
        let doc: ScanDocument = serde_json::from_str(&s).map_err(|e| bad("scan.json", e))?;
        let r = &doc.result;
        scan_figures(&mut out, r);
        text.push(scan_summary(r));
        let mut per_plane = vec![0usize; 6];
        for sample in r.cells.iter().flat_map(|c| &c.samples) {
            for (k, v) in sample.planes.iter().enumerate() {
                if v.label == Label::Curves && k < per_plane.len() {
                    per_plane[k] += 1;
                }
            }
        }
        text.push(format!("Curves verdicts per plane index: {per_plane:?}"));
        text.push(format!(
            "sampling: velocity bound {}, t_end {}, slab {}, {} samples per node (energy varies across samples)",
            num(r.config.velocity_scale),
            num(r.config.t_end),
            num(r.config.slab_halfwidth),
            r.config.samples_per_cell
        ));
    }
    if let Some(s) = read("verdicts.json")? {
        let doc: SectionDocument = serde_json::from_str(&s).map_err(|e| bad("verdicts.json", e))?;
        text.push(section_summary(&doc));
    }
    if text.is_empty() {
        return Err(ConfigError(format!("{}: no scan.json or verdicts.json to report on", dir.display())).into());
    }
    let body = text.join("\n\n") + "\n";
    out.add("report.txt", body.clone().into_bytes());
    out.commit(dir)?;
    Ok(body)
}
