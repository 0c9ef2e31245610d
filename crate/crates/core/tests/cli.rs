use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sectionscope::io::commands::{ScanDocument, SectionDocument, SimulationSummary};
use sectionscope::io::RunManifest;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sectionscope"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str], cfg: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = match std::fs::read_dir(dir) {
        Ok(rd) => rd.map(|e| e.unwrap().file_name().into_string().unwrap()).collect(),
        Err(_) => Vec::new(),
    };
    names.sort();
    names
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write(dir.path(), "bad.toml", "[pendulum]\neps = [1.0, 1.0]\nmystery = 3\n");
    let o = run(&["simulate"], &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mystery"));
    assert!(files(&out).is_empty());

    let cfg = write(dir.path(), "range.toml", "[pendulum]\neps = [1.5, 0.0]\n");
    assert_eq!(run(&["simulate"], &cfg, &out).status.code(), Some(2));
    assert!(files(&out).is_empty());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = bin().args(["simulate", "--frobnicate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_without_results_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().arg("report").arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_dump_has_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "short.toml",
        "[pendulum]\neps = [0.5, 0.5]\nangles = [0.3, 1.4, -0.8]\nangular_velocities = [0.6, -0.4, 0.9]\n\n[integrator]\nt_end = 5.0\n",
    );
    let out = dir.path().join("out");
    let o = run(&["simulate", "--dump"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(files(&out), ["manifest.json", "summary.json", "trajectory.csv"]);

    let summary: SimulationSummary = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("t,"));
    assert_eq!(lines.count() as u64, summary.steps);
    assert!(summary.energy_drift.unwrap() < 1e-8);
    assert!(summary.max_constraint_residual.unwrap() <= 1e-11);
}

#[test]
fn zero_duration_dump_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "zero.toml", "[integrator]\nt_end = 0.0\n");
    let out = dir.path().join("out");
    let o = run(&["simulate", "--dump"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: SimulationSummary = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.steps, 0);
    assert_eq!(summary.final_state, summary.initial_state);
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn section_on_decoupled_system_finds_no_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "dec.toml",
        "seed = 4\n\n[pendulum]\neps = [0.0, 0.5]\n\n[integrator]\nt_end = 500.0\nrel_tol = 1e-6\nabs_tol = 1e-8\n\n[section]\nslab_halfwidth = 0.05\nattempts = 3\n",
    );
    let out = dir.path().join("out");
    let o = run(&["section"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: SectionDocument = serde_json::from_str(&std::fs::read_to_string(out.join("verdicts.json")).unwrap()).unwrap();
    assert_eq!(doc.attempts.len(), 3);
    assert!(doc.planes.iter().all(|p| p.verdict.label != sectionscope::Label::Curves));
    assert!(files(&out).contains(&"sections.svg".to_string()));
}

#[test]
fn scan_is_reproducible_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let cfg = config("scan_small.toml");
    assert!(run(&["scan", "--threads", "1"], &cfg, &a).status.success());
    assert!(run(&["scan", "--threads", "2"], &cfg, &b).status.success());
    // rerun from the manifest alone
    assert!(run(&["scan", "--threads", "1"], &a.join("manifest.json"), &c).status.success());
    for name in ["scan.json", "scan.csv", "heatmap.svg", "marginal.svg"] {
        let first = std::fs::read(a.join(name)).unwrap();
        assert_eq!(first, std::fs::read(b.join(name)).unwrap(), "{name} differs across thread counts");
        assert_eq!(first, std::fs::read(c.join(name)).unwrap(), "{name} differs on manifest rerun");
    }

    let manifest: RunManifest = serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    for d in &manifest.outputs {
        let bytes = std::fs::read(a.join(&d.path)).unwrap();
        assert_eq!(sectionscope::io::output::sha256_hex(&bytes), d.sha256);
    }

    let doc: ScanDocument = serde_json::from_str(&std::fs::read_to_string(a.join("scan.json")).unwrap()).unwrap();
    assert_eq!(doc.result.eps1.len(), 3);
    assert_eq!(doc.result.eps2.len(), 2);
    let csv = std::fs::read_to_string(a.join("scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);

    let o = bin().arg("report").arg("--out").arg(&a).output().unwrap();
    assert!(o.status.success());
    let text = std::fs::read_to_string(a.join("report.txt")).unwrap();
    assert!(text.contains("eps1"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "tiny.toml",
        "[scan]\neps1_range = [1.0, 1.0]\neps2_range = [1.0, 1.0]\nsamples_per_cell = 1\nt_end = 20.0\n",
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&["scan", "--seed", "11"], &cfg, &a).status.success());
    assert!(run(&["scan", "--seed", "12"], &cfg, &b).status.success());
    let read = |d: &Path| -> ScanDocument { serde_json::from_str(&std::fs::read_to_string(d.join("scan.json")).unwrap()).unwrap() };
    let (x, y) = (read(&a), read(&b));
    assert_eq!(x.result.config.seed, 11);
    assert_ne!(x.result.cells[0].samples[0].initial, y.result.cells[0].samples[0].initial);
}
