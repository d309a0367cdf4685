use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use gsdlab::io;
use gsdlab::pipeline::{
    emit_plot_data, run_pipeline, ExperimentManifest, GenerationSpec, PlotKind, RunOptions, StageStatus, MANIFEST_FILE,
};
use gsdlab::stats::{self, Gsd};
use gsdlab::topology::ChimeraSpec;
use gsdlab::Error;
use tempfile::TempDir;

fn small_manifest(count: usize) -> ExperimentManifest {
    let generation = GenerationSpec {
        clause_density: 1.0,
        count,
        max_solutions: 100,
        ..GenerationSpec::default()
    };
    let mut m = ExperimentManifest::new("smoke", 77, ChimeraSpec::new(2, 2, 4), generation);
    m.sa.anneals = 1000;
    m.sa.pilot_grid = vec![4, 16, 64];
    m.sa.pilot_anneals = 100;
    m.sa.tts_grid = vec![2, 8, 32];
    m.sa.tts_anneals = 100;
    m.compare.bootstrap = 200;
    m
}

/// Every file under `dir`, by relative path.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

struct Run {
    dir: TempDir,
    manifest: ExperimentManifest,
}

fn smoke_run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        let mut manifest = small_manifest(10);
        run_pipeline(&mut manifest, dir.path(), &RunOptions { threads: Some(1), verify: false }).unwrap();
        Run { dir, manifest }
    })
}

#[test]
fn empty_ensemble_completes_without_artifacts() {
    let dir = TempDir::new().unwrap();
    let mut m = small_manifest(0);
    run_pipeline(&mut m, dir.path(), &RunOptions::default()).unwrap();
    let files = snapshot(dir.path());
    assert_eq!(files.keys().collect::<Vec<_>>(), vec![Path::new(MANIFEST_FILE)]);
    assert!(m.stages.values().all(|s| *s == StageStatus::Done));
}

#[test]
fn smoke_ensemble_produces_consistent_artifacts() {
    let run = smoke_run();
    let m = &run.manifest;
    assert_eq!(m.instances.len(), 10);
    let mut analytic = 0;
    for rec in &m.instances {
        assert_eq!(rec.status.get("generate"), Some(&StageStatus::Done));
        for rel in rec.files.values() {
            assert!(run.dir.path().join(rel).exists(), "{rel}");
        }
        if rec.status.get("enumerate") != Some(&StageStatus::Done) {
            continue;
        }
        let sols = io::load(&run.dir.path().join(&rec.files["solutions"]), io::parse_solutions).unwrap();
        assert_eq!(Some(sols.len()), rec.ground_states);
        for (kind, rel) in rec.files.iter().filter(|(k, _)| k.starts_with("gsd:")) {
            let g = io::load(&run.dir.path().join(rel), io::parse_any_gsd).unwrap();
            assert_eq!(g.len(), sols.len(), "{kind}");
            let p = g.probabilities();
            let total: f64 = p.iter().sum();
            if matches!(g, Gsd::Analytic(_)) {
                analytic += 1;
                assert!((total - 1.0).abs() < 1e-9);
            } else if g.total() > Some(0) {
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }
    assert!(analytic > 0);
    let rows = io::load(&run.dir.path().join("report/comparisons.csv"), io::parse_report_csv).unwrap();
    assert!(!rows.is_empty());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.dir.path().join("report/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["generated"], 10);
    for kind in PlotKind::ALL {
        assert!(run.dir.path().join(format!("plots/{}.csv", kind.name())).exists());
    }
    let on_disk = ExperimentManifest::load(&run.dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(&on_disk, m);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let first = smoke_run();
    let dir = TempDir::new().unwrap();
    let mut m = small_manifest(10);
    run_pipeline(&mut m, dir.path(), &RunOptions { threads: Some(3), verify: false }).unwrap();
    assert_eq!(snapshot(first.dir.path()), snapshot(dir.path()));

    // A completed manifest reruns as a no-op, and verification recomputes
    // every stage without finding differences.
    let before = snapshot(dir.path());
    run_pipeline(&mut m, dir.path(), &RunOptions::default()).unwrap();
    assert_eq!(before, snapshot(dir.path()));
    run_pipeline(&mut m, dir.path(), &RunOptions { threads: Some(2), verify: true }).unwrap();
    assert_eq!(before, snapshot(dir.path()));
}

#[test]
fn verification_catches_tampered_artifacts() {
    let dir = TempDir::new().unwrap();
    let mut m = small_manifest(2);
    m.quantum.drivers.clear();
    m.compare.pairs.clear();
    run_pipeline(&mut m, dir.path(), &RunOptions::default()).unwrap();
    let rec = m.instances.iter().find(|r| r.files.contains_key("gsd:sa")).unwrap();
    let path = dir.path().join(&rec.files["gsd:sa"]);
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("# edited\n");
    std::fs::write(&path, text).unwrap();
    let err = run_pipeline(&mut m, dir.path(), &RunOptions { threads: None, verify: true }).unwrap_err();
    assert!(matches!(err, Error::Integrity(_)), "{err}");
}

#[test]
fn deleted_artifacts_are_regenerated() {
    let dir = TempDir::new().unwrap();
    let mut m = small_manifest(2);
    m.quantum.drivers.truncate(1);
    run_pipeline(&mut m, dir.path(), &RunOptions::default()).unwrap();
    let before = snapshot(dir.path());
    let rec = &m.instances[0];
    std::fs::remove_file(dir.path().join(&rec.files["solutions"])).unwrap();
    run_pipeline(&mut m, dir.path(), &RunOptions::default()).unwrap();
    assert_eq!(before, snapshot(dir.path()));
}

#[test]
fn plot_data_has_the_expected_shape() {
    let run = smoke_run();
    let hist = emit_plot_data(run.dir.path(), PlotKind::SolutionHistogram).unwrap();
    let kept = run.manifest.instances.iter().filter(|r| r.ground_states.is_some()).count();
    assert_eq!(hist.column("instances").unwrap().iter().sum::<f64>() as usize, kept);

    let scatter = emit_plot_data(run.dir.path(), PlotKind::BiasScatter).unwrap();
    assert!(scatter.is_consistent());
    for name in ["bias_a", "bias_combined", "y_eq_x", "y_eq_half_x"] {
        assert!(scatter.column(name).is_some(), "{name}");
    }
    let tts = emit_plot_data(run.dir.path(), PlotKind::TtsCurves).unwrap();
    assert!(!tts.labels.is_empty());
    let bars = emit_plot_data(run.dir.path(), PlotKind::GsdBars).unwrap();
    assert_eq!(bars.columns.len(), 4);
    let pm = emit_plot_data(run.dir.path(), PlotKind::PvalueMatrix).unwrap();
    assert!(pm.columns.iter().flat_map(|c| &c.1).all(|p| p.is_nan() || (0.0..=1.0).contains(p)));
}

#[test]
fn bias_scatter_against_uniform_lies_on_half_line() {
    let dir = TempDir::new().unwrap();
    let mut m = small_manifest(0);
    m.compare.pairs = vec![("sa".into(), "flat".into())];
    m.save(&dir.path().join(MANIFEST_FILE)).unwrap();
    let flat = Gsd::Analytic(vec![0.25; 4]);
    let rows: Vec<_> = [[10u64, 3, 0, 7], [1, 1, 1, 1], [40, 0, 0, 0]]
        .iter()
        .enumerate()
        .map(|(i, c)| stats::compare(&format!("i{i}"), ("sa", &Gsd::Empirical(c.to_vec())), ("flat", &flat), 50, 1).unwrap())
        .collect();
    io::write_text(&dir.path().join("report/comparisons.csv"), &io::report_to_csv(&rows)).unwrap();
    let data = emit_plot_data(dir.path(), PlotKind::BiasScatter).unwrap();
    let (y, half) = (data.column("bias_combined").unwrap(), data.column("y_eq_half_x").unwrap());
    assert_eq!(y.len(), 3);
    for (a, b) in y.iter().zip(half) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn plot_data_without_artifacts_is_a_dependency_error() {
    let dir = TempDir::new().unwrap();
    assert!(matches!(emit_plot_data(dir.path(), PlotKind::GsdBars), Err(Error::Dependency(_))));
    small_manifest(0).save(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert!(matches!(emit_plot_data(dir.path(), PlotKind::BiasScatter), Err(Error::Dependency(_))));
}

#[test]
fn manifest_round_trips_through_json() {
    let m = small_manifest(3);
    let back: ExperimentManifest = serde_json::from_str(&m.to_json()).unwrap();
    assert_eq!(back, m);
}
