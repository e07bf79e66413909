use std::fs;
use std::path::Path;

use cltlab::harness::{run_report, ExperimentConfig, Section};
use cltlab::processes::{CircleWalkSpec, LsvObservable, LsvSpec, ProcessModel};

fn rademacher() -> ProcessModel {
    ProcessModel::rademacher()
}

fn small(model: ProcessModel, grid: Vec<usize>, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(model, grid);
    cfg.pooled_samples = 4000;
    cfg.bootstrap = 20;
    cfg.conditional.states = 8;
    cfg.conditional.paths = 1000;
    cfg.coefficients.mc_states = 4;
    cfg.coefficients.mc_paths = 1000;
    cfg.coefficients.lags = vec![1, 2];
    cfg.sigma2_path_length = 1 << 14;
    cfg.outputs = out.to_path_buf();
    cfg.seed = 11;
    cfg
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn rademacher_report_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small(rademacher(), vec![256, 1024, 4096], tmp.path());
    let summary = run_report(&cfg).unwrap();
    let w2 = read(tmp.path(), "w2.csv");
    assert_eq!(w2.lines().count(), 4, "{w2}");
    assert!(w2.starts_with("n,w2,se"));
    assert!(summary.fits.w2.is_some());
    assert_eq!(summary.sigma2.value, 1.0);
    for f in ["be.csv", "quantile.csv", "cond_w2.csv", "coefficients.csv", "summary.json"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    let json: serde_json::Value = serde_json::from_str(&read(tmp.path(), "summary.json")).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["w2"].as_array().unwrap().len(), 3);
}

#[test]
fn report_independent_of_thread_count() {
    let run = |threads: usize| {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = small(rademacher(), vec![64, 256, 1024], tmp.path());
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_report(&cfg).unwrap());
        ["w2.csv", "be.csv", "cond_w2.csv", "quantile.csv", "summary.json"].map(|f| read(tmp.path(), f))
    };
    assert_eq!(run(1), run(8));
}

#[test]
fn lsv_conditional_section_not_applicable() {
    let tmp = tempfile::tempdir().unwrap();
    let model = ProcessModel::LsvMap(LsvSpec {
        gamma: 0.1,
        observable: LsvObservable::Indicator { threshold: 0.9 },
        burn_in: 1000,
        centering_steps: 50_000,
    });
    let cfg = small(model, vec![64, 256], tmp.path());
    let summary = run_report(&cfg).unwrap();
    assert!(matches!(summary.conditional_w2, Section::Skipped { .. }));
    let cond = read(tmp.path(), "cond_w2.csv");
    assert!(cond.contains("not applicable"), "{cond}");
    let json: serde_json::Value = serde_json::from_str(&read(tmp.path(), "summary.json")).unwrap();
    assert_eq!(json["conditional_w2"]["status"], "not applicable");
}

#[test]
fn circle_conditional_cost_falls_with_n() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(ProcessModel::CircleWalk(CircleWalkSpec::default()), vec![16, 64], tmp.path());
    cfg.conditional.states = 16;
    cfg.conditional.paths = 4000;
    let summary = run_report(&cfg).unwrap();
    let rows = summary.conditional_w2.done().unwrap();
    assert!(rows[1].value < rows[0].value, "{rows:?}");
}

#[test]
fn same_seed_same_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_report(&small(rademacher(), vec![32, 128], a.path())).unwrap();
    run_report(&small(rademacher(), vec![32, 128], b.path())).unwrap();
    assert_eq!(read(a.path(), "w2.csv"), read(b.path(), "w2.csv"));
    let mut other = small(rademacher(), vec![32, 128], b.path());
    other.seed = 12;
    run_report(&other).unwrap();
    assert_ne!(read(a.path(), "w2.csv"), read(b.path(), "w2.csv"));
}
