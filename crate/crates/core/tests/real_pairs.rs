use std::fs;
use std::path::Path;

use dccause::harness::{run_real_pairs, ExperimentConfig, Family};
use dccause::seed::rng_from_seed;
use dccause::synth::{gen_anm, standard_noise_domain};
use dccause::Verdict;

/// Writes a pair file whose first column causes the second, both scaled
/// into continuous-looking values.
fn write_anm_pair(dir: &Path, id: u32, seed: u64, swap: bool) {
    let mut rng = rng_from_seed(seed);
    let model = gen_anm(&mut rng, 20, 20, &standard_noise_domain(3).unwrap()).unwrap();
    let sample = model.sample(800, &mut rng).unwrap();
    let mut text = String::new();
    for &(x, y) in sample.records() {
        let (a, b) = if swap { (y, x) } else { (x, y) };
        text.push_str(&format!("{:.3} {:.3}\n", a as f64 * 1.5, b as f64 * 2.0));
    }
    fs::write(dir.join(format!("pair{id:04}.txt")), text).unwrap();
}

fn dataset() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_anm_pair(dir.path(), 1, 1, false);
    write_anm_pair(dir.path(), 2, 2, true);
    write_anm_pair(dir.path(), 17, 3, false);
    fs::write(
        dir.path().join("pair0004.txt"),
        "1.0 2.0\n1.0 3.0\n1.0 4.0\n",
    )
    .unwrap();
    fs::write(
        dir.path().join("pairmeta.txt"),
        "0001 1 1 2 2 1\n0002 2 2 1 1 1\n0003 1 1 2 2 1\n0004 1 1 2 2 1\n0017 1 1 2 2 1\n",
    )
    .unwrap();
    dir
}

fn config(dir: &Path) -> ExperimentConfig {
    let mut config = ExperimentConfig::real_pairs(dir);
    if let Family::RealPairs { replicates, .. } = &mut config.family {
        *replicates = 10;
    }
    config
}

#[test]
fn scores_retained_pairs_and_records_failures() {
    let dir = dataset();
    let report = run_real_pairs(&config(dir.path())).unwrap();
    let summary = report.summary.as_ref().unwrap();
    assert_eq!(summary.pairs_listed, 5);
    assert_eq!(summary.pairs_excluded, 1);
    assert_eq!(summary.pairs_scored, 2);
    assert_eq!(summary.pairs_failed, 2);
    assert_eq!(summary.replicate_accuracies.len(), 10);

    let ids: Vec<u32> = report.pairs.iter().map(|p| p.id).collect();
    assert_eq!(ids, vec![1, 2, 3, 4]);
    let pair = |id| report.pairs.iter().find(|p| p.id == id).unwrap();
    assert_eq!(pair(1).truth, Verdict::XCausesY);
    assert_eq!(pair(2).truth, Verdict::YCausesX);
    assert!(pair(3).error.is_some(), "missing file must be reported");
    assert!(pair(4).error.is_some(), "constant column must be reported");
    for id in [1, 2] {
        let p = pair(id);
        assert!(p.error.is_none());
        assert_eq!(p.correct + p.wrong + p.undecided, 10);
    }

    let pooled = (pair(1).correct + pair(2).correct) as f64
        / (pair(1).correct + pair(1).wrong + pair(2).correct + pair(2).wrong).max(1) as f64;
    assert!((summary.pooled_accuracy - pooled).abs() < 1e-12);
    assert!(summary.pooled_accuracy > 0.5);
}

#[test]
fn real_pair_reports_are_deterministic() {
    let dir = dataset();
    let mut single = config(dir.path());
    single.threads = Some(1);
    let a = run_real_pairs(&single).unwrap();
    let b = run_real_pairs(&config(dir.path())).unwrap();
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    assert_eq!(
        a.without_timing().summary.unwrap().replicate_accuracies,
        b.without_timing().summary.unwrap().replicate_accuracies
    );
}
