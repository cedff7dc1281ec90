use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn dccause(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_dccause"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).unwrap()
}

fn synth(dir: &Path, family: &str, n: &str) {
    let out = dccause(
        &[
            "synth",
            "--family",
            family,
            "--n",
            n,
            "--seed",
            "7",
            "--out",
            dir.to_str().unwrap(),
        ],
        "",
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn synth_then_infer_recovers_anm_direction() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "anm", "3000");
    let model: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("model.json")).unwrap()).unwrap();
    assert_eq!(model["mechanism"]["kind"], "anm");
    let csv = fs::read_to_string(dir.path().join("sample.csv")).unwrap();
    assert!(csv.starts_with("x,y\n"));
    assert_eq!(csv.lines().count(), 3001);

    let path = dir.path().join("sample.csv");
    let report = json(&dccause(
        &["infer", path.to_str().unwrap(), "--epsilon", "0.05"],
        "",
    ));
    assert_eq!(report["n"], 3000);
    assert_eq!(report["verdict"], "x_causes_y");
    let from_stdin = json(&dccause(&["infer", "--epsilon", "0.05"], &csv));
    assert_eq!(report, from_stdin);
}

#[test]
fn synth_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    synth(a.path(), "reference_set", "500");
    synth(b.path(), "reference_set", "500");
    for file in ["model.json", "sample.csv"] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap()
        );
    }
}

#[test]
fn regression_baseline_reports_p_values() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "anm", "1000");
    let csv = fs::read_to_string(dir.path().join("sample.csv")).unwrap();
    let report = json(&dccause(&["infer", "--method", "dr", "--seed", "3"], &csv));
    for key in ["n", "m", "l", "p_xy", "p_yx", "alpha", "verdict"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(
        report,
        json(&dccause(&["infer", "--method", "dr", "--seed", "3"], &csv))
    );
}

#[test]
fn dcor_reads_observation_table() {
    let report = json(&dccause(&["dcor"], "# alpha beta1 beta2\n0 0 0\n1 3 4\n"));
    assert_eq!(report["n"], 2);
    assert!((report["dcor"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn discretize_applies_rules() {
    let out = dccause(&["discretize"], "a,b\n0.037,3.6\n0.8,-3.9\n");
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1,4\n16,-4\n");
    let out = dccause(&["discretize", "--rule", "scale:100"], "-0.0137\n");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "-1\n");
}

#[test]
fn exit_codes_follow_error_kind() {
    assert_eq!(dccause(&["frobnicate"], "").status.code(), Some(1));
    assert_eq!(
        dccause(&["infer", "--epsilon", "-0.5"], "1,2\n2,1\n")
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        dccause(&["discretize", "--rule", "scale:x"], "1\n")
            .status
            .code(),
        Some(1)
    );
    assert_eq!(dccause(&["infer"], "1,2\n1,3\n").status.code(), Some(2));
    assert_eq!(dccause(&["infer"], "1,2\nfoo,3\n").status.code(), Some(2));
    assert_eq!(dccause(&["dcor"], "1 2\n").status.code(), Some(2));
    assert_eq!(dccause(&["bench", "real-pairs"], "").status.code(), Some(1));
    assert_eq!(dccause(&["--help"], "").status.code(), Some(0));
}

#[test]
fn bench_reports_are_deterministic() {
    let config = tempfile::NamedTempFile::new().unwrap();
    fs::write(
        config.path(),
        r#"{
            "family": {"kind": "anm", "x_size": 30, "y0_size": 30, "noise_domains": [[-1, 1], [-1, 0, 1]]},
            "sample_sizes": [200, 400],
            "models_per_setting": 4,
            "methods": ["dc", "dr"],
            "master_seed": 11,
            "dr": {"permutations": 50}
        }"#,
    )
    .unwrap();
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = dccause(
            &[
                "bench",
                "accuracy",
                "--config",
                config.path().to_str().unwrap(),
                "--out",
                dir.path().to_str().unwrap(),
                "--threads",
                threads,
            ],
            "",
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let mut report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
                .unwrap();
        let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
        for row in report["rows"].as_array_mut().unwrap() {
            row["mean_time_us"] = 0.into();
            row["total_time_s"] = 0.into();
        }
        let csv: Vec<String> = csv
            .lines()
            .map(|l| l.rsplitn(3, ',').nth(2).unwrap().to_string())
            .collect();
        (report, csv)
    };
    let (first, first_csv) = run("1");
    let (second, second_csv) = run("2");
    assert_eq!(first, second);
    assert_eq!(first_csv, second_csv);
    assert_eq!(first["rows"].as_array().unwrap().len(), 2 * 2 * 2);
    assert_eq!(first["provenance"]["master_seed"], 11);
}

#[test]
fn bench_models_flag_overrides_config() {
    let out = dccause(&["bench", "threshold", "--models", "3"], "");
    let report = json(&out);
    assert_eq!(report["kind"], "threshold");
    for row in report["rows"].as_array().unwrap() {
        assert_eq!(row["models"], 3);
    }
}
