//! End-to-end tests of the `alert` binary: exit codes, artifacts, and
//! manifest-based reruns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use alert_drift::alert::{assess, AssessParams};
use alert_drift::data::{load_csv, BlobConfig, DriftKind, DriftScenario, SequencePlan};
use alert_drift::repr::{MlpConfig, TrainedMlp};

fn alert_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_alert"))
}

fn run(args: &[&str]) -> Output {
    alert_bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

/// Writes a small labeled sequence and returns (dir, reference path, clean
/// batch path, drifted batch path).
fn small_sequence(dir: &Path) -> (PathBuf, PathBuf, PathBuf, PathBuf) {
    let blobs = BlobConfig {
        num_classes: 3,
        samples_per_class: 40,
        num_features: 6,
        center_spread: 3.0,
        quantize_step: Some(1.0),
        seed: 9,
        ..BlobConfig::default()
    };
    let scenario =
        DriftScenario { kind: DriftKind::Abrupt, magnitude: -8.0, fraction_drifted: 1.0, seed: 77 };
    let plan = SequencePlan::every_nth("cli-seq", 4, 120, blobs, 2, scenario, 5).unwrap();
    let sequence = plan.synthesize().unwrap();
    sequence.save_dir(dir, "label").unwrap();
    (
        dir.to_path_buf(),
        dir.join("d0.csv"),
        dir.join("d01.csv"),
        dir.join("d02.csv"),
    )
}

#[test]
fn train_writes_a_loadable_model_and_prints_loss_history() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, d0, _, _) = small_sequence(&tmp.path().join("seq"));
    let model = tmp.path().join("model.json");

    let out = run(&[
        "train",
        "--d0",
        d0.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--epochs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let text = stdout_of(&out);
    assert_eq!(text.matches("epoch").count(), 2, "one loss line per epoch:\n{text}");
    assert!(text.contains("loss"));
    assert!(TrainedMlp::load(&model).is_ok());
}

#[test]
fn train_reports_a_missing_label_column_by_name() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("bad.csv");
    std::fs::write(&csv, "a,b\n1.0,2.0\n").unwrap();

    let out = run(&[
        "train",
        "--d0",
        csv.to_str().unwrap(),
        "--model",
        tmp.path().join("m.json").to_str().unwrap(),
        "--label-col",
        "target",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr_of(&out).contains("target"), "message names the column");
    assert!(!csv.with_file_name("m.json").exists(), "no model on failure");
}

#[test]
fn assess_exits_zero_on_clean_and_ten_on_drifted() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, d0, clean, drifted) = small_sequence(&tmp.path().join("seq"));
    let model = tmp.path().join("model.json");
    run(&["train", "--d0", d0.to_str().unwrap(), "--model", model.to_str().unwrap()]);

    let clean_out = run(&[
        "assess",
        "--model",
        model.to_str().unwrap(),
        "--d0",
        d0.to_str().unwrap(),
        "--d1",
        clean.to_str().unwrap(),
    ]);
    assert_eq!(clean_out.status.code(), Some(0), "stderr: {}", stderr_of(&clean_out));
    let verdict: serde_json::Value = serde_json::from_str(&stdout_of(&clean_out)).unwrap();
    assert_eq!(verdict["retrain"], serde_json::Value::Bool(false));

    let drift_out = run(&[
        "assess",
        "--model",
        model.to_str().unwrap(),
        "--d0",
        d0.to_str().unwrap(),
        "--d1",
        drifted.to_str().unwrap(),
    ]);
    assert_eq!(drift_out.status.code(), Some(10));
    let verdict: serde_json::Value = serde_json::from_str(&stdout_of(&drift_out)).unwrap();
    assert_eq!(verdict["retrain"], serde_json::Value::Bool(true));
    assert!(verdict["utility"].as_f64().unwrap() >= 0.5);
}

#[test]
fn assess_through_a_saved_model_matches_the_in_process_verdict() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, d0_path, _, d1_path) = small_sequence(&tmp.path().join("seq"));
    let model_path = tmp.path().join("model.json");

    run(&["train", "--d0", d0_path.to_str().unwrap(), "--model", model_path.to_str().unwrap()]);
    let out = run(&[
        "assess",
        "--model",
        model_path.to_str().unwrap(),
        "--d0",
        d0_path.to_str().unwrap(),
        "--d1",
        d1_path.to_str().unwrap(),
    ]);

    let d0 = load_csv(&d0_path, "label", None).unwrap();
    let d1 = load_csv(&d1_path, "label", None).unwrap();
    let model = TrainedMlp::train(&d0, MlpConfig::default()).unwrap();
    let expected = assess(&model, &d0, &d1, &AssessParams::default()).unwrap();

    let expected_json = serde_json::to_string_pretty(&expected).unwrap();
    assert_eq!(stdout_of(&out).trim_end(), expected_json, "bit-identical verdict");
}

#[test]
fn assess_maps_a_feature_count_mismatch_to_its_own_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, d0, _, _) = small_sequence(&tmp.path().join("seq"));
    let model = tmp.path().join("model.json");
    run(&["train", "--d0", d0.to_str().unwrap(), "--model", model.to_str().unwrap()]);

    let narrow = tmp.path().join("narrow.csv");
    std::fs::write(&narrow, "f00,f01,label\n1.0,2.0,a\n3.0,4.0,b\n").unwrap();
    let out = run(&[
        "assess",
        "--model",
        model.to_str().unwrap(),
        "--d0",
        d0.to_str().unwrap(),
        "--d1",
        narrow.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stdout_of(&out).is_empty(), "no partial JSON on error");
}

#[test]
fn assess_rejects_a_corrupted_model_without_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, d0, clean, _) = small_sequence(&tmp.path().join("seq"));
    let model = tmp.path().join("model.json");
    std::fs::write(&model, "{\"not\": \"a model\"}").unwrap();

    let out = run(&[
        "assess",
        "--model",
        model.to_str().unwrap(),
        "--d0",
        d0.to_str().unwrap(),
        "--d1",
        clean.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(7));
    assert!(stdout_of(&out).is_empty(), "no partial JSON on error");
}

#[test]
fn missing_input_file_and_bad_flag_use_distinct_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, d0, _, _) = small_sequence(&tmp.path().join("seq"));
    let model = tmp.path().join("model.json");

    let io_out = run(&[
        "train",
        "--d0",
        tmp.path().join("missing.csv").to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
    ]);
    assert_eq!(io_out.status.code(), Some(3));

    let cfg_out = run(&[
        "train",
        "--d0",
        d0.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--layers",
        "1",
    ]);
    assert_eq!(cfg_out.status.code(), Some(2));

    let usage_out = run(&["train", "--no-such-flag"]);
    assert_eq!(usage_out.status.code(), Some(2));
}

#[test]
fn synth_uniform_marks_every_third_batch_in_the_truth_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("seq");

    let out = run(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--profile",
        "uniform",
        "--batches",
        "30",
        "--rows",
        "60",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let truth = std::fs::read_to_string(dir.join("drift_truth.csv")).unwrap();
    let drifted: Vec<usize> = truth
        .lines()
        .skip(1)
        .enumerate()
        .filter(|(_, line)| line.ends_with("true"))
        .map(|(i, _)| i + 1)
        .collect();
    let expected: Vec<usize> = (1..=30).filter(|b| b % 3 == 0).collect();
    assert_eq!(drifted, expected, "batches 3, 6, ..., 30 drifted");
    assert!(dir.join("d0.csv").exists());
    assert!(dir.join("d30.csv").exists());
    assert!(dir.join("manifest.json").exists());
}

#[test]
fn synth_rejects_uniform_only_flags_under_the_mixed_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "synth",
        "--out",
        tmp.path().join("seq").to_str().unwrap(),
        "--magnitude",
        "-4.0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("uniform"));
}

#[test]
fn synth_rerun_from_manifest_reproduces_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");

    run(&[
        "synth",
        "--out",
        first.to_str().unwrap(),
        "--profile",
        "uniform",
        "--batches",
        "4",
        "--rows",
        "50",
        "--drift-kind",
        "gradual",
        "--magnitude",
        "-3.5",
        "--seed",
        "21",
    ]);
    let out = run(&[
        "synth",
        "--out",
        second.to_str().unwrap(),
        "--manifest",
        first.join("manifest.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    for entry in std::fs::read_dir(&first).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(first.join(&name)).unwrap();
        let b = std::fs::read(second.join(&name)).unwrap();
        assert_eq!(a, b, "{} differs between runs", name.to_string_lossy());
    }
}

#[test]
fn bench_writes_report_artifacts_and_ranks_all_detectors() {
    let tmp = tempfile::tempdir().unwrap();
    let (seq_dir, _, _, _) = small_sequence(&tmp.path().join("seq"));
    let out_dir = tmp.path().join("bench");

    let out = run(&[
        "bench",
        "--seq",
        seq_dir.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let table = stdout_of(&out);
    for name in [
        "alert",
        "kuiper",
        "cvm",
        "anderson-darling",
        "mann-whitney",
        "welch-t",
        "chi-square",
        "ks",
        "psi",
        "energy",
        "emd",
    ] {
        assert!(table.contains(name), "table lists {name}:\n{table}");
    }
    for file in ["report.json", "report.txt", "timing.txt", "manifest.json"] {
        assert!(out_dir.join(file).exists(), "{file} written");
    }
    let report_txt = std::fs::read_to_string(out_dir.join("report.txt")).unwrap();
    assert_eq!(report_txt, table, "stdout mirrors report.txt");
}

#[test]
fn bench_rerun_from_manifest_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (seq_dir, _, _, _) = small_sequence(&tmp.path().join("seq"));
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");

    let out = run(&[
        "bench",
        "--seq",
        seq_dir.to_str().unwrap(),
        "--out",
        first.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let rerun = run(&[
        "bench",
        "--manifest",
        first.join("manifest.json").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
        "--jobs",
        "1",
    ]);
    assert_eq!(rerun.status.code(), Some(0), "stderr: {}", stderr_of(&rerun));

    // Everything except wall-clock timing must reproduce exactly.
    for file in ["report.json", "report.txt", "manifest.json"] {
        let a = std::fs::read(first.join(file)).unwrap();
        let b = std::fs::read(second.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between runs");
    }
}

#[test]
fn sweep_prints_the_grid_and_reruns_identically_from_its_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, d0, _, drifted) = small_sequence(&tmp.path().join("seq"));
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");

    let out = run(&[
        "sweep",
        "--d0",
        d0.to_str().unwrap(),
        "--d1",
        drifted.to_str().unwrap(),
        "--layers",
        "2,3",
        "--neurons",
        "8",
        "--epochs",
        "1,2",
        "--out",
        first.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let csv = stdout_of(&out);
    assert!(csv.starts_with("layers,neurons,epochs,utility\n"));
    assert_eq!(csv.lines().count(), 1 + 4, "header plus one line per grid point");

    let rerun = run(&[
        "sweep",
        "--manifest",
        first.join("manifest.json").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(rerun.status.code(), Some(0), "stderr: {}", stderr_of(&rerun));
    assert_eq!(
        std::fs::read(first.join("grid.csv")).unwrap(),
        std::fs::read(second.join("grid.csv")).unwrap(),
        "grid.csv differs between runs"
    );
    assert_eq!(stdout_of(&out), stdout_of(&rerun));
}

#[test]
fn manifest_of_the_wrong_command_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("seq");
    run(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--profile",
        "uniform",
        "--batches",
        "2",
        "--rows",
        "30",
    ]);

    let out = run(&[
        "bench",
        "--manifest",
        dir.join("manifest.json").to_str().unwrap(),
        "--out",
        tmp.path().join("bench").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("not a bench manifest"));
}
