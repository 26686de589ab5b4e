//! Saves a trained model to its versioned JSON format, loads it back, and
//! shows that the round-trip changes nothing: same predictions, same drift
//! verdict, bit for bit.
//!
//! The file carries the network weights, the fitted standardizer, the label
//! names, and the full training configuration, so a loaded model embeds
//! batches exactly as the original did. This is what lets `train` run once
//! on a build server while `assess` runs wherever batches arrive.

use alert_drift::alert::{assess, AssessParams};
use alert_drift::data::{BlobConfig, DriftKind, DriftScenario, SequencePlan};
use alert_drift::repr::{MlpConfig, TrainedMlp};

fn main() {
    let blobs = BlobConfig { quantize_step: Some(1.0), seed: 17, ..BlobConfig::default() };
    let scenario =
        DriftScenario { kind: DriftKind::Gradual, magnitude: -5.0, fraction_drifted: 0.6, seed: 4 };
    let plan =
        SequencePlan::every_nth("persist", 1, 500, blobs, 1, scenario, 17).expect("valid plan");
    let sequence = plan.synthesize().expect("synthesize");
    let (d0, d1) = (&sequence.reference, &sequence.batches[0]);

    let model = TrainedMlp::train(d0, MlpConfig::default()).expect("train");

    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("model.json");
    model.save(&path).expect("save");
    let bytes = std::fs::metadata(&path).expect("metadata").len();
    println!("saved {} parameters to {} ({bytes} bytes)", model.param_count(), path.display());

    let loaded = TrainedMlp::load(&path).expect("load");

    let row = d1.row(0);
    let before = model.predict_row(row).expect("predict");
    let after = loaded.predict_row(row).expect("predict");
    println!("prediction on one row: {before} before, {after} after the round-trip");

    let params = AssessParams::default();
    let verdict_before = assess(&model, d0, d1, &params).expect("assess");
    let verdict_after = assess(&loaded, d0, d1, &params).expect("assess");
    assert_eq!(verdict_before, verdict_after, "round-trip must be exact");
    println!(
        "drift verdict identical through the file: utility {:.4}, retrain = {}",
        verdict_after.utility, verdict_after.retrain
    );

    // The format is versioned; anything else is rejected up front.
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"format_version\": 999}").expect("write");
    let err = TrainedMlp::load(&bad).expect_err("must reject");
    println!("\nloading a foreign file fails cleanly: {err}");
}
