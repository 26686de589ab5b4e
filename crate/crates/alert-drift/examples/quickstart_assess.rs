//! The whole pipeline in one sitting: synthesize a labeled reference window,
//! train the representation model, then score one clean and one drifted batch.
//!
//! The utility combines four signals — KS and PSI, each over raw features and
//! over learned embeddings — into a score in [0.25, 1]. A same-distribution
//! batch lands near the 0.25 floor; the decision threshold sits at 0.5.

use alert_drift::alert::{assess, AssessParams};
use alert_drift::data::{BlobConfig, DriftKind, DriftScenario, SequencePlan};
use alert_drift::repr::{MlpConfig, TrainedMlp};

fn main() {
    // Five classes of quantized signal-strength-style readings; batch 2 gets
    // an abrupt shift of -6 units on every feature, batch 1 stays clean.
    let blobs = BlobConfig { quantize_step: Some(1.0), seed: 42, ..BlobConfig::default() };
    let scenario =
        DriftScenario { kind: DriftKind::Abrupt, magnitude: -6.0, fraction_drifted: 1.0, seed: 1 };
    let plan = SequencePlan::every_nth("quickstart", 2, 600, blobs, 2, scenario, 42)
        .expect("valid plan");
    let sequence = plan.synthesize().expect("synthesize");

    let d0 = &sequence.reference;
    println!(
        "reference window: {} rows, {} features, {} classes",
        d0.num_rows(),
        d0.num_features(),
        d0.num_classes()
    );

    let model = TrainedMlp::train(d0, MlpConfig::default()).expect("train");
    println!("trained a {}-hidden-layer network\n", model.num_hidden_layers());

    let params = AssessParams::default();
    for (batch, label) in sequence.batches.iter().zip(["clean", "drifted"]) {
        let verdict = assess(&model, d0, batch, &params).expect("assess");
        println!("{label} batch:");
        println!("  utility      {:.4}  (threshold {})", verdict.utility, verdict.threshold);
        println!("  ks utility   {:.4}", verdict.utility_ks);
        println!("  psi utility  {:.4}", verdict.utility_psi);
        println!("  retrain      {}\n", verdict.retrain);
    }
}
