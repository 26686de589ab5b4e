//! Takes one drifted verdict apart: how much does each of the four signals —
//! KS and PSI, over raw data and over embeddings — contribute to the score,
//! and what happens to the decision when a signal is removed?
//!
//! "Removed" means replaced by its no-drift value (p = 1 for a KS signal,
//! PSI = 0 for a PSI signal), so a negative delta reads as "this component
//! was pushing toward retraining".

use alert_drift::alert::{ablation, assess, AssessParams};
use alert_drift::data::{BlobConfig, DriftKind, DriftScenario, SequencePlan};
use alert_drift::repr::{MlpConfig, TrainedMlp};

fn main() {
    let blobs = BlobConfig { quantize_step: Some(1.0), seed: 31, ..BlobConfig::default() };
    let scenario = DriftScenario {
        kind: DriftKind::Abrupt,
        magnitude: -4.0,
        fraction_drifted: 0.7,
        seed: 13,
    };
    let plan =
        SequencePlan::every_nth("ablate", 1, 700, blobs, 1, scenario, 31).expect("valid plan");
    let sequence = plan.synthesize().expect("synthesize");
    let (d0, d1) = (&sequence.reference, &sequence.batches[0]);

    let model = TrainedMlp::train(d0, MlpConfig::default()).expect("train");
    let verdict = assess(&model, d0, d1, &AssessParams::default()).expect("assess");

    println!("utility {:.4}, retrain = {}\n", verdict.utility, verdict.retrain);

    println!("contribution shares:");
    let shares = verdict.contributions.shares();
    for (name, share) in ["ks data", "ks repr", "psi data", "psi repr"].iter().zip(shares) {
        println!("  {name:<9} {share:>6.2}%");
    }

    println!();
    print!("{}", ablation(&verdict));
}
