//! Grid-searches the network shape — total layers, hidden width, training
//! epochs — on one known-drifted pair and prints the utility per grid point.
//!
//! Every point trains its own seeded network on the reference window and
//! assesses the same drifted batch, so the grid isolates the effect of model
//! capacity on drift visibility. On a strong shift even the smallest network
//! clears the retraining threshold; deeper, longer-trained networks push the
//! utility higher still.

use alert_drift::alert::AssessParams;
use alert_drift::bench::sweep_mlp;
use alert_drift::data::{BlobConfig, DriftKind, DriftScenario, SequencePlan};
use alert_drift::repr::MlpConfig;

fn main() {
    let blobs = BlobConfig { quantize_step: Some(1.0), seed: 5, ..BlobConfig::default() };
    let scenario =
        DriftScenario { kind: DriftKind::Abrupt, magnitude: -6.0, fraction_drifted: 1.0, seed: 2 };
    let plan =
        SequencePlan::every_nth("sweep", 1, 800, blobs, 1, scenario, 5).expect("valid plan");
    let sequence = plan.synthesize().expect("synthesize");
    let (d0, d1) = (&sequence.reference, &sequence.batches[0]);
    println!("drifted pair: {} rows each, {} features\n", d0.num_rows(), d0.num_features());

    let layers = [2, 3, 4];
    let neurons = [10, 20, 40];
    let epochs = [1, 3, 5];
    let report = sweep_mlp(
        d0,
        d1,
        &layers,
        &neurons,
        &epochs,
        &MlpConfig::default(),
        &AssessParams::default(),
        None,
    )
    .expect("sweep");

    print!("{}", report.to_csv());

    let best = report
        .points
        .iter()
        .max_by(|a, b| a.utility.total_cmp(&b.utility))
        .expect("non-empty grid");
    println!();
    println!(
        "best cell: {} layers, {} neurons, {} epochs -> utility {:.4}",
        best.layers, best.neurons, best.epochs, best.utility
    );
}
