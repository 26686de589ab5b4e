//! Feature-drift detection with learned representations.
//!
//! The toolkit decides when a deployed classifier should be retrained because
//! its input distribution has moved. A small network trained on the labeled
//! reference window is clipped into an embedding function; incoming batches
//! are then compared against the reference both in raw feature space and in
//! embedding space with Kolmogorov-Smirnov tests and the population stability
//! index. The four resulting signals combine into a bounded utility score,
//! and a batch is flagged for retraining when the score crosses 0.5.
//!
//! Modules:
//! - [`data`]: labeled datasets, CSV I/O, synthetic blob corpora, drift
//!   injection and batch sequences.
//! - [`repr`]: the classifier network, training, clipping, and embeddings.
//! - [`stats`]: KS, PSI, per-feature reports, and ten classical baselines.
//! - [`alert`]: the drift utility, verdicts, contributions, and ablations.
//! - [`bench`]: the detector benchmark harness, scoring, and parameter
//!   sweeps.
//!
//! The `examples/` directory walks through every capability; the `alert`
//! binary exposes the same operations on CSV files.

pub mod alert;
pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod repr;
pub mod stats;

pub use alert::{assess, AssessParams, DriftVerdict};
pub use bench::{run_benchmark, BenchConfig, BenchReport, Detector};
pub use data::{DriftKind, DriftScenario, LabeledDataset};
pub use error::{Error, Result};
pub use repr::{ClippedMlp, MlpConfig, RepresentationSet, TrainedMlp};
pub use stats::{ks_two_sample, psi, AggregationMode, TestReport};
