//! Contribution-weighted training, detection metrics and the synthetic
//! graph generator.

mod loss;
mod metrics;
mod synth;
mod trainer;

pub use loss::{cc_weights, node_contributions, CcLossConfig, Contributions, DEGENERATE_DENOMINATOR};
pub use metrics::{auprc, auroc, f1_macro, metrics, pr_curve, recall, roc_curve, MetricsRecord};
pub use synth::{benchmark_run_config, benchmark_spec, generate_synthetic_hin, RelationSpec, SyntheticSpec, TypeSpec};
pub use trainer::{evaluate, predict, train, TrainConfig, TrainData, TrainOutcome, TrainRecord};
