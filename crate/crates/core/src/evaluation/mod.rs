//! The hold-out evaluation protocol.

pub mod experiment;
pub mod metrics;
pub mod report;

pub use experiment::{
    lambda_grid, run_experiment, Cell, CellMetrics, ExperimentConfig, MeanRow, Metric, MetricsReport, Optimum,
};
pub use metrics::{
    evaluate_split, rank_of_test_pairs, ranking_score, recall_precision_at, relative_midrank, Blend, HitCount,
    SplitEvaluation,
};
