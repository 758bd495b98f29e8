//! Multi-label metrics, hierarchical consistency, precision-recall curves and
//! stratified fold generation.

mod curves;
mod folds;
mod metrics;

pub use curves::{auc_pr, average_pr_curves, pr_curve, PrCurve};
pub use folds::{format_folds, generate_folds};
pub use metrics::{
    binary_metrics, consistency, example_metrics, example_terms, label_metrics, Average, Confusion,
    ExampleMetrics, LabelMetrics, PredictionSet,
};

pub const DEFAULT_CURVE_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("inconsistent shapes: {0}")]
    Shape(String),
    #[error("{folds} folds requested for {proteins} proteins")]
    TooManyFolds { folds: usize, proteins: usize },
    #[error("no curve points")]
    EmptyCurve,
    #[error("{0}")]
    BadParameter(String),
}
