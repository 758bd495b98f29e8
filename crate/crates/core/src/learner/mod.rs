//! Multitask kernel machines trained under compiled constraints.

mod predict;
mod problem;
mod train;

pub use predict::{classify, format_predictions, predict, Prediction};
pub use problem::{decision_values, truths, Problem, TaskSource, TaskSpec};
pub use train::{train, Model, StageTrace, StopReason, TaskWeights, TrainConfig};

use crate::logic::CompileError;

#[derive(Debug, thiserror::Error)]
pub enum LearnerError {
    #[error("task `{task}`: expected {expected} examples, found {found}")]
    SizeMismatch {
        task: String,
        expected: usize,
        found: usize,
    },
    #[error("task `{task}`: invalid value {value}")]
    BadLabel { task: String, value: f64 },
    #[error("task `{0}` declared twice")]
    DuplicateTask(String),
    #[error("no learned task")]
    NoLearnedTask,
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("stage {stage} diverged at iteration {iteration} (objective {objective})")]
    Diverged {
        stage: usize,
        iteration: usize,
        objective: f64,
    },
}
