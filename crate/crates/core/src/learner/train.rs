use serde::{Deserialize, Serialize};

use super::{LearnerError, Problem};
use crate::logic::{ImplicationMode, TNorm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda_r: f64,
    pub lambda_c: f64,
    pub tnorm: TNorm,
    pub implication: ImplicationMode,
    /// Initial step of every line search (or the fixed step without backtracking).
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Stop when the relative objective change falls below this.
    pub tolerance: f64,
    /// Stop when the gradient norm falls below this.
    pub gradient_tolerance: f64,
    pub threshold: f64,
    pub undecided_band: f64,
    pub backtracking: bool,
    /// Consecutive objective increases tolerated before aborting.
    pub divergence_window: usize,
    /// Evaluate constraints on every example instead of the unsupervised ones.
    pub constrain_all_examples: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda_r: 1.0,
            lambda_c: 1.0,
            tnorm: TNorm::Product,
            implication: ImplicationMode::Residuum,
            learning_rate: 1.0,
            max_iterations: 1000,
            tolerance: 1e-6,
            gradient_tolerance: 1e-8,
            threshold: 0.5,
            undecided_band: 1e-3,
            backtracking: true,
            divergence_window: 20,
            constrain_all_examples: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |what: &str| Err(LearnerError::BadConfig(what.to_string()));
        if !(self.lambda_r >= 0.0 && self.lambda_r.is_finite()) {
            return bad("lambda_r must be finite and non-negative");
        }
        if !(self.lambda_c >= 0.0 && self.lambda_c.is_finite()) {
            return bad("lambda_c must be finite and non-negative");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.tolerance >= 0.0 && self.gradient_tolerance >= 0.0) {
            return bad("tolerances must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad("threshold must lie in [0, 1]");
        }
        if self.undecided_band.is_nan() || self.undecided_band < 0.0 {
            return bad("undecided_band must be non-negative");
        }
        if self.divergence_window == 0 {
            return bad("divergence_window must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    SmallGradient,
    NoDescent,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub lambda_c: f64,
    /// Objective before the first step and after every accepted step.
    pub objective: Vec<f64>,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskWeights {
    pub predicate: String,
    /// `None` for given-mode tasks.
    pub alpha: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub config: TrainConfig,
    pub tasks: Vec<TaskWeights>,
    /// Stage 1 first; stage 2 only when constraints are active.
    pub stages: Vec<StageTrace>,
}

impl Model {
    /// Concatenated weights of the learned tasks, in task order.
    pub fn flat_alpha(&self) -> Vec<f64> {
        self.tasks
            .iter()
            .filter_map(|t| t.alpha.as_deref())
            .flatten()
            .copied()
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn run_stage(
    problem: &Problem,
    config: &TrainConfig,
    lambda_c: f64,
    stage: usize,
    alpha: &mut Vec<f64>,
) -> Result<StageTrace, LearnerError> {
    let (mut value, mut grad) = problem.objective_and_gradient(alpha, config.lambda_r, lambda_c);
    if !value.is_finite() {
        return Err(LearnerError::Diverged {
            stage,
            iteration: 0,
            objective: value,
        });
    }
    let mut trace = vec![value];
    let mut increases = 0;
    let mut stop = StopReason::MaxIterations;
    for iteration in 1..=config.max_iterations {
        let g2 = norm2(&grad);
        if g2.sqrt() <= config.gradient_tolerance {
            stop = StopReason::SmallGradient;
            break;
        }
        let mut step = config.learning_rate;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = alpha.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
            let v = problem.objective(&cand, config.lambda_r, lambda_c);
            // the strict test matters once the Armijo term falls below rounding
            if !config.backtracking || (v < value && v <= value - ARMIJO * step * g2) {
                accepted = Some((cand, v));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, next)) = accepted else {
            stop = StopReason::NoDescent;
            break;
        };
        if !next.is_finite() {
            return Err(LearnerError::Diverged {
                stage,
                iteration,
                objective: next,
            });
        }
        if next > value {
            increases += 1;
            if increases >= config.divergence_window {
                return Err(LearnerError::Diverged {
                    stage,
                    iteration,
                    objective: next,
                });
            }
        } else {
            increases = 0;
        }
        let change = (value - next).abs() / value.abs().max(f64::MIN_POSITIVE);
        *alpha = cand;
        let (v, g) = problem.objective_and_gradient(alpha, config.lambda_r, lambda_c);
        value = v;
        grad = g;
        trace.push(value);
        if change < config.tolerance {
            stop = StopReason::Converged;
            break;
        }
    }
    log::debug!(
        "stage {stage} stopped after {} steps ({stop:?}), objective {value:.6e}",
        trace.len() - 1
    );
    Ok(StageTrace {
        lambda_c,
        objective: trace,
        stop,
    })
}

/// Two-stage gradient descent from `alpha = 0`: first without constraints,
/// then with the configured `lambda_c` starting from the stage-1 solution.
pub fn train(problem: &Problem, config: &TrainConfig) -> Result<Model, LearnerError> {
    config.validate()?;
    let mut alpha = vec![0.0; problem.dim()];
    let mut stages = vec![run_stage(problem, config, 0.0, 1, &mut alpha)?];
    if config.lambda_c > 0.0 && !problem.constraints().is_empty() {
        stages.push(run_stage(problem, config, config.lambda_c, 2, &mut alpha)?);
    }
    let tasks = problem
        .tasks()
        .iter()
        .enumerate()
        .map(|(k, t)| TaskWeights {
            predicate: t.predicate.clone(),
            alpha: problem.slice(k, &alpha).map(<[f64]>::to_vec),
        })
        .collect();
    Ok(Model {
        config: config.clone(),
        tasks,
        stages,
    })
}
