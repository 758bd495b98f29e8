use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{LearnerError, TrainConfig};
use crate::logic::{
    compile_with, Binding, CompiledConstraint, Domains, Formula, Interpretation, PredicateValues,
    Signature,
};

/// Where a task's truth values come from.
#[derive(Debug, Clone)]
pub enum TaskSource {
    /// A kernel machine `f = clamp(G alpha, 0, 1)` fitted to the labeled examples.
    Learned {
        gram: Arc<DMatrix<f64>>,
        /// Target in {0, 1} for labeled examples, `None` for unsupervised ones.
        labels: Vec<Option<f64>>,
    },
    /// A read-only truth table.
    Given { values: Vec<f64> },
}

/// One predicate to predict or to read. Unary tasks have one example per
/// protein index; pair tasks have one example per listed protein pair.
#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub predicate: String,
    pub pairs: Option<Vec<(usize, usize)>>,
    pub source: TaskSource,
}

impl TaskSpec {
    pub fn learned(predicate: &str, gram: Arc<DMatrix<f64>>, labels: Vec<Option<f64>>) -> Self {
        TaskSpec {
            predicate: predicate.to_string(),
            pairs: None,
            source: TaskSource::Learned { gram, labels },
        }
    }

    pub fn given(predicate: &str, values: Vec<f64>) -> Self {
        TaskSpec {
            predicate: predicate.to_string(),
            pairs: None,
            source: TaskSource::Given { values },
        }
    }

    /// Turns the task into a pair predicate over `pairs` (one example per pair).
    pub fn over_pairs(mut self, pairs: Vec<(usize, usize)>) -> Self {
        self.pairs = Some(pairs);
        self
    }

    pub fn arity(&self) -> usize {
        if self.pairs.is_some() {
            2
        } else {
            1
        }
    }

    pub fn is_learned(&self) -> bool {
        matches!(self.source, TaskSource::Learned { .. })
    }

    /// Number of examples.
    pub fn len(&self) -> usize {
        match &self.source {
            TaskSource::Learned { labels, .. } => labels.len(),
            TaskSource::Given { values } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self) -> Result<(), LearnerError> {
        let mismatch = |expected, found| LearnerError::SizeMismatch {
            task: self.predicate.clone(),
            expected,
            found,
        };
        if let Some(pairs) = &self.pairs {
            if pairs.len() != self.len() {
                return Err(mismatch(pairs.len(), self.len()));
            }
        }
        match &self.source {
            TaskSource::Learned { gram, labels } => {
                if gram.nrows() != labels.len() || gram.ncols() != labels.len() {
                    return Err(mismatch(labels.len(), gram.nrows()));
                }
                if let Some(y) = labels.iter().flatten().find(|y| !y.is_finite()) {
                    return Err(LearnerError::BadLabel {
                        task: self.predicate.clone(),
                        value: *y,
                    });
                }
            }
            TaskSource::Given { values } => {
                if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return Err(LearnerError::BadLabel {
                        task: self.predicate.clone(),
                        value: *v,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Tasks plus the constraints tying them together.
#[derive(Debug, Clone)]
pub struct Problem {
    tasks: Vec<TaskSpec>,
    signature: Signature,
    constraints: Vec<CompiledConstraint>,
    offsets: Vec<Option<usize>>,
    dim: usize,
}

impl Problem {
    pub fn new(tasks: Vec<TaskSpec>) -> Result<Self, LearnerError> {
        let mut signature = Signature::new();
        let mut offsets = Vec::with_capacity(tasks.len());
        let mut dim = 0;
        for t in &tasks {
            t.validate()?;
            if signature.id(&t.predicate).is_some() {
                return Err(LearnerError::DuplicateTask(t.predicate.clone()));
            }
            let binding = if t.is_learned() {
                Binding::Learned
            } else {
                Binding::Given
            };
            signature.declare(&t.predicate, t.arity(), binding);
            if t.is_learned() {
                offsets.push(Some(dim));
                dim += t.len();
            } else {
                offsets.push(None);
            }
        }
        if dim == 0 {
            return Err(LearnerError::NoLearnedTask);
        }
        Ok(Problem {
            tasks,
            signature,
            constraints: Vec::new(),
            offsets,
            dim,
        })
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn constraints(&self) -> &[CompiledConstraint] {
        &self.constraints
    }

    pub fn add_constraint(&mut self, c: CompiledConstraint) {
        self.constraints.push(c);
    }

    /// Compiles `rules` with every quantified variable ranging over `domain`
    /// under the domain name used by the rules.
    pub fn add_rules(
        &mut self,
        rules: &[Formula],
        domain_name: &str,
        domain: Vec<usize>,
        config: &TrainConfig,
    ) -> Result<(), LearnerError> {
        let domains = Domains::new().with(domain_name, domain);
        for r in rules {
            let c = compile_with(
                r,
                config.tnorm,
                config.implication,
                &self.signature,
                &domains,
            )?;
            self.constraints.push(c);
        }
        Ok(())
    }

    /// Length of the concatenated weight vector.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn slice<'a>(&self, task: usize, alpha: &'a [f64]) -> Option<&'a [f64]> {
        self.offsets[task].map(|o| &alpha[o..o + self.tasks[task].len()])
    }

    /// Raw scores `G alpha` per task; given tasks echo their table.
    pub fn scores(&self, alpha: &[f64]) -> Vec<Vec<f64>> {
        self.tasks
            .iter()
            .enumerate()
            .map(|(k, t)| match &t.source {
                TaskSource::Learned { gram, .. } => {
                    let a = self.slice(k, alpha).expect("learned task has weights");
                    decision_values(gram, a)
                }
                TaskSource::Given { values } => values.clone(),
            })
            .collect()
    }

    fn interpretation(&self, scores: &[Vec<f64>]) -> Interpretation {
        Interpretation::new(
            self.tasks
                .iter()
                .zip(scores)
                .map(|(t, s)| {
                    let f = truths(s);
                    match &t.pairs {
                        Some(p) => PredicateValues::binary(p, f),
                        None => PredicateValues::unary(f),
                    }
                })
                .collect(),
        )
    }

    /// Objective value with constraint weight `lambda_c`.
    pub fn objective(&self, alpha: &[f64], lambda_r: f64, lambda_c: f64) -> f64 {
        self.evaluate(alpha, lambda_r, lambda_c, false).0
    }

    /// Objective value and its gradient with respect to the concatenated weights.
    pub fn objective_and_gradient(
        &self,
        alpha: &[f64],
        lambda_r: f64,
        lambda_c: f64,
    ) -> (f64, Vec<f64>) {
        let (v, g) = self.evaluate(alpha, lambda_r, lambda_c, true);
        (v, g.expect("gradient requested"))
    }

    fn evaluate(
        &self,
        alpha: &[f64],
        lambda_r: f64,
        lambda_c: f64,
        with_grad: bool,
    ) -> (f64, Option<Vec<f64>>) {
        assert_eq!(alpha.len(), self.dim, "weight vector length");
        let scores = self.scores(alpha);
        let mut reg = 0.0;
        let mut loss = 0.0;
        // d/ds of everything except the regularizer
        let mut ds: Vec<Vec<f64>> = scores.iter().map(|s| vec![0.0; s.len()]).collect();
        for (k, t) in self.tasks.iter().enumerate() {
            let TaskSource::Learned { labels, .. } = &t.source else {
                continue;
            };
            let a = self.slice(k, alpha).expect("learned task has weights");
            reg += a.iter().zip(&scores[k]).map(|(x, s)| x * s).sum::<f64>();
            for (i, y) in labels.iter().enumerate() {
                if let Some(y) = y {
                    let r = scores[k][i] - y;
                    loss += r * r;
                    ds[k][i] = 2.0 * r;
                }
            }
        }
        let mut penalty = 0.0;
        if lambda_c != 0.0 && !self.constraints.is_empty() {
            let interp = self.interpretation(&scores);
            let mut df = interp.zeros_like();
            for c in &self.constraints {
                penalty += if with_grad {
                    c.accumulate_gradient(&interp, 1.0, &mut df)
                } else {
                    c.penalty(&interp)
                };
            }
            if with_grad {
                for (k, t) in self.tasks.iter().enumerate() {
                    if !t.is_learned() {
                        continue;
                    }
                    for (i, &s) in scores[k].iter().enumerate() {
                        if s > 0.0 && s < 1.0 {
                            ds[k][i] += lambda_c * df[k][i];
                        }
                    }
                }
            }
        }
        let value = lambda_r * reg + loss + lambda_c * penalty;
        if !with_grad {
            return (value, None);
        }
        let mut grad = vec![0.0; self.dim];
        for (k, t) in self.tasks.iter().enumerate() {
            let TaskSource::Learned { gram, .. } = &t.source else {
                continue;
            };
            let o = self.offsets[k].expect("learned task has weights");
            let back = gram.as_ref() * DVector::from_column_slice(&ds[k]);
            for i in 0..t.len() {
                grad[o + i] = 2.0 * lambda_r * scores[k][i] + back[i];
            }
        }
        (value, Some(grad))
    }
}

/// Raw scores `s = G alpha`.
pub fn decision_values(gram: &DMatrix<f64>, alpha: &[f64]) -> Vec<f64> {
    assert_eq!(
        gram.ncols(),
        alpha.len(),
        "Gram size and weight length differ"
    );
    (gram * DVector::from_column_slice(alpha))
        .iter()
        .copied()
        .collect()
}

/// Fuzzy truth values `clamp(s, 0, 1)`.
pub fn truths(scores: &[f64]) -> Vec<f64> {
    scores.iter().map(|s| s.clamp(0.0, 1.0)).collect()
}
