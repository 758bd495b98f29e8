use std::collections::BTreeSet;

use super::EvalError;
use crate::ontology::GoCut;

/// Confusion counts of one predicate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    fn add(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Truth and predicted labels for `n` examples over `k` predicates.
/// Entries can be masked out (undecided filtering) and predicates can be
/// excluded from the headline statistics (bin nodes, `BOUND`).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    predicates: Vec<String>,
    included: Vec<bool>,
    truth: Vec<Vec<bool>>,
    predicted: Vec<Vec<bool>>,
    undecided: Vec<Vec<bool>>,
    counted: Vec<Vec<bool>>,
}

impl PredictionSet {
    pub fn new(
        predicates: Vec<String>,
        truth: Vec<Vec<bool>>,
        predicted: Vec<Vec<bool>>,
        undecided: Vec<Vec<bool>>,
    ) -> Result<Self, EvalError> {
        let k = predicates.len();
        let n = truth.len();
        if predicted.len() != n || undecided.len() != n {
            return Err(EvalError::Shape(format!(
                "{n} truth rows, {} predicted rows, {} undecided rows",
                predicted.len(),
                undecided.len()
            )));
        }
        for rows in [&truth, &predicted, &undecided] {
            if let Some(r) = rows.iter().find(|r| r.len() != k) {
                return Err(EvalError::Shape(format!(
                    "row of length {} for {k} predicates",
                    r.len()
                )));
            }
        }
        Ok(PredictionSet {
            included: vec![true; k],
            counted: vec![vec![true; k]; n],
            predicates,
            truth,
            predicted,
            undecided,
        })
    }

    /// Builds a set from per-example label sets (no undecided flags).
    pub fn from_sets(
        predicates: Vec<String>,
        truth: &[BTreeSet<usize>],
        predicted: &[BTreeSet<usize>],
    ) -> Result<Self, EvalError> {
        let k = predicates.len();
        let dense = |sets: &[BTreeSet<usize>]| -> Vec<Vec<bool>> {
            sets.iter()
                .map(|s| (0..k).map(|j| s.contains(&j)).collect())
                .collect()
        };
        let n = truth.len();
        PredictionSet::new(
            predicates,
            dense(truth),
            dense(predicted),
            vec![vec![false; k]; n],
        )
    }

    /// Drops predicates matching `exclude` from every statistic.
    pub fn excluding(mut self, exclude: impl Fn(&str) -> bool) -> Self {
        for (j, p) in self.predicates.iter().enumerate() {
            if exclude(p) {
                self.included[j] = false;
            }
        }
        self
    }

    /// The same set with undecided entries removed from consideration.
    pub fn filtered(&self) -> Self {
        let mut out = self.clone();
        for (c, u) in out.counted.iter_mut().zip(&self.undecided) {
            for (cj, &uj) in c.iter_mut().zip(u) {
                *cj = *cj && !uj;
            }
        }
        out
    }

    pub fn predicates(&self) -> &[String] {
        &self.predicates
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    fn active(&self, i: usize, j: usize) -> bool {
        self.included[j] && self.counted[i][j]
    }

    /// `(Y_i, Z_i)` restricted to the active predicates.
    pub fn example_sets(&self, i: usize) -> (BTreeSet<usize>, BTreeSet<usize>) {
        let k = self.predicates.len();
        let pick = |row: &[bool]| (0..k).filter(|&j| self.active(i, j) && row[j]).collect();
        (pick(&self.truth[i]), pick(&self.predicted[i]))
    }

    /// Predicted set of example `i` over included predicates, ignoring masks.
    pub fn predicted_set(&self, i: usize) -> BTreeSet<usize> {
        (0..self.predicates.len())
            .filter(|&j| self.included[j] && self.predicted[i][j])
            .collect()
    }

    pub fn confusion(&self, j: usize) -> Confusion {
        let mut c = Confusion::default();
        for i in 0..self.len() {
            if self.counted[i][j] {
                c.add(self.truth[i][j], self.predicted[i][j]);
            }
        }
        c
    }

    /// Confusion counts of the included predicates, with their indices.
    pub fn confusions(&self) -> Vec<(usize, Confusion)> {
        (0..self.predicates.len())
            .filter(|&j| self.included[j])
            .map(|j| (j, self.confusion(j)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub exact_match: f64,
}

/// Per-example precision, recall and F1 terms. Empty `Z` gives precision 0,
/// empty `Y` gives recall 0, and both empty gives F1 1.
pub fn example_terms(y: &BTreeSet<usize>, z: &BTreeSet<usize>) -> (f64, f64, f64) {
    let inter = y.intersection(z).count();
    let f1 = if y.is_empty() && z.is_empty() {
        1.0
    } else {
        2.0 * inter as f64 / (y.len() + z.len()) as f64
    };
    (ratio(inter, z.len()), ratio(inter, y.len()), f1)
}

pub fn example_metrics(preds: &PredictionSet) -> ExampleMetrics {
    let n = preds.len();
    if n == 0 {
        return ExampleMetrics {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            exact_match: 0.0,
        };
    }
    let (mut p, mut r, mut f, mut exact) = (0.0, 0.0, 0.0, 0usize);
    for i in 0..n {
        let (y, z) = preds.example_sets(i);
        let (pi, ri, fi) = example_terms(&y, &z);
        p += pi;
        r += ri;
        f += fi;
        exact += usize::from(y == z);
    }
    let n = n as f64;
    ExampleMetrics {
        precision: p / n,
        recall: r / n,
        f1: f / n,
        exact_match: exact as f64 / n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Average {
    Micro,
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1 of a single confusion matrix (zero denominators give 0).
pub fn binary_metrics(c: &Confusion) -> LabelMetrics {
    LabelMetrics {
        precision: ratio(c.tp, c.tp + c.fp),
        recall: ratio(c.tp, c.tp + c.fn_),
        f1: ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
    }
}

pub fn label_metrics(preds: &PredictionSet, average: Average) -> LabelMetrics {
    let per: Vec<Confusion> = preds.confusions().into_iter().map(|(_, c)| c).collect();
    match average {
        Average::Micro => {
            let mut total = Confusion::default();
            for c in &per {
                total.tp += c.tp;
                total.fp += c.fp;
                total.fn_ += c.fn_;
                total.tn += c.tn;
            }
            binary_metrics(&total)
        }
        Average::Macro => {
            if per.is_empty() {
                return LabelMetrics {
                    precision: 0.0,
                    recall: 0.0,
                    f1: 0.0,
                };
            }
            let k = per.len() as f64;
            let ms: Vec<LabelMetrics> = per.iter().map(binary_metrics).collect();
            LabelMetrics {
                precision: ms.iter().map(|m| m.precision).sum::<f64>() / k,
                recall: ms.iter().map(|m| m.recall).sum::<f64>() / k,
                f1: ms.iter().map(|m| m.f1).sum::<f64>() / k,
            }
        }
    }
}

/// Hierarchical consistency of predicted sets (cut indices). Bin nodes are
/// ignored. A predicted term scores 1 when its level is at most 1 or it has
/// no parent in the cut, otherwise the fraction of its cut parents that are
/// also predicted. An example with no predicted term scores 1.
pub fn consistency(predicted: &[BTreeSet<usize>], cut: &GoCut) -> f64 {
    if predicted.is_empty() {
        return 1.0;
    }
    let total: f64 = predicted
        .iter()
        .map(|set| {
            let terms: Vec<usize> = set
                .iter()
                .copied()
                .filter(|&t| !cut.node(t).is_bin())
                .collect();
            if terms.is_empty() {
                return 1.0;
            }
            let score: f64 = terms
                .iter()
                .map(|&t| {
                    let node = cut.node(t);
                    if node.level <= 1 || node.parents.is_empty() {
                        1.0
                    } else {
                        let hit = node.parents.iter().filter(|p| set.contains(p)).count();
                        hit as f64 / node.parents.len() as f64
                    }
                })
                .sum();
            score / terms.len() as f64
        })
        .sum();
    total / predicted.len() as f64
}
