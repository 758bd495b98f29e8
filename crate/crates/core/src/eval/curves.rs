use std::fmt::Write as _;

use super::EvalError;

/// Points `(recall, precision)` with recall non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub points: Vec<(f64, f64)>,
}

impl PrCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("recall,precision\n");
        for (r, p) in &self.points {
            writeln!(out, "{r:.6},{p:.6}").expect("writing to a String");
        }
        out
    }

    /// Precision as a function of recall: the best precision at each distinct
    /// recall, linearly interpolated in between and held constant outside.
    pub fn precision_at(&self, recall: f64) -> f64 {
        let steps = best_per_recall(&self.points);
        let right = steps.partition_point(|&(r, _)| r < recall);
        if right == steps.len() {
            return steps[steps.len() - 1].1;
        }
        let (r1, p1) = steps[right];
        if r1 == recall || right == 0 {
            return p1;
        }
        let (r0, p0) = steps[right - 1];
        p0 + (p1 - p0) * (recall - r0) / (r1 - r0)
    }
}

fn best_per_recall(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    sorted.dedup_by(|later, first| later.0 == first.0);
    sorted
}

/// Precision-recall curve swept over every distinct score, highest first.
/// The curve starts at recall 0 with the precision of the top-scored point.
pub fn pr_curve(scores: &[f64], labels: &[bool]) -> Result<PrCurve, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::Shape(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(EvalError::EmptyCurve);
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let recall = if positives == 0 {
            0.0
        } else {
            tp as f64 / positives as f64
        };
        points.push((recall, tp as f64 / (tp + fp) as f64));
    }
    let first = points[0].1;
    points.insert(0, (0.0, first));
    Ok(PrCurve { points })
}

/// Macro-averaged curve sampled at recalls `i / n_samples`, `i = 0..=n_samples`.
pub fn average_pr_curves(curves: &[PrCurve], n_samples: usize) -> Result<PrCurve, EvalError> {
    if n_samples == 0 {
        return Err(EvalError::BadParameter(
            "n_samples must be at least 1".into(),
        ));
    }
    if curves.is_empty() || curves.iter().any(|c| c.points.is_empty()) {
        return Err(EvalError::EmptyCurve);
    }
    let m = curves.len() as f64;
    let points = (0..=n_samples)
        .map(|k| {
            let r = k as f64 / n_samples as f64;
            let p = curves.iter().map(|c| c.precision_at(r)).sum::<f64>() / m;
            (r, p)
        })
        .collect();
    Ok(PrCurve { points })
}

/// Trapezoidal area under the curve over its recall span.
pub fn auc_pr(curve: &PrCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}
