use std::fmt::Write as _;

use super::{Model, Problem, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub truth: f64,
    pub positive: bool,
    pub undecided: bool,
}

/// Labels a truth value: positive when `truth >= threshold`, undecided when
/// it lies strictly inside the band around the threshold.
pub fn classify(truth: f64, config: &TrainConfig) -> Prediction {
    Prediction {
        truth,
        positive: truth >= config.threshold,
        undecided: (truth - config.threshold).abs() < config.undecided_band,
    }
}

/// Per-task predictions for every example. Given tasks echo their tables.
pub fn predict(model: &Model, problem: &Problem) -> Vec<Vec<Prediction>> {
    let alpha = model.flat_alpha();
    problem
        .scores(&alpha)
        .iter()
        .map(|s| {
            s.iter()
                .map(|&v| classify(v.clamp(0.0, 1.0), &model.config))
                .collect()
        })
        .collect()
}

/// One `protein<TAB>predicate<TAB>truth<TAB>pos|neg<TAB>0|1` line per
/// `(example name, predicate, prediction)`.
pub fn format_predictions<'a>(
    rows: impl IntoIterator<Item = (&'a str, &'a str, Prediction)>,
) -> String {
    let mut out = String::new();
    for (protein, predicate, p) in rows {
        let label = if p.positive { "pos" } else { "neg" };
        writeln!(
            out,
            "{protein}\t{predicate}\t{:.6}\t{label}\t{}",
            p.truth,
            u8::from(p.undecided)
        )
        .expect("writing to a String");
    }
    out
}
