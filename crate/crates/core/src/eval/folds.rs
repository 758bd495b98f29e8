use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::EvalError;

/// Greedy multi-label stratification. Terms are visited by ascending protein
/// count (ties by term id); each not-yet-assigned protein of the current term
/// goes to the smallest fold (lowest index on ties). Proteins without any
/// term are distributed the same way at the end.
pub fn generate_folds(
    n: usize,
    proteins: &BTreeSet<String>,
    term_proteins: &BTreeMap<String, BTreeSet<String>>,
) -> Result<Vec<BTreeSet<String>>, EvalError> {
    if n < 2 {
        return Err(EvalError::BadParameter(format!(
            "need at least 2 folds, got {n}"
        )));
    }
    if n > proteins.len() {
        return Err(EvalError::TooManyFolds {
            folds: n,
            proteins: proteins.len(),
        });
    }
    let mut terms: Vec<(&String, &BTreeSet<String>)> = term_proteins.iter().collect();
    terms.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| a.0.cmp(b.0)));

    let mut folds: Vec<BTreeSet<String>> = vec![BTreeSet::new(); n];
    let mut selected: BTreeSet<&str> = BTreeSet::new();
    let assign = |p: &str, folds: &mut Vec<BTreeSet<String>>| {
        let (idx, _) = folds
            .iter()
            .enumerate()
            .min_by_key(|(i, f)| (f.len(), *i))
            .expect("n >= 2");
        folds[idx].insert(p.to_string());
    };
    for (_, members) in terms {
        for p in members {
            if proteins.contains(p) && !selected.contains(p.as_str()) {
                selected.insert(p);
                assign(p, &mut folds);
            }
        }
    }
    for p in proteins {
        if !selected.contains(p.as_str()) {
            assign(p, &mut folds);
        }
    }
    Ok(folds)
}

/// `protein<TAB>fold_index` lines, proteins sorted within each fold.
pub fn format_folds(folds: &[BTreeSet<String>]) -> String {
    let mut out = String::new();
    for (i, f) in folds.iter().enumerate() {
        for p in f {
            writeln!(out, "{p}\t{i}").expect("writing to a String");
        }
    }
    out
}
