use std::collections::{BTreeMap, BTreeSet};

use super::{GoCut, Namespace};

/// How often interacting proteins share one predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct SharingRow {
    pub predicate: String,
    pub name: String,
    /// Pairs with both proteins annotated.
    pub pos: usize,
    /// Pairs with at least one protein annotated.
    pub tot: usize,
    /// `pos / tot`; `None` when `tot` is zero.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JaccardSummary {
    pub pairs: usize,
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpiStatistics {
    pub rows: Vec<SharingRow>,
    /// Over all retained predicates.
    pub jaccard: Option<JaccardSummary>,
    /// Restricted to each namespace present in the cut.
    pub jaccard_by_namespace: BTreeMap<Namespace, JaccardSummary>,
}

/// Mean, median and population standard deviation. `None` on empty input.
pub fn summarize(values: &[f64]) -> Option<JaccardSummary> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    };
    Some(JaccardSummary {
        pairs: values.len(),
        mean,
        median,
        std_dev: var.sqrt(),
    })
}

/// Per-pair Jaccard of the annotation sets restricted to `predicates`.
/// Pairs where both restricted sets are empty are skipped.
fn jaccards(pairs: &[(String, String)], cut: &GoCut, predicates: &[usize]) -> Vec<f64> {
    let sets = |p: &str| -> BTreeSet<usize> {
        predicates
            .iter()
            .copied()
            .filter(|&i| cut.node(i).proteins.contains(p))
            .collect()
    };
    pairs
        .iter()
        .filter_map(|(a, b)| {
            let (sa, sb) = (sets(a), sets(b));
            let union = sa.union(&sb).count();
            (union > 0).then(|| sa.intersection(&sb).count() as f64 / union as f64)
        })
        .collect()
}

/// Sharing table and Jaccard summaries for interacting pairs over the
/// retained (non-bin) predicates of `cut`.
pub fn ppi_statistics(pairs: &[(String, String)], cut: &GoCut) -> PpiStatistics {
    let rows = cut
        .retained()
        .map(|(_, node)| {
            let mut pos = 0;
            let mut tot = 0;
            for (a, b) in pairs {
                let (ia, ib) = (node.proteins.contains(a), node.proteins.contains(b));
                if ia && ib {
                    pos += 1;
                }
                if ia || ib {
                    tot += 1;
                }
            }
            SharingRow {
                predicate: node.id.clone(),
                name: node.name.clone(),
                pos,
                tot,
                ratio: (tot > 0).then(|| pos as f64 / tot as f64),
            }
        })
        .collect();
    let all: Vec<usize> = cut.retained().map(|(i, _)| i).collect();
    let mut by_ns: BTreeMap<Namespace, Vec<usize>> = BTreeMap::new();
    for (i, n) in cut.retained() {
        by_ns.entry(n.namespace.clone()).or_default().push(i);
    }
    PpiStatistics {
        rows,
        jaccard: summarize(&jaccards(pairs, cut, &all)),
        jaccard_by_namespace: by_ns
            .into_iter()
            .filter_map(|(ns, preds)| summarize(&jaccards(pairs, cut, &preds)).map(|s| (ns, s)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{go_cut, parse_obo, tpr_closure};

    fn setup() -> GoCut {
        let dag = parse_obo(
            "[Term]\nid: R\nname: root\nnamespace: molecular_function\n\
             [Term]\nid: A\nnamespace: molecular_function\nis_a: R\n\
             [Term]\nid: B\nnamespace: molecular_function\nis_a: R\n",
        )
        .unwrap();
        let mut raw: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        raw.insert("p1".into(), ["A".to_string()].into());
        raw.insert("p2".into(), ["A".to_string()].into());
        raw.insert("p3".into(), ["B".to_string()].into());
        raw.insert("p4".into(), ["A".to_string(), "B".to_string()].into());
        let ann = tpr_closure(&raw, &dag).unwrap();
        go_cut(&dag, &ann, &[Namespace::MolecularFunction], 1, 1).unwrap()
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn root_predicate_ratio_is_one() {
        let cut = setup();
        let pairs = vec![pair("p1", "p2"), pair("p1", "p3"), pair("p3", "p4")];
        let stats = ppi_statistics(&pairs, &cut);
        let root = &stats.rows[0];
        assert_eq!((root.predicate.as_str(), root.pos, root.tot), ("R", 3, 3));
        assert_eq!(root.ratio, Some(1.0));
        let a = &stats.rows[1];
        assert_eq!((a.pos, a.tot), (1, 3));
    }

    #[test]
    fn jaccard_against_brute_force() {
        let cut = setup();
        let pairs = vec![pair("p1", "p2"), pair("p1", "p3"), pair("p3", "p4")];
        // restricted sets: p1={R,A} p2={R,A} p3={R,B} p4={R,A,B}
        let want = [1.0, 1.0 / 3.0, 2.0 / 3.0];
        let stats = ppi_statistics(&pairs, &cut);
        let j = stats.jaccard.unwrap();
        assert_eq!(j.pairs, 3);
        assert!((j.mean - want.iter().sum::<f64>() / 3.0).abs() < 1e-12);
        assert!((j.median - 2.0 / 3.0).abs() < 1e-12);
        assert!(stats
            .jaccard_by_namespace
            .contains_key(&Namespace::MolecularFunction));
    }

    #[test]
    fn undefined_ratio() {
        let cut = setup();
        let stats = ppi_statistics(&[pair("x", "y")], &cut);
        assert!(stats.rows.iter().all(|r| r.ratio.is_none()));
        assert!(stats.jaccard.is_none());
    }

    #[test]
    fn summary_of_even_count() {
        let s = summarize(&[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.mean, 2.5);
        assert!((s.std_dev - 1.25f64.sqrt()).abs() < 1e-12);
    }
}
