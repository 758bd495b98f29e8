use std::collections::{BTreeMap, BTreeSet};

use super::{OntologyDag, OntologyError};

/// Protein annotations closed upward over `is_a` (true path rule).
/// Terms are stored as indices into the DAG they were closed against.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotationSet {
    map: BTreeMap<String, BTreeSet<usize>>,
}

impl AnnotationSet {
    pub fn proteins(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn terms_of(&self, protein: &str) -> Option<&BTreeSet<usize>> {
        self.map.get(protein)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<usize>)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Term id sets per protein.
    pub fn to_ids(&self, dag: &OntologyDag) -> BTreeMap<String, BTreeSet<String>> {
        self.map
            .iter()
            .map(|(p, ts)| {
                (
                    p.clone(),
                    ts.iter().map(|&t| dag.term(t).id.clone()).collect(),
                )
            })
            .collect()
    }

    /// Keeps only the listed proteins.
    pub fn retain_proteins(&mut self, keep: impl Fn(&str, &BTreeSet<usize>) -> bool) {
        self.map.retain(|p, ts| keep(p, ts));
    }

    /// True when every term's `is_a` ancestors are present for every protein.
    pub fn is_closed(&self, dag: &OntologyDag) -> bool {
        self.map.values().all(|ts| {
            ts.iter()
                .all(|&t| dag.parents(t).iter().all(|p| ts.contains(p)))
        })
    }
}

/// Closes raw `protein -> term ids` annotations upward over `is_a` edges.
pub fn tpr_closure(
    raw: &BTreeMap<String, BTreeSet<String>>,
    dag: &OntologyDag,
) -> Result<AnnotationSet, OntologyError> {
    let mut cache: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut map = BTreeMap::new();
    for (protein, ids) in raw {
        let mut closed = BTreeSet::new();
        for id in ids {
            let t = dag
                .position(id)
                .ok_or_else(|| OntologyError::UnknownTerm(id.clone()))?;
            closed.insert(t);
            let anc = cache.entry(t).or_insert_with(|| dag.ancestors(t));
            closed.extend(anc.iter().copied());
        }
        map.insert(protein.clone(), closed);
    }
    Ok(AnnotationSet { map })
}
