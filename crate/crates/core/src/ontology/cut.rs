use std::collections::{BTreeSet, HashMap};

use super::{AnnotationSet, Namespace, OntologyDag, OntologyError};

/// Prefix of synthetic bin-node ids: `BIN:<parent-id>`.
pub const BIN_PREFIX: &str = "BIN:";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// A retained ontology term (index into the DAG).
    Term(usize),
    /// Synthetic node gathering the proteins of the pruned children of `parent` (cut index).
    Bin { parent: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutNode {
    pub id: String,
    pub name: String,
    pub namespace: Namespace,
    pub level: usize,
    pub kind: NodeKind,
    /// Parents inside the cut (cut indices).
    pub parents: Vec<usize>,
    /// Children inside the cut, bin node last (cut indices).
    pub children: Vec<usize>,
    pub proteins: BTreeSet<String>,
}

impl CutNode {
    pub fn is_bin(&self) -> bool {
        matches!(self.kind, NodeKind::Bin { .. })
    }
}

/// Terms surviving the level and count thresholds, plus bin nodes.
/// Retained terms come first (DAG order), bin nodes after them.
#[derive(Debug, Clone)]
pub struct GoCut {
    nodes: Vec<CutNode>,
    index: HashMap<String, usize>,
    level_threshold: usize,
    count_threshold: usize,
}

impl GoCut {
    pub fn nodes(&self) -> &[CutNode] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &CutNode {
        &self.nodes[idx]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Retained ontology terms (bin nodes excluded).
    pub fn retained(&self) -> impl Iterator<Item = (usize, &CutNode)> {
        self.nodes.iter().enumerate().filter(|(_, n)| !n.is_bin())
    }

    pub fn bins(&self) -> impl Iterator<Item = (usize, &CutNode)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.is_bin())
    }

    pub fn thresholds(&self) -> (usize, usize) {
        (self.level_threshold, self.count_threshold)
    }
}

/// Keeps terms of `namespaces` with `level <= l` and at least `c` annotated
/// proteins, then adds a bin node under every retained term that has both a
/// retained and a pruned `is_a` child.
pub fn go_cut(
    dag: &OntologyDag,
    annotations: &AnnotationSet,
    namespaces: &[Namespace],
    level_threshold: usize,
    count_threshold: usize,
) -> Result<GoCut, OntologyError> {
    let mut proteins_of: Vec<BTreeSet<String>> = vec![BTreeSet::new(); dag.len()];
    for (protein, terms) in annotations.iter() {
        for &t in terms {
            proteins_of[t].insert(protein.to_string());
        }
    }
    let keep: Vec<bool> = (0..dag.len())
        .map(|t| {
            namespaces.contains(&dag.term(t).namespace)
                && dag.level(t) <= level_threshold
                && proteins_of[t].len() >= count_threshold
        })
        .collect();

    let mut nodes = Vec::new();
    let mut cut_of = vec![usize::MAX; dag.len()];
    for t in (0..dag.len()).filter(|&t| keep[t]) {
        cut_of[t] = nodes.len();
        let term = dag.term(t);
        nodes.push(CutNode {
            id: term.id.clone(),
            name: term.name.clone(),
            namespace: term.namespace.clone(),
            level: dag.level(t),
            kind: NodeKind::Term(t),
            parents: Vec::new(),
            children: Vec::new(),
            proteins: std::mem::take(&mut proteins_of[t]),
        });
    }
    if nodes.is_empty() {
        return Err(OntologyError::EmptyCut);
    }
    let retained = nodes.len();
    for node in nodes.iter_mut().take(retained) {
        let NodeKind::Term(t) = node.kind else {
            unreachable!()
        };
        node.parents = dag
            .parents(t)
            .iter()
            .filter(|&&p| keep[p])
            .map(|&p| cut_of[p])
            .collect();
        node.children = dag
            .children(t)
            .iter()
            .filter(|&&c| keep[c])
            .map(|&c| cut_of[c])
            .collect();
    }
    for i in 0..retained {
        let NodeKind::Term(t) = nodes[i].kind else {
            unreachable!()
        };
        let pruned: Vec<usize> = dag
            .children(t)
            .iter()
            .copied()
            .filter(|&c| !keep[c])
            .collect();
        if nodes[i].children.is_empty() || pruned.is_empty() {
            continue;
        }
        let mut gathered = BTreeSet::new();
        for c in pruned {
            gathered.extend(proteins_of[c].iter().cloned());
        }
        gathered.retain(|p| nodes[i].proteins.contains(p));
        let bin = nodes.len();
        let parent = &nodes[i];
        nodes.push(CutNode {
            id: format!("{BIN_PREFIX}{}", parent.id),
            name: format!("bin of {}", parent.name),
            namespace: parent.namespace.clone(),
            level: parent.level + 1,
            kind: NodeKind::Bin { parent: i },
            parents: vec![i],
            children: Vec::new(),
            proteins: gathered,
        });
        nodes[i].children.push(bin);
    }
    let index = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.clone(), i))
        .collect();
    Ok(GoCut {
        nodes,
        index,
        level_threshold,
        count_threshold,
    })
}
