use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use super::OntologyError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Namespace {
    BiologicalProcess,
    MolecularFunction,
    CellularComponent,
    Other(String),
}

impl Namespace {
    pub fn as_str(&self) -> &str {
        match self {
            Namespace::BiologicalProcess => "biological_process",
            Namespace::MolecularFunction => "molecular_function",
            Namespace::CellularComponent => "cellular_component",
            Namespace::Other(s) => s,
        }
    }
}

impl FromStr for Namespace {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "biological_process" | "BP" | "bp" => Namespace::BiologicalProcess,
            "molecular_function" | "MF" | "mf" => Namespace::MolecularFunction,
            "cellular_component" | "CC" | "cc" => Namespace::CellularComponent,
            other => Namespace::Other(other.to_string()),
        })
    }
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    IsA,
    PartOf,
    Regulates,
    OccursIn,
}

impl Relation {
    fn from_obo(tag: &str) -> Option<Relation> {
        match tag {
            "part_of" => Some(Relation::PartOf),
            "regulates" | "positively_regulates" | "negatively_regulates" => {
                Some(Relation::Regulates)
            }
            "occurs_in" => Some(Relation::OccursIn),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub id: String,
    pub name: String,
    pub namespace: Namespace,
}

/// Typed edge `child -> parent`, as term indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub child: usize,
    pub parent: usize,
    pub relation: Relation,
}

/// Ontology terms with typed relations. `is_a` edges form a DAG; levels are
/// shortest `is_a` distances from a root (a term without `is_a` parents).
#[derive(Debug, Clone)]
pub struct OntologyDag {
    terms: Vec<Term>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    levels: Vec<usize>,
}

impl OntologyDag {
    /// Builds the DAG from terms and `(child, parent, relation)` id triples.
    pub fn new(
        terms: Vec<Term>,
        edges: impl IntoIterator<Item = (String, String, Relation)>,
    ) -> Result<Self, OntologyError> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.id.clone(), i).is_some() {
                return Err(OntologyError::DuplicateTerm(t.id.clone()));
            }
        }
        let n = terms.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut typed = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (c, p, relation) in edges {
            let child = *index.get(&c).ok_or_else(|| OntologyError::DanglingEdge {
                from: c.clone(),
                to: c.clone(),
            })?;
            let parent = *index.get(&p).ok_or_else(|| OntologyError::DanglingEdge {
                from: c.clone(),
                to: p.clone(),
            })?;
            let e = Edge {
                child,
                parent,
                relation,
            };
            if !seen.insert(e) {
                continue;
            }
            if relation == Relation::IsA {
                parents[child].push(parent);
                children[parent].push(child);
            }
            typed.push(e);
        }
        let levels = compute_levels(&terms, &parents, &children)?;
        Ok(OntologyDag {
            terms,
            index,
            edges: typed,
            parents,
            children,
            levels,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, idx: usize) -> &Term {
        &self.terms[idx]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Direct `is_a` parents.
    pub fn parents(&self, idx: usize) -> &[usize] {
        &self.parents[idx]
    }

    /// Direct `is_a` children.
    pub fn children(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    pub fn level(&self, idx: usize) -> usize {
        self.levels[idx]
    }

    /// Targets of `relation` edges leaving `idx` (for `IsA`, same as [`Self::parents`]).
    pub fn related(&self, idx: usize, relation: Relation) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|e| e.child == idx && e.relation == relation)
            .map(|e| e.parent)
            .collect()
    }

    /// All `is_a` ancestors of `idx`, excluding `idx`, in ascending index order.
    pub fn ancestors(&self, idx: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut stack = self.parents[idx].clone();
        while let Some(p) = stack.pop() {
            if !seen[p] {
                seen[p] = true;
                stack.extend_from_slice(&self.parents[p]);
            }
        }
        (0..self.len()).filter(|&i| seen[i]).collect()
    }
}

fn compute_levels(
    terms: &[Term],
    parents: &[Vec<usize>],
    children: &[Vec<usize>],
) -> Result<Vec<usize>, OntologyError> {
    let n = terms.len();
    // Kahn's algorithm: anything left unvisited sits on an is_a cycle.
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut visited = 0;
    while let Some(t) = queue.pop_front() {
        visited += 1;
        for &c in &children[t] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    if visited != n {
        let on_cycle = (0..n).find(|&i| indeg[i] > 0).expect("unvisited term");
        return Err(OntologyError::Cycle(terms[on_cycle].id.clone()));
    }
    let mut levels = vec![usize::MAX; n];
    let mut bfs: VecDeque<usize> = (0..n).filter(|&i| parents[i].is_empty()).collect();
    for &r in &bfs {
        levels[r] = 0;
    }
    while let Some(t) = bfs.pop_front() {
        for &c in &children[t] {
            if levels[c] == usize::MAX {
                levels[c] = levels[t] + 1;
                bfs.push_back(c);
            }
        }
    }
    Ok(levels)
}

/// Parses the OBO subset: `[Term]` stanzas with `id`, `name`, `namespace`,
/// `is_a`, `relationship`, `is_obsolete`. Obsolete terms are dropped, other
/// stanza types and tags are skipped.
pub fn parse_obo(text: &str) -> Result<OntologyDag, OntologyError> {
    #[derive(Default)]
    struct Pending {
        id: Option<String>,
        name: String,
        namespace: Option<String>,
        obsolete: bool,
        edges: Vec<(String, Relation)>,
        line: usize,
    }
    let mut terms = Vec::new();
    let mut edges = Vec::new();
    let mut current: Option<Pending> = None;

    let finish = |p: Option<Pending>,
                  terms: &mut Vec<Term>,
                  edges: &mut Vec<(String, String, Relation)>|
     -> Result<(), OntologyError> {
        let Some(p) = p else { return Ok(()) };
        let id = p.id.ok_or(OntologyError::Syntax {
            line: p.line,
            message: "[Term] stanza without id".into(),
        })?;
        if p.obsolete {
            return Ok(());
        }
        for (target, rel) in p.edges {
            edges.push((id.clone(), target, rel));
        }
        terms.push(Term {
            id,
            name: p.name,
            namespace: p
                .namespace
                .map(|n| n.parse().expect("infallible"))
                .unwrap_or(Namespace::Other(String::new())),
        });
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            finish(current.take(), &mut terms, &mut edges)?;
            if line == "[Term]" {
                current = Some(Pending {
                    line: line_no,
                    ..Default::default()
                });
            }
            continue;
        }
        let Some(p) = current.as_mut() else { continue };
        let Some((tag, value)) = line.split_once(':') else {
            return Err(OntologyError::Syntax {
                line: line_no,
                message: format!("expected `tag: value`, got `{line}`"),
            });
        };
        let value = value.trim();
        match tag.trim() {
            "id" => p.id = Some(value.to_string()),
            "name" => p.name = value.to_string(),
            "namespace" => p.namespace = Some(value.to_string()),
            "is_obsolete" => p.obsolete = value == "true",
            "is_a" => {
                let target = value.split_whitespace().next().unwrap_or("");
                if target.is_empty() {
                    return Err(OntologyError::Syntax {
                        line: line_no,
                        message: "is_a without target".into(),
                    });
                }
                p.edges.push((target.to_string(), Relation::IsA));
            }
            "relationship" => {
                let mut it = value.split_whitespace();
                let (Some(kind), Some(target)) = (it.next(), it.next()) else {
                    return Err(OntologyError::Syntax {
                        line: line_no,
                        message: "relationship needs `<type> <id>`".into(),
                    });
                };
                match Relation::from_obo(kind) {
                    Some(rel) => p.edges.push((target.to_string(), rel)),
                    None => log::debug!("line {line_no}: skipping relationship type `{kind}`"),
                }
            }
            _ => {}
        }
    }
    finish(current.take(), &mut terms, &mut edges)?;
    OntologyDag::new(terms, edges)
}

/// Drops a trailing `! comment`, leaving escaped `\!` alone.
fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'!' && (i == 0 || bytes[i - 1] != b'\\') {
            return &line[..i];
        }
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const CHAIN: &str = "\
format-version: 1.2

[Term]
id: A
name: root term
namespace: biological_process

[Term]
id: B
name: middle
namespace: biological_process
is_a: A ! root term

[Term]
id: C
name: leaf
namespace: biological_process
is_a: B
relationship: part_of A

[Term]
id: OLD
name: gone
is_obsolete: true

[Typedef]
id: part_of
name: part of
";

    #[test]
    fn chain_levels_and_relations() {
        let dag = parse_obo(CHAIN).unwrap();
        assert_eq!(dag.len(), 3);
        let (a, b, c) = (
            dag.position("A").unwrap(),
            dag.position("B").unwrap(),
            dag.position("C").unwrap(),
        );
        assert_eq!((dag.level(a), dag.level(b), dag.level(c)), (0, 1, 2));
        assert_eq!(dag.parents(c), &[b]);
        assert_eq!(dag.related(c, Relation::PartOf), vec![a]);
        assert_eq!(dag.ancestors(c), vec![a, b]);
        assert_eq!(dag.term(b).namespace, Namespace::BiologicalProcess);
        assert!(dag.position("OLD").is_none());
    }

    #[test]
    fn diamond_uses_shortest_path() {
        let text = "[Term]\nid: A\n[Term]\nid: B\nis_a: A\n[Term]\nid: C\nis_a: A\n\
                    [Term]\nid: X\nis_a: C\n[Term]\nid: D\nis_a: B\nis_a: X\n";
        let dag = parse_obo(text).unwrap();
        assert_eq!(dag.level(dag.position("D").unwrap()), 2);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_obo("[Term]\nid: A\nis_a: Z\n"),
            Err(OntologyError::DanglingEdge { .. })
        ));
        assert!(matches!(
            parse_obo("[Term]\nid: A\nis_a: B\n[Term]\nid: B\nis_a: A\n"),
            Err(OntologyError::Cycle(_))
        ));
        assert!(matches!(
            parse_obo("[Term]\nname: x\n"),
            Err(OntologyError::Syntax { .. })
        ));
    }
}
