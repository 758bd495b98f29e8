//! Gene Ontology handling: OBO parsing, true-path closure, level/count cuts
//! with bin nodes, rule generation and interaction statistics.

mod annotations;
mod cut;
mod dag;
mod rules;
mod stats;

pub use annotations::{tpr_closure, AnnotationSet};
pub use cut::{go_cut, CutNode, GoCut, NodeKind, BIN_PREFIX};
pub use dag::{parse_obo, Edge, Namespace, OntologyDag, Relation, Term};
pub use rules::{
    format_rules, generate_oc_rules, generate_part_of_rules, generate_ppi_rules, BoundMode,
    PpiRules, PpiVariant, BOUND_PREDICATE, PROTEIN_DOMAIN,
};
pub use stats::{ppi_statistics, summarize, JaccardSummary, PpiStatistics, SharingRow};

#[derive(Debug, thiserror::Error)]
pub enum OntologyError {
    #[error("term `{0}` is defined twice")]
    DuplicateTerm(String),
    #[error("relation from `{from}` points to unknown term `{to}`")]
    DanglingEdge { from: String, to: String },
    #[error("is_a relations contain a cycle through `{0}`")]
    Cycle(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("annotation references unknown term `{0}`")]
    UnknownTerm(String),
    #[error("no term survives the cut")]
    EmptyCut,
    #[error("the cut has no biological-process predicate")]
    NoBiologicalProcess,
}
