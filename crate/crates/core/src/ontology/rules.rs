//! Rule generators over a GO cut. All rules quantify over the `Prot` domain.

use super::{GoCut, Namespace, OntologyDag, OntologyError, Relation};
use crate::logic::{Expr, Formula, Quantifier, QuantifierKind};

pub const PROTEIN_DOMAIN: &str = "Prot";
pub const BOUND_PREDICATE: &str = "BOUND";

fn unary(pred: &str, var: &str) -> Expr {
    Expr::atom(pred, &[var])
}

fn implication(from: &str, to: &str) -> Formula {
    Formula::forall_x(
        PROTEIN_DOMAIN,
        Expr::implies(unary(from, "x"), unary(to, "x")),
    )
}

/// Ontology-consistency rules: `U => P` for every parent `P` of every cut node
/// (bin nodes included), then `U => C1 or ... or Cm` for every node with children.
pub fn generate_oc_rules(cut: &GoCut) -> Vec<Formula> {
    let mut rules = Vec::new();
    for node in cut.nodes() {
        for &p in &node.parents {
            rules.push(implication(&node.id, &cut.node(p).id));
        }
    }
    for node in cut.nodes() {
        if node.children.is_empty() {
            continue;
        }
        let disj = Expr::disjunction(node.children.iter().map(|&c| unary(&cut.node(c).id, "x")));
        rules.push(Formula::forall_x(
            PROTEIN_DOMAIN,
            Expr::implies(unary(&node.id, "x"), disj),
        ));
    }
    rules
}

/// Trans-hierarchy rules `Q => P` for each `Q part_of P` with both ends retained.
pub fn generate_part_of_rules(dag: &OntologyDag, cut: &GoCut) -> Vec<Formula> {
    let mut rules = Vec::new();
    for (_, node) in cut.retained() {
        let super::NodeKind::Term(t) = node.kind else {
            continue;
        };
        for target in dag.related(t, Relation::PartOf) {
            let target_id = &dag.term(target).id;
            if cut.position(target_id).is_some() {
                rules.push(implication(&node.id, target_id));
            }
        }
    }
    rules
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpiVariant {
    /// Interacting proteins share every predicate.
    Pp,
    /// Interacting proteins share at least one biological-process predicate.
    Dpp,
}

/// Whether `BOUND` is read from the interaction table or learned from a pair kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    Given,
    Learned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpiRules {
    pub rules: Vec<Formula>,
    pub bound: BoundMode,
}

fn pair_quantifiers() -> Vec<Quantifier> {
    ["x", "y"]
        .iter()
        .map(|v| Quantifier {
            kind: QuantifierKind::ForAll,
            variable: v.to_string(),
            domain: PROTEIN_DOMAIN.to_string(),
        })
        .collect()
}

/// Interaction rules over the retained (non-bin) predicates of the cut.
pub fn generate_ppi_rules(
    cut: &GoCut,
    variant: PpiVariant,
    bound: BoundMode,
) -> Result<PpiRules, OntologyError> {
    let bound_atom = || Expr::atom(BOUND_PREDICATE, &["x", "y"]);
    let rules = match variant {
        PpiVariant::Pp => cut
            .retained()
            .map(|(_, n)| Formula {
                quantifiers: pair_quantifiers(),
                body: Expr::implies(
                    bound_atom(),
                    Expr::iff(unary(&n.id, "x"), unary(&n.id, "y")),
                ),
            })
            .collect(),
        PpiVariant::Dpp => {
            let bp: Vec<&str> = cut
                .retained()
                .filter(|(_, n)| n.namespace == Namespace::BiologicalProcess)
                .map(|(_, n)| n.id.as_str())
                .collect();
            if bp.is_empty() {
                return Err(OntologyError::NoBiologicalProcess);
            }
            let shared =
                Expr::disjunction(bp.iter().map(|p| Expr::and(unary(p, "x"), unary(p, "y"))));
            vec![Formula {
                quantifiers: pair_quantifiers(),
                body: Expr::implies(bound_atom(), shared),
            }]
        }
    };
    Ok(PpiRules { rules, bound })
}

/// Renders rules in the rule-file syntax, one per line.
pub fn format_rules(rules: &[Formula]) -> String {
    let mut out = String::new();
    for r in rules {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}
