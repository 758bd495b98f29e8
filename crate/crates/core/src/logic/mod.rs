//! First-order rules, their fuzzy semantics, and compilation into
//! differentiable penalties.

mod compile;
mod formula;
mod parser;
mod tnorm;

pub use compile::{
    aggregate_quantifier, aggregate_violations, compile, compile_with, Binding, CompileError,
    CompiledConstraint, Domains, Interpretation, PredicateDecl, PredicateValues, QuantifierError,
    Signature,
};
pub use formula::{Expr, Formula, FormulaError, Quantifier, QuantifierKind};
pub use parser::{parse_rule, parse_rules, ParseError};
pub use tnorm::{
    eval_connective, eval_connective_with, Connective, ConnectiveError, ImplicationMode, TNorm,
    PRODUCT_RESIDUUM_GUARD,
};
