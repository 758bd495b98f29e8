//! Multitask kernel machines trained under fuzzy first-order-logic constraints,
//! with Gene Ontology tooling to derive those constraints and hierarchical
//! multi-label evaluation.

pub mod cli;
pub mod eval;
pub mod io;
pub mod kernels;
pub mod learner;
pub mod logic;
pub mod ontology;
