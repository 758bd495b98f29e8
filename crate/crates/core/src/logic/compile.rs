//! Compilation of rules into penalty functions over predicate outputs.
//!
//! A rule `Q1 v1:D1. ... Qm vm:Dm. E` becomes
//! `phi = agg_1_{e1 in D1} ... agg_m_{em in Dm} (1 - t_E(e1..em))`
//! where `forall` sums, `exists` takes the minimum and `exists[n]` sums the `n`
//! smallest violations. Groundings are enumerated in domain order, cartesian
//! product in quantifier order.

use std::collections::{BTreeMap, HashMap};

use super::formula::{Expr, Formula, QuantifierKind};
use super::tnorm::{self, ImplicationMode, TNorm};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{predicate}` has arity {declared} but is used with {used} arguments")]
    ArityMismatch {
        predicate: String,
        declared: usize,
        used: usize,
    },
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error(transparent)]
    Quantifier(#[from] QuantifierError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuantifierError {
    #[error("quantifier over an empty grounding set")]
    EmptyDomain,
    #[error("exists[{n}] over only {available} groundings")]
    CountTooLarge { n: usize, available: usize },
}

/// Where a predicate's truth values come from during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Binding {
    /// Output of a trainable task; receives gradients.
    Learned,
    /// Fixed table read from data; never updated.
    Given,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub arity: usize,
    pub binding: Binding,
}

/// The set of predicates constraints may refer to. Ids are insertion indices.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    decls: Vec<PredicateDecl>,
    index: HashMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a predicate, returning its id. Re-declaring returns the existing id.
    pub fn declare(&mut self, name: &str, arity: usize, binding: Binding) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.decls.len();
        self.decls.push(PredicateDecl {
            name: name.to_string(),
            arity,
            binding,
        });
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn decl(&self, id: usize) -> &PredicateDecl {
        &self.decls[id]
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }
}

/// Named example domains. Each domain lists the element ids (indices into the
/// predicate value tables) its variables range over.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Domains {
    map: BTreeMap<String, Vec<usize>>,
}

impl Domains {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, elements: Vec<usize>) -> Self {
        self.insert(name, elements);
        self
    }

    pub fn insert(&mut self, name: &str, elements: Vec<usize>) {
        self.map.insert(name.to_string(), elements);
    }

    pub fn get(&self, name: &str) -> Option<&[usize]> {
        self.map.get(name).map(Vec::as_slice)
    }
}

/// Truth values of one predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateValues {
    pub values: Vec<f64>,
    /// For binary predicates: maps an argument pair to its slot in `values`.
    /// Pairs absent from the map evaluate to 0 and receive no gradient.
    pub pairs: Option<HashMap<(usize, usize), usize>>,
}

impl PredicateValues {
    pub fn unary(values: Vec<f64>) -> Self {
        PredicateValues {
            values,
            pairs: None,
        }
    }

    pub fn binary(pairs: &[(usize, usize)], values: Vec<f64>) -> Self {
        assert_eq!(pairs.len(), values.len(), "one value per pair");
        let map = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        PredicateValues {
            values,
            pairs: Some(map),
        }
    }

    fn slot(&self, args: &[usize]) -> Option<usize> {
        match (&self.pairs, args) {
            (None, [x]) => Some(*x),
            (Some(map), [x, y]) => map.get(&(*x, *y)).copied(),
            _ => None,
        }
    }

    fn get(&self, args: &[usize]) -> f64 {
        self.slot(args).map_or(0.0, |s| self.values[s])
    }
}

/// Truth values for every predicate of a signature, indexed by predicate id.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpretation {
    pub predicates: Vec<PredicateValues>,
}

impl Interpretation {
    pub fn new(predicates: Vec<PredicateValues>) -> Self {
        Interpretation { predicates }
    }

    /// A zero-filled gradient buffer with the same shape.
    pub fn zeros_like(&self) -> Vec<Vec<f64>> {
        self.predicates
            .iter()
            .map(|p| vec![0.0; p.values.len()])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Atom { predicate: usize, vars: Vec<usize> },
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
}

/// A rule compiled against a signature, a t-norm and concrete domains.
#[derive(Debug, Clone)]
pub struct CompiledConstraint {
    source: Formula,
    tnorm: TNorm,
    implication: ImplicationMode,
    kinds: Vec<QuantifierKind>,
    domains: Vec<Vec<usize>>,
    body: Node,
    referenced: Vec<(usize, Binding)>,
}

/// Compiles with the residuum implication.
pub fn compile(
    formula: &Formula,
    tnorm: TNorm,
    signature: &Signature,
    domains: &Domains,
) -> Result<CompiledConstraint, CompileError> {
    compile_with(
        formula,
        tnorm,
        ImplicationMode::Residuum,
        signature,
        domains,
    )
}

pub fn compile_with(
    formula: &Formula,
    tnorm: TNorm,
    implication: ImplicationMode,
    signature: &Signature,
    domains: &Domains,
) -> Result<CompiledConstraint, CompileError> {
    let mut kinds = Vec::new();
    let mut doms = Vec::new();
    let mut vars = HashMap::new();
    for (i, q) in formula.quantifiers.iter().enumerate() {
        let d = domains
            .get(&q.domain)
            .ok_or_else(|| CompileError::UnknownDomain(q.domain.clone()))?;
        if d.is_empty() {
            return Err(QuantifierError::EmptyDomain.into());
        }
        if let QuantifierKind::ExistsN(n) = q.kind {
            if n > d.len() {
                return Err(QuantifierError::CountTooLarge {
                    n,
                    available: d.len(),
                }
                .into());
            }
        }
        kinds.push(q.kind);
        doms.push(d.to_vec());
        vars.insert(q.variable.as_str(), i);
    }
    let mut referenced = Vec::new();
    let body = lower(&formula.body, signature, &vars, &mut referenced)?;
    Ok(CompiledConstraint {
        source: formula.clone(),
        tnorm,
        implication,
        kinds,
        domains: doms,
        body,
        referenced,
    })
}

fn lower(
    e: &Expr,
    sig: &Signature,
    vars: &HashMap<&str, usize>,
    referenced: &mut Vec<(usize, Binding)>,
) -> Result<Node, CompileError> {
    let pair = |a: &Expr, b: &Expr, referenced: &mut Vec<(usize, Binding)>| {
        Ok::<_, CompileError>((
            Box::new(lower(a, sig, vars, referenced)?),
            Box::new(lower(b, sig, vars, referenced)?),
        ))
    };
    Ok(match e {
        Expr::Atom { predicate, args } => {
            let id = sig
                .id(predicate)
                .ok_or_else(|| CompileError::UnknownPredicate(predicate.clone()))?;
            let decl = sig.decl(id);
            if decl.arity != args.len() {
                return Err(CompileError::ArityMismatch {
                    predicate: predicate.clone(),
                    declared: decl.arity,
                    used: args.len(),
                });
            }
            if !referenced.iter().any(|(p, _)| *p == id) {
                referenced.push((id, decl.binding));
            }
            Node::Atom {
                predicate: id,
                // Formula validation guarantees every variable is bound.
                vars: args.iter().map(|a| vars[a.as_str()]).collect(),
            }
        }
        Expr::Not(inner) => Node::Not(Box::new(lower(inner, sig, vars, referenced)?)),
        Expr::And(a, b) => {
            let (a, b) = pair(a, b, referenced)?;
            Node::And(a, b)
        }
        Expr::Or(a, b) => {
            let (a, b) = pair(a, b, referenced)?;
            Node::Or(a, b)
        }
        Expr::Implies(a, b) => {
            let (a, b) = pair(a, b, referenced)?;
            Node::Implies(a, b)
        }
        Expr::Iff(a, b) => {
            let (a, b) = pair(a, b, referenced)?;
            Node::Iff(a, b)
        }
    })
}

/// Aggregates per-grounding violations `1 - t` for one quantifier.
pub fn aggregate_violations(
    kind: QuantifierKind,
    violations: &[f64],
) -> Result<f64, QuantifierError> {
    let weights = aggregation_weights(kind, violations)?;
    Ok(weights
        .iter()
        .zip(violations)
        .filter(|(w, _)| **w != 0.0)
        .map(|(w, v)| w * v)
        .sum())
}

/// Penalty of a single quantifier over per-grounding truth values.
pub fn aggregate_quantifier(kind: QuantifierKind, truths: &[f64]) -> Result<f64, QuantifierError> {
    let violations: Vec<f64> = truths.iter().map(|t| 1.0 - t).collect();
    aggregate_violations(kind, &violations)
}

/// d(aggregate)/d(violation_i). Ties among minima go to the lowest index.
fn aggregation_weights(kind: QuantifierKind, v: &[f64]) -> Result<Vec<f64>, QuantifierError> {
    if v.is_empty() {
        return Err(QuantifierError::EmptyDomain);
    }
    let take = match kind {
        QuantifierKind::ForAll => return Ok(vec![1.0; v.len()]),
        QuantifierKind::Exists => 1,
        QuantifierKind::ExistsN(n) => {
            if n > v.len() {
                return Err(QuantifierError::CountTooLarge {
                    n,
                    available: v.len(),
                });
            }
            n
        }
    };
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let mut w = vec![0.0; v.len()];
    for &i in &order[..take] {
        w[i] = 1.0;
    }
    Ok(w)
}

impl CompiledConstraint {
    pub fn source(&self) -> &Formula {
        &self.source
    }

    pub fn tnorm(&self) -> TNorm {
        self.tnorm
    }

    /// Predicates used by the body with their bindings, in first-occurrence order.
    pub fn referenced_predicates(&self) -> &[(usize, Binding)] {
        &self.referenced
    }

    pub fn grounding_count(&self) -> usize {
        self.domains.iter().map(Vec::len).product()
    }

    /// Visits every grounding in enumeration order with its body truth value.
    pub fn for_each_grounding(&self, interp: &Interpretation, mut f: impl FnMut(&[usize], f64)) {
        let mut binding = vec![0usize; self.domains.len()];
        self.walk(0, &mut binding, &mut |b| {
            let t = self.eval(&self.body, b, interp);
            f(b, t);
        });
    }

    fn walk(&self, level: usize, binding: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if level == self.domains.len() {
            f(binding);
            return;
        }
        for &e in &self.domains[level] {
            binding[level] = e;
            self.walk(level + 1, binding, f);
        }
    }

    /// Penalty value `phi >= 0`.
    pub fn penalty(&self, interp: &Interpretation) -> f64 {
        let mut binding = vec![0usize; self.domains.len()];
        self.level_penalty(0, &mut binding, interp)
    }

    fn level_penalty(
        &self,
        level: usize,
        binding: &mut Vec<usize>,
        interp: &Interpretation,
    ) -> f64 {
        if level == self.domains.len() {
            return 1.0 - self.eval(&self.body, binding, interp);
        }
        let children = self.children(level, binding, interp);
        aggregate_violations(self.kinds[level], &children)
            .expect("domains validated at compile time")
    }

    fn children(
        &self,
        level: usize,
        binding: &mut Vec<usize>,
        interp: &Interpretation,
    ) -> Vec<f64> {
        self.domains[level]
            .iter()
            .map(|&e| {
                binding[level] = e;
                self.level_penalty(level + 1, binding, interp)
            })
            .collect()
    }

    /// Penalty and its gradient with respect to every predicate value slot.
    /// The gradient has the shape of `interp` (see [`Interpretation::zeros_like`]).
    pub fn penalty_and_gradient(&self, interp: &Interpretation) -> (f64, Vec<Vec<f64>>) {
        let mut grad = interp.zeros_like();
        let value = self.accumulate_gradient(interp, 1.0, &mut grad);
        (value, grad)
    }

    /// Adds `scale * d(phi)/d(value)` into `grad` and returns `phi`.
    pub fn accumulate_gradient(
        &self,
        interp: &Interpretation,
        scale: f64,
        grad: &mut [Vec<f64>],
    ) -> f64 {
        let mut binding = vec![0usize; self.domains.len()];
        self.level_backward(0, &mut binding, interp, scale, grad)
    }

    fn level_backward(
        &self,
        level: usize,
        binding: &mut Vec<usize>,
        interp: &Interpretation,
        upstream: f64,
        grad: &mut [Vec<f64>],
    ) -> f64 {
        if level == self.domains.len() {
            let t = self.eval(&self.body, binding, interp);
            // d(1 - t)/dt = -1
            self.backward(&self.body, binding, interp, -upstream, grad);
            return 1.0 - t;
        }
        let children = self.children(level, binding, interp);
        let weights = aggregation_weights(self.kinds[level], &children)
            .expect("domains validated at compile time");
        let mut value = 0.0;
        for (i, &e) in self.domains[level].iter().enumerate() {
            if weights[i] == 0.0 {
                continue;
            }
            binding[level] = e;
            value += self.level_backward(level + 1, binding, interp, upstream * weights[i], grad);
        }
        value
    }

    /// d(phi)/d(value) for one slot of one predicate.
    pub fn penalty_gradient(&self, interp: &Interpretation, predicate: usize, slot: usize) -> f64 {
        let (_, grad) = self.penalty_and_gradient(interp);
        grad[predicate][slot]
    }

    fn eval(&self, node: &Node, b: &[usize], interp: &Interpretation) -> f64 {
        let t = self.tnorm;
        let m = self.implication;
        match node {
            Node::Atom { predicate, vars } => {
                let args: smallargs::Args = vars.iter().map(|&v| b[v]).collect();
                interp.predicates[*predicate].get(args.as_slice())
            }
            Node::Not(x) => TNorm::negate(self.eval(x, b, interp)),
            Node::And(x, y) => t.and(self.eval(x, b, interp), self.eval(y, b, interp)),
            Node::Or(x, y) => t.or(self.eval(x, b, interp), self.eval(y, b, interp)),
            Node::Implies(x, y) => {
                tnorm::implies(t, m, self.eval(x, b, interp), self.eval(y, b, interp))
            }
            Node::Iff(x, y) => tnorm::iff(t, m, self.eval(x, b, interp), self.eval(y, b, interp)),
        }
    }

    fn backward(
        &self,
        node: &Node,
        b: &[usize],
        interp: &Interpretation,
        upstream: f64,
        grad: &mut [Vec<f64>],
    ) {
        if upstream == 0.0 {
            return;
        }
        let t = self.tnorm;
        let m = self.implication;
        let mut binary = |x: &Node, y: &Node, f: &dyn Fn(f64, f64) -> (f64, f64)| {
            let (vx, vy) = (self.eval(x, b, interp), self.eval(y, b, interp));
            let (dx, dy) = f(vx, vy);
            self.backward(x, b, interp, upstream * dx, grad);
            self.backward(y, b, interp, upstream * dy, grad);
        };
        match node {
            Node::Atom { predicate, vars } => {
                let args: smallargs::Args = vars.iter().map(|&v| b[v]).collect();
                if let Some(slot) = interp.predicates[*predicate].slot(args.as_slice()) {
                    grad[*predicate][slot] += upstream;
                }
            }
            Node::Not(x) => self.backward(x, b, interp, -upstream, grad),
            Node::And(x, y) => binary(x, y, &|a, c| t.and_grad(a, c)),
            Node::Or(x, y) => binary(x, y, &|a, c| t.or_grad(a, c)),
            Node::Implies(x, y) => binary(x, y, &|a, c| tnorm::implies_grad(t, m, a, c)),
            Node::Iff(x, y) => binary(x, y, &|a, c| tnorm::iff_grad(t, m, a, c)),
        }
    }
}

mod smallargs {
    /// Atom arguments (arity is at most 2) without heap allocation.
    pub struct Args {
        buf: [usize; 2],
        len: usize,
    }

    impl Args {
        pub fn as_slice(&self) -> &[usize] {
            &self.buf[..self.len]
        }
    }

    impl FromIterator<usize> for Args {
        fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
            let mut a = Args {
                buf: [0; 2],
                len: 0,
            };
            for x in iter {
                a.buf[a.len] = x;
                a.len += 1;
            }
            a
        }
    }
}
