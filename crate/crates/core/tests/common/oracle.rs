//! Independent reference implementations the library is checked against.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use gosbr::logic::{Expr, Formula, Quantifier, QuantifierKind, TNorm};
use gosbr::ontology::{Namespace, OntologyDag, Relation, Term};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- fuzzy logic

/// Textbook fuzzy semantics written out per norm. `margin` is lowered to the
/// distance from the nearest non-differentiable point met during evaluation.
pub struct RefLogic {
    pub tnorm: TNorm,
    pub margin: f64,
}

impl RefLogic {
    pub fn new(tnorm: TNorm) -> Self {
        RefLogic {
            tnorm,
            margin: f64::INFINITY,
        }
    }

    fn near(&mut self, d: f64) {
        self.margin = self.margin.min(d.abs());
    }

    pub fn and(&mut self, a: f64, b: f64) -> f64 {
        match self.tnorm {
            TNorm::Minimum => {
                self.near(a - b);
                if a < b {
                    a
                } else {
                    b
                }
            }
            TNorm::Product => a * b,
            TNorm::Lukasiewicz => {
                self.near(a + b - 1.0);
                if a + b - 1.0 > 0.0 {
                    a + b - 1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn or(&mut self, a: f64, b: f64) -> f64 {
        match self.tnorm {
            TNorm::Minimum => {
                self.near(a - b);
                if a > b {
                    a
                } else {
                    b
                }
            }
            TNorm::Product => a + b - a * b,
            TNorm::Lukasiewicz => {
                self.near(a + b - 1.0);
                if a + b < 1.0 {
                    a + b
                } else {
                    1.0
                }
            }
        }
    }

    pub fn residuum(&mut self, a: f64, b: f64) -> f64 {
        self.near(a - b);
        if a <= b {
            return 1.0;
        }
        match self.tnorm {
            TNorm::Minimum => b,
            TNorm::Product => b / a,
            TNorm::Lukasiewicz => 1.0 - a + b,
        }
    }

    fn expr(
        &mut self,
        e: &Expr,
        env: &HashMap<&str, usize>,
        vals: &BTreeMap<String, Vec<f64>>,
    ) -> f64 {
        match e {
            Expr::Atom { predicate, args } => vals[predicate][env[args[0].as_str()]],
            Expr::Not(a) => 1.0 - self.expr(a, env, vals),
            Expr::And(a, b) => {
                let (a, b) = (self.expr(a, env, vals), self.expr(b, env, vals));
                self.and(a, b)
            }
            Expr::Or(a, b) => {
                let (a, b) = (self.expr(a, env, vals), self.expr(b, env, vals));
                self.or(a, b)
            }
            Expr::Implies(a, b) => {
                let (a, b) = (self.expr(a, env, vals), self.expr(b, env, vals));
                self.residuum(a, b)
            }
            Expr::Iff(a, b) => {
                let (a, b) = (self.expr(a, env, vals), self.expr(b, env, vals));
                let ab = self.residuum(a, b);
                let ba = self.residuum(b, a);
                self.and(ab, ba)
            }
        }
    }

    /// Penalty of `f` with every quantifier ranging over `0..domain`.
    pub fn penalty(
        &mut self,
        f: &Formula,
        domain: usize,
        vals: &BTreeMap<String, Vec<f64>>,
    ) -> f64 {
        let mut env = HashMap::new();
        self.level(f, 0, domain, &mut env, vals)
    }

    fn level<'a>(
        &mut self,
        f: &'a Formula,
        depth: usize,
        domain: usize,
        env: &mut HashMap<&'a str, usize>,
        vals: &BTreeMap<String, Vec<f64>>,
    ) -> f64 {
        if depth == f.quantifiers.len() {
            return 1.0 - self.expr(&f.body, env, vals);
        }
        let q = &f.quantifiers[depth];
        let mut v: Vec<f64> = (0..domain)
            .map(|e| {
                env.insert(q.variable.as_str(), e);
                self.level(f, depth + 1, domain, env, vals)
            })
            .collect();
        let take = match q.kind {
            QuantifierKind::ForAll => return v.iter().sum(),
            QuantifierKind::Exists => 1,
            QuantifierKind::ExistsN(n) => n,
        };
        v.sort_by(f64::total_cmp);
        if take < v.len() {
            self.near(v[take] - v[take - 1]);
        }
        v[..take].iter().sum()
    }
}

pub const PREDICATES: [&str; 3] = ["A", "B", "C"];

fn random_expr(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        let p = PREDICATES[rng.gen_range(0..PREDICATES.len())];
        let v = vars[rng.gen_range(0..vars.len())];
        return Expr::atom(p, &[v]);
    }
    let mut sub = || random_expr(rng, vars, depth - 1);
    let (a, b) = (sub(), sub());
    match rng.gen_range(0..5) {
        0 => Expr::negation(a),
        1 => Expr::and(a, b),
        2 => Expr::or(a, b),
        3 => Expr::implies(a, b),
        _ => Expr::iff(a, b),
    }
}

/// A random rule over unary predicates `A`, `B`, `C` with one or two
/// quantifiers on `domain` (of `size` elements).
pub fn random_formula(rng: &mut ChaCha8Rng, domain: &str, size: usize) -> Formula {
    let vars: Vec<&str> = if rng.gen_bool(0.5) {
        vec!["x"]
    } else {
        vec!["x", "y"]
    };
    let quantifiers = vars
        .iter()
        .map(|v| Quantifier {
            kind: match rng.gen_range(0..3) {
                0 => QuantifierKind::ForAll,
                1 => QuantifierKind::Exists,
                _ => QuantifierKind::ExistsN(rng.gen_range(1..=size)),
            },
            variable: v.to_string(),
            domain: domain.to_string(),
        })
        .collect();
    let body = random_expr(rng, &vars, 3);
    Formula::new(quantifiers, body).expect("generated rule is well formed")
}

// ---------------------------------------------------------------- kernels

/// Number of equal length-`k` windows over all position pairs.
pub fn naive_spectrum(a: &str, b: &str, k: usize) -> f64 {
    let (a, b) = (a.as_bytes(), b.as_bytes());
    if a.len() < k || b.len() < k {
        return 0.0;
    }
    let mut n = 0u64;
    for i in 0..=a.len() - k {
        for j in 0..=b.len() - k {
            if a[i..i + k] == b[j..j + k] {
                n += 1;
            }
        }
    }
    n as f64
}

pub fn random_string(rng: &mut ChaCha8Rng, alphabet: &[u8], max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())] as char)
        .collect()
}

// ---------------------------------------------------------------- ontology

/// A random ontology together with the plain adjacency it was generated from.
pub struct RandomOntology {
    pub dag: OntologyDag,
    pub ids: Vec<String>,
    pub namespaces: Vec<Namespace>,
    /// `is_a` parents per term index.
    pub parents: Vec<Vec<usize>>,
    /// Raw (unclosed) annotations.
    pub raw: BTreeMap<String, BTreeSet<String>>,
}

impl RandomOntology {
    pub fn children(&self, t: usize) -> Vec<usize> {
        (0..self.ids.len())
            .filter(|&c| self.parents[c].contains(&t))
            .collect()
    }

    /// Shortest `is_a` distance to a root, by repeated relaxation.
    pub fn levels(&self) -> Vec<usize> {
        let n = self.ids.len();
        let mut level: Vec<usize> = (0..n)
            .map(|t| {
                if self.parents[t].is_empty() {
                    0
                } else {
                    usize::MAX
                }
            })
            .collect();
        loop {
            let mut changed = false;
            for t in 0..n {
                for &p in &self.parents[t] {
                    if level[p] != usize::MAX && level[p] + 1 < level[t] {
                        level[t] = level[p] + 1;
                        changed = true;
                    }
                }
            }
            if !changed {
                return level;
            }
        }
    }

    /// Closed annotation sets: every `is_a` ancestor of every raw term.
    pub fn closed(&self) -> BTreeMap<String, BTreeSet<usize>> {
        let pos: HashMap<&str, usize> = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        self.raw
            .iter()
            .map(|(p, terms)| {
                let mut seen = BTreeSet::new();
                let mut stack: Vec<usize> = terms.iter().map(|t| pos[t.as_str()]).collect();
                while let Some(t) = stack.pop() {
                    if seen.insert(t) {
                        stack.extend(&self.parents[t]);
                    }
                }
                (p.clone(), seen)
            })
            .collect()
    }

    /// Terms passing both thresholds, decided term by term.
    pub fn brute_force_cut(
        &self,
        namespaces: &[Namespace],
        level: usize,
        count: usize,
    ) -> Vec<bool> {
        let levels = self.levels();
        let closed = self.closed();
        (0..self.ids.len())
            .map(|t| {
                let annotated = closed.values().filter(|s| s.contains(&t)).count();
                namespaces.contains(&self.namespaces[t]) && levels[t] <= level && annotated >= count
            })
            .collect()
    }
}

/// Up to `max_terms` terms under one or two roots (BP and MF), each term
/// with one or two `is_a` parents in its namespace and sometimes a `part_of`
/// edge. 25 proteins are annotated with 1 to 3 terms; `leaf_only` restricts
/// annotation to terms without `is_a` children.
pub fn random_ontology(rng: &mut ChaCha8Rng, max_terms: usize, leaf_only: bool) -> RandomOntology {
    let n = rng.gen_range(2..=max_terms);
    let ids: Vec<String> = (0..n).map(|i| format!("T{i:02}")).collect();
    let two_roots = rng.gen_bool(0.5);
    let mut namespaces = vec![Namespace::BiologicalProcess];
    let mut parents: Vec<Vec<usize>> = vec![Vec::new()];
    let mut edges = Vec::new();
    for i in 1..n {
        if i == 1 && two_roots {
            namespaces.push(Namespace::MolecularFunction);
            parents.push(Vec::new());
            continue;
        }
        let first = rng.gen_range(0..i);
        let ns = namespaces[first].clone();
        let mut ps = vec![first];
        if rng.gen_bool(0.4) {
            let same: Vec<usize> = (0..i)
                .filter(|&j| j != first && namespaces[j] == ns)
                .collect();
            if let Some(&second) = same.choose(rng) {
                ps.push(second);
            }
        }
        if rng.gen_bool(0.15) {
            let target = rng.gen_range(0..i);
            edges.push((ids[i].clone(), ids[target].clone(), Relation::PartOf));
        }
        for &p in &ps {
            edges.push((ids[i].clone(), ids[p].clone(), Relation::IsA));
        }
        namespaces.push(ns);
        parents.push(ps);
    }
    let terms = ids
        .iter()
        .zip(&namespaces)
        .map(|(id, ns)| Term {
            id: id.clone(),
            name: format!("term {id}"),
            namespace: ns.clone(),
        })
        .collect();
    let dag = OntologyDag::new(terms, edges).expect("generated ontology is acyclic");
    let candidates: Vec<usize> = (0..n)
        .filter(|&t| !leaf_only || !parents.iter().any(|ps| ps.contains(&t)))
        .collect();
    let raw = (0..25)
        .map(|p| {
            let k = rng.gen_range(1..=3);
            let terms = (0..k)
                .map(|_| ids[*candidates.choose(rng).expect("some leaf")].clone())
                .collect();
            (format!("p{p:02}"), terms)
        })
        .collect();
    RandomOntology {
        dag,
        ids,
        namespaces,
        parents,
        raw,
    }
}

pub fn random_namespaces(rng: &mut ChaCha8Rng) -> Vec<Namespace> {
    match rng.gen_range(0..3) {
        0 => vec![Namespace::BiologicalProcess],
        1 => vec![Namespace::MolecularFunction],
        _ => vec![Namespace::BiologicalProcess, Namespace::MolecularFunction],
    }
}

// ---------------------------------------------------------------- curves

/// Best precision per distinct recall, linearly interpolated, constant outside.
pub fn interpolate_curve(points: &[(f64, f64)], r: f64) -> f64 {
    let mut best: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for &(rec, p) in points {
        let e = best.entry(rec.to_bits()).or_insert((rec, p));
        if p > e.1 {
            e.1 = p;
        }
    }
    let mut steps: Vec<(f64, f64)> = best.into_values().collect();
    steps.sort_by(|a, b| a.0.total_cmp(&b.0));
    if r <= steps[0].0 {
        return steps[0].1;
    }
    for w in steps.windows(2) {
        let ((r0, p0), (r1, p1)) = (w[0], w[1]);
        if r <= r1 {
            return p0 + (p1 - p0) * (r - r0) / (r1 - r0);
        }
    }
    steps[steps.len() - 1].1
}

/// Central difference `(f(x + h e_i) - f(x - h e_i)) / 2h` for every `i`.
pub fn central_differences(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let up = f(&y);
            y[i] = x[i] - h;
            let down = f(&y);
            y[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|, 1)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
