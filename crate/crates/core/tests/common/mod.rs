#![allow(dead_code)]

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use gosbr::eval::consistency;
use gosbr::learner::{predict, train, truths, Problem, TaskSpec, TrainConfig};
use gosbr::logic::{
    compile, parse_rule, Binding, CompiledConstraint, Domains, Formula, Interpretation,
    PredicateValues, Signature, TNorm,
};
use gosbr::ontology::{go_cut, parse_obo, tpr_closure, GoCut, Namespace};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `A Aᵀ / n + 0.1 I` for a random `n x n` matrix `A`: positive definite.
pub fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let g = &a * a.transpose() / n as f64 + DMatrix::identity(n, n) * 0.1;
    // exact symmetry
    DMatrix::from_fn(n, n, |i, j| if i <= j { g[(i, j)] } else { g[(j, i)] })
}

/// Root R, parent P under R, child C under P; all biological process.
pub const HIERARCHY_OBO: &str = "[Term]\nid: R\nname: root\nnamespace: biological_process\n\n\
[Term]\nid: P\nname: parent\nnamespace: biological_process\nis_a: R\n\n\
[Term]\nid: C\nname: child\nnamespace: biological_process\nis_a: P\n";

/// 50 points in the square; the child is linearly separable, the parent
/// contains the child but a quarter of its labels are flipped.
pub struct Hierarchy {
    pub points: Vec<[f64; 2]>,
    pub child: Vec<bool>,
    pub parent: Vec<bool>,
    pub gram: DMatrix<f64>,
}

pub fn synthetic_hierarchy(seed: u64) -> Hierarchy {
    let mut r = rng(seed);
    let n = 50;
    let points: Vec<[f64; 2]> = (0..n)
        .map(|_| [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)])
        .collect();
    let child: Vec<bool> = points.iter().map(|p| p[0] > 0.2).collect();
    let parent: Vec<bool> = points
        .iter()
        .zip(&child)
        .map(|(p, &c)| {
            let clean = c || p[1] > 0.3;
            if r.gen_bool(0.25) {
                !clean
            } else {
                clean
            }
        })
        .collect();
    let gram = DMatrix::from_fn(n, n, |i, j| {
        points[i][0] * points[j][0] + points[i][1] * points[j][1] + 1.0
    });
    Hierarchy {
        points,
        child,
        parent,
        gram,
    }
}

pub fn hierarchy_cut() -> GoCut {
    let dag = parse_obo(HIERARCHY_OBO).unwrap();
    let raw: BTreeMap<String, BTreeSet<String>> =
        [("p".to_string(), ["C".to_string()].into())].into();
    let ann = tpr_closure(&raw, &dag).unwrap();
    go_cut(&dag, &ann, &[Namespace::BiologicalProcess], 2, 1).unwrap()
}

/// Trains C and P (first 25 examples labeled, last 25 unsupervised) under
/// `C => P` and returns the consistency of the unsupervised predictions.
pub fn hierarchy_consistency(h: &Hierarchy, lambda_c: f64) -> f64 {
    let n = h.child.len();
    let labeled = 25;
    let gram = Arc::new(h.gram.clone());
    let labels = |v: &[bool]| -> Vec<Option<f64>> {
        (0..n)
            .map(|i| (i < labeled).then(|| f64::from(u8::from(v[i]))))
            .collect()
    };
    let config = TrainConfig {
        lambda_c,
        ..TrainConfig::default()
    };
    let mut problem = Problem::new(vec![
        TaskSpec::learned("P", gram.clone(), labels(&h.parent)),
        TaskSpec::learned("C", gram, labels(&h.child)),
    ])
    .unwrap();
    let rule = parse_rule("forall x:Prot. C(x) => P(x)").unwrap();
    problem
        .add_rules(&[rule], "Prot", (labeled..n).collect(), &config)
        .unwrap();
    let model = train(&problem, &config).unwrap();
    let preds = predict(&model, &problem);
    let cut = hierarchy_cut();
    let id = |s: &str| cut.position(s).unwrap();
    let sets: Vec<BTreeSet<usize>> = (labeled..n)
        .map(|i| {
            let mut s = BTreeSet::from([id("R")]);
            if preds[0][i].positive {
                s.insert(id("P"));
            }
            if preds[1][i].positive {
                s.insert(id("C"));
            }
            s
        })
        .collect();
    consistency(&sets, &cut)
}

/// Writes the synthetic hierarchy as an experiment directory and returns the
/// config path. `extra` is appended to the config.
pub fn write_hierarchy_experiment(dir: &Path, seed: u64, extra: &str) -> PathBuf {
    let h = synthetic_hierarchy(seed);
    let n = h.child.len();
    let names: Vec<String> = (0..n).map(|i| format!("prot{i:02}")).collect();
    std::fs::write(dir.join("go.obo"), HIERARCHY_OBO).unwrap();
    let mut ann = String::new();
    for (i, name) in names.iter().enumerate() {
        let leaf = if h.child[i] {
            "C"
        } else if h.parent[i] {
            "P"
        } else {
            "R"
        };
        writeln!(ann, "{name}\t{leaf}").unwrap();
    }
    std::fs::write(dir.join("annotations.tsv"), ann).unwrap();
    let mut csv = names.join(",");
    csv.push('\n');
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| h.gram[(i, j)].to_string()).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    std::fs::write(dir.join("gram.csv"), csv).unwrap();
    let config = format!(
        "obo = go.obo\nannotations = annotations.tsv\ngram = gram.csv\nkernel = precomputed\n\
         namespaces = biological_process\nlevel = 2\ncount = 1\nfolds = 5\nout = out\n{extra}"
    );
    let path = dir.join("experiment.cfg");
    std::fs::write(&path, config).unwrap();
    path
}

/// A random rule with interior truth values for `A`, `B`, `C`.
pub struct PenaltyInstance {
    pub formula: Formula,
    pub tnorm: TNorm,
    pub size: usize,
    pub values: BTreeMap<String, Vec<f64>>,
}

impl PenaltyInstance {
    pub fn random(r: &mut ChaCha8Rng) -> Self {
        let size = r.gen_range(1..=4);
        let tnorm = TNorm::ALL[r.gen_range(0..3)];
        let formula = oracle::random_formula(r, "D", size);
        let values = oracle::PREDICATES
            .iter()
            .map(|p| {
                let v = (0..size).map(|_| r.gen_range(0.001..0.999)).collect();
                (p.to_string(), v)
            })
            .collect();
        PenaltyInstance {
            formula,
            tnorm,
            size,
            values,
        }
    }

    pub fn compile(&self) -> CompiledConstraint {
        let mut sig = Signature::new();
        for p in oracle::PREDICATES {
            sig.declare(p, 1, Binding::Learned);
        }
        let domains = Domains::new().with("D", (0..self.size).collect());
        compile(&self.formula, self.tnorm, &sig, &domains).unwrap()
    }

    /// Values flattened in predicate order, as used by [`Self::interpretation`].
    pub fn flat(&self) -> Vec<f64> {
        oracle::PREDICATES
            .iter()
            .flat_map(|p| self.values[*p].iter().copied())
            .collect()
    }

    pub fn interpretation(&self, flat: &[f64]) -> Interpretation {
        Interpretation::new(
            flat.chunks(self.size)
                .map(|c| PredicateValues::unary(c.to_vec()))
                .collect(),
        )
    }

    /// Reference penalty and distance to the nearest non-smooth point.
    pub fn reference(&self) -> (f64, f64) {
        let mut r = oracle::RefLogic::new(self.tnorm);
        let v = r.penalty(&self.formula, self.size, &self.values);
        (v, r.margin)
    }
}

/// Three learned tasks `A`, `B`, `C` over one random Gram matrix, partly
/// labeled, with one or two random rules over all examples.
pub struct ObjectiveInstance {
    pub problem: Problem,
    pub alpha: Vec<f64>,
    pub lambda_r: f64,
    pub lambda_c: f64,
    /// Distance of the scores and rule semantics from non-smooth points.
    pub margin: f64,
}

impl ObjectiveInstance {
    pub fn random(r: &mut ChaCha8Rng) -> Self {
        let n = r.gen_range(2..=6);
        let gram = random_pd(r, n);
        let tnorm = TNorm::ALL[r.gen_range(0..3)];
        let config = TrainConfig {
            tnorm,
            ..TrainConfig::default()
        };
        let shared = Arc::new(gram.clone());
        let mut targets = BTreeMap::new();
        let mut alpha = Vec::new();
        let mut tasks = Vec::new();
        for p in oracle::PREDICATES {
            let labels = (0..n)
                .map(|_| r.gen_bool(0.5).then(|| r.gen_range(0.0..1.0)))
                .collect();
            tasks.push(TaskSpec::learned(p, shared.clone(), labels));
            let s = nalgebra::DVector::from_fn(n, |_, _| r.gen_range(-0.3..1.3));
            let a = gram
                .clone()
                .cholesky()
                .expect("positive definite")
                .solve(&s);
            let scores = &gram * &a;
            alpha.extend(a.iter().copied());
            targets.insert(p.to_string(), scores.iter().copied().collect::<Vec<f64>>());
        }
        let rules: Vec<Formula> = (0..r.gen_range(1..=2))
            .map(|_| oracle::random_formula(r, "Prot", n))
            .collect();
        let mut problem = Problem::new(tasks).unwrap();
        problem
            .add_rules(&rules, "Prot", (0..n).collect(), &config)
            .unwrap();

        let mut margin = f64::INFINITY;
        for s in targets.values().flatten() {
            margin = margin.min(s.abs()).min((s - 1.0).abs());
        }
        let truth: BTreeMap<String, Vec<f64>> = targets
            .iter()
            .map(|(k, s)| (k.clone(), truths(s)))
            .collect();
        for rule in &rules {
            let mut reference = oracle::RefLogic::new(tnorm);
            reference.penalty(rule, n, &truth);
            margin = margin.min(reference.margin);
        }
        ObjectiveInstance {
            problem,
            alpha,
            lambda_r: r.gen_range(0.1..2.0),
            lambda_c: r.gen_range(0.1..10.0),
            margin,
        }
    }
}
