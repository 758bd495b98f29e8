use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::dataset::{pair_gram, Dataset};
use super::{build_rules, write_file, CliError};
use crate::eval::{
    auc_pr, average_pr_curves, binary_metrics, consistency, example_metrics, format_folds,
    generate_folds, label_metrics, pr_curve, Average, PrCurve, PredictionSet,
};
use crate::learner::{predict, train, Model, Prediction, Problem, TaskSpec};
use crate::logic::Formula;
use crate::ontology::{BoundMode, BIN_PREFIX, BOUND_PREDICATE, PROTEIN_DOMAIN};

/// Predictions of one held-out fold.
#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub test: Vec<usize>,
    /// `[protein in test order][cut node]`.
    pub predictions: Vec<Vec<Prediction>>,
    /// Learned `BOUND` predictions for pairs touching the test fold.
    pub bound: Vec<((usize, usize), Prediction)>,
    pub model: Model,
}

/// Everything `cmd_run` writes, kept in memory for callers and tests.
#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub folds: Vec<FoldResult>,
    pub metrics_report: String,
    pub node_stats: Vec<NodeStat>,
    pub average_curve: PrCurve,
    pub consistency_raw: f64,
    pub consistency_filtered: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeStat {
    pub id: String,
    pub name: String,
    pub level: usize,
    pub bin: bool,
    pub parents: Vec<String>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub(crate) fn format_node_stats(stats: &[NodeStat]) -> String {
    let mut out =
        String::from("id\tname\tlevel\tkind\tparents\ttp\tfp\tfn\ttn\tprecision\trecall\tf1\n");
    for s in stats {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
            s.id,
            s.name,
            s.level,
            if s.bin { "bin" } else { "term" },
            s.parents.join(","),
            s.tp,
            s.fp,
            s.fn_,
            s.tn,
            s.precision,
            s.recall,
            s.f1
        )
        .expect("writing to a String");
    }
    out
}

pub(crate) fn parse_node_stats(text: &str) -> Result<Vec<NodeStat>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || CliError::BadBundle(format!("node statistics line {}", i + 1));
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 12 {
            return Err(bad());
        }
        let n = |s: &str| s.parse::<usize>().map_err(|_| bad());
        let x = |s: &str| s.parse::<f64>().map_err(|_| bad());
        out.push(NodeStat {
            id: f[0].to_string(),
            name: f[1].to_string(),
            level: n(f[2])?,
            bin: f[3] == "bin",
            parents: f[4]
                .split(',')
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
            tp: n(f[5])?,
            fp: n(f[6])?,
            fn_: n(f[7])?,
            tn: n(f[8])?,
            precision: x(f[9])?,
            recall: x(f[10])?,
            f1: x(f[11])?,
        });
    }
    Ok(out)
}

struct Shared<'a> {
    cfg: &'a ExperimentConfig,
    data: &'a Dataset,
    gram: Arc<DMatrix<f64>>,
    rules: &'a [Formula],
    /// Both orientations of every interacting pair.
    bound_pairs: Vec<(usize, usize)>,
    bound_gram: Option<Arc<DMatrix<f64>>>,
}

fn run_fold(shared: &Shared, fold: usize, test: &BTreeSet<usize>) -> Result<FoldResult, CliError> {
    let Shared { cfg, data, .. } = shared;
    let n = data.proteins.len();
    let train_set: Vec<usize> = (0..n).filter(|i| !test.contains(i)).collect();
    if train_set.iter().any(|i| test.contains(i)) {
        return Err(CliError::FoldOverlap(fold));
    }
    let mut tasks: Vec<TaskSpec> = data
        .cut
        .nodes()
        .iter()
        .map(|node| {
            let labels = (0..n)
                .map(|i| {
                    (!test.contains(&i))
                        .then(|| f64::from(u8::from(node.proteins.contains(&data.proteins[i]))))
                })
                .collect();
            TaskSpec::learned(&node.id, shared.gram.clone(), labels)
        })
        .collect();
    let uses_bound = !shared.rules.is_empty() && cfg.rules.bound.is_some();
    if uses_bound {
        let pairs = shared.bound_pairs.clone();
        let task = match (cfg.rules.bound, &shared.bound_gram) {
            (Some(BoundMode::Learned), Some(g)) => {
                let labels = pairs
                    .iter()
                    .map(|(a, b)| (!test.contains(a) && !test.contains(b)).then_some(1.0))
                    .collect();
                TaskSpec::learned(BOUND_PREDICATE, g.clone(), labels)
            }
            _ => TaskSpec::given(BOUND_PREDICATE, vec![1.0; pairs.len()]),
        };
        tasks.push(task.over_pairs(pairs));
    }
    let mut problem = Problem::new(tasks)?;
    let domain: Vec<usize> = if cfg.train.constrain_all_examples {
        (0..n).collect()
    } else {
        test.iter().copied().collect()
    };
    problem.add_rules(shared.rules, PROTEIN_DOMAIN, domain, &cfg.train)?;
    let model = train(&problem, &cfg.train).map_err(|e| CliError::Fold {
        fold,
        source: Box::new(e.into()),
    })?;
    let all = predict(&model, &problem);
    let k = data.cut.len();
    let test: Vec<usize> = test.iter().copied().collect();
    let predictions = test
        .iter()
        .map(|&i| (0..k).map(|j| all[j][i]).collect())
        .collect();
    let bound = if uses_bound && cfg.rules.bound == Some(BoundMode::Learned) {
        shared
            .bound_pairs
            .iter()
            .enumerate()
            .filter(|(_, (a, b))| a < b && (test.contains(a) || test.contains(b)))
            .map(|(s, &p)| (p, all[k][s]))
            .collect()
    } else {
        Vec::new()
    };
    Ok(FoldResult {
        fold,
        test,
        predictions,
        bound,
        model,
    })
}

fn line(out: &mut String, key: &str, value: f64) {
    writeln!(out, "{key} = {value:.6}").expect("writing to a String");
}

fn fold_file(fold: usize, ext: &str) -> String {
    format!("fold_{fold:02}.{ext}")
}

/// Cross-validated training and evaluation; writes the result bundle to `out`.
pub fn cmd_run(cfg: &ExperimentConfig, out: &Path) -> Result<ResultBundle, CliError> {
    let (data, features, pre) = Dataset::load(cfg)?;
    let gram = data.gram(cfg, &features, pre.as_ref())?;
    let rules = build_rules(&data, cfg)?;
    let folds = generate_folds(
        cfg.folds,
        &data.proteins.iter().cloned().collect(),
        &data.term_proteins(),
    )?;
    write_file(&out.join("config.txt"), &cfg.to_text())?;
    write_file(
        &out.join("rules.txt"),
        &crate::ontology::format_rules(&rules),
    )?;
    write_file(&out.join("folds.tsv"), &format_folds(&folds))?;

    let gram = Arc::new(gram.matrix().clone());
    let bound_pairs: Vec<(usize, usize)> = data
        .ppi
        .iter()
        .flat_map(|&(a, b)| [(a, b), (b, a)])
        .collect();
    let bound_gram = (cfg.rules.bound == Some(BoundMode::Learned) && !rules.is_empty())
        .then(|| pair_gram(&gram, &bound_pairs));
    let shared = Shared {
        cfg,
        data: &data,
        gram,
        rules: &rules,
        bound_pairs,
        bound_gram,
    };
    let index = |p: &String| {
        data.proteins
            .binary_search(p)
            .expect("fold protein in dataset")
    };
    let fold_sets: Vec<BTreeSet<usize>> = folds
        .iter()
        .map(|f| f.iter().map(index).collect())
        .collect();

    let jobs = cfg.jobs.unwrap_or(cfg.folds).clamp(1, cfg.folds);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut outcomes: Vec<(usize, Result<FoldResult, CliError>)> = pool.install(|| {
        fold_sets
            .par_iter()
            .enumerate()
            .map(|(f, test)| (f, run_fold(&shared, f, test)))
            .collect()
    });
    outcomes.sort_by_key(|(f, _)| *f);

    let mut results = Vec::new();
    let mut failure = None;
    for (f, outcome) in outcomes {
        match outcome {
            Ok(r) => {
                let proteins = &data.proteins;
                let rows = r.test.iter().zip(&r.predictions).flat_map(|(&i, preds)| {
                    data.cut
                        .nodes()
                        .iter()
                        .zip(preds)
                        .map(move |(node, &p)| (proteins[i].as_str(), node.id.as_str(), p))
                });
                let text = crate::learner::format_predictions(rows);
                write_file(&out.join("predictions").join(fold_file(f, "tsv")), &text)?;
                write_file(
                    &out.join("models").join(fold_file(f, "json")),
                    &r.model.to_json(),
                )?;
                results.push(r);
            }
            Err(e) => {
                log::error!("fold {f} failed: {e}");
                write_file(
                    &out.join("errors").join(fold_file(f, "txt")),
                    &format!("{e}\n"),
                )?;
                failure.get_or_insert(e);
            }
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let bundle = aggregate(cfg, &data, results)?;
    write_file(&out.join("metrics.txt"), &bundle.metrics_report)?;
    write_file(
        &out.join("node_stats.tsv"),
        &format_node_stats(&bundle.node_stats),
    )?;
    write_file(
        &out.join("curves").join("average.csv"),
        &bundle.average_curve.to_csv(),
    )?;
    Ok(bundle)
}

fn aggregate(
    cfg: &ExperimentConfig,
    data: &Dataset,
    folds: Vec<FoldResult>,
) -> Result<ResultBundle, CliError> {
    let n = data.proteins.len();
    let k = data.cut.len();
    let mut preds: Vec<Option<&Vec<Prediction>>> = vec![None; n];
    for f in &folds {
        for (&i, p) in f.test.iter().zip(&f.predictions) {
            preds[i] = Some(p);
        }
    }
    let preds: Vec<&Vec<Prediction>> = preds
        .into_iter()
        .map(|p| p.ok_or_else(|| CliError::Runtime("protein missing from every test fold".into())))
        .collect::<Result<_, _>>()?;
    let nodes = data.cut.nodes();
    let truth: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            nodes
                .iter()
                .map(|nd| nd.proteins.contains(&data.proteins[i]))
                .collect()
        })
        .collect();
    let predicted: Vec<Vec<bool>> = preds
        .iter()
        .map(|r| r.iter().map(|p| p.positive).collect())
        .collect();
    let undecided: Vec<Vec<bool>> = preds
        .iter()
        .map(|r| r.iter().map(|p| p.undecided).collect())
        .collect();
    let names: Vec<String> = nodes.iter().map(|nd| nd.id.clone()).collect();
    let full = PredictionSet::new(names, truth.clone(), predicted.clone(), undecided.clone())?;
    let raw = full.clone().excluding(|p| p.starts_with(BIN_PREFIX));
    let filtered = raw.filtered();

    let sets = |drop_undecided: bool| -> Vec<BTreeSet<usize>> {
        (0..n)
            .map(|i| {
                (0..k)
                    .filter(|&j| predicted[i][j] && !(drop_undecided && undecided[i][j]))
                    .collect()
            })
            .collect()
    };
    let consistency_raw = consistency(&sets(false), &data.cut);
    let consistency_filtered = consistency(&sets(true), &data.cut);

    let mut curves = Vec::new();
    for (j, node) in nodes.iter().enumerate() {
        if node.is_bin() {
            continue;
        }
        let scores: Vec<f64> = preds.iter().map(|r| r[j].truth).collect();
        let labels: Vec<bool> = truth.iter().map(|t| t[j]).collect();
        if labels.iter().any(|&l| l) {
            curves.push(pr_curve(&scores, &labels)?);
        }
    }
    let average_curve = if curves.is_empty() {
        PrCurve {
            points: vec![(0.0, 0.0), (1.0, 0.0)],
        }
    } else {
        average_pr_curves(&curves, cfg.curve_samples)?
    };

    let mut report = String::new();
    writeln!(report, "proteins = {n}").expect("writing to a String");
    writeln!(report, "predicates = {}", raw.confusions().len()).expect("writing to a String");
    writeln!(report, "folds = {}", folds.len()).expect("writing to a String");
    for (tag, set) in [("raw", &raw), ("filtered", &filtered)] {
        let e = example_metrics(set);
        let mi = label_metrics(set, Average::Micro);
        let ma = label_metrics(set, Average::Macro);
        line(
            &mut report,
            &format!("{tag}.example_precision"),
            e.precision,
        );
        line(&mut report, &format!("{tag}.example_recall"), e.recall);
        line(&mut report, &format!("{tag}.example_f1"), e.f1);
        line(&mut report, &format!("{tag}.exact_match"), e.exact_match);
        line(&mut report, &format!("{tag}.micro_precision"), mi.precision);
        line(&mut report, &format!("{tag}.micro_recall"), mi.recall);
        line(&mut report, &format!("{tag}.micro_f1"), mi.f1);
        line(&mut report, &format!("{tag}.macro_precision"), ma.precision);
        line(&mut report, &format!("{tag}.macro_recall"), ma.recall);
        line(&mut report, &format!("{tag}.macro_f1"), ma.f1);
    }
    line(&mut report, "raw.consistency", consistency_raw);
    line(&mut report, "filtered.consistency", consistency_filtered);
    line(&mut report, "auc_pr", auc_pr(&average_curve));
    let bound: Vec<&Prediction> = folds
        .iter()
        .flat_map(|f| f.bound.iter().map(|(_, p)| p))
        .collect();
    if !bound.is_empty() {
        let hit = bound.iter().filter(|p| p.positive).count();
        line(&mut report, "bound.recall", hit as f64 / bound.len() as f64);
    }

    let node_stats = nodes
        .iter()
        .enumerate()
        .map(|(j, nd)| {
            let c = full.confusion(j);
            let m = binary_metrics(&c);
            NodeStat {
                id: nd.id.clone(),
                name: nd.name.clone(),
                level: nd.level,
                bin: nd.is_bin(),
                parents: nd.parents.iter().map(|&p| nodes[p].id.clone()).collect(),
                tp: c.tp,
                fp: c.fp,
                fn_: c.fn_,
                tn: c.tn,
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
            }
        })
        .collect();
    Ok(ResultBundle {
        folds,
        metrics_report: report,
        node_stats,
        average_curve,
        consistency_raw,
        consistency_filtered,
    })
}
