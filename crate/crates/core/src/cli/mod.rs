//! Batch front-end: subcommands over the library modules, writing plain
//! files to an output directory.

mod config;
mod dataset;
mod run;
mod tree;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{ExperimentConfig, KernelChoice, RuleSelection};
pub use dataset::{pair_gram, Dataset};
pub use run::{cmd_run, FoldResult, NodeStat, ResultBundle};
pub use tree::export_tree;

use crate::eval::{format_folds, generate_folds, EvalError};
use crate::io::{write_atomic, DataError};
use crate::kernels::KernelError;
use crate::learner::LearnerError;
use crate::logic::Formula;
use crate::ontology::{
    format_rules, generate_oc_rules, generate_part_of_rules, generate_ppi_rules, ppi_statistics,
    OntologyError,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{}: {source}", path.display())]
    Ontology {
        path: PathBuf,
        source: OntologyError,
    },
    #[error(transparent)]
    Rules(#[from] OntologyError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("Gram matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("no protein survives dataset adaptation")]
    EmptyDataset,
    #[error("fold {0}: training and test sets overlap")]
    FoldOverlap(usize),
    #[error("fold {fold}: {source}")]
    Fold { fold: usize, source: Box<CliError> },
    #[error("malformed result bundle: {0}")]
    BadBundle(String),
    #[error("{0}")]
    Runtime(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "gosbr",
    version,
    about = "Protein function prediction under Gene Ontology constraints"
)]
pub struct Cli {
    /// Experiment configuration (flat `key = value` file).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out` in the configuration).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Maximum number of folds trained concurrently.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Seed recorded with the run (overrides `seed` in the configuration).
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Build the Gram matrix of the configured kernel.
    Kernel,
    /// Generate the configured rule sets.
    Rules,
    /// Generate cross-validation folds.
    Folds,
    /// Interaction sharing and Jaccard statistics.
    Stats,
    /// Cross-validated constrained training and evaluation.
    Run,
    /// Render the result tree of a finished run as DOT.
    ExportTree,
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    Ok(write_atomic(path, text.as_bytes())?)
}

/// The configured rules over the dataset's cut, in family order.
pub fn build_rules(data: &Dataset, cfg: &ExperimentConfig) -> Result<Vec<Formula>, CliError> {
    let mut rules = Vec::new();
    if cfg.rules.oc {
        rules.extend(generate_oc_rules(&data.cut));
    }
    if cfg.rules.part_of {
        rules.extend(generate_part_of_rules(&data.dag, &data.cut));
    }
    if let Some(bound) = cfg.rules.bound {
        for &variant in &cfg.rules.ppi {
            rules.extend(generate_ppi_rules(&data.cut, variant, bound)?.rules);
        }
    }
    Ok(rules)
}

pub fn cmd_kernel(cfg: &ExperimentConfig, out: &Path) -> Result<PathBuf, CliError> {
    let (data, features, pre) = Dataset::load(cfg)?;
    let gram = data.gram(cfg, &features, pre.as_ref())?;
    let path = out.join("gram.csv");
    write_file(&path, &gram.to_csv())?;
    Ok(path)
}

pub fn cmd_rules(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<Formula>, CliError> {
    let (data, _, _) = Dataset::load(cfg)?;
    let rules = build_rules(&data, cfg)?;
    write_file(&out.join("rules.txt"), &format_rules(&rules))?;
    Ok(rules)
}

pub fn cmd_folds(
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<Vec<std::collections::BTreeSet<String>>, CliError> {
    let (data, _, _) = Dataset::load(cfg)?;
    let folds = generate_folds(
        cfg.folds,
        &data.proteins.iter().cloned().collect(),
        &data.term_proteins(),
    )?;
    write_file(&out.join("folds.tsv"), &format_folds(&folds))?;
    Ok(folds)
}

pub fn cmd_stats(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let (data, _, _) = Dataset::load(cfg)?;
    let pairs: Vec<(String, String)> = data
        .ppi
        .iter()
        .map(|&(a, b)| (data.proteins[a].clone(), data.proteins[b].clone()))
        .collect();
    let stats = ppi_statistics(&pairs, &data.cut);
    let mut text = String::from("level\tpredicate\tname\tpos\ttot\tratio\n");
    for row in &stats.rows {
        let level = data
            .cut
            .node(data.cut.position(&row.predicate).expect("cut row"))
            .level;
        let ratio = row
            .ratio
            .map_or_else(|| "NA".to_string(), |r| format!("{r:.3}"));
        writeln!(
            text,
            "{level}\t{}\t{}\t{}\t{}\t{ratio}",
            row.predicate, row.name, row.pos, row.tot
        )
        .expect("writing to a String");
    }
    let mut summary = |label: &str, s: &crate::ontology::JaccardSummary| {
        writeln!(
            text,
            "# jaccard {label}: pairs={} mean={:.3} median={:.3} std={:.3}",
            s.pairs, s.mean, s.median, s.std_dev
        )
        .expect("writing to a String");
    };
    if let Some(s) = &stats.jaccard {
        summary("all", s);
    }
    for (ns, s) in &stats.jaccard_by_namespace {
        summary(ns.as_str(), s);
    }
    write_file(&out.join("ppi_stats.tsv"), &text)?;
    Ok(text)
}

/// Reads `node_stats.tsv` from a finished run in `out` and writes `tree.dot`.
pub fn cmd_export_tree(out: &Path) -> Result<String, CliError> {
    let text = crate::io::read_to_string(&out.join("node_stats.tsv"))?;
    let stats = run::parse_node_stats(&text)?;
    let dot = export_tree(&stats);
    write_file(&out.join("tree.dot"), &dot)?;
    Ok(dot)
}

/// Parses arguments and dispatches; returns the process exit status.
pub fn main_with(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None if cli.command == Command::ExportTree => ExperimentConfig::default(),
        None => {
            return Err(CliError::Config {
                line: 0,
                message: "--config is required".into(),
            })
        }
    };
    if let Some(o) = cli.out {
        cfg.out = o;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = Some(j);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cfg.out.clone();
    match cli.command {
        Command::Kernel => {
            let p = cmd_kernel(&cfg, &out)?;
            log::info!("wrote {}", p.display());
        }
        Command::Rules => {
            let rules = cmd_rules(&cfg, &out)?;
            log::info!("wrote {} rules", rules.len());
        }
        Command::Folds => {
            cmd_folds(&cfg, &out)?;
        }
        Command::Stats => {
            cmd_stats(&cfg, &out)?;
        }
        Command::Run => {
            let bundle = cmd_run(&cfg, &out)?;
            print!("{}", bundle.metrics_report);
        }
        Command::ExportTree => {
            cmd_export_tree(&out)?;
        }
    }
    Ok(())
}
