use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::config::{ExperimentConfig, KernelChoice};
use super::CliError;
use crate::io::{
    parse_edges_tsv, parse_fasta, parse_labeled_rows_csv, parse_pairs_tsv, parse_set_tsv,
    read_to_string,
};
use crate::kernels::{build_gram, psd_check, FeatureSet, GramMatrix, KernelSpec};
use crate::ontology::{go_cut, parse_obo, tpr_closure, AnnotationSet, GoCut, OntologyDag};

/// Ingested and adapted inputs of one experiment. Proteins are sorted and
/// indexed by position.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub dag: OntologyDag,
    pub proteins: Vec<String>,
    pub annotations: AnnotationSet,
    pub cut: GoCut,
    /// Interacting pairs `(i, j)` with `i < j`, deduplicated.
    pub ppi: Vec<(usize, usize)>,
}

fn read(path: &Path) -> Result<String, CliError> {
    Ok(read_to_string(path)?)
}

fn with_file<T>(path: &Path, parsed: Result<T, crate::io::DataError>) -> Result<T, CliError> {
    parsed.map_err(|e| e.in_file(path).into())
}

fn load_features(cfg: &ExperimentConfig) -> Result<FeatureSet, CliError> {
    let mut f = FeatureSet::default();
    if let Some(p) = &cfg.sequences {
        f.sequences = with_file(p, parse_fasta(&read(p)?))?.into_iter().collect();
    }
    if let Some(p) = &cfg.domains {
        f.domains = with_file(p, parse_set_tsv(&read(p)?))?;
    }
    if let Some(p) = &cfg.expression {
        f.expression = with_file(p, parse_labeled_rows_csv(&read(p)?))?
            .into_iter()
            .collect();
    }
    if let Some(p) = &cfg.complexes {
        f.complex_edges = with_file(p, parse_edges_tsv(&read(p)?))?;
    }
    Ok(f)
}

fn load_precomputed(cfg: &ExperimentConfig) -> Result<Option<GramMatrix>, CliError> {
    match (&cfg.kernel, &cfg.gram) {
        (KernelChoice::Precomputed, Some(p)) => Ok(Some(GramMatrix::from_csv(&read(p)?)?)),
        _ => Ok(None),
    }
}

impl Dataset {
    /// Parses the ontology and annotations, drops proteins lacking an
    /// annotation in some analyzed namespace or lacking the kernel's
    /// features, and computes the cut.
    pub fn load(
        cfg: &ExperimentConfig,
    ) -> Result<(Self, FeatureSet, Option<GramMatrix>), CliError> {
        cfg.validate()?;
        let obo = cfg.obo.as_ref().expect("validated");
        let dag = parse_obo(&read(obo)?).map_err(|e| CliError::Ontology {
            path: obo.clone(),
            source: e,
        })?;
        let ann_path = cfg.annotations.as_ref().expect("validated");
        let pairs = with_file(ann_path, parse_pairs_tsv(&read(ann_path)?))?;
        let mut raw: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (p, t) in pairs {
            raw.entry(p).or_default().insert(t);
        }
        let mut annotations = tpr_closure(&raw, &dag).map_err(|e| CliError::Ontology {
            path: ann_path.clone(),
            source: e,
        })?;
        let features = load_features(cfg)?;
        let gram = load_precomputed(cfg)?;

        annotations.retain_proteins(|p, terms| {
            for ns in &cfg.namespaces {
                if !terms.iter().any(|&t| &dag.term(t).namespace == ns) {
                    log::info!("dropping {p}: no {} annotation", ns.as_str());
                    return false;
                }
            }
            let missing = match &cfg.kernel {
                KernelChoice::Precomputed => gram
                    .as_ref()
                    .is_some_and(|g| g.position(p).is_none())
                    .then_some("Gram row"),
                KernelChoice::Built(KernelSpec::Spectrum { .. }) => {
                    (!features.sequences.contains_key(p)).then_some("sequence")
                }
                KernelChoice::Built(KernelSpec::Correlation { .. }) => {
                    (!features.expression.contains_key(p)).then_some("expression profile")
                }
                KernelChoice::Built(_) => None,
            };
            if let Some(what) = missing {
                log::info!("dropping {p}: no {what}");
                return false;
            }
            true
        });
        let proteins: Vec<String> = annotations.proteins().map(str::to_string).collect();
        if proteins.is_empty() {
            return Err(CliError::EmptyDataset);
        }
        let cut =
            go_cut(&dag, &annotations, &cfg.namespaces, cfg.level, cfg.count).map_err(|e| {
                CliError::Ontology {
                    path: obo.clone(),
                    source: e,
                }
            })?;

        let mut ppi = Vec::new();
        if let Some(p) = &cfg.ppi {
            let index: BTreeMap<&str, usize> = proteins
                .iter()
                .enumerate()
                .map(|(i, s)| (s.as_str(), i))
                .collect();
            let mut seen = BTreeSet::new();
            for (a, b) in with_file(p, parse_pairs_tsv(&read(p)?))? {
                let (Some(&i), Some(&j)) = (index.get(a.as_str()), index.get(b.as_str())) else {
                    continue;
                };
                if i != j {
                    seen.insert((i.min(j), i.max(j)));
                }
            }
            ppi = seen.into_iter().collect();
        }
        Ok((
            Dataset {
                dag,
                proteins,
                annotations,
                cut,
                ppi,
            },
            features,
            gram,
        ))
    }

    /// Gram matrix over the dataset proteins, PSD-checked.
    pub fn gram(
        &self,
        cfg: &ExperimentConfig,
        features: &FeatureSet,
        precomputed: Option<&GramMatrix>,
    ) -> Result<GramMatrix, CliError> {
        let gram = match (&cfg.kernel, precomputed) {
            (KernelChoice::Precomputed, Some(g)) => g.select(&self.proteins)?,
            (KernelChoice::Built(spec), _) => build_gram(spec, &self.proteins, features)?,
            (KernelChoice::Precomputed, None) => {
                return Err(CliError::Config {
                    line: 0,
                    message: "kernel = precomputed needs `gram`".into(),
                })
            }
        };
        let report = psd_check(&gram, cfg.psd_tolerance);
        if !report.passed {
            return Err(CliError::NotPsd {
                min_eigenvalue: report.min_eigenvalue,
            });
        }
        Ok(gram)
    }

    /// Proteins annotated with each retained (non-bin) cut term.
    pub fn term_proteins(&self) -> BTreeMap<String, BTreeSet<String>> {
        self.cut
            .retained()
            .map(|(_, n)| (n.id.clone(), n.proteins.clone()))
            .collect()
    }
}

/// Symmetric pairwise kernel `K(a,c)K(b,d) + K(a,d)K(b,c)` over protein pairs.
pub fn pair_gram(gram: &DMatrix<f64>, pairs: &[(usize, usize)]) -> Arc<DMatrix<f64>> {
    let m = pairs.len();
    Arc::new(DMatrix::from_fn(m, m, |r, c| {
        let (a, b) = pairs[r];
        let (x, y) = pairs[c];
        gram[(a, x)] * gram[(b, y)] + gram[(a, y)] * gram[(b, x)]
    }))
}
