//! Protein similarity kernels and Gram matrices.

mod diffusion;
mod functions;
mod gram;

use std::collections::{BTreeMap, BTreeSet};

pub use diffusion::{diffusion_kernel, InteractionGraph};
pub use functions::{
    correlation_kernel, correlation_kernel_double_sum, domain_kernel, kmer_counts,
    normalize_kernel, spectrum_dot, spectrum_kernel,
};
pub use gram::{psd_check, GramMatrix, PsdReport};

use crate::io::DataError;

pub const DEFAULT_DIFFUSION_BETA: f64 = 1.0;

#[derive(Debug, thiserror::Error)]
pub enum KernelError {
    #[error("k-mer length must be at least 1")]
    ZeroK,
    #[error("profile lengths differ or are empty ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("example `{id}` has no {feature}")]
    MissingFeature { id: String, feature: &'static str },
    #[error("matrix is {rows}x{cols} but {expected} ids were given")]
    Shape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("duplicate example id `{0}`")]
    DuplicateId(String),
    #[error("edge references unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("{0}")]
    BadParameter(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Which kernel to build, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// k-mer spectrum kernel, optionally cosine-normalized.
    Spectrum { k: usize, normalize: bool },
    /// Shared InterPro-style annotations.
    Domain,
    /// Diffusion over the complexes graph.
    Diffusion { beta: f64 },
    /// Expression covariance; `double_sum` selects the factorized literal form.
    Correlation { double_sum: bool },
}

/// Per-example raw features. Only the table the chosen kernel needs must be filled.
#[derive(Debug, Clone, Default)]
pub struct FeatureSet {
    pub sequences: BTreeMap<String, String>,
    pub domains: BTreeMap<String, BTreeSet<String>>,
    pub expression: BTreeMap<String, Vec<f64>>,
    pub complex_edges: Vec<(String, String, f64)>,
}

/// Builds the Gram matrix of `spec` over `ids` (in that order).
pub fn build_gram(
    spec: &KernelSpec,
    ids: &[String],
    features: &FeatureSet,
) -> Result<GramMatrix, KernelError> {
    if ids.is_empty() {
        return Err(KernelError::BadParameter("no examples".into()));
    }
    let missing = |id: &String, feature| KernelError::MissingFeature {
        id: id.clone(),
        feature,
    };
    match spec {
        KernelSpec::Spectrum { k, normalize } => {
            if *k == 0 {
                return Err(KernelError::ZeroK);
            }
            let seqs: Vec<&[u8]> = ids
                .iter()
                .map(|id| {
                    features
                        .sequences
                        .get(id)
                        .map(|s| s.as_bytes())
                        .ok_or_else(|| missing(id, "sequence"))
                })
                .collect::<Result<_, _>>()?;
            let counts: Vec<_> = seqs.iter().map(|s| kmer_counts(s, *k)).collect();
            let raw =
                GramMatrix::from_fn(ids.to_vec(), |i, j| spectrum_dot(&counts[i], &counts[j]))?;
            Ok(if *normalize { raw.normalized() } else { raw })
        }
        KernelSpec::Domain => {
            // Proteins without any annotation row get an empty set (all-zero row).
            let empty = BTreeSet::new();
            let sets: Vec<&BTreeSet<String>> = ids
                .iter()
                .map(|id| features.domains.get(id).unwrap_or(&empty))
                .collect();
            GramMatrix::from_fn(ids.to_vec(), |i, j| domain_kernel(sets[i], sets[j]))
        }
        KernelSpec::Diffusion { beta } => {
            let graph = InteractionGraph::induced(ids.to_vec(), features.complex_edges.clone())?;
            diffusion_kernel(&graph, *beta)
        }
        KernelSpec::Correlation { double_sum } => {
            let rows: Vec<&[f64]> = ids
                .iter()
                .map(|id| {
                    features
                        .expression
                        .get(id)
                        .map(Vec::as_slice)
                        .ok_or_else(|| missing(id, "expression profile"))
                })
                .collect::<Result<_, _>>()?;
            let width = rows[0].len();
            if let Some(bad) = rows.iter().position(|r| r.len() != width) {
                return Err(KernelError::LengthMismatch {
                    left: width,
                    right: rows[bad].len(),
                });
            }
            let f = if *double_sum {
                correlation_kernel_double_sum
            } else {
                correlation_kernel
            };
            GramMatrix::from_fn(ids.to_vec(), |i, j| {
                f(rows[i], rows[j]).expect("profile lengths checked")
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn domain_gram_matches_pairwise() {
        let mut f = FeatureSet::default();
        for (p, ds) in [
            ("a", vec!["x", "y"]),
            ("b", vec!["y"]),
            ("c", vec!["x", "y", "z"]),
        ] {
            f.domains
                .insert(p.into(), ds.into_iter().map(String::from).collect());
        }
        let names = ids(&["a", "b", "c"]);
        let g = build_gram(&KernelSpec::Domain, &names, &f).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = domain_kernel(&f.domains[&names[i]], &f.domains[&names[j]]);
                assert_eq!(g.get(i, j), want);
            }
        }
        assert!(psd_check(&g, 1e-8).passed);
    }

    #[test]
    fn spectrum_gram_normalized() {
        let mut f = FeatureSet::default();
        for (p, s) in [("a", "MKVLA"), ("b", "KVLAM"), ("c", "M")] {
            f.sequences.insert(p.into(), s.into());
        }
        let g = build_gram(
            &KernelSpec::Spectrum {
                k: 2,
                normalize: true,
            },
            &ids(&["a", "b", "c"]),
            &f,
        )
        .unwrap();
        for i in 0..3 {
            assert_eq!(g.get(i, i), 1.0);
        }
        assert_eq!(g.get(0, 1), 3.0 / 4.0);
        assert_eq!(g.get(0, 2), 0.0);
    }

    #[test]
    fn missing_feature_is_an_error() {
        let f = FeatureSet::default();
        assert!(matches!(
            build_gram(
                &KernelSpec::Correlation { double_sum: false },
                &ids(&["a"]),
                &f
            ),
            Err(KernelError::MissingFeature { .. })
        ));
    }
}
