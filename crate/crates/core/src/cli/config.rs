use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::CliError;
use crate::eval::DEFAULT_CURVE_SAMPLES;
use crate::kernels::{KernelSpec, DEFAULT_DIFFUSION_BETA};
use crate::learner::TrainConfig;
use crate::logic::{ImplicationMode, TNorm};
use crate::ontology::{BoundMode, Namespace, PpiVariant};

#[derive(Debug, Clone, PartialEq)]
pub enum KernelChoice {
    Built(KernelSpec),
    /// Gram matrix read from the `gram` CSV file.
    Precomputed,
}

/// Which rule families to generate. Families compose; all interaction
/// families must agree on how `BOUND` is obtained.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleSelection {
    pub oc: bool,
    pub part_of: bool,
    pub ppi: Vec<PpiVariant>,
    pub bound: Option<BoundMode>,
}

impl RuleSelection {
    pub fn is_empty(&self) -> bool {
        !self.oc && !self.part_of && self.ppi.is_empty()
    }

    fn parse(value: &str) -> Result<Self, String> {
        let mut sel = RuleSelection::default();
        for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (variant, bound) = match item.to_ascii_lowercase().as_str() {
                "none" => continue,
                "oc" => {
                    sel.oc = true;
                    continue;
                }
                "partof" | "part_of" => {
                    sel.part_of = true;
                    continue;
                }
                "pp1" => (PpiVariant::Pp, BoundMode::Given),
                "pp2" => (PpiVariant::Pp, BoundMode::Learned),
                "dpp1" => (PpiVariant::Dpp, BoundMode::Given),
                "dpp2" => (PpiVariant::Dpp, BoundMode::Learned),
                other => return Err(format!("unknown rule set `{other}`")),
            };
            if sel.bound.is_some_and(|b| b != bound) {
                return Err("interaction rule sets mix given and learned BOUND".into());
            }
            sel.bound = Some(bound);
            if !sel.ppi.contains(&variant) {
                sel.ppi.push(variant);
            }
        }
        Ok(sel)
    }

    fn to_text(&self) -> String {
        let mut parts = Vec::new();
        if self.oc {
            parts.push("oc".to_string());
        }
        if self.part_of {
            parts.push("partof".to_string());
        }
        for v in &self.ppi {
            let base = match v {
                PpiVariant::Pp => "pp",
                PpiVariant::Dpp => "dpp",
            };
            let n = if self.bound == Some(BoundMode::Learned) {
                2
            } else {
                1
            };
            parts.push(format!("{base}{n}"));
        }
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join(",")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub obo: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub sequences: Option<PathBuf>,
    pub domains: Option<PathBuf>,
    pub expression: Option<PathBuf>,
    pub ppi: Option<PathBuf>,
    pub complexes: Option<PathBuf>,
    pub gram: Option<PathBuf>,
    pub namespaces: Vec<Namespace>,
    pub level: usize,
    pub count: usize,
    pub kernel: KernelChoice,
    pub psd_tolerance: f64,
    pub rules: RuleSelection,
    pub train: TrainConfig,
    pub folds: usize,
    pub curve_samples: usize,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            obo: None,
            annotations: None,
            sequences: None,
            domains: None,
            expression: None,
            ppi: None,
            complexes: None,
            gram: None,
            namespaces: vec![Namespace::BiologicalProcess],
            level: 2,
            count: 1,
            kernel: KernelChoice::Built(KernelSpec::Domain),
            psd_tolerance: 1e-8,
            rules: RuleSelection::default(),
            train: TrainConfig::default(),
            folds: 10,
            curve_samples: DEFAULT_CURVE_SAMPLES,
            seed: 0,
            jobs: None,
            out: PathBuf::from("results"),
        }
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("`{key}` expects a number, got `{value}`"))
}

fn boolean(key: &str, value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{key}` expects true or false, got `{value}`")),
    }
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment. Relative paths are
    /// resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        let mut kernel = "domain".to_string();
        let mut k = 3usize;
        let mut normalize = true;
        let mut beta = DEFAULT_DIFFUSION_BETA;
        let mut double_sum = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| CliError::Config {
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let path = || Some(base.join(value));
            let result: Result<(), String> = (|| {
                match key {
                    "obo" => cfg.obo = path(),
                    "annotations" => cfg.annotations = path(),
                    "sequences" => cfg.sequences = path(),
                    "domains" => cfg.domains = path(),
                    "expression" => cfg.expression = path(),
                    "ppi" => cfg.ppi = path(),
                    "complexes" => cfg.complexes = path(),
                    "gram" => cfg.gram = path(),
                    "namespaces" => {
                        cfg.namespaces = value
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(|s| s.parse().expect("namespace parsing is infallible"))
                            .collect();
                        if cfg.namespaces.is_empty() {
                            return Err("`namespaces` is empty".into());
                        }
                    }
                    "level" => cfg.level = number(key, value)?,
                    "count" => cfg.count = number(key, value)?,
                    "kernel" => kernel = value.to_ascii_lowercase(),
                    "spectrum_k" => k = number(key, value)?,
                    "spectrum_normalize" => normalize = boolean(key, value)?,
                    "diffusion_beta" => beta = number(key, value)?,
                    "correlation_double_sum" => double_sum = boolean(key, value)?,
                    "psd_tolerance" => cfg.psd_tolerance = number(key, value)?,
                    "rules" => cfg.rules = RuleSelection::parse(value)?,
                    "lambda_r" => cfg.train.lambda_r = number(key, value)?,
                    "lambda_c" => cfg.train.lambda_c = number(key, value)?,
                    "tnorm" => {
                        cfg.train.tnorm = value.parse::<TNorm>().map_err(|e| e.to_string())?;
                    }
                    "implication" => {
                        cfg.train.implication = value
                            .parse::<ImplicationMode>()
                            .map_err(|e| e.to_string())?;
                    }
                    "learning_rate" => cfg.train.learning_rate = number(key, value)?,
                    "max_iterations" => cfg.train.max_iterations = number(key, value)?,
                    "tolerance" => cfg.train.tolerance = number(key, value)?,
                    "gradient_tolerance" => cfg.train.gradient_tolerance = number(key, value)?,
                    "threshold" => cfg.train.threshold = number(key, value)?,
                    "undecided_band" => cfg.train.undecided_band = number(key, value)?,
                    "backtracking" => cfg.train.backtracking = boolean(key, value)?,
                    "constrain_all_examples" => {
                        cfg.train.constrain_all_examples = boolean(key, value)?
                    }
                    "folds" => cfg.folds = number(key, value)?,
                    "curve_samples" => cfg.curve_samples = number(key, value)?,
                    "seed" => cfg.seed = number(key, value)?,
                    "jobs" => cfg.jobs = Some(number(key, value)?),
                    "out" => cfg.out = base.join(value),
                    other => return Err(format!("unknown key `{other}`")),
                }
                Ok(())
            })();
            result.map_err(err)?;
        }
        cfg.kernel = match kernel.as_str() {
            "spectrum" => KernelChoice::Built(KernelSpec::Spectrum { k, normalize }),
            "domain" => KernelChoice::Built(KernelSpec::Domain),
            "diffusion" => KernelChoice::Built(KernelSpec::Diffusion { beta }),
            "correlation" => KernelChoice::Built(KernelSpec::Correlation { double_sum }),
            "precomputed" => KernelChoice::Precomputed,
            other => {
                return Err(CliError::Config {
                    line: 0,
                    message: format!("unknown kernel `{other}`"),
                })
            }
        };
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = crate::io::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        ExperimentConfig::parse(&text, base)
    }

    /// Checks cross-field requirements and that referenced files exist.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |message: String| Err(CliError::Config { line: 0, message });
        let need = |name: &str, p: &Option<PathBuf>| -> Result<(), CliError> {
            match p {
                None => bad(format!("`{name}` is required by this configuration")),
                Some(p) if !p.exists() => bad(format!("`{name}` file {} not found", p.display())),
                Some(_) => Ok(()),
            }
        };
        need("obo", &self.obo)?;
        need("annotations", &self.annotations)?;
        match &self.kernel {
            KernelChoice::Precomputed => need("gram", &self.gram)?,
            KernelChoice::Built(KernelSpec::Spectrum { .. }) => need("sequences", &self.sequences)?,
            KernelChoice::Built(KernelSpec::Domain) => need("domains", &self.domains)?,
            KernelChoice::Built(KernelSpec::Diffusion { .. }) => {
                need("complexes", &self.complexes)?
            }
            KernelChoice::Built(KernelSpec::Correlation { .. }) => {
                need("expression", &self.expression)?
            }
        }
        if !self.rules.ppi.is_empty() {
            need("ppi", &self.ppi)?;
        }
        for (name, p) in [
            ("sequences", &self.sequences),
            ("domains", &self.domains),
            ("expression", &self.expression),
            ("ppi", &self.ppi),
            ("complexes", &self.complexes),
            ("gram", &self.gram),
        ] {
            if p.is_some() {
                need(name, p)?;
            }
        }
        if self.folds < 2 {
            return bad("`folds` must be at least 2".into());
        }
        if self.curve_samples == 0 {
            return bad("`curve_samples` must be at least 1".into());
        }
        if self.jobs == Some(0) {
            return bad("`jobs` must be at least 1".into());
        }
        self.train.validate().map_err(|e| CliError::Config {
            line: 0,
            message: e.to_string(),
        })
    }

    /// Canonical `key = value` listing of every setting.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            writeln!(out, "{k} = {v}").expect("writing to a String");
        };
        for (k, p) in [
            ("obo", &self.obo),
            ("annotations", &self.annotations),
            ("sequences", &self.sequences),
            ("domains", &self.domains),
            ("expression", &self.expression),
            ("ppi", &self.ppi),
            ("complexes", &self.complexes),
            ("gram", &self.gram),
        ] {
            if let Some(p) = p {
                put(k, p.display().to_string());
            }
        }
        put(
            "namespaces",
            self.namespaces
                .iter()
                .map(Namespace::as_str)
                .collect::<Vec<_>>()
                .join(","),
        );
        put("level", self.level.to_string());
        put("count", self.count.to_string());
        match &self.kernel {
            KernelChoice::Precomputed => put("kernel", "precomputed".into()),
            KernelChoice::Built(KernelSpec::Spectrum { k, normalize }) => {
                put("kernel", "spectrum".into());
                put("spectrum_k", k.to_string());
                put("spectrum_normalize", normalize.to_string());
            }
            KernelChoice::Built(KernelSpec::Domain) => put("kernel", "domain".into()),
            KernelChoice::Built(KernelSpec::Diffusion { beta }) => {
                put("kernel", "diffusion".into());
                put("diffusion_beta", beta.to_string());
            }
            KernelChoice::Built(KernelSpec::Correlation { double_sum }) => {
                put("kernel", "correlation".into());
                put("correlation_double_sum", double_sum.to_string());
            }
        }
        put("psd_tolerance", self.psd_tolerance.to_string());
        put("rules", self.rules.to_text());
        let t = &self.train;
        put("lambda_r", t.lambda_r.to_string());
        put("lambda_c", t.lambda_c.to_string());
        put("tnorm", t.tnorm.to_string());
        put("implication", t.implication.to_string());
        put("learning_rate", t.learning_rate.to_string());
        put("max_iterations", t.max_iterations.to_string());
        put("tolerance", t.tolerance.to_string());
        put("gradient_tolerance", t.gradient_tolerance.to_string());
        put("threshold", t.threshold.to_string());
        put("undecided_band", t.undecided_band.to_string());
        put("backtracking", t.backtracking.to_string());
        put(
            "constrain_all_examples",
            t.constrain_all_examples.to_string(),
        );
        put("folds", self.folds.to_string());
        put("curve_samples", self.curve_samples.to_string());
        put("seed", self.seed.to_string());
        if let Some(j) = self.jobs {
            put("jobs", j.to_string());
        }
        out
    }
}
