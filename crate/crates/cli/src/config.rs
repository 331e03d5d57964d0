use std::path::{Path, PathBuf};

use mdcon::{GeometrySpec, RestartVariant};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// Environment variable naming the default output root.
pub const OUTPUT_DIR_ENV: &str = "MDCON_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "runs";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Md,
    RestartMd,
    MdFixedBaseline,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Md => "md",
            Algorithm::RestartMd => "restart_md",
            Algorithm::MdFixedBaseline => "md_fixed_baseline",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" => Ok(Algorithm::Md),
            "restart_md" => Ok(Algorithm::RestartMd),
            "md_fixed_baseline" => Ok(Algorithm::MdFixedBaseline),
            _ => Err(format!(
                "unknown algorithm `{s}` (expected md, restart_md or md_fixed_baseline)"
            )),
        }
    }
}

/// A single value or a list, so `"eps": 0.1` and `"eps": [0.1, 0.05]` both
/// parse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Built-in problem id; ignored when `problem_file` is set.
    #[serde(default)]
    pub problem: Option<String>,
    /// JSON problem description.
    #[serde(default)]
    pub problem_file: Option<PathBuf>,
    /// Replaces the problem's feasible set.
    #[serde(default)]
    pub geometry: Option<GeometrySpec>,
    #[serde(default = "default_algorithm")]
    pub algorithm: OneOrMany<Algorithm>,
    pub eps: OneOrMany<f64>,
    /// Seeds the sampled invariant checks.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub restart_variant: RestartVariant,
    /// Reference points drawn per run for the sampled checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Adds wall-clock times to the outputs, which makes them nondeterministic.
    #[serde(default)]
    pub record_timing: bool,
}

fn default_algorithm() -> OneOrMany<Algorithm> {
    OneOrMany::One(Algorithm::Md)
}

fn default_samples() -> usize {
    8
}

impl RunConfig {
    pub fn new(problem: impl Into<String>, algorithm: Algorithm, eps: f64) -> Self {
        Self {
            problem: Some(problem.into()),
            problem_file: None,
            geometry: None,
            algorithm: OneOrMany::One(algorithm),
            eps: OneOrMany::One(eps),
            seed: 0,
            max_iters: None,
            output_dir: None,
            restart_variant: RestartVariant::default(),
            samples: default_samples(),
            record_timing: false,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn algorithms(&self) -> Vec<Algorithm> {
        self.algorithm.to_vec()
    }

    pub fn eps_values(&self) -> Vec<f64> {
        self.eps.to_vec()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.problem.is_none() && self.problem_file.is_none() {
            return Err(HarnessError::Config("no problem or problem_file given".into()));
        }
        let eps = self.eps_values();
        if eps.is_empty() {
            return Err(HarnessError::Config("eps list is empty".into()));
        }
        if let Some(bad) = eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(HarnessError::Config(format!("eps must be positive, got {bad}")));
        }
        if self.algorithms().is_empty() {
            return Err(HarnessError::Config("algorithm list is empty".into()));
        }
        if self.max_iters == Some(0) {
            return Err(HarnessError::Config("max_iters must be positive".into()));
        }
        Ok(())
    }

    /// `output_dir`, else the environment variable, else `runs`.
    pub fn output_root(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }
}
