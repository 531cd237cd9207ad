//! Experiment configuration: a single JSON document resolving the problem
//! (grid + potential), the algorithm knobs, and execution details.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithm::Backend;
use crate::grid::Potential;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub execution: ExecutionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub d: usize,
    /// Explicit interior points per axis; mutually exclusive with `epsilon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Target accuracy driving `N = 2^ceil(2 log2(d/epsilon))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub potential: Potential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    /// Number of levels to estimate.
    pub j: usize,
    /// Repetitions per trial vector per pass; derived from the trial-set
    /// cardinality when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// Overlap constant; `q = 1 - 1/c^2`.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Reported accuracy bits.
    pub b: u32,
    /// Buffer bits; mutually exclusive with `g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<u32>,
    /// Drives `t0 = floor(log2(5 g + 2))` and the splitting error budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    pub backend: BackendChoice,
    /// Splitting order (2k); 0 selects the order from the budget.
    #[serde(default)]
    pub k: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendChoice {
    Exact,
    Trotter,
}

impl std::str::FromStr for BackendChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(BackendChoice::Exact),
            "trotter" => Ok(BackendChoice::Trotter),
            other => Err(Error::Config(format!(
                "unknown backend {other:?} (expected exact or trotter)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecutionConfig {
    #[serde(default)]
    pub seed: u64,
    /// Independent seeded repetitions of the full run (success-rate scans).
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Output directory, resolved relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub parallelism: usize,
}

impl Default for ExecutionConfig {
    fn default() -> Self {
        ExecutionConfig { seed: 0, trials: default_trials(), out: None, parallelism: 0 }
    }
}

fn default_c() -> f64 {
    2.0
}

fn default_trials() -> usize {
    1
}

/// `t0 = floor(log2(5 g + 2))` so the buffer absorbs the splitting budget.
pub fn t0_from_g(g: f64) -> u32 {
    (5.0 * g + 2.0).log2().floor() as u32
}

/// `N = 2^ceil(2 log2(d / epsilon))`.
pub fn n_from_epsilon(d: usize, epsilon: f64) -> u64 {
    let exp = (2.0 * (d as f64 / epsilon).log2()).ceil().max(0.0) as u32;
    1u64 << exp
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        match (self.problem.n, self.problem.epsilon) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("set exactly one of problem.n and problem.epsilon, not both".into()))
            }
            (None, None) => {
                return Err(Error::Config("set exactly one of problem.n and problem.epsilon".into()))
            }
            (None, Some(eps)) if !(0.0 < eps && eps < 1.0) => {
                return Err(Error::Config(format!("epsilon must be in (0,1), got {eps}")))
            }
            _ => {}
        }
        match (self.algorithm.t0, self.algorithm.g) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("set exactly one of algorithm.t0 and algorithm.g, not both".into()))
            }
            (None, None) => {
                return Err(Error::Config("set exactly one of algorithm.t0 and algorithm.g".into()))
            }
            (None, Some(g)) if g <= 0.0 => {
                return Err(Error::Config(format!("g must be positive, got {g}")))
            }
            _ => {}
        }
        if self.algorithm.c <= 1.0 {
            return Err(Error::Config(format!(
                "overlap constant c must exceed 1, got {}",
                self.algorithm.c
            )));
        }
        if self.algorithm.j < 1 {
            return Err(Error::Config("j must be >= 1".into()));
        }
        if self.execution.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        Ok(())
    }

    /// Resolved interior points per axis.
    pub fn resolved_n(&self) -> Result<usize> {
        match (self.problem.n, self.problem.epsilon) {
            (Some(n), None) => Ok(n),
            (None, Some(eps)) => Ok(n_from_epsilon(self.problem.d, eps) as usize),
            _ => Err(Error::Config("unresolved grid size".into())),
        }
    }

    /// Resolved buffer bits and the splitting budget parameter `g`. When
    /// `t0` is explicit the trotter budget uses `g = (2^t0 - 2) / 5`
    /// (the inverse of the g-driven rule).
    pub fn resolved_t0_g(&self) -> Result<(u32, f64)> {
        match (self.algorithm.t0, self.algorithm.g) {
            (Some(t0), None) => Ok((t0, (2f64.powi(t0 as i32) - 2.0) / 5.0)),
            (None, Some(g)) => Ok((t0_from_g(g), g)),
            _ => Err(Error::Config("unresolved t0/g".into())),
        }
    }

    pub fn backend(&self) -> Result<Backend> {
        match self.algorithm.backend {
            BackendChoice::Exact => Ok(Backend::Exact),
            BackendChoice::Trotter => {
                let (_, g) = self.resolved_t0_g()?;
                Ok(Backend::Trotter { order_k: self.algorithm.k, g })
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Output directory resolved against the config file location.
    pub fn resolve_out(&self, config_path: Option<&Path>) -> Option<PathBuf> {
        let out = self.execution.out.as_ref()?;
        if out.is_absolute() {
            return Some(out.clone());
        }
        match config_path.and_then(Path::parent) {
            Some(dir) => Some(dir.join(out)),
            None => Some(out.clone()),
        }
    }
}
