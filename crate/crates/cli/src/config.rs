//! Run configuration: one JSON file, then command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thermal_designs::analysis::{BetaGrid, Estimator};
use thermal_designs::design::DEFAULT_MEMORY_CAP;
use thermal_designs::EnsembleSpec;

use crate::error::{CliError, CliResult};

/// Environment variable consulted for the worker count when neither the
/// command line nor the config file sets one.
pub const THREADS_ENV: &str = "THERMAL_DESIGNS_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridConfig {
    pub fn grid(&self) -> CliResult<BetaGrid> {
        Ok(BetaGrid::from_range(self.start, self.stop, self.step)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ensemble: EnsembleSpec,
    /// Design order; required by `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    /// Required by `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<GridConfig>,
    /// Defaults to every estimator that is feasible for `(D, t)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimators: Option<Vec<Estimator>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default = "default_cap")]
    pub memory_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_MEMORY_CAP
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid config JSON: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Applies flags, then falls back to the environment for the thread count.
    pub fn apply(mut self, o: &Overrides) -> CliResult<Self> {
        if let Some(seed) = o.seed {
            self.ensemble.seed = seed;
        }
        if let Some(samples) = o.samples {
            self.ensemble.samples = samples;
        }
        if let Some(out) = &o.output {
            self.output_path = Some(out.clone());
        }
        self.threads = match (o.threads, self.threads) {
            (Some(n), _) | (None, Some(n)) => Some(n),
            (None, None) => threads_from_env()?,
        };
        self.ensemble.validate()?;
        if self.memory_cap == 0 {
            return Err(CliError::Config("memory_cap must be >= 1".into()));
        }
        Ok(self)
    }

    pub fn output(&self) -> CliResult<&Path> {
        self.output_path.as_deref().ok_or_else(|| {
            CliError::Config("no output path (set output_path or pass --output)".into())
        })
    }

    pub fn require_t(&self) -> CliResult<usize> {
        match self.t {
            Some(t) if t >= 1 => Ok(t),
            Some(_) => Err(CliError::Config("t must be >= 1".into())),
            None => Err(CliError::Config("config is missing t".into())),
        }
    }

    /// The configuration as recorded in output metadata: everything that
    /// determines the numbers, nothing that only affects how they are computed
    /// or where they are written.
    pub fn provenance_json(&self) -> String {
        let mut c = self.clone();
        c.threads = None;
        c.output_path = None;
        serde_json::to_string(&c).expect("config serializes")
    }
}

fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        _ => Ok(None),
    }
}
