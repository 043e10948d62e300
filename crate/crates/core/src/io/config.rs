use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{Diagnostic, DEFAULT_SCALE};
use crate::error::{Error, Result};
use crate::evariables::SolverSettings;
use crate::priors::PriorSpec;
use crate::scalar::Real;

/// Parameters shared by the command-line subcommands. Everything is checked
/// by [`RunConfig::validate`] before any computation starts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct RunConfig<T> {
    /// One prior per group, or a single prior applied to every group.
    pub specs: Vec<PriorSpec<T>>,
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub diagnostic: Option<String>,
    #[serde(default = "default_scale")]
    pub scale: usize,
    #[serde(default = "default_step")]
    pub grid_step: f64,
    #[serde(default = "default_bounds")]
    pub bounds: (f64, f64),
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Reserved; nothing in the pipeline samples.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_scale() -> usize {
    DEFAULT_SCALE
}

fn default_step() -> f64 {
    0.02
}

fn default_bounds() -> (f64, f64) {
    (0.02, 0.98)
}

impl<T: Real> RunConfig<T> {
    pub fn new(specs: Vec<PriorSpec<T>>, sizes: Vec<usize>) -> Self {
        RunConfig {
            specs,
            sizes,
            diagnostic: None,
            scale: DEFAULT_SCALE,
            grid_step: default_step(),
            bounds: default_bounds(),
            solver: SolverSettings::default(),
            output: None,
            workers: None,
            seed: None,
        }
    }

    /// Priors for `k` groups, repeating a single prior if needed.
    pub fn specs_for(&self, k: usize) -> Result<Vec<PriorSpec<T>>> {
        match self.specs.len() {
            1 => Ok(vec![self.specs[0].clone(); k]),
            len if len == k => Ok(self.specs.clone()),
            len => Err(Error::LengthMismatch { expected: k, got: len }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::InvalidArgument("at least one prior is required".into()));
        }
        for s in &self.specs {
            s.validate()?;
        }
        if !self.sizes.is_empty() {
            if self.sizes.contains(&0) {
                return Err(Error::InvalidArgument("group sizes must be positive".into()));
            }
            let specs = self.specs_for(self.sizes.len())?;
            for (s, &n) in specs.iter().zip(&self.sizes) {
                if let PriorSpec::Explicit { pmf } = s {
                    if pmf.max_outcome() != n {
                        return Err(Error::SupportMismatch(pmf.support_size(), n + 1));
                    }
                }
            }
        }
        if let Some(d) = &self.diagnostic {
            d.parse::<Diagnostic>()?;
        }
        if self.scale < 10 {
            return Err(Error::InvalidArgument(format!("scale must be at least 10, got {}", self.scale)));
        }
        let (lo, hi) = self.bounds;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::InvalidArgument("grid bounds must satisfy 0 < lo < hi < 1".into()));
        }
        if !(self.grid_step > 0.0 && self.grid_step <= hi - lo) {
            return Err(Error::InvalidArgument(format!("invalid grid step {}", self.grid_step)));
        }
        let s = &self.solver;
        if s.grid_size < 2 || !(s.tol > 0.0) || s.max_iter == 0 {
            return Err(Error::InvalidArgument(format!("invalid solver settings {s:?}")));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidArgument("worker count must be positive".into()));
        }
        Ok(())
    }
}
