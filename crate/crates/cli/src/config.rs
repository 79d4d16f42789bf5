use std::path::Path;

use anyhow::{Context, Result};
use irobd_core::SolverConfig;
use serde::{Deserialize, Serialize};

/// Optional JSON config file. Command-line flags take precedence.
///
/// ```json
/// { "solver": { "grad_tol": 1e-10, "max_iters": 10000 }, "threads": 4 }
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub solver: SolverOverrides,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOverrides {
    pub grad_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub shrink: Option<f64>,
    pub sufficient_decrease: Option<f64>,
}

impl SolverOverrides {
    pub fn apply(&self, cfg: &mut SolverConfig) {
        if let Some(x) = self.grad_tol {
            cfg.grad_tol = x;
        }
        if let Some(x) = self.max_iters {
            cfg.max_iters = x;
        }
        if let Some(x) = self.shrink {
            cfg.shrink = x;
        }
        if let Some(x) = self.sufficient_decrease {
            cfg.sufficient_decrease = x;
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Settings shared by every subcommand after merging file and flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub solver: SolverConfig,
    pub threads: Option<usize>,
}

impl Settings {
    pub fn resolve(file: Option<&ConfigFile>, flags: &SolverOverrides, threads: Option<usize>) -> Result<Self> {
        let mut solver = SolverConfig::default();
        if let Some(f) = file {
            f.solver.apply(&mut solver);
        }
        flags.apply(&mut solver);
        solver.validate()?;
        let threads = threads.or(file.and_then(|f| f.threads));
        if threads == Some(0) {
            anyhow::bail!("thread count must be at least 1");
        }
        Ok(Self { solver, threads })
    }
}
