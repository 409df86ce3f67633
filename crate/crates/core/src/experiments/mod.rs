//! Named experiments: config resolution, runners, CSV/JSON artifacts and
//! the exit-code contract of the command line tool.

pub mod config;
mod fit;
mod output;
pub mod runners;

use std::path::PathBuf;

use serde::Serialize;

pub use config::ExperimentConfig;
pub use fit::{fit_line, FitResult};
pub use runners::run;

use crate::error::Error;

/// Exit code of a run whose checks all passed.
pub const EXIT_OK: i32 = 0;
/// A statistical assertion failed.
pub const EXIT_STATISTICAL: i32 = 2;
/// Truncation, quadrature, conditioning or zero finding failed.
pub const EXIT_NUMERICAL: i32 = 3;
/// Bad arguments or configuration.
pub const EXIT_USAGE: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Stability,
    Equidist,
    Variance,
    Asconv,
    Gtilde,
    KernelTable,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stability => "stability",
            Command::Equidist => "equidist",
            Command::Variance => "variance",
            Command::Asconv => "asconv",
            Command::Gtilde => "gtilde",
            Command::KernelTable => "kernel-table",
        }
    }
}

/// Command line values that replace config entries.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub depth: Option<usize>,
    pub n: Option<u32>,
}

impl Overrides {
    /// Applies the overrides and revalidates.
    pub fn apply(&self, mut cfg: ExperimentConfig) -> crate::Result<ExperimentConfig> {
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.sampling.master_seed = seed;
        }
        if let Some(k) = self.samples {
            cfg.sampling.n_samples = k;
        }
        if let Some(d) = self.depth {
            if cfg.tower.matrices.is_some() {
                return Err(Error::Config("--depth conflicts with explicit tower.matrices".into()));
            }
            cfg.tower.depth = d;
        }
        if let Some(n) = self.n {
            cfg.bundle.n = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Statistical,
    Numerical,
}

/// One named assertion of a run.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub kind: CheckKind,
    pub detail: String,
}

impl Check {
    pub fn statistical(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            kind: CheckKind::Statistical,
            detail: detail.into(),
        }
    }

    pub fn numerical(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            kind: CheckKind::Numerical,
            detail: detail.into(),
        }
    }
}

/// Outcome of a completed run.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: Command,
    pub checks: Vec<Check>,
    /// Artifacts written, relative to the output directory.
    pub files: Vec<String>,
    /// Command specific results (fits, certified values).
    pub summary: serde_json::Value,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Numerical failures take precedence over statistical ones.
    pub fn exit_code(&self) -> i32 {
        if self.failures().any(|c| c.kind == CheckKind::Numerical) {
            EXIT_NUMERICAL
        } else if !self.passed() {
            EXIT_STATISTICAL
        } else {
            EXIT_OK
        }
    }
}

/// Exit code for a run that aborted with `err`.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Statistical(_) => EXIT_STATISTICAL,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}
