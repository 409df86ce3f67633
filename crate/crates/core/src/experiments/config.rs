use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::currents::TestForm;
use crate::error::{Error, Result};
use crate::fock::BundleParams;
use crate::lattice::{make_product_tower, Tower};
use crate::quotient::TruncationPolicy;

/// Fully resolved experiment configuration.
///
/// Read from TOML with dotted key paths, for example
///
/// ```toml
/// lattice.scale = 1.7724538509055159
/// lattice.ratio = 2
/// tower.depth = 4
/// bundle.N = 2
/// sampling.n_samples = 2000
/// ```
///
/// Missing keys take their defaults; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeConfig,
    pub tower: TowerConfig,
    pub bundle: BundleConfig,
    pub truncation: TruncationPolicy,
    pub quadrature: QuadratureConfig,
    pub sampling: SamplingConfig,
    pub forms: FormsConfig,
    pub stability: StabilityConfig,
    pub variance: VarianceConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeConfig {
    /// Side of the square base lattice; `scale²/π` must be an integer.
    pub scale: f64,
    /// Index ratio per axis of the product tower.
    pub ratio: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TowerConfig {
    pub depth: usize,
    /// Explicit step matrices; when present they replace the product tower
    /// and fix the depth to `matrices.len() + 1`.
    pub matrices: Option<Vec<[[i64; 2]; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BundleConfig {
    #[serde(rename = "N")]
    pub n: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Nodes per axis of a base cell.
    pub grid: usize,
    /// Kernel evaluations allowed before Monte Carlo quadrature takes over.
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub n_samples: usize,
    pub master_seed: u64,
    /// Levels sampled by the equidistribution run.
    pub levels: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormsConfig {
    pub presets: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    /// Nodes per axis of the `F_0 × F_0` sup grid.
    pub grid: usize,
    /// Values of `N` to scan; the bundle power is used when empty.
    pub sweep: Vec<u32>,
    /// Levels with `τ_j` below this are reported but left out of the fit.
    pub fit_min_tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceConfig {
    /// Levels at which the empirical variance is sampled.
    pub empirical_levels: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Also write every zero set found while sampling.
    pub dump_zeros: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeConfig::default(),
            tower: TowerConfig::default(),
            bundle: BundleConfig::default(),
            truncation: TruncationPolicy::default(),
            quadrature: QuadratureConfig::default(),
            sampling: SamplingConfig::default(),
            forms: FormsConfig::default(),
            stability: StabilityConfig::default(),
            variance: VarianceConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            scale: std::f64::consts::PI.sqrt(),
            ratio: 2,
        }
    }
}

impl Default for TowerConfig {
    fn default() -> Self {
        Self { depth: 4, matrices: None }
    }
}

impl Default for BundleConfig {
    fn default() -> Self {
        Self { n: 2 }
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            grid: 16,
            budget: 100_000_000,
        }
    }
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            n_samples: 2000,
            master_seed: 20_240_601,
            levels: vec![0, 1, 2],
        }
    }
}

impl Default for FormsConfig {
    fn default() -> Self {
        Self {
            presets: ["one", "cos10", "cos11", "cos20", "mixed"].map(String::from).to_vec(),
        }
    }
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            grid: 12,
            sweep: Vec::new(),
            fit_min_tau: 2.0,
        }
    }
}

impl Default for VarianceConfig {
    fn default() -> Self {
        Self {
            empirical_levels: vec![0, 1],
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            dump_zeros: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks positivity, the quantization condition and the tower shape.
    pub fn validate(&self) -> Result<()> {
        if self.tower.matrices.is_none() && self.tower.depth < 1 {
            return Err(Error::Depth { min: 1, got: self.tower.depth });
        }
        if self.quadrature.grid < 8 || self.stability.grid < 8 {
            return Err(Error::Config("grids need at least 8 nodes per axis".into()));
        }
        if self.sampling.n_samples < 2 {
            return Err(Error::Config("sampling.n_samples must be ≥ 2".into()));
        }
        if self.quadrature.budget == 0 {
            return Err(Error::Config("quadrature.budget must be positive".into()));
        }
        if !(self.truncation.rtol > 0.0 && self.truncation.rtol < 1.0) || !(self.truncation.max_radius > 0.0) {
            return Err(Error::Config("truncation.rtol must lie in (0,1) and max_radius be positive".into()));
        }
        let tower = self.tower()?;
        self.params_for(self.bundle.n, &tower)?;
        for n in &self.stability.sweep {
            self.params_for(*n, &tower)?;
        }
        self.forms(&tower)?;
        Ok(())
    }

    pub fn tower(&self) -> Result<Tower> {
        match &self.tower.matrices {
            None => make_product_tower(self.lattice.scale, self.lattice.ratio, self.tower.depth),
            Some(steps) => {
                let base = *make_product_tower(self.lattice.scale, 2, 1)?.base();
                Tower::from_matrices(base, steps)
            }
        }
    }

    pub fn params_for(&self, n: u32, tower: &Tower) -> Result<BundleParams> {
        BundleParams::new(n, tower.d0())
    }

    pub fn params(&self, tower: &Tower) -> Result<BundleParams> {
        self.params_for(self.bundle.n, tower)
    }

    pub fn forms(&self, tower: &Tower) -> Result<Vec<TestForm>> {
        self.forms.presets.iter().map(|id| TestForm::preset(id, tower.base())).collect()
    }
}
