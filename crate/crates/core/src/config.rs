//! Run configuration: a flat TOML table whose keys mirror [`RunConfig`].
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ad::Activation;
use crate::error::{Error, Result};
use crate::hin::OperatorKind;
use crate::spectral::{default_candidates, DEFAULT_EIGEN_CAP, DEFAULT_FUSION_GRID};

/// Which responses the model places on its operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    /// Assigned and fused Chi-Square filters.
    #[default]
    ChiSquare,
    /// Every filter replaced by the degree-1 low-pass `1 − λ/2`.
    LowPass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Graph file (JSON) or CSV directory.
    pub graph: Option<PathBuf>,
    /// Candidate filter indices for assignment.
    pub candidates: Vec<usize>,
    /// Band count K of the spectral profile.
    pub bands: usize,
    /// Weight of the foreign divisions in fusion.
    pub w_d: f64,
    /// Extra polynomial degree `d`; filter `i` is fitted with degree `i − 1 + d`.
    pub poly_degree: usize,
    /// Upper bound on any fitted polynomial degree.
    pub max_degree: usize,
    pub fit_grid: usize,
    pub fusion_grid: usize,
    pub min_path_len: usize,
    pub max_path_len: usize,
    pub operator: OperatorKind,
    pub eig_cap: usize,
    /// Filter indices of the meta-graph convolution.
    pub meta_filters: Vec<usize>,
    pub filter_mode: FilterMode,
    pub aligned_dim: usize,
    /// Width of hidden MLP layers; defaults to `aligned_dim`.
    pub hidden_dim: Option<usize>,
    pub mlp_layers: usize,
    pub activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    pub cc_high: f64,
    pub cc_low: f64,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            graph: None,
            candidates: default_candidates(),
            bands: 10,
            w_d: 0.1,
            poly_degree: 3,
            max_degree: 130,
            fit_grid: 2048,
            fusion_grid: DEFAULT_FUSION_GRID,
            min_path_len: 2,
            max_path_len: 2,
            operator: OperatorKind::NormalizedLaplacian,
            eig_cap: DEFAULT_EIGEN_CAP,
            meta_filters: vec![1, 2, 4, 8],
            filter_mode: FilterMode::ChiSquare,
            aligned_dim: 512,
            hidden_dim: None,
            mlp_layers: 4,
            activation: Activation::Relu,
            learning_rate: 1e-4,
            epochs: 200,
            cc_high: 2.2,
            cc_low: 1.9,
            threshold: 0.5,
            seed: 0,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| invalid(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn hidden(&self) -> usize {
        self.hidden_dim.unwrap_or(self.aligned_dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidates.is_empty() || self.candidates.contains(&0) {
            return Err(invalid("candidates must be nonempty positive indices"));
        }
        if self.meta_filters.is_empty() || self.meta_filters.contains(&0) {
            return Err(invalid("meta_filters must be nonempty positive indices"));
        }
        if self.bands == 0 {
            return Err(invalid("bands must be positive"));
        }
        if !(self.w_d > 0.0 && self.w_d.is_finite()) {
            return Err(invalid("w_d must be positive"));
        }
        let smallest = self.candidates.iter().chain(&self.meta_filters).min().copied().unwrap_or(1);
        if smallest - 1 + self.poly_degree > self.max_degree {
            return Err(invalid(format!(
                "max_degree {} admits no filter with poly_degree {}",
                self.max_degree, self.poly_degree
            )));
        }
        if self.fusion_grid < 8 || self.fit_grid < 8 {
            return Err(invalid("grids need at least 8 points"));
        }
        if self.min_path_len == 0 || self.min_path_len > self.max_path_len {
            return Err(invalid("meta-path length range must satisfy 1 <= min <= max"));
        }
        if self.eig_cap == 0 {
            return Err(invalid("eig_cap must be positive"));
        }
        if self.aligned_dim == 0 || self.hidden() == 0 {
            return Err(invalid("layer widths must be positive"));
        }
        if self.mlp_layers == 0 {
            return Err(invalid("mlp_layers must be at least 1"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("learning_rate must be a nonnegative number"));
        }
        if self.epochs == 0 {
            return Err(invalid("epochs must be at least 1"));
        }
        if !(self.cc_high >= self.cc_low && self.cc_low >= 1.0) {
            return Err(invalid(format!(
                "cc weights need cc_high >= cc_low >= 1 (got {} and {})",
                self.cc_high, self.cc_low
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(invalid("threshold must lie in [0, 1]"));
        }
        Ok(())
    }
}
