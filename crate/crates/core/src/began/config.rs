use serde::{Deserialize, Serialize};

use crate::data::LatentDistribution;
use crate::error::{Error, Result};
use crate::tensor::Norm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Began,
    BeganCs,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Began => "began",
            Variant::BeganCs => "began_cs",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "began" => Ok(Variant::Began),
            "began_cs" | "began-cs" => Ok(Variant::BeganCs),
            other => Err(Error::Config(format!("unknown variant `{other}`"))),
        }
    }
}

/// Every hyperparameter of one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub variant: Variant,
    /// Constraint weight; ignored (treated as zero) for [`Variant::Began`].
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub k_init: f64,
    pub lr_g: f64,
    pub lr_d: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub latent_dim: usize,
    pub data_dim: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub batch_size: usize,
    pub steps: u64,
    pub seed: u64,
    pub norm: Norm,
    pub latent_distribution: LatentDistribution,
}

impl Default for TrainConfig {
    /// The 25-Gaussian toy settings.
    fn default() -> Self {
        Self {
            variant: Variant::BeganCs,
            alpha: 0.1,
            gamma: 25.0,
            lambda: 1e-4,
            k_init: 0.0,
            lr_g: 5e-4,
            lr_d: 1e-4,
            beta1: 0.5,
            beta2: 0.999,
            adam_eps: 1e-8,
            latent_dim: 32,
            data_dim: 2,
            hidden_width: 128,
            hidden_layers: 2,
            batch_size: 256,
            steps: 30_000,
            seed: 0,
            norm: Norm::L2,
            latent_distribution: LatentDistribution::Uniform,
        }
    }
}

impl TrainConfig {
    /// `alpha` for the constraint variant, zero otherwise.
    pub fn effective_alpha(&self) -> f64 {
        match self.variant {
            Variant::Began => 0.0,
            Variant::BeganCs => self.alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be a finite non-negative number");
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be positive");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.k_init) {
            return bad("k_init must lie in [0, 1]");
        }
        if !(self.lr_g >= 0.0 && self.lr_d >= 0.0) {
            return bad("learning rates must be non-negative");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if !(self.adam_eps > 0.0) {
            return bad("adam_eps must be positive");
        }
        if self.latent_dim == 0 || self.data_dim == 0 || self.hidden_width == 0 {
            return bad("network widths must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        Ok(())
    }
}
