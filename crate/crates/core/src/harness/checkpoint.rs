use std::path::Path;

use serde::{Deserialize, Serialize};

use super::spec::{ExperimentSpec, SCHEMA_VERSION};
use crate::began::{AutoencoderDiscriminator, EquilibriumState, Generator, Trainer};
use crate::data::{LatentSampler, RealSampler};
use crate::error::{Error, Result};
use crate::nn::AdamState;
use crate::rng::RngState;

/// Complete trainer state; resuming from it continues bit-identically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    /// The experiment file the run was started from.
    pub spec: String,
    pub step: u64,
    pub generator: Generator,
    pub discriminator: AutoencoderDiscriminator,
    pub adam_g: AdamState,
    pub adam_d: AdamState,
    pub equilibrium: EquilibriumState,
    pub real_rng: RngState,
    pub latent_rng: RngState,
}

impl Checkpoint {
    pub fn capture(spec: &ExperimentSpec, t: &Trainer) -> Self {
        let (adam_g, adam_d) = t.adam_states();
        let (real, latent) = t.samplers();
        Self {
            schema_version: SCHEMA_VERSION,
            spec: spec.to_toml(),
            step: t.step(),
            generator: t.generator.clone(),
            discriminator: t.discriminator.clone(),
            adam_g: adam_g.clone(),
            adam_d: adam_d.clone(),
            equilibrium: t.equilibrium(),
            real_rng: RngState::capture(real.rng()),
            latent_rng: RngState::capture(latent.rng()),
        }
    }

    pub fn spec(&self) -> Result<ExperimentSpec> {
        ExperimentSpec::from_toml(&self.spec)
    }

    /// Rebuilds the trainer exactly as it was when captured.
    pub fn restore(&self) -> Result<(ExperimentSpec, Trainer)> {
        let spec = self.spec()?;
        let bad_rng = || Error::Config("checkpoint holds an unreadable RNG position".into());
        let real = RealSampler::new(
            spec.dataset.grid()?,
            self.real_rng.restore().ok_or_else(bad_rng)?,
        );
        let latent = LatentSampler::new(
            spec.train.latent_dim,
            spec.train.latent_distribution,
            self.latent_rng.restore().ok_or_else(bad_rng)?,
        )?;
        let t = Trainer::from_parts(
            spec.train.clone(),
            self.generator.clone(),
            self.discriminator.clone(),
            Some(self.adam_g.clone()),
            Some(self.adam_d.clone()),
            Some(self.equilibrium),
            self.step,
            real,
            latent,
        )?;
        Ok((spec, t))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::format(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let c: Self = serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
        if c.schema_version != SCHEMA_VERSION {
            return Err(Error::format(
                path,
                format!("schema_version {} is not supported", c.schema_version),
            ));
        }
        Ok(c)
    }
}
