//! Diagnostics: PCA of discriminator latents, latent variance, mode coverage
//! on the Gaussian grid, and the `k`-drop collapse signal.

mod collapse;
mod coverage;
mod pca;
pub mod plot;

pub use collapse::{detect_k_drop, signal_regions, CollapseSignal, KDropParams};
pub use coverage::{mode_coverage, ModeCoverageReport, COVERAGE_SAMPLES_PER_HIT, HQ_SIGMAS};
pub use pca::{
    canonical_sign, covariance, fit_pca, project, symmetric_eigen, variance_stats, PcaProjection,
};

use crate::began::AutoencoderDiscriminator;
use crate::error::Result;
use crate::tensor::Tensor;

/// Encoder embeddings of real and generated samples at one point in training.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentSnapshot {
    pub epoch: u64,
    /// `Enc(x)` for real samples.
    pub real_latents: Tensor,
    /// `Enc(G(z))`.
    pub gen_latents: Tensor,
    pub var_real: f64,
    pub var_gen: f64,
}

impl LatentSnapshot {
    pub fn new(epoch: u64, real_latents: Tensor, gen_latents: Tensor) -> Result<Self> {
        let var_real = variance_stats(&real_latents)?;
        let var_gen = variance_stats(&gen_latents)?;
        Ok(Self {
            epoch,
            real_latents,
            gen_latents,
            var_real,
            var_gen,
        })
    }

    /// Embeds `x_real` and `x_gen` with the discriminator's encoder.
    pub fn capture(
        epoch: u64,
        d: &AutoencoderDiscriminator,
        x_real: &Tensor,
        x_gen: &Tensor,
    ) -> Result<Self> {
        Self::new(epoch, d.embed(x_real)?, d.embed(x_gen)?)
    }

    /// PCA fitted on the real latents and applied to both sets.
    pub fn project(&self) -> Result<(PcaProjection, Tensor, Tensor)> {
        let p = fit_pca(&self.real_latents)?;
        let real = p.project(&self.real_latents)?;
        let gen = p.project(&self.gen_latents)?;
        Ok((p, real, gen))
    }
}
