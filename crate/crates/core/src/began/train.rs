use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::equilibrium::{convergence_measure, EquilibriumState};
use super::loss::{discriminator_loss, generator_loss};
use super::model::{AutoencoderDiscriminator, Generator};
use crate::data::{GaussianGrid, LatentSampler, RealSampler};
use crate::error::{Error, Result};
use crate::nn::AdamState;
use crate::rng::{stream, Stream};
use crate::tensor::{Tape, Tensor};

/// What one optimization step observed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: u64,
    /// `𝓛(x_real)` before the discriminator update.
    pub loss_real: f64,
    /// `𝓛(G(z_G))` before the generator update.
    pub loss_gen: f64,
    /// `𝓛_c`, measured whether or not it is optimized.
    pub loss_constraint: f64,
    /// `k` after this step's update.
    pub k: f64,
    pub convergence: f64,
}

/// Owns the two networks, their optimizers, `k`, and the sampling streams.
#[derive(Clone, Debug)]
pub struct Trainer {
    cfg: TrainConfig,
    pub generator: Generator,
    pub discriminator: AutoencoderDiscriminator,
    pub(crate) adam_g: AdamState,
    pub(crate) adam_d: AdamState,
    equilibrium: EquilibriumState,
    step: u64,
    pub(crate) real: RealSampler,
    pub(crate) latent: LatentSampler,
}

impl Trainer {
    /// Fresh networks and streams, all derived from `cfg.seed`.
    pub fn new(cfg: TrainConfig, grid: GaussianGrid) -> Result<Self> {
        cfg.validate()?;
        let mut wrng = stream(cfg.seed, Stream::Weights);
        let generator = Generator::new(
            cfg.latent_dim,
            cfg.data_dim,
            cfg.hidden_width,
            cfg.hidden_layers,
            &mut wrng,
        )?;
        let discriminator = AutoencoderDiscriminator::new(
            cfg.data_dim,
            cfg.latent_dim,
            cfg.hidden_width,
            cfg.hidden_layers,
            &mut wrng,
        )?;
        let real = RealSampler::new(grid, stream(cfg.seed, Stream::RealData));
        let latent = LatentSampler::new(
            cfg.latent_dim,
            cfg.latent_distribution,
            stream(cfg.seed, Stream::Latent),
        )?;
        Self::from_parts(cfg, generator, discriminator, None, None, None, 0, real, latent)
    }

    /// Reassembles a trainer; missing optimizer or equilibrium state starts fresh.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        cfg: TrainConfig,
        generator: Generator,
        discriminator: AutoencoderDiscriminator,
        adam_g: Option<AdamState>,
        adam_d: Option<AdamState>,
        equilibrium: Option<EquilibriumState>,
        step: u64,
        real: RealSampler,
        latent: LatentSampler,
    ) -> Result<Self> {
        cfg.validate()?;
        if generator.latent_dim() != cfg.latent_dim
            || discriminator.latent_dim() != cfg.latent_dim
            || generator.data_dim() != discriminator.data_dim()
        {
            return Err(Error::Dimension {
                op: "trainer",
                left: vec![generator.latent_dim(), generator.data_dim()],
                right: vec![discriminator.latent_dim(), discriminator.data_dim()],
            });
        }
        let adam_g = match adam_g {
            Some(a) => a,
            None => AdamState::new(
                generator.net.params(),
                cfg.lr_g,
                cfg.beta1,
                cfg.beta2,
                cfg.adam_eps,
            )?,
        };
        let adam_d = match adam_d {
            Some(a) => a,
            None => AdamState::new(
                discriminator.params(),
                cfg.lr_d,
                cfg.beta1,
                cfg.beta2,
                cfg.adam_eps,
            )?,
        };
        let equilibrium = equilibrium
            .unwrap_or_else(|| EquilibriumState::new(cfg.k_init, cfg.lambda, cfg.gamma));
        Ok(Self {
            cfg,
            generator,
            discriminator,
            adam_g,
            adam_d,
            equilibrium,
            step,
            real,
            latent,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn equilibrium(&self) -> EquilibriumState {
        self.equilibrium
    }

    pub fn adam_states(&self) -> (&AdamState, &AdamState) {
        (&self.adam_g, &self.adam_d)
    }

    /// Number of completed steps.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn grid(&self) -> &GaussianGrid {
        self.real.grid()
    }

    pub fn samplers(&self) -> (&RealSampler, &LatentSampler) {
        (&self.real, &self.latent)
    }

    /// Draws fresh `x_real`, `z_D`, `z_G` and runs one step on them.
    pub fn train_step(&mut self) -> Result<StepMetrics> {
        let n = self.cfg.batch_size;
        let x_real = self.real.sample(n)?;
        let z_d = self.latent.sample(n)?;
        let z_g = self.latent.sample(n)?;
        self.train_step_on(&x_real, &z_d, &z_g)
    }

    /// Discriminator update on `𝓛_D`, generator update on `𝓛_G`, then the `k` update.
    pub fn train_step_on(&mut self, x_real: &Tensor, z_d: &Tensor, z_g: &Tensor) -> Result<StepMetrics> {
        let (loss_real, loss_constraint) = self.discriminator_step(x_real, z_d)?;
        let loss_gen = self.generator_step(z_g)?;
        self.equilibrium = self.equilibrium.update_k(loss_real, loss_gen);
        self.step += 1;
        Ok(StepMetrics {
            step: self.step,
            loss_real,
            loss_gen,
            loss_constraint,
            k: self.equilibrium.k,
            convergence: convergence_measure(loss_real, loss_gen, self.cfg.gamma),
        })
    }

    /// One Adam step on the discriminator only, at the current `k`.
    ///
    /// Returns `(𝓛(x_real), 𝓛_c)` measured before the update. Does not advance the step counter.
    pub fn discriminator_step(&mut self, x_real: &Tensor, z_d: &Tensor) -> Result<(f64, f64)> {
        let step = self.step + 1;
        let mut tape = Tape::new();
        let bg = self.generator.bind(&mut tape, false);
        let bd = self.discriminator.bind(&mut tape, true);
        let xv = tape.constant(x_real);
        let zv = tape.constant(z_d);
        let terms = discriminator_loss(
            &mut tape,
            &self.generator,
            &bg,
            &self.discriminator,
            &bd,
            xv,
            zv,
            self.equilibrium.k,
            self.cfg.effective_alpha(),
            self.cfg.norm,
        )?;
        let loss_real = tape.scalar(terms.real);
        let loss_constraint = tape.scalar(terms.constraint);
        let loss_d = tape.scalar(terms.total);
        if !(loss_real.is_finite() && loss_constraint.is_finite() && loss_d.is_finite()) {
            return Err(Error::Diverged {
                step,
                detail: format!(
                    "discriminator loss {loss_d} (real {loss_real}, constraint {loss_constraint})"
                ),
            });
        }
        tape.backward(terms.total)?;
        self.discriminator.zero_grad();
        self.discriminator.collect_grads(&tape, &bd);
        self.adam_d
            .step(&mut self.discriminator.named_params_mut())
            .map_err(|e| divergence(step, e))?;
        Ok((loss_real, loss_constraint))
    }

    /// One Adam step on the generator only; returns `𝓛(G(z_G))` before the update.
    pub fn generator_step(&mut self, z_g: &Tensor) -> Result<f64> {
        let step = self.step + 1;
        let mut tape = Tape::new();
        let bg = self.generator.bind(&mut tape, true);
        let bd = self.discriminator.bind(&mut tape, false);
        let zv = tape.constant(z_g);
        let lg = generator_loss(
            &mut tape,
            &self.generator,
            &bg,
            &self.discriminator,
            &bd,
            zv,
            self.cfg.norm,
        )?;
        let loss_gen = tape.scalar(lg);
        if !loss_gen.is_finite() {
            return Err(Error::Diverged {
                step,
                detail: format!("generator loss {loss_gen}"),
            });
        }
        tape.backward(lg)?;
        self.generator.net.zero_grad();
        self.generator.net.collect_grads(&tape, &bg);
        self.adam_g
            .step(&mut self.generator.net.named_params_mut("gen"))
            .map_err(|e| divergence(step, e))?;
        Ok(loss_gen)
    }
}

fn divergence(step: u64, e: Error) -> Error {
    match e {
        Error::NonFiniteGradient { param } => Error::Diverged {
            step,
            detail: format!("non-finite gradient in `{param}`"),
        },
        other => other,
    }
}
