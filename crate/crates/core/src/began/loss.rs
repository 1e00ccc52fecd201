//! The objective terms, recorded on a tape.
//!
//! With `𝓛(x) = ‖x − D(x)‖` averaged over the batch:
//!
//! * generator:      `𝓛_G = 𝓛(G(z_G))`
//! * discriminator:  `𝓛_D = 𝓛(x) − k·𝓛(G(z_D)) + α·𝓛_c`
//! * constraint:     `𝓛_c = ‖z_D − Enc(G(z_D))‖`
//!
//! The discriminator and constraint terms treat `G(z_D)` as a constant, so
//! they can never move generator parameters.

use super::model::{AutoencoderDiscriminator, BoundDiscriminator, Generator};
use crate::error::{Error, Result};
use crate::nn::BoundMlp;
use crate::tensor::{Norm, Tape, Var};

/// `‖x − dec(enc(x))‖`, batch-mean.
pub fn reconstruction_loss(
    tape: &mut Tape,
    d: &AutoencoderDiscriminator,
    bd: &BoundDiscriminator,
    x: Var,
    norm: Norm,
) -> Result<Var> {
    let h = d.encode(tape, bd, x)?;
    let r = d.decode(tape, bd, h)?;
    let diff = tape.sub(x, r)?;
    Ok(tape.norm(diff, norm))
}

/// `𝓛(G(z_G))`; differentiable with respect to the generator.
pub fn generator_loss(
    tape: &mut Tape,
    g: &Generator,
    bg: &BoundMlp,
    d: &AutoencoderDiscriminator,
    bd: &BoundDiscriminator,
    z_g: Var,
    norm: Norm,
) -> Result<Var> {
    let x_fake = g.generate(tape, bg, z_g)?;
    reconstruction_loss(tape, d, bd, x_fake, norm)
}

/// `‖z_D − Enc(G(z_D))‖`, batch-mean, with the generator output detached.
pub fn constraint_loss(
    tape: &mut Tape,
    g: &Generator,
    bg: &BoundMlp,
    d: &AutoencoderDiscriminator,
    bd: &BoundDiscriminator,
    z_d: Var,
    norm: Norm,
) -> Result<Var> {
    let x_fake = g.generate(tape, bg, z_d)?;
    let x_fake = tape.detach(x_fake);
    let h = d.encode(tape, bd, x_fake)?;
    let diff = tape.sub(z_d, h)?;
    Ok(tape.norm(diff, norm))
}

/// Handles to the discriminator objective and its parts.
#[derive(Clone, Copy, Debug)]
pub struct DiscriminatorLoss {
    pub total: Var,
    pub real: Var,
    pub fake: Var,
    /// Always computed so it can be logged; only part of `total` when `alpha > 0`.
    pub constraint: Var,
}

/// `𝓛(x_real) − k·𝓛(G(z_D)) + α·𝓛_c`.
#[allow(clippy::too_many_arguments)]
pub fn discriminator_loss(
    tape: &mut Tape,
    g: &Generator,
    bg: &BoundMlp,
    d: &AutoencoderDiscriminator,
    bd: &BoundDiscriminator,
    x_real: Var,
    z_d: Var,
    k: f64,
    alpha: f64,
    norm: Norm,
) -> Result<DiscriminatorLoss> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::InvalidArgument(format!("k must lie in [0, 1], got {k}")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be ≥ 0, got {alpha}")));
    }
    let real = reconstruction_loss(tape, d, bd, x_real, norm)?;

    let x_fake = g.generate(tape, bg, z_d)?;
    let x_fake = tape.detach(x_fake);
    // the fake reconstruction and the constraint share one encoder pass
    let h = d.encode(tape, bd, x_fake)?;
    let r = d.decode(tape, bd, h)?;
    let diff = tape.sub(x_fake, r)?;
    let fake = tape.norm(diff, norm);
    let zdiff = tape.sub(z_d, h)?;
    let constraint = tape.norm(zdiff, norm);

    let neg_fake = tape.scale(fake, -k);
    let mut total = tape.add(real, neg_fake)?;
    if alpha != 0.0 {
        let c = tape.scale(constraint, alpha);
        total = tape.add(total, c)?;
    }
    Ok(DiscriminatorLoss {
        total,
        real,
        fake,
        constraint,
    })
}
