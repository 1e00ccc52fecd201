//! The adversarial objective with an autoencoder discriminator, the optional
//! latent-space constraint, and the equilibrium controller.

mod config;
mod equilibrium;
mod loss;
mod model;
mod train;

pub use config::{TrainConfig, Variant};
pub use equilibrium::{convergence_measure, EquilibriumState};
pub use loss::{
    constraint_loss, discriminator_loss, generator_loss, reconstruction_loss, DiscriminatorLoss,
};
pub use model::{AutoencoderDiscriminator, BoundDiscriminator, Generator};
pub use train::{StepMetrics, Trainer};
