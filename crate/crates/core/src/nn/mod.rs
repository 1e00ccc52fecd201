//! Multilayer perceptrons and the Adam optimizer.

mod adam;
mod layer;
mod mlp;

pub use adam::AdamState;
pub use layer::{init_bound, Activation, DenseLayer};
pub use mlp::{BoundMlp, Mlp};
