//! BEGAN and BEGAN-CS on a 2-D Gaussian grid, with the diagnostics to tell them apart.

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops read more plainly than zipped iterators in the numeric kernels.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod began;
pub mod data;
pub mod error;
pub mod harness;
pub mod latent;
pub mod nn;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/quickstart.md")]
    mod quickstart {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/latent.md")]
    mod latent {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
