//! Dense `f64` tensors with tape-based reverse-mode differentiation.
//!
//! A [`Tape`] records every operation executed on it. Calling
//! [`Tape::backward`] on a scalar node sweeps the record in reverse and adds
//! the resulting gradients into each gradient-tracking leaf.
//!
//! ```
//! use began_lab::tensor::{Tape, Tensor};
//!
//! let mut tape = Tape::new();
//! let x = tape.variable(&Tensor::vector(vec![3.0, 4.0]).unwrap());
//! let n = tape.l2_norm(x);
//! tape.backward(n).unwrap();
//! assert_eq!(tape.scalar(n), 5.0);
//! assert_eq!(tape.grad(x).unwrap(), &[0.6, 0.8]);
//! ```

mod gradcheck;
pub mod kernels;
mod pool;
mod tape;
mod value;

pub use gradcheck::finite_diff_check;
pub use tape::{Norm, Tape, Var};
pub use value::Tensor;

pub(crate) use tape::row_norm;
