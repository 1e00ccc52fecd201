use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Tape, Tensor, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    None,
}

/// Affine map `x·W + b` followed by an optional ReLU.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// `[n_in × n_out]`
    pub weight: Tensor,
    /// `[n_out]`
    pub bias: Tensor,
    pub activation: Activation,
}

/// Half-width of the initialization interval, `√(9 / fan_in)`.
pub fn init_bound(n_in: usize) -> f64 {
    (9.0 / n_in as f64).sqrt()
}

impl DenseLayer {
    /// Weights i.i.d. uniform in `±√(9/n_in)`, zero bias.
    pub fn init_uniform<R: Rng + ?Sized>(
        n_in: usize,
        n_out: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if n_in == 0 || n_out == 0 {
            return Err(Error::InvalidArgument(format!(
                "layer dimensions must be positive, got {n_in}×{n_out}"
            )));
        }
        let bound = init_bound(n_in);
        let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
        let w: Vec<f64> = (0..n_in * n_out).map(|_| dist.sample(rng)).collect();
        Ok(Self {
            weight: Tensor::matrix(n_in, n_out, w)?,
            bias: Tensor::zeros(&[n_out]),
            activation,
        })
    }

    pub fn n_in(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn n_out(&self) -> usize {
        self.weight.shape()[1]
    }

    pub(crate) fn forward_bound(&self, tape: &mut Tape, w: Var, b: Var, x: Var) -> Result<Var> {
        let xw = tape.matmul(x, w)?;
        let y = tape.add(xw, b)?;
        Ok(match self.activation {
            Activation::Relu => tape.relu(y),
            Activation::None => y,
        })
    }
}
