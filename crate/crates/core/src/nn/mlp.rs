use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layer::{Activation, DenseLayer};
use crate::error::{Error, Result};
use crate::tensor::{Tape, Tensor, Var};

/// Feed-forward stack of [`DenseLayer`]s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

/// Tape handles for one network's parameters, produced by [`Mlp::bind`].
#[derive(Clone, Debug)]
pub struct BoundMlp {
    params: Vec<(Var, Var)>,
}

impl Mlp {
    /// ReLU on every hidden layer, linear output. `dims` lists the widths
    /// from input to output, so `[32, 128, 128, 2]` builds three layers.
    pub fn new<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidArgument(
                "an MLP needs at least an input and an output width".into(),
            ));
        }
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i == last {
                    Activation::None
                } else {
                    Activation::Relu
                };
                DenseLayer::init_uniform(w[0], w[1], act, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("an MLP needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].n_out() != pair[1].n_in() {
                return Err(Error::Dimension {
                    op: "mlp chain",
                    left: pair[0].weight.shape().to_vec(),
                    right: pair[1].weight.shape().to_vec(),
                });
            }
        }
        for l in &layers {
            if l.bias.shape() != [l.n_out()] {
                return Err(Error::Dimension {
                    op: "mlp bias",
                    left: l.weight.shape().to_vec(),
                    right: l.bias.shape().to_vec(),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn n_in(&self) -> usize {
        self.layers[0].n_in()
    }

    pub fn n_out(&self) -> usize {
        self.layers[self.layers.len() - 1].n_out()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// Records the parameters on `tape`; with `trainable == false` they are constants.
    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> BoundMlp {
        let params = self
            .layers
            .iter()
            .map(|l| {
                if trainable {
                    (tape.variable(&l.weight), tape.variable(&l.bias))
                } else {
                    (tape.constant(&l.weight), tape.constant(&l.bias))
                }
            })
            .collect();
        BoundMlp { params }
    }

    pub fn forward(&self, tape: &mut Tape, bound: &BoundMlp, x: Var) -> Result<Var> {
        let shape = tape.shape(x);
        if shape.len() != 2 || shape[1] != self.n_in() {
            return Err(Error::Dimension {
                op: "mlp forward",
                left: shape.to_vec(),
                right: self.layers[0].weight.shape().to_vec(),
            });
        }
        let mut h = x;
        for (layer, &(w, b)) in self.layers.iter().zip(&bound.params) {
            h = layer.forward_bound(tape, w, b, h)?;
        }
        Ok(h)
    }

    /// Forward pass without gradient tracking.
    pub fn predict(&self, x: &Tensor) -> Result<Tensor> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape, false);
        let xv = tape.constant(x);
        let out = self.forward(&mut tape, &bound, xv)?;
        Ok(tape.tensor(out))
    }

    /// Adds the tape gradients of the bound parameters into each tensor's grad.
    pub fn collect_grads(&mut self, tape: &Tape, bound: &BoundMlp) {
        for (layer, &(w, b)) in self.layers.iter_mut().zip(&bound.params) {
            if let Some(g) = tape.grad(w) {
                layer.weight.accumulate_grad(g);
            }
            if let Some(g) = tape.grad(b) {
                layer.bias.accumulate_grad(g);
            }
        }
    }

    pub fn zero_grad(&mut self) {
        for l in &mut self.layers {
            l.weight.zero_grad();
            l.bias.zero_grad();
        }
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| [&l.weight, &l.bias]).collect()
    }

    /// Parameters paired with stable names like `gen.layer1.bias`.
    pub fn named_params_mut(&mut self, prefix: &str) -> Vec<(String, &mut Tensor)> {
        self.layers
            .iter_mut()
            .enumerate()
            .flat_map(|(i, l)| {
                [
                    (format!("{prefix}.layer{i}.weight"), &mut l.weight),
                    (format!("{prefix}.layer{i}.bias"), &mut l.bias),
                ]
            })
            .collect()
    }

    pub fn checksum(&self) -> u64 {
        self.params()
            .iter()
            .fold(0u64, |h, p| h.rotate_left(7) ^ p.checksum())
    }
}
