use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{BoundMlp, Mlp};
use crate::tensor::{Tape, Tensor, Var};

/// `G: Z → X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub net: Mlp,
}

/// Autoencoder discriminator; `D(x) = dec(enc(x))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderDiscriminator {
    pub enc: Mlp,
    pub dec: Mlp,
}

#[derive(Clone, Debug)]
pub struct BoundDiscriminator {
    pub enc: BoundMlp,
    pub dec: BoundMlp,
}

/// `[input, hidden × layers..., output]`
pub(crate) fn widths(input: usize, hidden: usize, layers: usize, output: usize) -> Vec<usize> {
    let mut w = vec![input];
    w.extend(std::iter::repeat_n(hidden, layers));
    w.push(output);
    w
}

impl Generator {
    pub fn new<R: Rng + ?Sized>(
        latent_dim: usize,
        data_dim: usize,
        hidden: usize,
        hidden_layers: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(Self {
            net: Mlp::new(&widths(latent_dim, hidden, hidden_layers, data_dim), rng)?,
        })
    }

    pub fn from_net(net: Mlp) -> Self {
        Self { net }
    }

    pub fn latent_dim(&self) -> usize {
        self.net.n_in()
    }

    pub fn data_dim(&self) -> usize {
        self.net.n_out()
    }

    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> BoundMlp {
        self.net.bind(tape, trainable)
    }

    pub fn generate(&self, tape: &mut Tape, bound: &BoundMlp, z: Var) -> Result<Var> {
        self.net.forward(tape, bound, z)
    }

    /// `G(z)` for a `[n × latent_dim]` batch.
    pub fn sample(&self, z: &Tensor) -> Result<Tensor> {
        self.net.predict(z)
    }
}

impl AutoencoderDiscriminator {
    pub fn new<R: Rng + ?Sized>(
        data_dim: usize,
        latent_dim: usize,
        hidden: usize,
        hidden_layers: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let enc = Mlp::new(&widths(data_dim, hidden, hidden_layers, latent_dim), rng)?;
        let dec = Mlp::new(&widths(latent_dim, hidden, hidden_layers, data_dim), rng)?;
        Self::from_parts(enc, dec)
    }

    pub fn from_parts(enc: Mlp, dec: Mlp) -> Result<Self> {
        if enc.n_out() != dec.n_in() || enc.n_in() != dec.n_out() {
            return Err(Error::Dimension {
                op: "autoencoder",
                left: vec![enc.n_in(), enc.n_out()],
                right: vec![dec.n_in(), dec.n_out()],
            });
        }
        Ok(Self { enc, dec })
    }

    pub fn latent_dim(&self) -> usize {
        self.enc.n_out()
    }

    pub fn data_dim(&self) -> usize {
        self.enc.n_in()
    }

    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> BoundDiscriminator {
        BoundDiscriminator {
            enc: self.enc.bind(tape, trainable),
            dec: self.dec.bind(tape, trainable),
        }
    }

    pub fn encode(&self, tape: &mut Tape, bound: &BoundDiscriminator, x: Var) -> Result<Var> {
        self.enc.forward(tape, &bound.enc, x)
    }

    pub fn decode(&self, tape: &mut Tape, bound: &BoundDiscriminator, h: Var) -> Result<Var> {
        self.dec.forward(tape, &bound.dec, h)
    }

    /// `Enc(x)` for a batch.
    pub fn embed(&self, x: &Tensor) -> Result<Tensor> {
        self.enc.predict(x)
    }

    /// `D(x)` for a batch.
    pub fn reconstruct(&self, x: &Tensor) -> Result<Tensor> {
        self.dec.predict(&self.enc.predict(x)?)
    }

    pub(crate) fn named_params_mut(&mut self) -> Vec<(String, &mut crate::tensor::Tensor)> {
        let mut p = self.enc.named_params_mut("disc.enc");
        p.extend(self.dec.named_params_mut("disc.dec"));
        p
    }

    pub(crate) fn params(&self) -> Vec<&Tensor> {
        let mut p = self.enc.params();
        p.extend(self.dec.params());
        p
    }

    pub(crate) fn collect_grads(&mut self, tape: &Tape, bound: &BoundDiscriminator) {
        self.enc.collect_grads(tape, &bound.enc);
        self.dec.collect_grads(tape, &bound.dec);
    }

    pub(crate) fn zero_grad(&mut self) {
        self.enc.zero_grad();
        self.dec.zero_grad();
    }

    pub fn checksum(&self) -> u64 {
        self.enc.checksum().rotate_left(17) ^ self.dec.checksum()
    }
}
