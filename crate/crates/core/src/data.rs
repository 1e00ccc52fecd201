//! The planar Gaussian-grid mixture and latent samplers.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// `size × size` isotropic Gaussians on a square grid centred on the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianGrid {
    means: Vec<[f64; 2]>,
    sigma: f64,
    spacing: f64,
}

impl GaussianGrid {
    pub fn new(size: usize, spacing: f64, sigma: f64) -> Result<Self> {
        if size == 0 || !(spacing > 0.0) || !(sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid needs size ≥ 1, spacing > 0, sigma ≥ 0 (got {size}, {spacing}, {sigma})"
            )));
        }
        let offset = (size as f64 - 1.0) / 2.0;
        let mut means = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                means.push([
                    (i as f64 - offset) * spacing,
                    (j as f64 - offset) * spacing,
                ]);
            }
        }
        Ok(Self {
            means,
            sigma,
            spacing,
        })
    }

    /// Means at `{−4, −2, 0, 2, 4}²` with σ = 0.05.
    pub fn standard() -> Self {
        Self::new(5, 2.0, 0.05).expect("valid constants")
    }

    pub fn means(&self) -> &[[f64; 2]] {
        &self.means
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn num_modes(&self) -> usize {
        self.means.len()
    }

    /// Closest mean in Euclidean distance; ties go to the lowest index.
    pub fn nearest_mode(&self, p: [f64; 2]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, m) in self.means.iter().enumerate() {
            let d2 = (p[0] - m[0]).powi(2) + (p[1] - m[1]).powi(2);
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        (best.0, best.1.sqrt())
    }
}

/// Draws real samples: a mode uniformly at random, then isotropic noise.
#[derive(Clone, Debug)]
pub struct RealSampler {
    grid: GaussianGrid,
    rng: ChaCha8Rng,
}

impl RealSampler {
    pub fn new(grid: GaussianGrid, rng: ChaCha8Rng) -> Self {
        Self { grid, rng }
    }

    pub fn grid(&self) -> &GaussianGrid {
        &self.grid
    }

    pub fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }

    /// `[n × 2]` samples together with the mode each was drawn from.
    pub fn sample_labelled(&mut self, n: usize) -> Result<(Tensor, Vec<usize>)> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be ≥ 1".into()));
        }
        let k = self.grid.num_modes();
        let mut data = Vec::with_capacity(2 * n);
        let mut modes = Vec::with_capacity(n);
        for _ in 0..n {
            let m = self.rng.random_range(0..k);
            let [mx, my] = self.grid.means[m];
            let nx: f64 = StandardNormal.sample(&mut self.rng);
            let ny: f64 = StandardNormal.sample(&mut self.rng);
            data.push(mx + self.grid.sigma * nx);
            data.push(my + self.grid.sigma * ny);
            modes.push(m);
        }
        Ok((Tensor::matrix(n, 2, data)?, modes))
    }

    pub fn sample(&mut self, n: usize) -> Result<Tensor> {
        Ok(self.sample_labelled(n)?.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatentDistribution {
    /// i.i.d. uniform on `[−1, 1]`
    #[default]
    Uniform,
    /// i.i.d. standard normal
    Gaussian,
}

#[derive(Clone, Debug)]
pub struct LatentSampler {
    dim: usize,
    distribution: LatentDistribution,
    rng: ChaCha8Rng,
}

impl LatentSampler {
    pub fn new(dim: usize, distribution: LatentDistribution, rng: ChaCha8Rng) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("latent dimension must be ≥ 1".into()));
        }
        Ok(Self {
            dim,
            distribution,
            rng,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }

    /// `[n × dim]` latent batch.
    pub fn sample(&mut self, n: usize) -> Result<Tensor> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be ≥ 1".into()));
        }
        let len = n * self.dim;
        let data: Vec<f64> = match self.distribution {
            LatentDistribution::Uniform => {
                let u = Uniform::new_inclusive(-1.0, 1.0).expect("finite bounds");
                (0..len).map(|_| u.sample(&mut self.rng)).collect()
            }
            LatentDistribution::Gaussian => (0..len)
                .map(|_| StandardNormal.sample(&mut self.rng))
                .collect(),
        };
        Tensor::matrix(n, self.dim, data)
    }
}
