//! Latent-space tools: generator inversion by gradient search, one-shot
//! inversion through the encoder, interpolation, and style arithmetic.

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::began::{AutoencoderDiscriminator, Generator};
use crate::error::{Error, Result};
use crate::nn::AdamState;
use crate::tensor::{Tape, Tensor};

/// Starting point for [`z_star_search`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchInit {
    /// Uniform on `[−1, 1]^d`.
    #[default]
    Random,
    /// `Enc(x*)`.
    EncoderWarmStart,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZSearchConfig {
    pub max_iters: usize,
    pub lr: f64,
    /// Stop once `‖G(z) − x*‖ < tol`.
    pub tol: f64,
    pub init: SearchInit,
    /// Clamp `z` into `[−1, 1]^d` after every step.
    pub project_to_box: bool,
}

impl Default for ZSearchConfig {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            lr: 1e-2,
            tol: 1e-3,
            init: SearchInit::Random,
            project_to_box: false,
        }
    }
}

impl ZSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.tol > 0.0) || !(self.lr >= 0.0) || !self.lr.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "z-search needs max_iters ≥ 1, tol > 0 and a finite lr ≥ 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZSearchResult {
    /// Best latent seen.
    pub z: Vec<f64>,
    /// `‖G(z) − x*‖` at [`ZSearchResult::z`].
    pub loss: f64,
    /// Loss before each step, plus the final evaluation.
    pub loss_history: Vec<f64>,
    /// Gradient steps taken.
    pub iterations: usize,
    pub converged: bool,
}

impl ZSearchResult {
    /// Running minimum of the loss history.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.loss_history
            .iter()
            .scan(f64::INFINITY, |b, &l| {
                *b = b.min(l);
                Some(*b)
            })
            .collect()
    }
}

/// Minimizes `‖G(z) − x*‖` over `z` with Adam, the generator frozen.
///
/// The descent runs on the squared distance; history, `loss` and the stopping
/// test use the distance itself.
///
/// `d` is required only for [`SearchInit::EncoderWarmStart`].
pub fn z_star_search<R: Rng + ?Sized>(
    x_star: &[f64],
    g: &Generator,
    d: Option<&AutoencoderDiscriminator>,
    cfg: &ZSearchConfig,
    rng: &mut R,
) -> Result<ZSearchResult> {
    check_target(x_star, g)?;
    let z0 = match cfg.init {
        SearchInit::Random => {
            let u = Uniform::new_inclusive(-1.0, 1.0).expect("valid bounds");
            (0..g.latent_dim()).map(|_| u.sample(rng)).collect()
        }
        SearchInit::EncoderWarmStart => {
            let d = d.ok_or_else(|| {
                Error::InvalidArgument("encoder warm start needs a discriminator".into())
            })?;
            one_shot_encode(x_star, d)?
        }
    };
    z_star_search_from(x_star, g, z0, cfg)
}

/// [`z_star_search`] from an explicit starting latent.
pub fn z_star_search_from(
    x_star: &[f64],
    g: &Generator,
    z0: Vec<f64>,
    cfg: &ZSearchConfig,
) -> Result<ZSearchResult> {
    cfg.validate()?;
    check_target(x_star, g)?;
    if z0.len() != g.latent_dim() {
        return Err(Error::Dimension {
            op: "z_star_search",
            left: vec![z0.len()],
            right: vec![g.latent_dim()],
        });
    }
    let target = Tensor::matrix(1, x_star.len(), x_star.to_vec())?;
    let mut z = Tensor::matrix(1, z0.len(), z0)?.with_requires_grad(true);
    let mut adam = AdamState::new([&z], cfg.lr, 0.9, 0.999, 1e-8)?;
    let mut history = Vec::new();
    let mut best = (f64::INFINITY, z.data().to_vec());

    for it in 0..=cfg.max_iters {
        let mut tape = Tape::new();
        let bg = g.bind(&mut tape, false);
        let zv = tape.leaf(&z);
        let xv = tape.constant(&target);
        let gz = g.generate(&mut tape, &bg, zv)?;
        let diff = tape.sub(gz, xv)?;
        // descend on ½‖·‖², whose gradient vanishes at the target; report ‖·‖
        let sq = tape.mul(diff, diff)?;
        let sq = tape.sum(sq);
        let objective = tape.scale(sq, 0.5);
        let l = (2.0 * tape.scalar(objective)).sqrt();
        history.push(l);
        if !l.is_finite() {
            return Err(Error::SearchDiverged {
                iterations: it,
                history,
            });
        }
        if l < best.0 {
            best = (l, z.data().to_vec());
        }
        if l < cfg.tol || it == cfg.max_iters {
            return Ok(ZSearchResult {
                z: best.1,
                loss: best.0,
                loss_history: history,
                iterations: it,
                converged: l < cfg.tol,
            });
        }
        tape.backward(objective)?;
        z.zero_grad();
        z.accumulate_grad(tape.grad(zv).expect("z tracks gradient"));
        adam.step(&mut [("z".to_string(), &mut z)])
            .map_err(|_| Error::SearchDiverged {
                iterations: it,
                history: history.clone(),
            })?;
        if cfg.project_to_box {
            z.data_mut().iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
        }
    }
    unreachable!("the loop returns on its last iteration")
}

fn check_target(x_star: &[f64], g: &Generator) -> Result<()> {
    if x_star.len() != g.data_dim() {
        return Err(Error::Dimension {
            op: "z_star_search",
            left: vec![x_star.len()],
            right: vec![g.data_dim()],
        });
    }
    if x_star.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("target contains non-finite values".into()));
    }
    Ok(())
}

/// `Enc(x*)`: a single forward pass, no optimization.
pub fn one_shot_encode(x_star: &[f64], d: &AutoencoderDiscriminator) -> Result<Vec<f64>> {
    if x_star.len() != d.data_dim() {
        return Err(Error::Dimension {
            op: "one_shot_encode",
            left: vec![x_star.len()],
            right: vec![d.data_dim()],
        });
    }
    let x = Tensor::matrix(1, x_star.len(), x_star.to_vec())?;
    Ok(d.embed(&x)?.into_data())
}

/// `steps` evenly spaced points from `z_a` to `z_b`, both included.
pub fn interpolate(z_a: &[f64], z_b: &[f64], steps: usize) -> Result<Vec<Vec<f64>>> {
    same_len("interpolate", z_a, z_b)?;
    if steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "interpolation needs at least 2 steps, got {steps}"
        )));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / last;
            z_a.iter()
                .zip(z_b)
                .map(|(&a, &b)| if i == steps - 1 { b } else { a + t * (b - a) })
                .collect()
        })
        .collect())
}

/// A latent direction added to move outputs along one attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StyleVector {
    pub vector: Vec<f64>,
    pub label: String,
}

impl StyleVector {
    pub fn new(vector: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("style vector must be finite".into()));
        }
        Ok(Self {
            vector,
            label: label.into(),
        })
    }

    /// `amplitude · e_index` in `dim` dimensions.
    pub fn basis(dim: usize, index: usize, amplitude: f64) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut v = vec![0.0; dim];
        v[index] = amplitude;
        Self::new(v, format!("e{index}×{amplitude}"))
    }
}

/// `z + Σ styles`.
pub fn apply_style(z: &[f64], styles: &[StyleVector]) -> Result<Vec<f64>> {
    let mut out = z.to_vec();
    for s in styles {
        same_len("apply_style", z, &s.vector)?;
        out.iter_mut().zip(&s.vector).for_each(|(o, v)| *o += v);
    }
    Ok(out)
}

/// Copies of `z` with coordinate `dim` set to `lo, lo + step, …` up to `hi`.
pub fn dimension_sweep(z: &[f64], dim: usize, lo: f64, hi: f64, step: f64) -> Result<Vec<Vec<f64>>> {
    if dim >= z.len() {
        return Err(Error::InvalidArgument(format!(
            "sweep dimension {dim} out of range for a {}-dimensional latent",
            z.len()
        )));
    }
    if !(lo <= hi) || !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sweep needs finite lo ≤ hi and step > 0, got [{lo}, {hi}] step {step}"
        )));
    }
    // tolerance keeps `hi` when (hi − lo)/step is integral up to round-off
    let count = ((hi - lo) / step * (1.0 + 1e-12)).floor() as usize + 1;
    Ok((0..count)
        .map(|i| {
            let mut v = z.to_vec();
            v[dim] = lo + i as f64 * step;
            v
        })
        .collect())
}

fn same_len(op: &'static str, a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            op,
            left: vec![a.len()],
            right: vec![b.len()],
        });
    }
    Ok(())
}
