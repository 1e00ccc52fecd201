#![allow(dead_code, clippy::needless_range_loop)]

use began_lab::began::{discriminator_loss, generator_loss, AutoencoderDiscriminator, Generator};
use began_lab::began::constraint_loss;
use began_lab::nn::Mlp;
use began_lab::tensor::{Norm, Tape, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// `𝓛(x) − k·𝓛(G(z_D)) + α·𝓛_c` with respect to the discriminator.
    Discriminator,
    /// `𝓛(G(z_G))` with respect to the generator.
    Generator,
    /// `𝓛_c` alone with respect to the discriminator.
    Constraint,
}

/// A small random network pair and batch, scored by one objective.
#[derive(Clone, Debug)]
pub struct GradInstance {
    pub objective: Objective,
    pub g: Generator,
    pub d: AutoencoderDiscriminator,
    pub x: Tensor,
    pub z_d: Tensor,
    pub z_g: Tensor,
    pub k: f64,
    pub alpha: f64,
    pub norm: Norm,
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Tensor {
    let v = (0..rows * cols).map(|_| rng.random_range(-scale..scale)).collect();
    Tensor::matrix(rows, cols, v).unwrap()
}

impl GradInstance {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objective = match seed % 3 {
            0 => Objective::Discriminator,
            1 => Objective::Generator,
            _ => Objective::Constraint,
        };
        let latent = rng.random_range(2..6);
        let data = rng.random_range(2..4);
        let hidden = rng.random_range(3..9);
        let layers = rng.random_range(1..3);
        let batch = rng.random_range(2..7);
        let mut g = Generator::new(latent, data, hidden, layers, &mut rng).unwrap();
        let mut d = AutoencoderDiscriminator::new(data, latent, hidden, layers, &mut rng).unwrap();
        // zero biases put a layer fed by an all-dead layer exactly on the relu kink
        for net in [&mut g.net, &mut d.enc, &mut d.dec] {
            for (name, p) in net.named_params_mut("p") {
                if name.ends_with("bias") {
                    p.data_mut().iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
                }
            }
        }
        let x = uniform(&mut rng, batch, data, 3.0);
        let z_d = uniform(&mut rng, batch, latent, 1.0);
        let z_g = uniform(&mut rng, batch, latent, 1.0);
        // every term of the discriminator objective is active
        let k = rng.random_range(0.05..0.95);
        let alpha = rng.random_range(0.05..1.0);
        let norm = if rng.random_bool(0.5) { Norm::L2 } else { Norm::L1 };
        Self { objective, g, d, x, z_d, z_g, k, alpha, norm }
    }

    fn record(&self, tape: &mut Tape, g: &Generator, d: &AutoencoderDiscriminator, train_g: bool) -> (began_lab::tensor::Var, began_lab::nn::BoundMlp, began_lab::began::BoundDiscriminator) {
        let bg = g.bind(tape, train_g);
        let bd = d.bind(tape, !train_g);
        let loss = match self.objective {
            Objective::Discriminator => {
                let x = tape.constant(&self.x);
                let z = tape.constant(&self.z_d);
                discriminator_loss(tape, g, &bg, d, &bd, x, z, self.k, self.alpha, self.norm)
                    .unwrap()
                    .total
            }
            Objective::Generator => {
                let z = tape.constant(&self.z_g);
                generator_loss(tape, g, &bg, d, &bd, z, self.norm).unwrap()
            }
            Objective::Constraint => {
                let z = tape.constant(&self.z_d);
                constraint_loss(tape, g, &bg, d, &bd, z, self.norm).unwrap()
            }
        };
        (loss, bg, bd)
    }

    fn value(&self, g: &Generator, d: &AutoencoderDiscriminator) -> f64 {
        let mut tape = Tape::new();
        let (loss, _, _) = self.record(&mut tape, g, d, false);
        tape.scalar(loss)
    }

    fn trains_generator(&self) -> bool {
        self.objective == Objective::Generator
    }

    /// Tape gradient with respect to every trained parameter, flattened.
    pub fn analytic(&self) -> Vec<f64> {
        let mut tape = Tape::new();
        let train_g = self.trains_generator();
        let (loss, bg, bd) = self.record(&mut tape, &self.g, &self.d, train_g);
        tape.backward(loss).unwrap();
        let mut g = self.g.clone();
        let mut d = self.d.clone();
        let mut out = Vec::new();
        let mut take = |m: &mut Mlp, b: &began_lab::nn::BoundMlp| {
            m.zero_grad();
            m.collect_grads(&tape, b);
            for p in m.params() {
                out.extend_from_slice(p.grad().unwrap_or(&vec![0.0; p.len()]));
            }
        };
        if train_g {
            take(&mut g.net, &bg);
        } else {
            take(&mut d.enc, &bd.enc);
            take(&mut d.dec, &bd.dec);
        }
        out
    }

    /// Central differences over the same parameters, in the same order.
    pub fn numeric(&self, h: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut g = self.g.clone();
        let mut d = self.d.clone();
        let count = |m: &Mlp| m.params().iter().map(|p| p.len()).collect::<Vec<_>>();
        let nets: Vec<(usize, Vec<usize>)> = if self.trains_generator() {
            vec![(0, count(&g.net))]
        } else {
            vec![(1, count(&d.enc)), (2, count(&d.dec))]
        };
        for (which, sizes) in nets {
            for (pi, &len) in sizes.iter().enumerate() {
                for i in 0..len {
                    let at = |delta: f64, g: &mut Generator, d: &mut AutoencoderDiscriminator| {
                        let net = match which {
                            0 => &mut g.net,
                            1 => &mut d.enc,
                            _ => &mut d.dec,
                        };
                        let mut params = net.named_params_mut("p");
                        params[pi].1.data_mut()[i] += delta;
                    };
                    at(h, &mut g, &mut d);
                    let up = self.value(&g, &d);
                    at(-2.0 * h, &mut g, &mut d);
                    let down = self.value(&g, &d);
                    at(h, &mut g, &mut d);
                    out.push((up - down) / (2.0 * h));
                }
            }
        }
        out
    }

    /// `‖a − n‖ / max(‖a‖, ‖n‖)` over the whole parameter gradient.
    pub fn relative_error(&self, h: f64) -> f64 {
        let a = self.analytic();
        let n = self.numeric(h);
        assert_eq!(a.len(), n.len());
        let l2 = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
        let diff = l2(&mut a.iter().zip(&n).map(|(x, y)| x - y));
        let scale = l2(&mut a.iter().copied()).max(l2(&mut n.iter().copied()));
        if scale == 0.0 { 0.0 } else { diff / scale }
    }
}

/// A k trace with a known answer under the default detector (δ = 0.1, W = 200).
pub struct KTrace {
    pub name: &'static str,
    pub series: Vec<f64>,
    /// Index of the one injected drop, if any.
    pub drop_at: Option<usize>,
}

/// Ten traces with one injected drop each, followed by monotone traces with none.
pub fn k_trace_suite() -> (Vec<KTrace>, Vec<KTrace>) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut drops = Vec::new();
    let mut add = |name, series: Vec<f64>, at| drops.push(KTrace { name, series, drop_at: Some(at) });

    // flat, then one step down
    let mut s = vec![0.6; 400];
    s.extend(vec![0.1; 400]);
    add("step 0.6 to 0.1", s, 400);

    // slow ramp, then a sharp drop and recovery that stays below the old level
    let mut s: Vec<f64> = (0..600).map(|i| 0.2 + 0.5 * i as f64 / 600.0).collect();
    s.extend((0..600).map(|i| 0.45 + 0.1 * i as f64 / 600.0));
    add("ramp then drop", s, 600);

    // wiggles of amplitude 0.03 around 0.5, then a drop of 0.3
    let mut s: Vec<f64> = (0..500).map(|i| 0.5 + 0.03 * (i as f64 * 0.2).sin()).collect();
    s.extend((0..500).map(|i| 0.2 + 0.03 * (i as f64 * 0.2).sin()));
    add("wiggles then drop", s, 500);

    // bounded noise below the threshold
    let mut s: Vec<f64> = (0..700).map(|_| 0.7 + rng.random_range(-0.02..0.02)).collect();
    s.extend((0..300).map(|_| 0.3 + rng.random_range(-0.02..0.02)));
    add("noise then drop", s, 700);

    // drop to zero at the start of the trace's second half
    let mut s = vec![1.0; 250];
    s.extend(vec![0.0; 250]);
    add("saturated to zero", s, 250);

    // drop barely above δ
    let mut s = vec![0.5; 300];
    s.extend(vec![0.38; 300]);
    add("drop of 0.12", s, 300);

    // drop early, inside the first window
    let mut s = vec![0.4; 20];
    s.extend(vec![0.05; 500]);
    add("early drop", s, 20);

    // peak then a fall spread over two steps of 0.06
    let mut s = vec![0.3; 200];
    s.extend((0..100).map(|i| 0.3 + 0.3 * i as f64 / 100.0));
    s.push(0.54);
    s.extend(vec![0.48; 400]);
    add("two-step fall", s, 301);

    // drop followed by a slow climb back to the old level
    let mut s = vec![0.8; 300];
    s.extend((0..900).map(|i| 0.5 + 0.3 * i as f64 / 900.0));
    add("drop then climb", s, 300);

    // a long trace with one drop near the end
    let mut s: Vec<f64> = (0..5000).map(|i| (i as f64 / 5000.0).min(0.9)).collect();
    s.extend(vec![0.4; 150]);
    add("late drop", s, 5000);

    let monotone = vec![
        KTrace { name: "constant", series: vec![0.42; 1000], drop_at: None },
        KTrace {
            name: "increasing",
            series: (0..1000).map(|i| i as f64 / 1000.0).collect(),
            drop_at: None,
        },
        KTrace {
            name: "step up",
            series: (0..1000).map(|i| if i < 500 { 0.1 } else { 0.9 }).collect(),
            drop_at: None,
        },
        KTrace {
            name: "saturating",
            series: (0..1000).map(|i| 1.0 - (-(i as f64) / 100.0).exp()).collect(),
            drop_at: None,
        },
    ];
    (drops, monotone)
}

/// A random `n × d` latent matrix with a spread-out spectrum.
pub fn random_latents(seed: u64) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(3..17);
    let n = rng.random_range(d + 5..80);
    // per-column scales keep the top eigenvalues apart
    let scales: Vec<f64> = (0..d).map(|j| 3.0 / (1.0 + j as f64)).collect();
    let v = (0..n * d)
        .map(|i| scales[i % d] * rng.random_range(-1.0..1.0) + rng.random_range(-0.1..0.1))
        .collect();
    Tensor::matrix(n, d, v).unwrap()
}

/// Largest eigenvalue and component deviations of `fit_pca` from a dense
/// eigendecomposition of the covariance, components compared up to sign.
pub fn pca_oracle_deviation(x: &Tensor) -> (f64, f64) {
    use nalgebra::{DMatrix, SymmetricEigen};
    let (n, d) = (x.rows(), x.cols());
    let m = DMatrix::from_row_slice(n, d, x.data());
    let mean = m.row_mean();
    let mut c = m.clone();
    for mut row in c.row_iter_mut() {
        row -= &mean;
    }
    let cov = (c.transpose() * &c) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let p = began_lab::analysis::fit_pca(x).unwrap();
    let mut ev_dev = 0.0f64;
    let mut comp_dev = 0.0f64;
    for r in 0..2 {
        let j = order[r];
        ev_dev = ev_dev.max((eig.eigenvalues[j].max(0.0) - p.explained_variance[r]).abs());
        let col = eig.eigenvectors.column(j);
        let same: f64 = (0..d).map(|i| (col[i] - p.components[r][i]).abs()).fold(0.0, f64::max);
        let flip: f64 = (0..d).map(|i| (col[i] + p.components[r][i]).abs()).fold(0.0, f64::max);
        comp_dev = comp_dev.max(same.min(flip));
    }
    (ev_dev, comp_dev)
}
