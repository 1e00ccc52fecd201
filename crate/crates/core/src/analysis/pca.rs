use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Top-two principal axes of a latent set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    pub mean: Vec<f64>,
    /// Two orthonormal rows, each `mean.len()` wide.
    pub components: [Vec<f64>; 2],
    /// Descending, non-negative.
    pub explained_variance: [f64; 2],
}

/// Column means of a `n × d` matrix.
pub(crate) fn column_mean(x: &Tensor) -> Vec<f64> {
    let d = x.cols();
    let mut mean = vec![0.0; d];
    for r in x.row_iter() {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
    }
    let n = x.rows() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// Sample covariance with divisor `n − 1`, row-major `d × d`.
pub fn covariance(x: &Tensor) -> Result<Vec<f64>> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "covariance needs at least 2 samples, got {n}"
        )));
    }
    let d = x.cols();
    let mean = column_mean(x);
    let mut cov = vec![0.0; d * d];
    let mut c = vec![0.0; d];
    for r in x.row_iter() {
        c.iter_mut().zip(r).zip(&mean).for_each(|((c, v), m)| *c = v - m);
        for i in 0..d {
            for j in i..d {
                cov[i * d + j] += c[i] * c[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[i * d + j] / denom;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    Ok(cov)
}

/// Eigenvalues (descending) and unit eigenvectors (rows) of a symmetric `d × d` matrix.
///
/// Cyclic Jacobi rotations; converges quadratically and keeps the
/// eigenvectors orthonormal to working precision.
pub fn symmetric_eigen(a: &[f64], d: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(a.len(), d * d, "matrix must be d × d");
    let mut a = a.to_vec();
    // v holds eigenvectors as columns
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * d + j] * a[i * d + j])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale * 1e-3 || off == 0.0 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[j * d + j].total_cmp(&a[i * d + i]));
    let values = order.iter().map(|&i| a[i * d + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut col: Vec<f64> = (0..d).map(|k| v[k * d + i]).collect();
            canonical_sign(&mut col);
            col
        })
        .collect();
    (values, vectors)
}

/// Flips `v` so its largest-magnitude entry is positive; ties go to the lowest index.
pub fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// PCA fitted to `real_latents` (`n × d`, `n ≥ 3`, `d ≥ 2`).
pub fn fit_pca(real_latents: &Tensor) -> Result<PcaProjection> {
    let n = real_latents.rows();
    let d = real_latents.cols();
    if n < 3 || d < 2 {
        return Err(Error::InvalidArgument(format!(
            "PCA needs n ≥ 3 samples of width ≥ 2, got {n} × {d}"
        )));
    }
    let cov = covariance(real_latents)?;
    let (values, mut vectors) = symmetric_eigen(&cov, d);
    let trace: f64 = (0..d).map(|i| cov[i * d + i]).sum();
    if !(values[0] > 0.0) || !(trace > 0.0) {
        return Err(Error::DegenerateData(
            "all latent points coincide; covariance is zero".into(),
        ));
    }
    // round-off can leave a null direction marginally negative
    let ev = [values[0], values[1].max(0.0)];
    let c1 = vectors.swap_remove(1);
    let c0 = vectors.swap_remove(0);
    Ok(PcaProjection {
        mean: column_mean(real_latents),
        components: [c0, c1],
        explained_variance: ev,
    })
}

impl PcaProjection {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `(latents − mean) · componentsᵀ`, an `n × 2` matrix.
    pub fn project(&self, latents: &Tensor) -> Result<Tensor> {
        if latents.cols() != self.dim() {
            return Err(Error::Dimension {
                op: "project",
                left: latents.shape().to_vec(),
                right: vec![2, self.dim()],
            });
        }
        let mut out = Vec::with_capacity(latents.rows() * 2);
        for r in latents.row_iter() {
            for c in &self.components {
                out.push(
                    r.iter()
                        .zip(&self.mean)
                        .zip(c)
                        .map(|((x, m), w)| (x - m) * w)
                        .sum(),
                );
            }
        }
        Tensor::matrix(latents.rows(), 2, out)
    }
}

/// Free-function form of [`PcaProjection::project`].
pub fn project(p: &PcaProjection, latents: &Tensor) -> Result<Tensor> {
    p.project(latents)
}

/// Total variance: trace of the sample covariance (divisor `n − 1`).
pub fn variance_stats(latents: &Tensor) -> Result<f64> {
    let n = latents.rows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "variance needs at least 2 samples, got {n}"
        )));
    }
    let mean = column_mean(latents);
    let ss: f64 = latents
        .row_iter()
        .map(|r| r.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>())
        .sum();
    Ok(ss / (n - 1) as f64)
}
