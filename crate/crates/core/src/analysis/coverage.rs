use serde::{Deserialize, Serialize};

use crate::data::GaussianGrid;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// How many grid modes a sample set reaches, and how cleanly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeCoverageReport {
    pub modes_covered: usize,
    pub hq_fraction: f64,
    /// High-quality samples assigned to each mode.
    pub per_mode_counts: Vec<usize>,
}

/// Distance, in units of σ, within which a sample is high quality.
pub const HQ_SIGMAS: f64 = 3.0;

/// Sample count per unit of coverage threshold: a mode needs `max(1, n / 2500)` hits.
pub const COVERAGE_SAMPLES_PER_HIT: f64 = 2500.0;

/// Labels each `[x, y]` row by its nearest mode and counts high-quality hits.
pub fn mode_coverage(samples: &Tensor, grid: &GaussianGrid) -> Result<ModeCoverageReport> {
    if samples.cols() != 2 {
        return Err(Error::Dimension {
            op: "mode_coverage",
            left: samples.shape().to_vec(),
            right: vec![2],
        });
    }
    let n = samples.rows();
    let radius = HQ_SIGMAS * grid.sigma();
    let mut per_mode_counts = vec![0usize; grid.num_modes()];
    let mut hq = 0usize;
    for r in samples.row_iter() {
        let (mode, dist) = grid.nearest_mode([r[0], r[1]]);
        if dist <= radius {
            hq += 1;
            per_mode_counts[mode] += 1;
        }
    }
    let threshold = (n as f64 / COVERAGE_SAMPLES_PER_HIT).max(1.0);
    let modes_covered = per_mode_counts
        .iter()
        .filter(|&&c| c as f64 >= threshold)
        .count();
    Ok(ModeCoverageReport {
        modes_covered,
        hq_fraction: hq as f64 / n as f64,
        per_mode_counts,
    })
}
