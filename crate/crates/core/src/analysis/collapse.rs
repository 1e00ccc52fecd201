use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One step at which `k` fell sharply below its recent maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseSignal {
    /// Index into the series.
    pub step: usize,
    /// Maximum of `k` over the preceding window.
    pub k_before: f64,
    pub k_after: f64,
    pub triggered: bool,
}

/// Window rule parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KDropParams {
    /// Drop threshold δ.
    pub delta: f64,
    /// Window length W.
    pub window: usize,
}

impl Default for KDropParams {
    fn default() -> Self {
        Self {
            delta: 0.1,
            window: 200,
        }
    }
}

/// Every index `t` with `max(k[t−W..t]) − k[t] > δ`; the window is clipped at the start.
pub fn detect_k_drop(k_series: &[f64], delta: f64, window: usize) -> Result<Vec<CollapseSignal>> {
    if window == 0 || !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "k-drop detection needs W ≥ 1 and δ > 0, got W = {window}, δ = {delta}"
        )));
    }
    let mut out = Vec::new();
    for t in 1..k_series.len() {
        let lo = t.saturating_sub(window);
        let k_before = k_series[lo..t].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let k_after = k_series[t];
        if k_before - k_after > delta {
            out.push(CollapseSignal {
                step: t,
                k_before,
                k_after,
                triggered: true,
            });
        }
    }
    Ok(out)
}

/// Groups consecutive signal steps into half-open index ranges.
pub fn signal_regions(signals: &[CollapseSignal]) -> Vec<Range<usize>> {
    let mut regions: Vec<Range<usize>> = Vec::new();
    for s in signals.iter().filter(|s| s.triggered) {
        match regions.last_mut() {
            Some(r) if r.end == s.step => r.end += 1,
            _ => regions.push(s.step..s.step + 1),
        }
    }
    regions
}
