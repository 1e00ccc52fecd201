use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{read_metrics, read_trace, MetricsRecord};
use super::run::{files, RunArtifacts};
use super::spec::{DatasetParams, ExperimentSpec};
use crate::analysis::{detect_k_drop, signal_regions, CollapseSignal, ModeCoverageReport};
use crate::began::{StepMetrics, Variant};
use crate::error::{Error, Result};

/// A run read back from its directory.
#[derive(Clone, Debug)]
pub struct LoadedRun {
    pub spec: ExperimentSpec,
    pub records: Vec<MetricsRecord>,
    pub trace: Vec<StepMetrics>,
    pub final_coverage: ModeCoverageReport,
}

impl LoadedRun {
    pub fn load(dir: &Path) -> Result<Self> {
        let spec = ExperimentSpec::load(&dir.join(files::SPEC))?;
        let num_modes = spec.dataset.size * spec.dataset.size;
        let records = read_metrics(&dir.join(files::METRICS), num_modes)?;
        let trace = read_trace(&dir.join(files::TRACE))?;
        let p = dir.join(files::COVERAGE);
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        let final_coverage = serde_json::from_str(&text).map_err(|e| Error::format(&p, e))?;
        Ok(Self {
            spec,
            records,
            trace,
            final_coverage,
        })
    }
}

impl From<&RunArtifacts> for LoadedRun {
    fn from(r: &RunArtifacts) -> Self {
        Self {
            spec: r.spec.clone(),
            records: r.records.clone(),
            trace: r.trace.clone(),
            final_coverage: r.final_coverage.clone(),
        }
    }
}

/// One side of a comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub variant: Variant,
    pub seed: u64,
    pub final_record: Option<MetricsRecord>,
    pub final_coverage: ModeCoverageReport,
    /// `(step, 𝓛_c on the probe set)` at each record.
    pub constraint_trajectory: Vec<(u64, f64)>,
    /// `(step, k)` after every optimization step.
    pub k_trajectory: Vec<(u64, f64)>,
    pub collapse_signals: Vec<CollapseSignal>,
    /// Step ranges covered by consecutive signals.
    pub collapse_regions: Vec<Range<u64>>,
}

/// Differences `b − a`; maxima are over steps both runs logged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub modes_covered: i64,
    pub hq_fraction: f64,
    pub final_constraint: f64,
    pub final_k: f64,
    pub max_abs_k: f64,
    pub max_abs_constraint: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub dataset: DatasetParams,
    pub a: RunSummary,
    pub b: RunSummary,
    pub deltas: Deltas,
}

fn summarize(r: &LoadedRun) -> Result<RunSummary> {
    let ks: Vec<f64> = r.trace.iter().map(|m| m.k).collect();
    let raw = detect_k_drop(&ks, r.spec.kdrop.delta, r.spec.kdrop.window)?;
    // indices into the trace become optimization steps
    let collapse_signals: Vec<CollapseSignal> = raw
        .iter()
        .map(|s| CollapseSignal {
            step: r.trace[s.step].step as usize,
            ..*s
        })
        .collect();
    let collapse_regions = signal_regions(&raw)
        .into_iter()
        .map(|g| r.trace[g.start].step..r.trace[g.end - 1].step + 1)
        .collect();
    Ok(RunSummary {
        label: r.spec.label.clone(),
        variant: r.spec.train.variant,
        seed: r.spec.train.seed,
        final_record: r.records.last().copied(),
        final_coverage: r.final_coverage.clone(),
        constraint_trajectory: r.records.iter().map(|m| (m.step, m.loss_constraint)).collect(),
        k_trajectory: r.trace.iter().map(|m| (m.step, m.k)).collect(),
        collapse_signals,
        collapse_regions,
    })
}

fn max_abs_on_common(a: &[(u64, f64)], b: &[(u64, f64)]) -> f64 {
    let mut i = 0;
    let mut j = 0;
    let mut worst = 0.0f64;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                worst = worst.max((a[i].1 - b[j].1).abs());
                i += 1;
                j += 1;
            }
        }
    }
    worst
}

/// Side-by-side report of two runs over the same dataset.
pub fn compare_runs(a: &LoadedRun, b: &LoadedRun) -> Result<Comparison> {
    if a.spec.dataset != b.spec.dataset {
        return Err(Error::InvalidArgument(format!(
            "runs use different datasets: {:?} vs {:?}",
            a.spec.dataset, b.spec.dataset
        )));
    }
    let sa = summarize(a)?;
    let sb = summarize(b)?;
    let last = |s: &RunSummary, f: fn(&MetricsRecord) -> f64| s.final_record.as_ref().map_or(0.0, f);
    let deltas = Deltas {
        modes_covered: sb.final_coverage.modes_covered as i64 - sa.final_coverage.modes_covered as i64,
        hq_fraction: sb.final_coverage.hq_fraction - sa.final_coverage.hq_fraction,
        final_constraint: last(&sb, |r| r.loss_constraint) - last(&sa, |r| r.loss_constraint),
        final_k: last(&sb, |r| r.k) - last(&sa, |r| r.k),
        max_abs_k: max_abs_on_common(&sa.k_trajectory, &sb.k_trajectory),
        max_abs_constraint: max_abs_on_common(&sa.constraint_trajectory, &sb.constraint_trajectory),
    };
    Ok(Comparison {
        dataset: a.spec.dataset,
        a: sa,
        b: sb,
        deltas,
    })
}

impl Comparison {
    /// Plain-text table for terminals.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let row = |out: &mut String, name: &str, a: String, b: String| {
            let _ = writeln!(out, "{name:<22} {a:>18} {b:>18}");
        };
        row(&mut out, "", self.a.label.clone(), self.b.label.clone());
        row(&mut out, "variant", self.a.variant.to_string(), self.b.variant.to_string());
        row(&mut out, "seed", self.a.seed.to_string(), self.b.seed.to_string());
        row(
            &mut out,
            "modes covered",
            self.a.final_coverage.modes_covered.to_string(),
            self.b.final_coverage.modes_covered.to_string(),
        );
        row(
            &mut out,
            "hq fraction",
            format!("{:.4}", self.a.final_coverage.hq_fraction),
            format!("{:.4}", self.b.final_coverage.hq_fraction),
        );
        let fin = |s: &RunSummary, f: fn(&MetricsRecord) -> f64| {
            s.final_record.as_ref().map_or("-".into(), |r| format!("{:.4}", f(r)))
        };
        row(&mut out, "final L_c (probe)", fin(&self.a, |r| r.loss_constraint), fin(&self.b, |r| r.loss_constraint));
        row(&mut out, "final k", fin(&self.a, |r| r.k), fin(&self.b, |r| r.k));
        row(&mut out, "final M", fin(&self.a, |r| r.convergence_measure), fin(&self.b, |r| r.convergence_measure));
        row(
            &mut out,
            "k-drop regions",
            self.a.collapse_regions.len().to_string(),
            self.b.collapse_regions.len().to_string(),
        );
        for (s, side) in [(&self.a, "a"), (&self.b, "b")] {
            for r in &s.collapse_regions {
                let _ = writeln!(out, "  collapse signal ({side}): steps {}..{}", r.start, r.end);
            }
        }
        let d = &self.deltas;
        let _ = writeln!(
            out,
            "delta (b - a): modes {:+}, hq {:+.4}, L_c {:+.4}, k {:+.4}; max |dk| {:.4}, max |dL_c| {:.4}",
            d.modes_covered, d.hq_fraction, d.final_constraint, d.final_k, d.max_abs_k, d.max_abs_constraint
        );
        out
    }
}
