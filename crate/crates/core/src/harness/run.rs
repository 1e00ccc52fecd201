use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::checkpoint::Checkpoint;
use super::metrics::{write_metrics, write_trace, MetricsRecord};
use super::spec::ExperimentSpec;
use crate::analysis::plot::{scatter_svg, Series, GEN_COLOUR, REAL_COLOUR};
use crate::analysis::{mode_coverage, LatentSnapshot, ModeCoverageReport};
use crate::began::{convergence_measure, StepMetrics, Trainer};
use crate::data::{LatentSampler, RealSampler};
use crate::error::{Error, Result};
use crate::rng::{keyed_stream, stream, Stream};
use crate::tensor::{Norm, Tensor};

/// File names inside a run directory.
pub mod files {
    pub const SPEC: &str = "spec.toml";
    pub const METRICS: &str = "metrics.csv";
    pub const TRACE: &str = "trace.csv";
    pub const CHECKPOINT: &str = "checkpoint.json";
    pub const COVERAGE: &str = "coverage.json";
    pub const ABORT: &str = "abort.json";
    pub const SNAPSHOTS: &str = "snapshots";
}

/// What a finished run leaves behind, also kept in memory.
#[derive(Debug)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub spec: ExperimentSpec,
    pub records: Vec<MetricsRecord>,
    pub trace: Vec<StepMetrics>,
    pub final_coverage: ModeCoverageReport,
    pub trainer: Trainer,
}

/// Written when training stops on a non-finite value.
#[derive(Debug, Serialize, Deserialize)]
pub struct AbortRecord {
    pub step: u64,
    pub detail: String,
    pub last_step: Option<StepMetrics>,
}

/// Evaluation state that stays fixed for a whole run.
pub struct Evaluator {
    probe: Tensor,
}

impl Evaluator {
    /// The probe latents depend only on the seed, so every record of a run
    /// (and of any resumed continuation) uses the same set.
    pub fn new(spec: &ExperimentSpec) -> Result<Self> {
        let mut s = LatentSampler::new(
            spec.train.latent_dim,
            spec.train.latent_distribution,
            stream(spec.train.seed, Stream::Evaluation),
        )?;
        Ok(Self {
            probe: s.sample(spec.probe_samples)?,
        })
    }

    pub fn probe(&self) -> &Tensor {
        &self.probe
    }

    /// Scores the current state; a pure function of the trainer, the seed and `t.step()`.
    pub fn evaluate(&self, spec: &ExperimentSpec, t: &Trainer) -> Result<Evaluation> {
        let step = t.step();
        let seed = spec.train.seed;
        let grid = t.grid().clone();
        let mut reals = RealSampler::new(grid.clone(), keyed_stream(seed, Stream::Evaluation, 2 * step));
        let mut lat = LatentSampler::new(
            spec.train.latent_dim,
            spec.train.latent_distribution,
            keyed_stream(seed, Stream::Evaluation, 2 * step + 1),
        )?;
        let norm = spec.train.norm;
        let d = &t.discriminator;
        let g = &t.generator;

        let x_real = reals.sample(spec.snapshot_samples)?;
        let x_gen = g.sample(&lat.sample(spec.snapshot_samples)?)?;
        let loss_real = mean_row_norm(&x_real, &d.reconstruct(&x_real)?, norm);
        let loss_gen = mean_row_norm(&x_gen, &d.reconstruct(&x_gen)?, norm);
        let loss_constraint =
            mean_row_norm(&self.probe, &d.embed(&g.sample(&self.probe)?)?, norm);
        let snapshot = LatentSnapshot::capture(step, d, &x_real, &x_gen)?;

        let samples = g.sample(&lat.sample(spec.eval_samples)?)?;
        let coverage = mode_coverage(&samples, &grid)?;
        let k = t.equilibrium().k;
        let record = MetricsRecord {
            step,
            loss_real,
            loss_gen,
            loss_constraint,
            k,
            convergence_measure: convergence_measure(loss_real, loss_gen, spec.train.gamma),
            var_real: snapshot.var_real,
            var_gen: snapshot.var_gen,
            modes_covered: coverage.modes_covered,
            hq_fraction: coverage.hq_fraction,
        };
        if !record_is_finite(&record) {
            return Err(Error::Diverged {
                step,
                detail: format!("non-finite evaluation record {record:?}"),
            });
        }
        Ok(Evaluation {
            record,
            coverage,
            snapshot,
            samples,
            real_samples: x_real,
        })
    }
}

/// Output of [`Evaluator::evaluate`].
pub struct Evaluation {
    pub record: MetricsRecord,
    pub coverage: ModeCoverageReport,
    pub snapshot: LatentSnapshot,
    /// Generated points scored for coverage.
    pub samples: Tensor,
    pub real_samples: Tensor,
}

fn record_is_finite(r: &MetricsRecord) -> bool {
    [
        r.loss_real,
        r.loss_gen,
        r.loss_constraint,
        r.convergence_measure,
        r.var_real,
        r.var_gen,
    ]
    .iter()
    .all(|v| v.is_finite())
}

pub(crate) fn mean_row_norm(a: &Tensor, b: &Tensor, norm: Norm) -> f64 {
    let total: f64 = a
        .row_iter()
        .zip(b.row_iter())
        .map(|(x, y)| {
            let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
            crate::tensor::row_norm(&d, norm)
        })
        .sum();
    total / a.rows() as f64
}

/// Trains from scratch as `spec` describes and writes every artifact under `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunArtifacts> {
    spec.validate()?;
    prepare_dir(&spec.output_dir)?;
    let path = spec.output_dir.join(files::SPEC);
    fs::write(&path, spec.to_toml()).map_err(|e| Error::io(&path, e))?;
    let trainer = Trainer::new(spec.train.clone(), spec.dataset.grid()?)?;
    drive(spec, trainer, spec.train.steps, &spec.output_dir)
}

/// Loads a checkpoint and trains `extra_steps` more, writing a fresh set of artifacts to `out_dir`.
///
/// The first record is re-evaluated at the checkpoint's step and therefore
/// equals the last record of the run that wrote the checkpoint.
pub fn resume_experiment(checkpoint: &Path, extra_steps: u64, out_dir: &Path) -> Result<RunArtifacts> {
    let c = Checkpoint::load(checkpoint)?;
    let (mut spec, trainer) = c.restore()?;
    spec.output_dir = out_dir.to_path_buf();
    prepare_dir(out_dir)?;
    let path = out_dir.join(files::SPEC);
    fs::write(&path, spec.to_toml()).map_err(|e| Error::io(&path, e))?;
    drive(&spec, trainer, extra_steps, out_dir)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join(files::SNAPSHOTS)).map_err(|e| Error::io(dir, e))?;
    // probe writability before any compute
    let probe = dir.join(".write-test");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

fn drive(spec: &ExperimentSpec, mut t: Trainer, steps: u64, dir: &Path) -> Result<RunArtifacts> {
    let num_modes = t.grid().num_modes();
    let eval = Evaluator::new(spec)?;
    let mut records = Vec::new();
    let mut trace: Vec<StepMetrics> = Vec::new();
    let end = t.step() + steps;

    let first = eval.evaluate(spec, &t)?;
    write_snapshot(dir, spec, &first)?;
    records.push(first.record);
    let mut last = first;

    while t.step() < end {
        match t.train_step() {
            Ok(m) => trace.push(m),
            Err(Error::Diverged { step, detail }) => {
                let abort = AbortRecord {
                    step,
                    detail,
                    last_step: trace.last().copied(),
                };
                let p = dir.join(files::ABORT);
                let text = serde_json::to_string_pretty(&abort).map_err(|e| Error::format(&p, e))?;
                fs::write(&p, text).map_err(|err| Error::io(&p, err))?;
                write_metrics(&dir.join(files::METRICS), &records, num_modes)?;
                write_trace(&dir.join(files::TRACE), &trace)?;
                return Err(Error::Diverged {
                    step: abort.step,
                    detail: abort.detail,
                });
            }
            Err(e) => return Err(e),
        }
        if t.step().is_multiple_of(spec.snapshot_every) || t.step() == end {
            let ev = eval.evaluate(spec, &t)?;
            write_snapshot(dir, spec, &ev)?;
            records.push(ev.record);
            last = ev;
        }
    }

    write_metrics(&dir.join(files::METRICS), &records, num_modes)?;
    write_trace(&dir.join(files::TRACE), &trace)?;
    Checkpoint::capture(spec, &t).save(&dir.join(files::CHECKPOINT))?;
    let p = dir.join(files::COVERAGE);
    let text = serde_json::to_string_pretty(&last.coverage).map_err(|e| Error::format(&p, e))?;
    fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    Ok(RunArtifacts {
        dir: dir.to_path_buf(),
        spec: spec.clone(),
        records,
        trace,
        final_coverage: last.coverage,
        trainer: t,
    })
}

/// PCA projection CSV, latent scatter and sample scatter for one record.
pub fn write_snapshot(dir: &Path, spec: &ExperimentSpec, ev: &Evaluation) -> Result<()> {
    let step = ev.record.step;
    let snap_dir = dir.join(files::SNAPSHOTS);
    let s = &ev.snapshot;
    let title = format!(
        "{} step {step}: Var(real) = {:.3}, Var(gen) = {:.3}",
        spec.label, s.var_real, s.var_gen
    );
    match s.project() {
        Ok((_, real, gen)) => {
            let mut csv = String::from("set,pc1,pc2\n");
            for (set, m) in [("real", &real), ("gen", &gen)] {
                for r in m.row_iter() {
                    csv.push_str(&format!("{set},{},{}\n", r[0], r[1]));
                }
            }
            let p = snap_dir.join(format!("pca-{step:06}.csv"));
            fs::write(&p, csv).map_err(|e| Error::io(&p, e))?;
            let svg = scatter_svg(
                &title,
                &[
                    Series { label: "Enc(x) real", points: &real, colour: REAL_COLOUR, radius: 1.5 },
                    Series { label: "Enc(G(z)) generated", points: &gen, colour: GEN_COLOUR, radius: 1.5 },
                ],
                &[],
            );
            let p = snap_dir.join(format!("pca-{step:06}.svg"));
            fs::write(&p, svg).map_err(|e| Error::io(&p, e))?;
        }
        // a collapsed encoder has no principal axes; the record still carries the variances
        Err(Error::DegenerateData(_)) => {}
        Err(e) => return Err(e),
    }
    let svg = scatter_svg(
        &format!(
            "{} step {step}: {} modes, hq {:.3}",
            spec.label, ev.coverage.modes_covered, ev.coverage.hq_fraction
        ),
        &[
            Series { label: "real", points: &ev.real_samples, colour: REAL_COLOUR, radius: 1.2 },
            Series { label: "generated", points: &ev.samples, colour: GEN_COLOUR, radius: 1.2 },
        ],
        &[],
    );
    let p = snap_dir.join(format!("samples-{step:06}.svg"));
    fs::write(&p, svg).map_err(|e| Error::io(&p, e))
}
