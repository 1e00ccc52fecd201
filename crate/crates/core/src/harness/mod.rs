//! Experiment orchestration: flat config files, seeded runs, metric CSVs,
//! snapshots, checkpoints, run comparison and seed sweeps.

mod checkpoint;
mod compare;
mod metrics;
mod run;
mod spec;
mod sweep;

pub use checkpoint::Checkpoint;
pub use compare::{compare_runs, Comparison, Deltas, LoadedRun, RunSummary};
pub use metrics::{
    read_metrics, read_trace, write_metrics, write_trace, MetricsRecord, METRICS_COLUMNS,
    TRACE_COLUMNS,
};
pub use run::{
    files, resume_experiment, run_experiment, write_snapshot, AbortRecord, Evaluation, Evaluator,
    RunArtifacts,
};
pub use spec::{DatasetParams, ExperimentSpec, SCHEMA_VERSION};
pub use sweep::run_sweep;
