use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::run::{run_experiment, RunArtifacts};
use super::spec::ExperimentSpec;
use crate::error::Result;

/// Runs `spec` once per seed on up to `threads` worker threads.
///
/// Runs share nothing, so results are identical to running them one by one;
/// they come back in `seeds` order.
pub fn run_sweep(spec: &ExperimentSpec, seeds: &[u64], threads: usize) -> Vec<Result<RunArtifacts>> {
    let specs: Vec<ExperimentSpec> = seeds.iter().map(|&s| spec.with_seed(s)).collect();
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<RunArtifacts>>>> = specs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, specs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(s) = specs.get(i) else { break };
                let r = run_experiment(s);
                *slots[i].lock().expect("no panics while holding the slot") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("workers finished").expect("every slot filled"))
        .collect()
}
