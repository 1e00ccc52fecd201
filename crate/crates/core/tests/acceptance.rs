//! Exit criteria, each at its stated tolerance. Prints one PASS/FAIL line per
//! criterion. Set `ACCEPTANCE_STRICT=1` to exit non-zero when any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use began_lab::analysis::{detect_k_drop, signal_regions, KDropParams};
use began_lab::began::{EquilibriumState, Trainer, Variant};
use began_lab::data::{LatentSampler, RealSampler};
use began_lab::harness::{files, read_metrics, read_trace, run_experiment, ExperimentSpec, MetricsRecord};
use began_lab::latent::{one_shot_encode, z_star_search, SearchInit, ZSearchConfig};
use began_lab::rng::{keyed_stream, Stream};
use began_lab::tensor::Tensor;
use began_lab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(v: &Verdict) {
    let tag = if v.pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {} ({}): {}", v.id, v.name, v.detail);
    std::io::stdout().flush().ok();
}

fn note(s: &str) {
    println!("    {s}");
    std::io::stdout().flush().ok();
}

/// A finished or aborted toy run.
struct Run {
    seed: u64,
    variant: Variant,
    dir: PathBuf,
    records: Vec<MetricsRecord>,
    ks: Vec<f64>,
    trainer: Option<Trainer>,
    aborted: Option<String>,
}

fn toy_spec(root: &Path, variant: Variant, alpha: f64, seed: u64, tag: &str) -> ExperimentSpec {
    let mut s = ExperimentSpec::default();
    s.train.variant = variant;
    s.train.alpha = alpha;
    s.train.seed = seed;
    s.label = format!("{tag}-seed{seed}");
    s.output_dir = root.join(tag).join(format!("seed-{seed}"));
    s
}

fn run(spec: &ExperimentSpec) -> Run {
    let t0 = Instant::now();
    let dir = spec.output_dir.clone();
    let (records, ks, trainer, aborted) = match run_experiment(spec) {
        Ok(a) => (a.records, a.trace.iter().map(|m| m.k).collect(), Some(a.trainer), None),
        Err(Error::Diverged { step, detail }) => {
            let records = read_metrics(&dir.join(files::METRICS), 25).unwrap_or_default();
            let ks = read_trace(&dir.join(files::TRACE))
                .map(|t| t.iter().map(|m| m.k).collect())
                .unwrap_or_default();
            (records, ks, None, Some(format!("aborted at step {step}: {detail}")))
        }
        Err(e) => panic!("{}: {e}", spec.label),
    };
    let r = Run {
        seed: spec.train.seed,
        variant: spec.train.variant,
        dir,
        records,
        ks,
        trainer,
        aborted,
    };
    match (r.records.last(), &r.aborted) {
        (_, Some(a)) => note(&format!("{}: {a}", spec.label)),
        (Some(m), None) => note(&format!(
            "{}: {:.0}s, step {} modes {} hq {:.3} k {:.3} L_real {:.4} L_gen {:.4} L_c {:.4}",
            spec.label,
            t0.elapsed().as_secs_f64(),
            m.step,
            m.modes_covered,
            m.hq_fraction,
            m.k,
            m.loss_real,
            m.loss_gen,
            m.loss_constraint
        )),
        (None, None) => {}
    }
    r
}

fn criterion_1() -> Verdict {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for seed in 0..100 {
        let e = common::GradInstance::random(seed).relative_error(1e-6);
        worst = worst.max(e);
        if !(e < 1e-4) {
            failures += 1;
        }
    }
    Verdict {
        id: 1,
        name: "gradient correctness",
        pass: failures == 0,
        detail: format!("{failures}/100 instances above 1e-4; worst relative error {worst:.2e}"),
    }
}

// the oracle spells the clamp out rather than calling what the library calls
#[allow(clippy::manual_clamp)]
fn criterion_2(runs: &[&Run]) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let k: f64 = rng.random_range(0.0..=1.0);
        let gamma: f64 = rng.random_range(0.0..30.0);
        let lambda: f64 = rng.random_range(0.0..0.1);
        let lr: f64 = rng.random_range(0.0..10.0);
        let lg: f64 = rng.random_range(0.0..100.0);
        let raw = k + lambda * (gamma * lr - lg);
        let want = if raw < 0.0 { 0.0 } else if raw > 1.0 { 1.0 } else { raw };
        if EquilibriumState::new(k, lambda, gamma).update_k(lr, lg).k != want {
            mismatches += 1;
        }
    }
    let mut logged = 0usize;
    let mut outside = 0usize;
    for r in runs {
        let values = r.ks.iter().chain(r.records.iter().map(|m| &m.k));
        for k in values {
            logged += 1;
            if !(0.0..=1.0).contains(k) {
                outside += 1;
            }
        }
    }
    Verdict {
        id: 2,
        name: "equilibrium invariant",
        pass: mismatches == 0 && outside == 0 && runs.len() == 10 && logged > 0,
        detail: format!(
            "{outside} of {logged} logged k outside [0, 1] across {} runs; {mismatches}/1000 update mismatches",
            runs.len()
        ),
    }
}

fn passes_coverage(r: &Run) -> bool {
    r.aborted.is_none()
        && r.records.last().is_some_and(|m| m.modes_covered >= 20 && m.hq_fraction >= 0.7)
}

fn criterion_3(cs: &[Run]) -> Verdict {
    let passing = cs.iter().filter(|r| passes_coverage(r)).count();
    let summary: Vec<String> = cs
        .iter()
        .map(|r| match r.records.last() {
            Some(m) if r.aborted.is_none() => format!("seed {}: {}/25 hq {:.3}", r.seed, m.modes_covered, m.hq_fraction),
            _ => format!("seed {}: aborted", r.seed),
        })
        .collect();
    Verdict {
        id: 3,
        name: "toy mode coverage",
        pass: passing >= 3,
        detail: format!("{passing}/5 seeds reach ≥ 20 modes with hq ≥ 0.7 ({})", summary.join("; ")),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

/// `(L_c final / L_c initial, random-latent median / one-shot median)`.
fn constraint_effect(r: &Run) -> Option<(f64, f64)> {
    let t = r.trainer.as_ref()?;
    let (first, last) = (r.records.first()?, r.records.last()?);
    let shrink = last.loss_constraint / first.loss_constraint;

    let mut reals = RealSampler::new(t.grid().clone(), keyed_stream(r.seed, Stream::Search, 1));
    let x = reals.sample(256).ok()?;
    let mut lat = LatentSampler::new(
        t.config().latent_dim,
        t.config().latent_distribution,
        keyed_stream(r.seed, Stream::Search, 2),
    )
    .ok()?;
    let via_enc = t.generator.sample(&t.discriminator.embed(&x).ok()?).ok()?;
    let via_rand = t.generator.sample(&lat.sample(256).ok()?).ok()?;
    let dist = |a: &Tensor| -> Vec<f64> {
        x.row_iter()
            .zip(a.row_iter())
            .map(|(p, q)| p.iter().zip(q).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt())
            .collect()
    };
    let ratio = median(dist(&via_rand)) / median(dist(&via_enc));
    Some((shrink, ratio))
}

fn criterion_4(cs: &[Run]) -> Verdict {
    let mut measured = Vec::new();
    for r in cs {
        match constraint_effect(r) {
            Some((shrink, ratio)) => {
                note(&format!(
                    "seed {}: L_c final/initial {shrink:.3}, one-shot advantage {ratio:.2}x{}",
                    r.seed,
                    if passes_coverage(r) { "" } else { " (not a passing coverage run)" }
                ));
                measured.push((passes_coverage(r), shrink, ratio));
            }
            None => note(&format!("seed {}: no final checkpoint", r.seed)),
        }
    }
    let qualifying: Vec<_> = measured.iter().filter(|m| m.0).collect();
    let ok = qualifying.iter().all(|&&(_, s, q)| s <= 0.5 && q >= 5.0);
    Verdict {
        id: 4,
        name: "constraint-loss effect",
        // holds over an empty set only vacuously; that is reported as a failure
        pass: !qualifying.is_empty() && ok,
        detail: if qualifying.is_empty() {
            "no run passed criterion 3, so there is no run to check".into()
        } else {
            format!("{} qualifying runs, all within bounds: {ok}", qualifying.len())
        },
    }
}

fn criterion_5(cs: &[Run]) -> Verdict {
    let Some(r) = cs.iter().find(|r| r.trainer.is_some()) else {
        return Verdict {
            id: 5,
            name: "z*-search",
            pass: false,
            detail: "no BEGAN-CS run finished, so there is no trained generator".into(),
        };
    };
    let t = r.trainer.as_ref().expect("checked");
    let mut lat = LatentSampler::new(
        t.config().latent_dim,
        t.config().latent_distribution,
        keyed_stream(r.seed, Stream::Search, 3),
    )
    .expect("valid sampler");
    let targets = t.generator.sample(&lat.sample(32).expect("32 latents")).expect("forward");
    let mut rng = keyed_stream(r.seed, Stream::Search, 4);
    let random = ZSearchConfig::default();
    let warm = ZSearchConfig { init: SearchInit::EncoderWarmStart, ..ZSearchConfig::default() };
    let mut solved = 0;
    let mut it_random = Vec::new();
    let mut it_warm = Vec::new();
    for x in targets.row_iter() {
        let a = z_star_search(x, &t.generator, None, &random, &mut rng).expect("search");
        if a.loss < 1e-3 {
            solved += 1;
        }
        it_random.push(a.iterations as f64);
        let b = z_star_search(x, &t.generator, Some(&t.discriminator), &warm, &mut rng).expect("search");
        it_warm.push(b.iterations as f64);
        debug_assert_eq!(one_shot_encode(x, &t.discriminator).map(|z| z.len()).ok(), Some(t.config().latent_dim));
    }
    let (mr, mw) = (median(it_random), median(it_warm));
    Verdict {
        id: 5,
        name: "z*-search",
        pass: solved as f64 >= 0.9 * 32.0 && mw < mr,
        detail: format!(
            "seed-{} generator: {solved}/32 random starts below 1e-3; median iterations warm {mw} vs random {mr}",
            r.seed
        ),
    }
}

fn criterion_6() -> Verdict {
    let (mut ev, mut comp) = (0.0f64, 0.0f64);
    for seed in 1000..1050 {
        let (e, c) = common::pca_oracle_deviation(&common::random_latents(seed));
        ev = ev.max(e);
        comp = comp.max(c);
    }
    Verdict {
        id: 6,
        name: "PCA oracle equivalence",
        pass: ev < 1e-8 && comp < 1e-8,
        detail: format!("50 matrices; worst eigenvalue deviation {ev:.2e}, component deviation {comp:.2e}"),
    }
}

fn same_bytes(a: &Path, b: &Path) -> bool {
    match (std::fs::read(a.join(files::METRICS)), std::fs::read(b.join(files::METRICS))) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn criterion_7(root: &Path, plain: &[Run]) -> Verdict {
    let seed = SEEDS[0];
    let zero = run(&toy_spec(root, Variant::BeganCs, 0.0, seed, "began_cs_alpha0"));
    let base = plain.iter().find(|r| r.seed == seed).expect("plain run for the seed");
    let same = same_bytes(&zero.dir, &base.dir);
    Verdict {
        id: 7,
        name: "variant reduction",
        pass: same,
        detail: format!("seed {seed}, full budget: alpha = 0 BEGAN_CS vs BEGAN metrics.csv identical: {same}"),
    }
}

fn criterion_8(root: &Path, cs: &[Run]) -> Verdict {
    let first = &cs[0];
    let again = run(&toy_spec(root, Variant::BeganCs, 0.1, first.seed, "began_cs_repeat"));
    let same = same_bytes(&first.dir, &again.dir);
    Verdict {
        id: 8,
        name: "determinism",
        pass: same,
        detail: format!("BEGAN_CS seed {} repeated at full budget: metrics.csv identical: {same}", first.seed),
    }
}

fn criterion_9() -> Verdict {
    let KDropParams { delta, window } = KDropParams::default();
    let (drops, monotone) = common::k_trace_suite();
    let mut exact = 0;
    for t in &drops {
        let regions = signal_regions(&detect_k_drop(&t.series, delta, window).expect("valid params"));
        if regions.len() == 1 && Some(regions[0].start) == t.drop_at {
            exact += 1;
        } else {
            note(&format!("{}: expected one region at {:?}, got {regions:?}", t.name, t.drop_at));
        }
    }
    let false_pos: usize = monotone
        .iter()
        .map(|t| detect_k_drop(&t.series, delta, window).expect("valid params").len())
        .sum();
    Verdict {
        id: 9,
        name: "collapse signal",
        pass: exact == drops.len() && drops.len() == 10 && false_pos == 0,
        detail: format!(
            "{exact}/{} injected drops flagged exactly; {false_pos} signals on {} monotone traces",
            drops.len(),
            monotone.len()
        ),
    }
}

fn main() {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let _ = std::fs::remove_dir_all(&root);
    let mut verdicts = Vec::new();
    let push = |v: Verdict, all: &mut Vec<Verdict>| {
        report(&v);
        all.push(v);
    };

    push(criterion_1(), &mut verdicts);
    push(criterion_6(), &mut verdicts);
    push(criterion_9(), &mut verdicts);

    note("toy runs: 5 seeds per variant at the default budget");
    let cs: Vec<Run> = SEEDS
        .iter()
        .map(|&s| run(&toy_spec(&root, Variant::BeganCs, 0.1, s, "began_cs")))
        .collect();
    let plain: Vec<Run> = SEEDS
        .iter()
        .map(|&s| run(&toy_spec(&root, Variant::Began, 0.1, s, "began")))
        .collect();
    debug_assert!(plain.iter().all(|r| r.variant == Variant::Began));

    let all: Vec<&Run> = cs.iter().chain(&plain).collect();
    push(criterion_2(&all), &mut verdicts);
    push(criterion_3(&cs), &mut verdicts);
    push(criterion_4(&cs), &mut verdicts);
    push(criterion_5(&cs), &mut verdicts);
    push(criterion_7(&root, &plain), &mut verdicts);
    push(criterion_8(&root, &cs), &mut verdicts);

    verdicts.sort_by_key(|v| v.id);
    println!();
    println!("acceptance summary");
    for v in &verdicts {
        report(v);
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("{} passed, {failed} failed", verdicts.len() - failed);
    // A red criterion is a finding, not a broken build: it is reported above
    // and only fails the target when gating is asked for.
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
