use std::path::{Path, PathBuf};
use std::process::ExitCode;

use began_lab::analysis::plot::{scatter_svg, Series, GEN_COLOUR};
use began_lab::harness::{
    compare_runs, files, resume_experiment, run_experiment, run_sweep, write_snapshot, Checkpoint,
    Evaluator, ExperimentSpec, LoadedRun, SCHEMA_VERSION,
};
use began_lab::latent::{
    dimension_sweep, interpolate, one_shot_encode, z_star_search, SearchInit, ZSearchConfig,
};
use began_lab::rng::{keyed_stream, Stream};
use began_lab::tensor::Tensor;
use began_lab::Error;
use clap::{Args, Parser, Subcommand};

/// Train and inspect BEGAN / BEGAN-CS on the 25-Gaussian grid.
#[derive(Parser)]
#[command(name = "began-lab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one run, a seed sweep, or continue from a checkpoint.
    Train(TrainArgs),
    /// Side-by-side report of two finished runs.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        /// Also write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Re-evaluate coverage and the latent PCA from a checkpoint.
    Analyze {
        checkpoint: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Invert the generator for a target point.
    Zsearch {
        checkpoint: PathBuf,
        /// Target point `x,y`.
        #[arg(long, value_parser = parse_vec)]
        target: Point,
        #[arg(long, default_value = "random")]
        init: InitArg,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-2)]
        lr: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Clamp the latent into [-1, 1] after every step.
        #[arg(long)]
        project_to_box: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the loss history here as CSV.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Vary one latent coordinate of Enc(x) and plot the generated points.
    SweepDim {
        checkpoint: PathBuf,
        /// Point whose encoding is swept, `x,y`.
        #[arg(long, value_parser = parse_vec)]
        from: Point,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Interpolate between the encodings of two points.
    Interpolate {
        checkpoint: PathBuf,
        #[arg(long, value_parser = parse_vec, allow_hyphen_values = true)]
        from: Point,
        #[arg(long, value_parser = parse_vec, allow_hyphen_values = true)]
        to: Point,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long, short)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// Experiment file; defaults apply to every key it omits.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override any experiment key, e.g. `--set gamma=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    snapshot_every: Option<u64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    /// Run once per listed seed, concurrently, into `<output>/seed-<n>`.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Continue this checkpoint for `--steps` more steps.
    #[arg(long, conflicts_with_all = ["config", "overrides", "seeds"])]
    resume: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum InitArg {
    Random,
    Encoder,
}

/// Comma-separated coordinates.
#[derive(Clone, Debug)]
struct Point(Vec<f64>);

fn parse_vec(s: &str) -> Result<Point, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()
        .map(Point)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::Diverged { .. } | Error::NonFiniteGradient { .. } => 3,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Train(a) => train(a),
        Cmd::Compare { run_a, run_b, json } => {
            let c = compare_runs(&LoadedRun::load(&run_a)?, &LoadedRun::load(&run_b)?)?;
            print!("{}", c.render());
            if let Some(p) = json {
                let text = serde_json::to_string_pretty(&c).expect("report serializes");
                std::fs::write(&p, text).map_err(|e| Error::Io { path: p, source: e })?;
            }
            Ok(())
        }
        Cmd::Analyze { checkpoint, output } => {
            let (spec, t) = Checkpoint::load(&checkpoint)?.restore()?;
            let snaps = output.join(files::SNAPSHOTS);
            std::fs::create_dir_all(&snaps).map_err(|e| Error::Io { path: snaps, source: e })?;
            let ev = Evaluator::new(&spec)?.evaluate(&spec, &t)?;
            write_snapshot(&output, &spec, &ev)?;
            let r = ev.record;
            println!(
                "step {}: modes {} / {}, hq {:.4}, Var(real) {:.4}, Var(gen) {:.4}, L_c {:.4}, k {:.4}",
                r.step,
                r.modes_covered,
                t.grid().num_modes(),
                r.hq_fraction,
                r.var_real,
                r.var_gen,
                r.loss_constraint,
                r.k
            );
            Ok(())
        }
        Cmd::Zsearch { checkpoint, target, init, max_iters, lr, tol, project_to_box, seed, history } => {
            let (_, t) = Checkpoint::load(&checkpoint)?.restore()?;
            let cfg = ZSearchConfig {
                max_iters,
                lr,
                tol,
                init: match init {
                    InitArg::Random => SearchInit::Random,
                    InitArg::Encoder => SearchInit::EncoderWarmStart,
                },
                project_to_box,
            };
            let mut rng = keyed_stream(seed, Stream::Search, 0);
            let r = z_star_search(&target.0, &t.generator, Some(&t.discriminator), &cfg, &mut rng)?;
            let x = t.generator.sample(&Tensor::matrix(1, r.z.len(), r.z.clone())?)?;
            println!(
                "loss {:.6e} after {} iterations (converged: {}); G(z*) = {:?}",
                r.loss,
                r.iterations,
                r.converged,
                x.data()
            );
            if let Some(p) = history {
                let mut csv = String::from("iteration,loss\n");
                for (i, l) in r.loss_history.iter().enumerate() {
                    csv.push_str(&format!("{i},{l}\n"));
                }
                std::fs::write(&p, csv).map_err(|e| Error::Io { path: p, source: e })?;
            }
            Ok(())
        }
        Cmd::SweepDim { checkpoint, from, dim, lo, hi, step, output } => {
            let (_, t) = Checkpoint::load(&checkpoint)?.restore()?;
            let z = one_shot_encode(&from.0, &t.discriminator)?;
            let zs = dimension_sweep(&z, dim, lo, hi, step)?;
            write_latent_path(&t, &zs, &output, &format!("sweep of z[{dim}] over [{lo}, {hi}]"))
        }
        Cmd::Interpolate { checkpoint, from, to, steps, output } => {
            let (_, t) = Checkpoint::load(&checkpoint)?.restore()?;
            let za = one_shot_encode(&from.0, &t.discriminator)?;
            let zb = one_shot_encode(&to.0, &t.discriminator)?;
            let zs = interpolate(&za, &zb, steps)?;
            write_latent_path(&t, &zs, &output, "interpolation between Enc(a) and Enc(b)")
        }
    }
}

fn train(a: TrainArgs) -> Result<(), Error> {
    if let Some(ckpt) = a.resume {
        let out = a.output.ok_or_else(|| Error::Config("--resume needs --output".into()))?;
        let r = resume_experiment(&ckpt, a.steps.unwrap_or(0), &out)?;
        report(&r.records, &r.dir);
        return Ok(());
    }
    let spec = build_spec(&a)?;
    if a.seeds.is_empty() {
        let r = run_experiment(&spec)?;
        report(&r.records, &r.dir);
        return Ok(());
    }
    let mut first_err = None;
    for (seed, r) in a.seeds.iter().zip(run_sweep(&spec, &a.seeds, a.threads)) {
        match r {
            Ok(r) => report(&r.records, &r.dir),
            Err(e) => {
                eprintln!("seed {seed}: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn build_spec(a: &TrainArgs) -> Result<ExperimentSpec, Error> {
    let mut table: toml::Table = match &a.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(format!("{}: {}", p.display(), e.message())))?,
        None => toml::Table::new(),
    };
    table
        .entry("schema_version")
        .or_insert(toml::Value::Integer(SCHEMA_VERSION.into()));
    for kv in &a.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{kv}` is not KEY=VALUE")))?;
        let (k, v) = (k.trim(), v.trim());
        // bare words are taken as strings
        let value = format!("x = {v}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("x"))
            .unwrap_or_else(|| toml::Value::String(v.to_string()));
        table.insert(k.to_string(), value);
    }
    let mut set = |k: &str, v: toml::Value| {
        table.insert(k.to_string(), v);
    };
    if let Some(s) = a.steps {
        set("steps", toml::Value::Integer(s as i64));
    }
    if let Some(s) = a.seed {
        set("seed", toml::Value::Integer(s as i64));
    }
    if let Some(v) = &a.variant {
        set("variant", toml::Value::String(v.replace('-', "_")));
    }
    if let Some(s) = a.snapshot_every {
        set("snapshot_every", toml::Value::Integer(s as i64));
    }
    if let Some(o) = &a.output {
        set("output_dir", toml::Value::String(o.display().to_string()));
    }
    if let Some(l) = &a.label {
        set("label", toml::Value::String(l.clone()));
    }
    ExperimentSpec::from_toml(&toml::to_string(&table).expect("table serializes"))
}

fn report(records: &[began_lab::harness::MetricsRecord], dir: &Path) {
    if let Some(r) = records.last() {
        println!(
            "{}: step {} modes {} hq {:.4} k {:.4} L_c {:.4} M {:.4}",
            dir.display(),
            r.step,
            r.modes_covered,
            r.hq_fraction,
            r.k,
            r.loss_constraint,
            r.convergence_measure
        );
    }
}

fn write_latent_path(
    t: &began_lab::began::Trainer,
    zs: &[Vec<f64>],
    out: &Path,
    title: &str,
) -> Result<(), Error> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io { path: out.into(), source: e })?;
    let dim = zs[0].len();
    let flat: Vec<f64> = zs.iter().flatten().copied().collect();
    let x = t.generator.sample(&Tensor::matrix(zs.len(), dim, flat)?)?;
    let mut csv = String::from("index,x,y");
    for i in 0..dim {
        csv.push_str(&format!(",z{i}"));
    }
    csv.push('\n');
    for (i, (z, p)) in zs.iter().zip(x.row_iter()).enumerate() {
        csv.push_str(&format!("{i},{},{}", p[0], p[1]));
        for v in z {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    let p = out.join("latents.csv");
    std::fs::write(&p, csv).map_err(|e| Error::Io { path: p, source: e })?;
    let svg = scatter_svg(
        title,
        &[Series { label: "G(z)", points: &x, colour: GEN_COLOUR, radius: 3.0 }],
        t.grid().means(),
    );
    let p = out.join("points.svg");
    std::fs::write(&p, svg).map_err(|e| Error::Io { path: p, source: e })?;
    println!("wrote {} latents to {}", zs.len(), out.display());
    Ok(())
}
