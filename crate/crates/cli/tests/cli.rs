use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_began-lab")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

const SMALL: [&str; 12] = [
    "--set", "hidden_width=16",
    "--set", "latent_dim=4",
    "--set", "batch_size=32",
    "--set", "eval_samples=200",
    "--set", "snapshot_samples=64",
    "--set", "probe_samples=64",
];

fn train(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["train", "--steps", "20", "--snapshot-every", "10", "-o", out];
    args.extend(SMALL);
    args.extend(extra);
    cli(&args)
}

#[test]
fn training_writes_a_run_and_exits_zero() {
    let tmp = TempDir::new().unwrap();
    let o = train(tmp.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["spec.toml", "metrics.csv", "trace.csv", "checkpoint.json", "coverage.json"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    let spec = std::fs::read_to_string(tmp.path().join("spec.toml")).unwrap();
    assert!(spec.contains("hidden_width = 16"));
}

#[test]
fn unknown_key_is_exit_code_two() {
    let tmp = TempDir::new().unwrap();
    let o = train(tmp.path(), &["--set", "learning_rate=0.1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("learning_rate"));
}

#[test]
fn invalid_value_and_missing_config_are_exit_code_two() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&train(tmp.path(), &["--set", "gamma=-1"])), 2);
    assert_eq!(code(&train(tmp.path(), &["--set", "variant=wgan"])), 2);
    assert_eq!(code(&cli(&["train", "--config", "/nonexistent/spec.toml"])), 2);
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "schema_version = 99\n").unwrap();
    assert_eq!(code(&cli(&["train", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn config_file_and_overrides_combine() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("exp.toml");
    std::fs::write(&cfg, "schema_version = 1\nvariant = \"began\"\nseed = 9\n").unwrap();
    let run = tmp.path().join("run");
    let mut args = vec!["train", "--config", cfg.to_str().unwrap(), "--steps", "5", "-o", run.to_str().unwrap()];
    args.extend(SMALL);
    args.extend(["--set", "seed=4"]);
    assert_eq!(code(&cli(&args)), 0);
    let spec = std::fs::read_to_string(run.join("spec.toml")).unwrap();
    assert!(spec.contains("variant = \"began\""));
    assert!(spec.contains("seed = 4"));
}

#[test]
fn divergence_is_exit_code_three() {
    let tmp = TempDir::new().unwrap();
    let mut args = vec!["train", "--steps", "500", "-o", tmp.path().to_str().unwrap()];
    args.extend(SMALL);
    args.extend(["--set", "lr_d=1e150", "--set", "lr_g=1e150"]);
    let o = cli(&args);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(tmp.path().join("abort.json").exists());
}

#[test]
fn inspection_verbs_run_on_a_checkpoint() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(code(&train(&a, &[])), 0);
    assert_eq!(code(&train(&b, &["--variant", "began"])), 0);
    let ckpt = a.join("checkpoint.json");
    let ckpt = ckpt.to_str().unwrap();

    let o = cli(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("began_cs") && text.contains("modes covered"));

    let an = tmp.path().join("an");
    assert_eq!(code(&cli(&["analyze", ckpt, "-o", an.to_str().unwrap()])), 0);
    assert!(an.join("snapshots").join("samples-000020.svg").exists());

    let hist = tmp.path().join("hist.csv");
    let o = cli(&["zsearch", ckpt, "--target", "0.5,0.5", "--max-iters", "50", "--history", hist.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(&hist).unwrap().starts_with("iteration,loss\n"));

    let sw = tmp.path().join("sw");
    let o = cli(&["sweep-dim", ckpt, "--from", "0,0", "--dim", "1", "-o", sw.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rows = std::fs::read_to_string(sw.join("latents.csv")).unwrap().lines().count();
    assert_eq!(rows, 12, "header plus 11 latents");
    assert!(sw.join("points.svg").exists());

    let ip = tmp.path().join("ip");
    let o = cli(&["interpolate", ckpt, "--from=-2,-2", "--to", "2,2", "--steps", "5", "-o", ip.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(ip.join("latents.csv")).unwrap().lines().count(), 6);

    let o = cli(&["sweep-dim", ckpt, "--from", "0,0", "--dim", "99", "-o", sw.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn resume_for_zero_steps_repeats_the_last_row() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let r = tmp.path().join("r");
    assert_eq!(code(&train(&a, &[])), 0);
    let ckpt = a.join("checkpoint.json");
    let o = cli(&["train", "--resume", ckpt.to_str().unwrap(), "--steps", "0", "-o", r.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let last = |d: &Path| std::fs::read_to_string(d.join("metrics.csv")).unwrap().lines().last().unwrap().to_string();
    assert_eq!(last(&a), last(&r));
}

#[test]
fn seed_sweep_writes_one_directory_per_seed() {
    let tmp = TempDir::new().unwrap();
    let o = train(tmp.path(), &["--seeds", "1,2", "--threads", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(tmp.path().join("seed-1").join("metrics.csv").exists());
    assert!(tmp.path().join("seed-2").join("metrics.csv").exists());
}
