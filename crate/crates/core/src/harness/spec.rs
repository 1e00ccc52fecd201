use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::KDropParams;
use crate::began::TrainConfig;
use crate::data::GaussianGrid;
use crate::error::{Error, Result};

/// Version written into, and required from, every experiment file.
pub const SCHEMA_VERSION: u32 = 1;

/// Geometry of the Gaussian grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetParams {
    pub size: usize,
    pub spacing: f64,
    pub sigma: f64,
}

impl Default for DatasetParams {
    fn default() -> Self {
        Self {
            size: 5,
            spacing: 2.0,
            sigma: 0.05,
        }
    }
}

impl DatasetParams {
    pub fn grid(&self) -> Result<GaussianGrid> {
        GaussianGrid::new(self.size, self.spacing, self.sigma)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub train: TrainConfig,
    pub dataset: DatasetParams,
    /// A metrics record and latent snapshot every this many steps.
    pub snapshot_every: u64,
    pub output_dir: PathBuf,
    pub label: String,
    /// Generated samples scored for mode coverage at each record.
    pub eval_samples: usize,
    /// Real and generated samples embedded for each PCA snapshot.
    pub snapshot_samples: usize,
    /// Fixed latents on which `‖z − Enc(G(z))‖` is tracked.
    pub probe_samples: usize,
    pub kdrop: KDropParams,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            dataset: DatasetParams::default(),
            snapshot_every: 500,
            output_dir: PathBuf::from("runs/default"),
            label: "default".into(),
            eval_samples: 2500,
            snapshot_samples: 512,
            probe_samples: 1024,
            kdrop: KDropParams::default(),
        }
    }
}

/// The non-training half of the flat file.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HarnessKeys {
    schema_version: u32,
    #[serde(default = "d::label")]
    label: String,
    #[serde(default = "d::output_dir")]
    output_dir: PathBuf,
    #[serde(default = "d::snapshot_every")]
    snapshot_every: u64,
    #[serde(default = "d::eval_samples")]
    eval_samples: usize,
    #[serde(default = "d::snapshot_samples")]
    snapshot_samples: usize,
    #[serde(default = "d::probe_samples")]
    probe_samples: usize,
    #[serde(default = "d::grid_size")]
    grid_size: usize,
    #[serde(default = "d::grid_spacing")]
    grid_spacing: f64,
    #[serde(default = "d::grid_sigma")]
    grid_sigma: f64,
    #[serde(default = "d::kdrop_delta")]
    kdrop_delta: f64,
    #[serde(default = "d::kdrop_window")]
    kdrop_window: usize,
}

mod d {
    use super::*;

    fn base() -> ExperimentSpec {
        ExperimentSpec::default()
    }
    pub fn label() -> String {
        base().label
    }
    pub fn output_dir() -> PathBuf {
        base().output_dir
    }
    pub fn snapshot_every() -> u64 {
        base().snapshot_every
    }
    pub fn eval_samples() -> usize {
        base().eval_samples
    }
    pub fn snapshot_samples() -> usize {
        base().snapshot_samples
    }
    pub fn probe_samples() -> usize {
        base().probe_samples
    }
    pub fn grid_size() -> usize {
        base().dataset.size
    }
    pub fn grid_spacing() -> f64 {
        base().dataset.spacing
    }
    pub fn grid_sigma() -> f64 {
        base().dataset.sigma
    }
    pub fn kdrop_delta() -> f64 {
        base().kdrop.delta
    }
    pub fn kdrop_window() -> usize {
        base().kdrop.window
    }
}

fn train_keys() -> Vec<String> {
    match toml::Table::try_from(TrainConfig::default()) {
        Ok(t) => t.keys().cloned().collect(),
        Err(_) => unreachable!("TrainConfig serializes to a table"),
    }
}

impl ExperimentSpec {
    /// Parses the flat `key = value` form; unknown keys are errors.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            Error::Config(format!("malformed experiment file: {}", e.message()))
        })?;
        let owned = train_keys();
        let (train, rest): (toml::Table, toml::Table) =
            table.into_iter().partition(|(k, _)| owned.contains(k));
        let train: TrainConfig = train
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let h: HarnessKeys = rest
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        if h.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                h.schema_version
            )));
        }
        let spec = Self {
            train,
            dataset: DatasetParams {
                size: h.grid_size,
                spacing: h.grid_spacing,
                sigma: h.grid_sigma,
            },
            snapshot_every: h.snapshot_every,
            output_dir: h.output_dir,
            label: h.label,
            eval_samples: h.eval_samples,
            snapshot_samples: h.snapshot_samples,
            probe_samples: h.probe_samples,
            kdrop: KDropParams {
                delta: h.kdrop_delta,
                window: h.kdrop_window,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// The flat file form, keys sorted.
    pub fn to_toml(&self) -> String {
        let h = HarnessKeys {
            schema_version: SCHEMA_VERSION,
            label: self.label.clone(),
            output_dir: self.output_dir.clone(),
            snapshot_every: self.snapshot_every,
            eval_samples: self.eval_samples,
            snapshot_samples: self.snapshot_samples,
            probe_samples: self.probe_samples,
            grid_size: self.dataset.size,
            grid_spacing: self.dataset.spacing,
            grid_sigma: self.dataset.sigma,
            kdrop_delta: self.kdrop.delta,
            kdrop_window: self.kdrop.window,
        };
        let mut table = toml::Table::try_from(h).expect("harness keys serialize");
        table.extend(toml::Table::try_from(&self.train).expect("train config serializes"));
        let sorted: std::collections::BTreeMap<_, _> = table.into_iter().collect();
        toml::to_string(&sorted).expect("flat table serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.dataset.grid()?;
        if self.train.data_dim != 2 {
            return Err(Error::Config("the Gaussian grid is planar; data_dim must be 2".into()));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Config("snapshot_every must be at least 1".into()));
        }
        if self.eval_samples == 0 || self.probe_samples == 0 {
            return Err(Error::Config("eval_samples and probe_samples must be positive".into()));
        }
        if self.snapshot_samples < 3 {
            return Err(Error::Config("snapshot_samples must be at least 3 for PCA".into()));
        }
        if self.kdrop.window == 0 || !(self.kdrop.delta > 0.0) {
            return Err(Error::Config("kdrop_window ≥ 1 and kdrop_delta > 0 required".into()));
        }
        if self.label.is_empty() {
            return Err(Error::Config("label must not be empty".into()));
        }
        Ok(())
    }

    /// Copy with a different seed, writing under `<output_dir>/seed-<seed>`.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.train.seed = seed;
        s.output_dir = self.output_dir.join(format!("seed-{seed}"));
        s.label = format!("{}-seed{seed}", self.label);
        s
    }
}
