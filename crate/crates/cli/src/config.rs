//! Config file (TOML, one section per concern) and its resolved form written
//! next to every output.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use cascadelab::cascade::ObservationWindow;
use cascadelab::classifiers::{Algo, TrainSpec};
use cascadelab::contrastive::{AugmentConfig, ContrastiveSpec};
use cascadelab::diffusion::DiffusionConfig;
use cascadelab::harness::{ExperimentConfig, FractionConfig, SplitSpec, SyntheticConfig, Task};
use cascadelab::netgen::NetGenConfig;

use crate::failure::{CliResult, Failure};

pub const SEED_ENV: &str = "CASCADELAB_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TablesSection {
    pub cascades_per_source: usize,
    pub per_class: usize,
    pub tasks: Vec<Task>,
}

impl Default for TablesSection {
    fn default() -> Self {
        TablesSection { cascades_per_source: 2000, per_class: 2000, tasks: Task::ALL.to_vec() }
    }
}

/// Provenance of a run; ignored when the file is read back as a config.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub command: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub algos: Option<Vec<Algo>>,
    pub network: NetGenConfig,
    pub diffusion: DiffusionConfig,
    pub window: ObservationWindow,
    pub split: SplitSpec,
    pub train: TrainSpec,
    pub contrastive: ContrastiveSpec,
    pub augment: AugmentConfig,
    pub tables: TablesSection,
    pub fraction: FractionConfig,
    pub run: Option<RunSection>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("--config: cannot read `{}`", path.display()))
            .map_err(Failure::Usage)?;
        toml::from_str(&text)
            .with_context(|| format!("--config: invalid config file `{}`", path.display()))
            .map_err(Failure::Usage)
    }

    /// Flag, then config file, then `CASCADELAB_SEED`, then 0.
    pub fn resolve_seed(&mut self, flag: Option<u64>) -> CliResult<u64> {
        let seed = match flag.or(self.seed) {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| Failure::Usage(anyhow::anyhow!("{SEED_ENV}: `{v}` is not an unsigned integer")))?,
                Err(_) => 0,
            },
        };
        self.seed = Some(seed);
        Ok(seed)
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            seed: self.seed.unwrap_or(0),
            algos: self.algos.clone().unwrap_or_else(|| Algo::ALL.to_vec()),
            window: self.window,
            split: self.split.clone(),
            train: self.train.clone(),
            contrastive: self.contrastive.clone(),
            augment: self.augment.clone(),
        }
    }

    pub fn synthetic(&self) -> SyntheticConfig {
        SyntheticConfig {
            network: self.network.clone(),
            diffusion: self.diffusion.clone(),
            cascades_per_source: self.tables.cascades_per_source,
        }
    }

    pub fn with_run(&self, command: &str, inputs: &[&Path], outputs: &[&Path]) -> Self {
        let mut c = self.clone();
        let show = |ps: &[&Path]| ps.iter().map(|p| p.display().to_string()).collect();
        c.run = Some(RunSection { command: command.to_string(), inputs: show(inputs), outputs: show(outputs) });
        c
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).context("serializing the resolved config").map_err(Failure::Runtime)
    }
}
