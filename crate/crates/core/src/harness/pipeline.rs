//! End-to-end synthetic pipeline: networks, simulated sources, the two
//! classification tables and the label-fraction study.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::experiment::{evaluate_algorithms, run_label_fraction_experiment, ExperimentConfig, ExternalPool, PreparedGroup};
use super::group::{build_group, split, GroupDataset, GroupSize, GroupSpec, Source};
use super::report::{EvalReport, PretrainSource};
use crate::cascade::{build_graph, Cascade, TimeUnit};
use crate::diffusion::{generate_dataset, DiffusionConfig, DiffusionModel};
use crate::error::{invalid_config, Result};
use crate::netgen::{generate, NetGenConfig, NetworkModel};
use crate::seed::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    /// Shared generator parameters; `model` and `seed` are set per source.
    pub network: NetGenConfig,
    /// Shared simulation parameters; `model` and `seed` are set per source.
    pub diffusion: DiffusionConfig,
    pub cascades_per_source: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig { network: NetGenConfig::default(), diffusion: DiffusionConfig::default(), cascades_per_source: 2000 }
    }
}

/// Cascades simulated by one diffusion model on one network model.
#[derive(Clone, Debug)]
pub struct SyntheticSource {
    pub network: NetworkModel,
    pub diffusion: DiffusionModel,
    pub cascades: Vec<Cascade>,
}

impl SyntheticSource {
    pub fn name(&self) -> String {
        format!("{}-{}", self.network, self.diffusion)
    }
}

/// All nine (network, diffusion) sources. Network `i` uses seed
/// `(master, "network", i)`; source `(i, j)` uses `(master, "diffusion", 3i + j)`.
pub fn synthesize_sources(cfg: &SyntheticConfig, master: u64) -> Result<Vec<SyntheticSource>> {
    synthesize_with(cfg, master, &NetworkModel::ALL, &DiffusionModel::ALL, cfg.cascades_per_source)
}

fn synthesize_with(
    cfg: &SyntheticConfig,
    master: u64,
    networks: &[NetworkModel],
    diffusions: &[DiffusionModel],
    count: usize,
) -> Result<Vec<SyntheticSource>> {
    let mut out = Vec::new();
    for &network in networks {
        let i = NetworkModel::ALL.iter().position(|&m| m == network).expect("known model") as u64;
        let mut net_cfg = cfg.network.clone();
        net_cfg.model = network;
        net_cfg.seed = derive_seed(master, "network", i);
        let net = generate(&net_cfg)?;
        for &diffusion in diffusions {
            let j = DiffusionModel::ALL.iter().position(|&m| m == diffusion).expect("known model") as u64;
            let mut d_cfg = cfg.diffusion.clone();
            d_cfg.model = diffusion;
            d_cfg.seed = derive_seed(master, "diffusion", 3 * i + j);
            let cascades = generate_dataset(&net, &d_cfg, count)?;
            log::info!("simulated {} {} cascades on {}", cascades.len(), diffusion, network);
            out.push(SyntheticSource { network, diffusion, cascades });
        }
    }
    Ok(out)
}

/// The two classification tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Classes are diffusion models; one group per network model.
    Diffusion,
    /// Classes are network models; one group per diffusion model.
    Network,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Diffusion, Task::Network];

    pub fn table_name(self) -> &'static str {
        match self {
            Task::Diffusion => "diffusion",
            Task::Network => "network",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.table_name())
    }
}

impl std::str::FromStr for Task {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diffusion" => Ok(Task::Diffusion),
            "network" => Ok(Task::Network),
            other => Err(invalid_config(format!("unknown task `{other}`"))),
        }
    }
}

fn as_source(s: &SyntheticSource, class_name: &str) -> Source {
    Source { class_name: class_name.to_string(), time_unit: Some(TimeUnit::Steps), cascades: s.cascades.clone() }
}

/// Groups for one task, each with `per_class` cascades per class.
pub fn task_groups(sources: &[SyntheticSource], task: Task, per_class: usize, master: u64) -> Result<Vec<GroupDataset>> {
    let mut groups = Vec::new();
    let group_names: Vec<&str> = match task {
        Task::Diffusion => NetworkModel::ALL.iter().map(|m| m.name()).collect(),
        Task::Network => DiffusionModel::ALL.iter().map(|m| m.name()).collect(),
    };
    for name in group_names {
        let members: Vec<Source> = sources
            .iter()
            .filter(|s| match task {
                Task::Diffusion => s.network.name() == name,
                Task::Network => s.diffusion.name() == name,
            })
            .map(|s| match task {
                Task::Diffusion => as_source(s, s.diffusion.name()),
                Task::Network => as_source(s, s.network.name()),
            })
            .collect();
        if members.len() < 2 {
            return Err(invalid_config(format!("group `{name}` has fewer than two sources")));
        }
        let spec = GroupSpec {
            name: name.to_string(),
            size: GroupSize::PerClass(per_class),
            seed: derive_seed(master, &format!("group/{task}/{name}"), 0),
        };
        groups.push(build_group(&spec, &members)?);
    }
    Ok(groups)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub table: String,
    pub report: EvalReport,
}

/// Runs every algorithm on every group of the given tasks. Seeds for a group
/// are scoped by `"<task>/<group>"`.
pub fn run_tables(
    sources: &[SyntheticSource],
    tasks: &[Task],
    per_class: usize,
    cfg: &ExperimentConfig,
    master: u64,
) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for &task in tasks {
        for group in task_groups(sources, task, per_class, master)? {
            let group_cfg = cfg.seeded(master, &format!("{task}/{}", group.name));
            let prepared = PreparedGroup::new(&group, &group_cfg.window)?;
            let parts = split(&group, &group_cfg.split)?;
            for report in evaluate_algorithms(&prepared, &parts, &group_cfg)? {
                rows.push(TableRow { table: task.table_name().to_string(), report });
            }
        }
    }
    Ok(rows)
}

/// Label-fraction study settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FractionConfig {
    pub task: Task,
    /// Group within the task, e.g. `ba` for the diffusion task.
    pub group: String,
    pub fractions: Vec<f64>,
    pub pretrain_sources: Vec<PretrainSource>,
    /// Unlabeled external cascades per diffusion model, simulated on a
    /// separately seeded network.
    pub external_per_model: usize,
    pub external_network: NetworkModel,
    pub seeds: Vec<u64>,
}

impl Default for FractionConfig {
    fn default() -> Self {
        FractionConfig {
            task: Task::Diffusion,
            group: "ba".into(),
            fractions: vec![0.1, 0.2, 0.5, 1.0],
            pretrain_sources: PretrainSource::ALL.to_vec(),
            external_per_model: 200,
            external_network: NetworkModel::Ba,
            seeds: vec![0, 1, 2],
        }
    }
}

/// External pool: cascades of every diffusion model on a network generated
/// with seed `(master, "external-network", 0)`, ids prefixed `external:`.
pub fn external_pool(cfg: &SyntheticConfig, fraction: &FractionConfig, master: u64, window: &crate::cascade::ObservationWindow) -> Result<ExternalPool> {
    let ext_master = derive_seed(master, "external-network", 0);
    let sources = synthesize_with(cfg, ext_master, &[fraction.external_network], &DiffusionModel::ALL, fraction.external_per_model)?;
    let mut uids = Vec::new();
    let mut graphs = Vec::new();
    for s in &sources {
        for c in &s.cascades {
            uids.push(format!("external:{}:{}", s.diffusion, c.id()));
            graphs.push(build_graph(c, window, Some(TimeUnit::Steps))?);
        }
    }
    ExternalPool::new(uids, graphs, window)
}

/// Repeats the label-fraction experiment on one group for each seed in
/// `fraction.seeds`; the seed scopes all training randomness while the group
/// and split stay fixed by `master`.
pub fn run_fraction_study(
    sources: &[SyntheticSource],
    per_class: usize,
    cfg: &ExperimentConfig,
    fraction: &FractionConfig,
    external: Option<&ExternalPool>,
    master: u64,
) -> Result<Vec<EvalReport>> {
    let group = task_groups(sources, fraction.task, per_class, master)?
        .into_iter()
        .find(|g| g.name == fraction.group)
        .ok_or_else(|| invalid_config(format!("no group `{}` in the {} task", fraction.group, fraction.task)))?;
    if fraction.seeds.is_empty() {
        return Err(invalid_config("label-fraction study needs at least one seed"));
    }
    let scope = format!("{}/{}", fraction.task, group.name);
    let base_cfg = cfg.seeded(master, &scope);
    let prepared = PreparedGroup::new(&group, &base_cfg.window)?;
    let parts = split(&group, &base_cfg.split)?;
    let mut reports = Vec::new();
    for &seed in &fraction.seeds {
        let mut run_cfg = cfg.seeded(seed, &scope);
        run_cfg.split = base_cfg.split.clone();
        reports.extend(run_label_fraction_experiment(
            &prepared,
            &parts,
            &fraction.fractions,
            &fraction.pretrain_sources,
            external,
            &run_cfg,
        )?);
    }
    Ok(reports)
}
