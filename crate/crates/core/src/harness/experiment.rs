use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::group::{nested_subsample, split, GroupDataset, Split, SplitSpec};
use super::report::{EvalReport, PretrainSource};
use crate::cascade::{build_graph, CascadeGraph, ObservationWindow};
use crate::classifiers::{
    train_gbt, train_gcn, train_random_forest, Algo, Classifier, GraphInput, Labeled, TrainSpec,
};
use crate::contrastive::{train_contrastive, AugmentConfig, ContrastiveSpec};
use crate::error::{invalid_config, invalid_input, Result};
use crate::features::{graph_features, FeatureVector};
use crate::seed::derive_seed;
use crate::Real;

/// Everything needed to train and evaluate the four model families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub algos: Vec<Algo>,
    pub window: ObservationWindow,
    pub split: SplitSpec,
    pub train: TrainSpec,
    pub contrastive: ContrastiveSpec,
    pub augment: AugmentConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            algos: Algo::ALL.to_vec(),
            window: ObservationWindow::default(),
            split: SplitSpec::default(),
            train: TrainSpec::default(),
            contrastive: ContrastiveSpec::default(),
            augment: AugmentConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Component seeds derived from `(master, tag, 0)` with tags `split`,
    /// `train`, `contrastive` and `augment`, scoped by `scope`.
    pub fn seeded(&self, master: u64, scope: &str) -> Self {
        let base = derive_seed(master, scope, 0);
        let mut cfg = self.clone();
        cfg.seed = master;
        cfg.split.seed = derive_seed(base, "split", 0);
        cfg.train.seed = derive_seed(base, "train", 0);
        cfg.contrastive.seed = derive_seed(base, "contrastive", 0);
        cfg.augment.seed = derive_seed(base, "augment", 0);
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.algos.is_empty() {
            return Err(invalid_config("no algorithms selected"));
        }
        self.train.validate()?;
        self.contrastive.validate()?;
        self.augment.validate()
    }
}

/// A group with graphs, graph-level features and network inputs computed.
pub struct PreparedGroup<'a> {
    pub dataset: &'a GroupDataset,
    pub graphs: Vec<CascadeGraph<Real>>,
    pub features: Vec<FeatureVector<Real>>,
    pub inputs: Vec<GraphInput<Real>>,
}

impl<'a> PreparedGroup<'a> {
    pub fn new(dataset: &'a GroupDataset, window: &ObservationWindow) -> Result<Self> {
        let prepared = dataset
            .items
            .par_iter()
            .map(|item| {
                let g: CascadeGraph<Real> = build_graph(&item.cascade, window, item.time_unit)?;
                let f = graph_features(&g)?;
                let input = GraphInput::from_graph(&g, window)?;
                Ok((g, f, input))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut graphs = Vec::with_capacity(prepared.len());
        let mut features = Vec::with_capacity(prepared.len());
        let mut inputs = Vec::with_capacity(prepared.len());
        for (g, f, i) in prepared {
            graphs.push(g);
            features.push(f);
            inputs.push(i);
        }
        Ok(PreparedGroup { dataset, graphs, features, inputs })
    }

    pub fn labels(&self, idx: &[usize]) -> Vec<usize> {
        idx.iter().map(|&i| self.dataset.items[i].class_index).collect()
    }

    pub fn labeled_features(&self, idx: &[usize]) -> Result<Labeled<'_, FeatureVector<Real>>> {
        Labeled::new(idx.iter().map(|&i| &self.features[i]).collect(), self.labels(idx), self.dataset.class_count())
    }

    pub fn labeled_inputs(&self, idx: &[usize]) -> Result<Labeled<'_, GraphInput<Real>>> {
        Labeled::new(idx.iter().map(|&i| &self.inputs[i]).collect(), self.labels(idx), self.dataset.class_count())
    }

    fn uids(&self, idx: &[usize]) -> HashSet<&str> {
        idx.iter().map(|&i| self.dataset.items[i].uid.as_str()).collect()
    }

    fn evaluate<I: Sync, M: Classifier<I, Real> + Sync>(&self, model: &M, inputs: &[I], test: &[usize], algo: Algo, seed: u64) -> Result<EvalReport> {
        let preds = test
            .par_iter()
            .map(|&i| Ok((model.predict(&inputs[i])?, self.dataset.items[i].class_index)))
            .collect::<Result<Vec<_>>>()?;
        EvalReport::from_predictions(&self.dataset.name, algo, seed, &self.dataset.class_names, &preds)
    }
}

/// Unlabeled cascade graphs from outside the group, with globally unique ids.
pub struct ExternalPool {
    pub uids: Vec<String>,
    pub graphs: Vec<CascadeGraph<Real>>,
    pub inputs: Vec<GraphInput<Real>>,
}

impl ExternalPool {
    pub fn new(uids: Vec<String>, graphs: Vec<CascadeGraph<Real>>, window: &ObservationWindow) -> Result<Self> {
        if uids.len() != graphs.len() {
            return Err(invalid_input("one uid per external graph required"));
        }
        let inputs = graphs.par_iter().map(|g| GraphInput::from_graph(g, window)).collect::<Result<Vec<_>>>()?;
        Ok(ExternalPool { uids, graphs, inputs })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }
}

fn assert_no_leakage<'a>(test: &HashSet<&str>, pools: impl IntoIterator<Item = &'a str>) -> Result<()> {
    for uid in pools {
        if test.contains(uid) {
            return Err(invalid_input(format!("test cascade `{uid}` leaked into a training pool")));
        }
    }
    Ok(())
}

struct ContrastiveInputs<'p> {
    pool: Vec<&'p CascadeGraph<Real>>,
    unlabeled: Vec<&'p GraphInput<Real>>,
}

fn run_contrastive(
    prepared: &PreparedGroup<'_>,
    train: &[usize],
    val: &[usize],
    test: &[usize],
    extra: ContrastiveInputs<'_>,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    let labeled = prepared.labeled_inputs(train)?;
    let val_set = prepared.labeled_inputs(val)?;
    let run = train_contrastive(&extra.pool, &labeled, &extra.unlabeled, Some(&val_set), &cfg.window, &cfg.contrastive, &cfg.augment)?;
    prepared.evaluate(&run.student, &prepared.inputs, test, Algo::Contrastive, cfg.seed)
}

/// Trains every configured algorithm on `split.train` (and `split.val` where
/// the algorithm uses validation) and reports test macro-F1.
pub fn evaluate_algorithms(prepared: &PreparedGroup<'_>, split: &Split, cfg: &ExperimentConfig) -> Result<Vec<EvalReport>> {
    cfg.validate()?;
    let test_uids = prepared.uids(&split.test);
    assert_no_leakage(&test_uids, prepared.uids(&split.train).into_iter().chain(prepared.uids(&split.val)))?;
    let mut reports = Vec::with_capacity(cfg.algos.len());
    for &algo in &cfg.algos {
        let started = Instant::now();
        let mut report = match algo {
            Algo::RandomForest => {
                let model = train_random_forest(&prepared.labeled_features(&split.train)?, &cfg.train)?;
                prepared.evaluate(&model, &prepared.features, &split.test, algo, cfg.seed)?
            }
            Algo::Gbt => {
                let model =
                    train_gbt(&prepared.labeled_features(&split.train)?, &prepared.labeled_features(&split.val)?, &cfg.train)?;
                prepared.evaluate(&model, &prepared.features, &split.test, algo, cfg.seed)?
            }
            Algo::Gcn => {
                let model = train_gcn(&prepared.labeled_inputs(&split.train)?, &prepared.labeled_inputs(&split.val)?, &cfg.train)?;
                prepared.evaluate(&model, &prepared.inputs, &split.test, algo, cfg.seed)?
            }
            Algo::Contrastive => {
                let pool = split.train.iter().map(|&i| &prepared.graphs[i]).collect();
                let extra = ContrastiveInputs { pool, unlabeled: Vec::new() };
                run_contrastive(prepared, &split.train, &split.val, &split.test, extra, cfg)?
            }
        };
        report.wall_time_s = started.elapsed().as_secs_f64();
        log::info!("{} {}: macro-F1 {:.4}", prepared.dataset.name, algo, report.macro_f1);
        reports.push(report);
    }
    Ok(reports)
}

/// Splits `group` with `cfg.split` and runs [`evaluate_algorithms`].
pub fn run_group_experiment(group: &GroupDataset, cfg: &ExperimentConfig) -> Result<Vec<EvalReport>> {
    let prepared = PreparedGroup::new(group, &cfg.window)?;
    let split = split(group, &cfg.split)?;
    evaluate_algorithms(&prepared, &split, cfg)
}

/// Contrastive macro-F1 as the labeled training (and validation) data shrink
/// to nested stratified fractions, for each pre-training pool.
pub fn run_label_fraction_experiment(
    prepared: &PreparedGroup<'_>,
    split: &Split,
    fractions: &[f64],
    sources: &[PretrainSource],
    external: Option<&ExternalPool>,
    cfg: &ExperimentConfig,
) -> Result<Vec<EvalReport>> {
    cfg.validate()?;
    if fractions.is_empty() || sources.is_empty() {
        return Err(invalid_config("need at least one fraction and one pretrain source"));
    }
    let needs_external = sources.iter().any(|s| *s != PretrainSource::SelfOnly);
    let external = match external {
        Some(pool) if !pool.is_empty() => Some(pool),
        _ if needs_external => return Err(invalid_config("mixed and external_only pre-training need an external pool")),
        _ => None,
    };
    let labels = prepared.dataset.labels();
    let k = prepared.dataset.class_count();
    let order_seed = derive_seed(cfg.split.seed, "label-fraction", 0);
    let test_uids = prepared.uids(&split.test);
    if let Some(pool) = external {
        assert_no_leakage(&test_uids, pool.uids.iter().map(String::as_str))?;
    }
    let mut reports = Vec::new();
    for &fraction in fractions {
        let train = nested_subsample(&labels, &split.train, k, fraction, order_seed)?;
        let val = nested_subsample(&labels, &split.val, k, fraction, derive_seed(order_seed, "val", 0))?;
        assert_no_leakage(&test_uids, prepared.uids(&train).into_iter().chain(prepared.uids(&val)))?;
        for &source in sources {
            let own: Vec<&CascadeGraph<Real>> = train.iter().map(|&i| &prepared.graphs[i]).collect();
            let ext_graphs = || external.map_or_else(Vec::new, |p| p.graphs.iter().collect::<Vec<_>>());
            let ext_inputs = || external.map_or_else(Vec::new, |p| p.inputs.iter().collect::<Vec<_>>());
            let extra = match source {
                PretrainSource::SelfOnly => ContrastiveInputs { pool: own, unlabeled: Vec::new() },
                PretrainSource::Mixed => {
                    ContrastiveInputs { pool: own.into_iter().chain(ext_graphs()).collect(), unlabeled: ext_inputs() }
                }
                PretrainSource::ExternalOnly => ContrastiveInputs { pool: ext_graphs(), unlabeled: ext_inputs() },
            };
            let started = Instant::now();
            let mut report = run_contrastive(prepared, &train, &val, &split.test, extra, cfg)?;
            report.label_fraction = fraction;
            report.pretrain_source = Some(source);
            report.wall_time_s = started.elapsed().as_secs_f64();
            log::info!("{} {source} fraction {fraction}: macro-F1 {:.4}", prepared.dataset.name, report.macro_f1);
            reports.push(report);
        }
    }
    Ok(reports)
}
