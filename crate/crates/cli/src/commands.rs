use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use cascadelab::cascade::{build_graph, read_cascades, read_labels, serialize_cascades, write_labels, CascadeSet, TimeUnit, Timestamp};
use cascadelab::classifiers::{train_gbt, train_gcn, train_random_forest, Algo};
use cascadelab::contrastive::train_contrastive;
use cascadelab::diffusion::{generate_dataset, DiffusionModel};
use cascadelab::features::{features_csv, graph_features};
use cascadelab::harness::{build_group, split, EvalReport, GroupDataset, GroupItem, GroupSize, GroupSpec, PreparedGroup, Source, Split};
use cascadelab::model_io::{ModelBody, SavedModel};
use cascadelab::netgen::{generate, read_network, write_network, NetworkModel};
use cascadelab::Real;

use crate::config::FileConfig;
use crate::failure::{require_file, usage, CliResult, Context, Failure};
use crate::output::{sidecar, write_all};

#[derive(Args, Debug)]
pub struct Common {
    /// Config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed (falls back to the config file, then CASCADELAB_SEED).
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Common {
    pub fn load(&self) -> CliResult<(FileConfig, u64)> {
        if let Some(path) = &self.config {
            require_file("--config", path)?;
        }
        let mut cfg = FileConfig::load(self.config.as_deref())?;
        let seed = cfg.resolve_seed(self.seed)?;
        Ok((cfg, seed))
    }
}

pub(crate) fn json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).runtime(|| "serializing JSON".into()).map(|s| s + "\n")
}

#[derive(Args, Debug)]
pub struct GenNetArgs {
    #[command(flatten)]
    pub common: Common,
    /// ba, ws or lfr.
    #[arg(long)]
    pub model: Option<NetworkModel>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub ba_m: Option<usize>,
    #[arg(long)]
    pub ws_k: Option<usize>,
    #[arg(long)]
    pub ws_beta: Option<f64>,
    #[arg(long)]
    pub lfr_gamma: Option<f64>,
    #[arg(long)]
    pub lfr_beta: Option<f64>,
    #[arg(long)]
    pub lfr_mu: Option<f64>,
    #[arg(long)]
    pub lfr_avg_deg: Option<f64>,
    #[arg(long)]
    pub lfr_max_deg: Option<usize>,
    #[arg(long)]
    pub lfr_min_comm: Option<usize>,
    #[arg(long)]
    pub lfr_max_comm: Option<usize>,
    #[arg(long)]
    pub lfr_max_iters: Option<usize>,
    /// Edge-list output file.
    #[arg(long)]
    pub out: PathBuf,
}

macro_rules! override_fields {
    ($target:expr, $args:expr, { $($flag:ident => $field:ident),* $(,)? }) => {
        $( if let Some(v) = $args.$flag { $target.$field = v; } )*
    };
}

pub fn gen_net(args: &GenNetArgs) -> CliResult<()> {
    let (mut cfg, seed) = args.common.load()?;
    override_fields!(cfg.network, args, {
        model => model, nodes => node_count, ba_m => ba_m, ws_k => ws_k, ws_beta => ws_beta,
        lfr_gamma => lfr_gamma, lfr_beta => lfr_beta_c, lfr_mu => lfr_mu, lfr_avg_deg => lfr_avg_deg,
        lfr_max_deg => lfr_max_deg, lfr_min_comm => lfr_min_comm, lfr_max_comm => lfr_max_comm,
        lfr_max_iters => lfr_max_iters,
    });
    cfg.network.seed = seed;
    let net = generate(&cfg.network)?;
    log::info!("{} network: {} nodes, {} edges", cfg.network.model, net.node_count(), net.edge_count());
    let run = cfg.with_run("gen-net", &[], &[&args.out]).to_toml()?;
    write_all(&[(args.out.clone(), write_network(&net)), (sidecar(&args.out), run)])
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Edge-list file from gen-net.
    #[arg(long)]
    pub net: PathBuf,
    /// ic, lt or profile.
    #[arg(long)]
    pub model: Option<DiffusionModel>,
    #[arg(long)]
    pub ic_p: Option<f64>,
    #[arg(long)]
    pub lt_threshold: Option<f64>,
    #[arg(long)]
    pub profile_q: Option<f64>,
    /// Number of cascades to keep.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub min_size: Option<usize>,
    #[arg(long)]
    pub max_size: Option<usize>,
    /// Cascade file output.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    require_file("--net", &args.net)?;
    let (mut cfg, seed) = args.common.load()?;
    override_fields!(cfg.diffusion, args, {
        model => model, ic_p => ic_p, lt_threshold => lt_threshold, profile_q => profile_q,
        min_size => min_size, max_size => max_size,
    });
    if let Some(count) = args.count {
        cfg.tables.cascades_per_source = count;
    }
    cfg.diffusion.seed = seed;
    cfg.diffusion.validate()?;
    let net = read_network(&args.net).runtime(|| format!("reading `{}`", args.net.display()))?;
    let cascades = generate_dataset(&net, &cfg.diffusion, cfg.tables.cascades_per_source)?;
    log::info!("simulated {} {} cascades", cascades.len(), cfg.diffusion.model);
    let text = serialize_cascades(&CascadeSet { time_unit: Some(TimeUnit::Steps), cascades });
    let run = cfg.with_run("simulate", &[&args.net], &[&args.out]).to_toml()?;
    write_all(&[(args.out.clone(), text), (sidecar(&args.out), run)])
}

#[derive(Args, Debug)]
pub struct BuildGroupArgs {
    #[command(flatten)]
    pub common: Common,
    /// `CLASS=PATH`, one per source; repeat at least twice.
    #[arg(long = "source", required = true)]
    pub sources: Vec<String>,
    /// Cascades sampled from every source.
    #[arg(long, conflicts_with = "total")]
    pub per_class: Option<usize>,
    /// Total size, split evenly with the remainder assigned round-robin.
    #[arg(long)]
    pub total: Option<usize>,
    #[arg(long, default_value = "group")]
    pub name: String,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Metadata file of a group directory.
#[derive(Debug, Serialize, Deserialize)]
struct GroupMeta {
    name: String,
    classes: Vec<String>,
}

const GROUP_META: &str = "group.toml";
const GROUP_CASCADES: &str = "cascades.txt";
const GROUP_LABELS: &str = "labels.csv";
const GROUP_SPLIT: &str = "split.csv";

pub fn build_group_cmd(args: &BuildGroupArgs) -> CliResult<()> {
    let mut parsed = Vec::new();
    for s in &args.sources {
        let (class, path) = s.split_once('=').ok_or_else(|| usage(format!("--source: expected CLASS=PATH, got `{s}`")))?;
        if class.is_empty() || class.contains(',') || class.contains(char::is_whitespace) {
            return Err(usage(format!("--source: invalid class name `{class}`")));
        }
        let path = PathBuf::from(path);
        require_file("--source", &path)?;
        parsed.push((class.to_string(), path));
    }
    let size = match (args.per_class, args.total) {
        (Some(n), None) => GroupSize::PerClass(n),
        (None, Some(n)) => GroupSize::Total(n),
        _ => return Err(usage("one of --per-class or --total is required")),
    };
    let (cfg, seed) = args.common.load()?;
    let mut sources = Vec::new();
    for (class_name, path) in &parsed {
        let set = read_cascades(path).runtime(|| format!("reading `{}`", path.display()))?;
        sources.push(Source { class_name: class_name.clone(), time_unit: set.time_unit, cascades: set.cascades });
    }
    let unit = sources[0].time_unit;
    if sources.iter().any(|s| s.time_unit != unit) {
        return Err(usage("--source: all sources must share a time unit"));
    }
    let spec = GroupSpec { name: args.name.clone(), size, seed };
    let group = build_group(&spec, &sources)?;
    let mut split_spec = cfg.split.clone();
    split_spec.seed = cascadelab::seed::derive_seed(seed, "split", 0);
    let parts = split(&group, &split_spec)?;

    let cascades = group
        .items
        .iter()
        .map(|i| i.cascade.clone().with_id(i.uid.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let labels = write_labels(group.items.iter().map(|i| (i.uid.as_str(), group.class_names[i.class_index].as_str())));
    let mut partition = vec![""; group.len()];
    for (name, idx) in [("train", &parts.train), ("val", &parts.val), ("test", &parts.test)] {
        for &i in idx {
            partition[i] = name;
        }
    }
    let mut split_csv = String::from("cascade_id,partition\n");
    for (item, p) in group.items.iter().zip(&partition) {
        split_csv.push_str(&format!("{},{p}\n", item.uid));
    }
    let meta = GroupMeta { name: group.name.clone(), classes: group.class_names.clone() };
    let inputs: Vec<&Path> = parsed.iter().map(|(_, p)| p.as_path()).collect();
    let run = cfg.with_run("build-group", &inputs, &[&args.out]).to_toml()?;
    log::info!("group `{}`: {} cascades, split {}/{}/{}", group.name, group.len(), parts.train.len(), parts.val.len(), parts.test.len());
    write_all(&[
        (args.out.join(GROUP_META), toml::to_string(&meta).runtime(|| "group metadata".into())?),
        (args.out.join(GROUP_CASCADES), serialize_cascades(&CascadeSet { time_unit: unit, cascades })),
        (args.out.join(GROUP_LABELS), labels),
        (args.out.join(GROUP_SPLIT), split_csv),
        (args.out.join("run.toml"), run),
    ])
}

/// Reads a directory written by `build-group`.
pub fn read_group(dir: &Path) -> CliResult<(GroupDataset, Split)> {
    for f in [GROUP_META, GROUP_CASCADES, GROUP_LABELS, GROUP_SPLIT] {
        require_file("--group", &dir.join(f))?;
    }
    let meta_text = std::fs::read_to_string(dir.join(GROUP_META)).runtime(|| "reading group metadata".into())?;
    let meta: GroupMeta = toml::from_str(&meta_text).runtime(|| "parsing group metadata".into())?;
    let set = read_cascades(&dir.join(GROUP_CASCADES))?;
    let labels: HashMap<String, String> = read_labels(&dir.join(GROUP_LABELS))?.into_iter().collect();
    let split_text = std::fs::read_to_string(dir.join(GROUP_SPLIT)).runtime(|| "reading split".into())?;
    let partition: HashMap<&str, &str> = split_text.lines().skip(1).filter_map(|l| l.split_once(',')).collect();
    let mut items = Vec::with_capacity(set.cascades.len());
    let mut parts = Split { train: Vec::new(), val: Vec::new(), test: Vec::new() };
    for (i, cascade) in set.cascades.into_iter().enumerate() {
        let uid = cascade.id().to_string();
        let class = labels.get(&uid).ok_or_else(|| Failure::Runtime(anyhow::anyhow!("no label for `{uid}`")))?;
        let class_index = meta
            .classes
            .iter()
            .position(|c| c == class)
            .ok_or_else(|| Failure::Runtime(anyhow::anyhow!("unknown class `{class}`")))?;
        match partition.get(uid.as_str()) {
            Some(&"train") => parts.train.push(i),
            Some(&"val") => parts.val.push(i),
            Some(&"test") => parts.test.push(i),
            _ => return Err(Failure::Runtime(anyhow::anyhow!("no partition for `{uid}`"))),
        }
        items.push(GroupItem { uid, class_index, time_unit: set.time_unit, cascade });
    }
    Ok((GroupDataset { name: meta.name, class_names: meta.classes, items }, parts))
}

#[derive(Args, Debug)]
pub struct FeaturizeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub cascades: PathBuf,
    /// Optional `cascade_id,class_name` sidecar.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub window_steps: Option<u64>,
    /// Window length in seconds, as a decimal.
    #[arg(long)]
    pub window_seconds: Option<Timestamp>,
    /// Feature CSV output.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn featurize(args: &FeaturizeArgs) -> CliResult<()> {
    require_file("--cascades", &args.cascades)?;
    if let Some(l) = &args.labels {
        require_file("--labels", l)?;
    }
    let (mut cfg, _) = args.common.load()?;
    if let Some(s) = args.window_steps {
        cfg.window.max_steps = s;
    }
    if let Some(t) = args.window_seconds {
        cfg.window.max_time = t;
    }
    let set = read_cascades(&args.cascades)?;
    let labels: HashMap<String, String> = match &args.labels {
        Some(p) => read_labels(p)?.into_iter().collect(),
        None => HashMap::new(),
    };
    let mut rows = Vec::with_capacity(set.cascades.len());
    for c in &set.cascades {
        let g = build_graph::<Real>(c, &cfg.window, set.time_unit)?;
        rows.push((c.id(), labels.get(c.id()).map_or("", String::as_str), graph_features(&g)?));
    }
    let mut inputs: Vec<&Path> = vec![&args.cascades];
    inputs.extend(args.labels.as_deref());
    let run = cfg.with_run("featurize", &inputs, &[&args.out]).to_toml()?;
    write_all(&[(args.out.clone(), features_csv(rows)), (sidecar(&args.out), run)])
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Group directory from build-group.
    #[arg(long)]
    pub group: PathBuf,
    /// random_forest (rf), gbt, gcn or contrastive.
    #[arg(long)]
    pub algo: Algo,
    /// Model file output.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the pre-trained and fine-tuned contrastive checkpoints here.
    #[arg(long)]
    pub checkpoints: Option<PathBuf>,
}

pub fn train(args: &TrainArgs) -> CliResult<()> {
    let (file_cfg, seed) = args.common.load()?;
    let (group, parts) = read_group(&args.group)?;
    let cfg = file_cfg.experiment().seeded(seed, "train");
    cfg.validate()?;
    let prepared = PreparedGroup::new(&group, &cfg.window)?;
    let class_names = group.class_names.clone();
    let saved = |hyper: serde_json::Value, body| SavedModel::new(class_names.clone(), cfg.window, hyper, body);
    let train_hyper = serde_json::json!({ "seed": seed, "train": cfg.train });
    let mut files = Vec::new();
    let model = match args.algo {
        Algo::RandomForest => saved(train_hyper, ModelBody::RandomForest(train_random_forest(&prepared.labeled_features(&parts.train)?, &cfg.train)?)),
        Algo::Gbt => saved(
            train_hyper,
            ModelBody::Gbt(train_gbt(&prepared.labeled_features(&parts.train)?, &prepared.labeled_features(&parts.val)?, &cfg.train)?),
        ),
        Algo::Gcn => saved(
            train_hyper,
            ModelBody::Gcn(train_gcn(&prepared.labeled_inputs(&parts.train)?, &prepared.labeled_inputs(&parts.val)?, &cfg.train)?),
        ),
        Algo::Contrastive => {
            let pool: Vec<_> = parts.train.iter().map(|&i| &prepared.graphs[i]).collect();
            let labeled = prepared.labeled_inputs(&parts.train)?;
            let val = prepared.labeled_inputs(&parts.val)?;
            let run = train_contrastive(&pool, &labeled, &[], Some(&val), &cfg.window, &cfg.contrastive, &cfg.augment)?;
            let hyper = serde_json::json!({ "seed": seed, "contrastive": cfg.contrastive, "augment": cfg.augment });
            if let Some(dir) = &args.checkpoints {
                for (name, body) in
                    [("pretrained.json", ModelBody::Encoder(run.encoder)), ("finetuned.json", ModelBody::Contrastive(run.teacher))]
                {
                    files.push((dir.join(name), saved(hyper.clone(), body).to_json()?));
                }
            }
            saved(hyper, ModelBody::Contrastive(run.student))
        }
    };
    files.push((args.out.clone(), model.to_json()?));
    files.push((sidecar(&args.out), file_cfg.with_run("train", &[&args.group], &[&args.out]).to_toml()?));
    write_all(&files)
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Model file from train.
    #[arg(long)]
    pub model: PathBuf,
    /// Group directory from build-group.
    #[arg(long)]
    pub group: PathBuf,
    /// train, val or test.
    #[arg(long, default_value = "test")]
    pub partition: String,
    /// Report JSON output.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn eval(args: &EvalArgs) -> CliResult<()> {
    require_file("--model", &args.model)?;
    let (group, parts) = read_group(&args.group)?;
    let idx = match args.partition.as_str() {
        "train" => &parts.train,
        "val" => &parts.val,
        "test" => &parts.test,
        other => return Err(usage(format!("--partition: expected train, val or test, got `{other}`"))),
    };
    let model = SavedModel::load(&args.model)?;
    if model.class_names != group.class_names {
        return Err(usage("--model: the model's classes differ from the group's"));
    }
    let mut preds = Vec::with_capacity(idx.len());
    for &i in idx {
        let item = &group.items[i];
        let g = build_graph::<Real>(&item.cascade, &model.window, item.time_unit)?;
        let p = model.predict_proba(&g)?;
        preds.push((cascadelab::classifiers::argmax(&p), item.class_index));
    }
    let seed = model.hyperparameters.get("seed").and_then(serde_json::Value::as_u64).unwrap_or(0);
    let report = EvalReport::from_predictions(&group.name, model.algo, seed, &group.class_names, &preds)?;
    log::info!("{} on {} {}: macro-F1 {:.4}", model.algo, group.name, args.partition, report.macro_f1);
    let run = FileConfig::default().with_run("eval", &[&args.model, &args.group], &[&args.out]).to_toml()?;
    write_all(&[(args.out.clone(), json(&report)?), (sidecar(&args.out), run)])
}
