use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;

use cascadelab::classifiers::Algo;
use cascadelab::harness::{
    external_pool, fraction_findings, fraction_points, fraction_tsv, run_fraction_study, run_tables, summary_csv,
    synthesize_sources, EvalReport, FractionFindings, PretrainSource, Task,
};

use crate::commands::{json, Common};
use crate::failure::{usage, CliResult};
use crate::output::write_all;

#[derive(Subcommand, Debug)]
pub enum ExperimentCommand {
    /// Every algorithm on every group of the diffusion and network tasks.
    Tables(TablesArgs),
    /// Contrastive macro-F1 against labeled fraction and pretraining source.
    LabelFraction(FractionArgs),
}

#[derive(Args, Debug)]
pub struct TablesArgs {
    #[command(flatten)]
    pub common: Common,
    /// Restrict to these algorithms (repeatable).
    #[arg(long = "algo")]
    pub algos: Vec<Algo>,
    /// Restrict to one task: diffusion or network.
    #[arg(long)]
    pub task: Option<Task>,
    #[arg(long)]
    pub per_class: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FractionArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated labeled fractions in (0, 1].
    #[arg(long, value_delimiter = ',')]
    pub fractions: Vec<f64>,
    /// Pretrain sources (repeatable): self_only, mixed or external_only.
    #[arg(long = "pretrain-source")]
    pub pretrain_sources: Vec<PretrainSource>,
    #[arg(long)]
    pub per_class: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cmd: &ExperimentCommand) -> CliResult<()> {
    match cmd {
        ExperimentCommand::Tables(a) => tables(a),
        ExperimentCommand::LabelFraction(a) => label_fraction(a),
    }
}

fn tables(args: &TablesArgs) -> CliResult<()> {
    let (mut file, seed) = args.common.load()?;
    if !args.algos.is_empty() {
        file.algos = Some(args.algos.clone());
    }
    if let Some(t) = args.task {
        file.tables.tasks = vec![t];
    }
    if let Some(n) = args.per_class {
        file.tables.per_class = n;
    }
    let cfg = file.experiment();
    cfg.validate()?;
    if file.tables.per_class > file.tables.cascades_per_source {
        return Err(usage("per_class cannot exceed cascades_per_source"));
    }
    let run_toml = file.with_run("experiment tables", &[], &[&args.out]).to_toml()?;
    let sources = synthesize_sources(&file.synthetic(), seed)?;
    let rows = run_tables(&sources, &file.tables.tasks, file.tables.per_class, &cfg, seed)?;
    let summary = summary_csv(rows.iter().map(|r| (r.table.as_str(), &r.report)));
    let reports: Vec<&EvalReport> = rows.iter().map(|r| &r.report).collect();
    write_all(&[
        (args.out.join("summary.csv"), summary),
        (args.out.join("reports.json"), json(&reports)?),
        (args.out.join("run.toml"), run_toml),
    ])
}

#[derive(Serialize)]
struct Findings {
    by_source: Vec<FractionFindings>,
    /// Checks that fail are listed here instead of failing the run.
    deviations: Vec<String>,
}

fn label_fraction(args: &FractionArgs) -> CliResult<()> {
    let (mut file, seed) = args.common.load()?;
    if !args.fractions.is_empty() {
        file.fraction.fractions = args.fractions.clone();
    }
    if !args.pretrain_sources.is_empty() {
        file.fraction.pretrain_sources = args.pretrain_sources.clone();
    }
    if let Some(n) = args.per_class {
        file.tables.per_class = n;
    }
    if file.fraction.fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
        return Err(usage("fractions must lie in (0, 1]"));
    }
    let cfg = file.experiment();
    cfg.validate()?;
    let run_toml = file.with_run("experiment label-fraction", &[], &[&args.out]).to_toml()?;
    let syn = file.synthetic();
    let sources = synthesize_sources(&syn, seed)?;
    let external = if file.fraction.pretrain_sources.iter().any(|s| *s != PretrainSource::SelfOnly) {
        Some(external_pool(&syn, &file.fraction, seed, &cfg.window)?)
    } else {
        None
    };
    let reports = run_fraction_study(&sources, file.tables.per_class, &cfg, &file.fraction, external.as_ref(), seed)?;
    let points = fraction_points(&reports)?;
    let by_source = fraction_findings(&points);
    let mut deviations = Vec::new();
    for f in &by_source {
        if f.stable_at_20 == Some(false) {
            deviations.push(format!("{}: macro-F1 at 20% is not within 0.10 of 100%", f.pretrain_source));
        }
        if f.declines_at_10 == Some(false) {
            deviations.push(format!("{}: macro-F1 at 10% does not fall below 20%", f.pretrain_source));
        }
    }
    for d in &deviations {
        log::warn!("deviation: {d}");
    }
    let summary = summary_csv(reports.iter().map(|r| ("label_fraction", r)));
    write_all(&[
        (args.out.join("fraction.tsv"), fraction_tsv(&points)),
        (args.out.join("findings.json"), json(&Findings { by_source, deviations })?),
        (args.out.join("summary.csv"), summary),
        (args.out.join("reports.json"), json(&reports)?),
        (args.out.join("run.toml"), run_toml),
    ])
}
