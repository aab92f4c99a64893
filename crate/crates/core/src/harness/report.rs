use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::Algo;
use crate::error::{invalid_config, invalid_input, Error, Result};
use crate::metrics::{macro_f1, F1Summary};

/// Which pool the contrastive encoder is pre-trained on in the label-fraction
/// experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PretrainSource {
    SelfOnly,
    Mixed,
    ExternalOnly,
}

impl PretrainSource {
    pub const ALL: [PretrainSource; 3] = [PretrainSource::SelfOnly, PretrainSource::Mixed, PretrainSource::ExternalOnly];

    pub fn name(self) -> &'static str {
        match self {
            PretrainSource::SelfOnly => "self_only",
            PretrainSource::Mixed => "mixed",
            PretrainSource::ExternalOnly => "external_only",
        }
    }
}

impl fmt::Display for PretrainSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PretrainSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "self_only" => Ok(PretrainSource::SelfOnly),
            "mixed" => Ok(PretrainSource::Mixed),
            "external_only" => Ok(PretrainSource::ExternalOnly),
            other => Err(invalid_config(format!("unknown pretrain source `{other}`"))),
        }
    }
}

/// Test-set evaluation of one trained model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub group: String,
    pub algo: Algo,
    pub seed: u64,
    pub label_fraction: f64,
    pub pretrain_source: Option<PretrainSource>,
    pub class_names: Vec<String>,
    pub per_class_f1: BTreeMap<String, f64>,
    pub macro_f1: f64,
    /// Rows are true classes, columns predictions, both in `class_names` order.
    pub confusion_matrix: Vec<Vec<u64>>,
    pub wall_time_s: f64,
}

impl EvalReport {
    /// `predictions` holds `(predicted, true)` class indices.
    pub fn from_predictions(
        group: &str,
        algo: Algo,
        seed: u64,
        class_names: &[String],
        predictions: &[(usize, usize)],
    ) -> Result<Self> {
        let F1Summary { per_class_f1, macro_f1, confusion_matrix } = macro_f1(predictions, class_names.len())?;
        Ok(EvalReport {
            group: group.to_string(),
            algo,
            seed,
            label_fraction: 1.0,
            pretrain_source: None,
            class_names: class_names.to_vec(),
            per_class_f1: class_names.iter().cloned().zip(per_class_f1).collect(),
            macro_f1,
            confusion_matrix,
            wall_time_s: 0.0,
        })
    }
}

/// One row per report: `table,group,algo,seed,label_fraction,pretrain_source,macro_f1`.
/// Wall time is left out so reruns compare byte for byte.
pub fn summary_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a EvalReport)>) -> String {
    let mut out = String::from("table,group,algo,seed,label_fraction,pretrain_source,macro_f1\n");
    for (table, r) in rows {
        let source = r.pretrain_source.map_or("", PretrainSource::name);
        let _ = writeln!(out, "{table},{},{},{},{},{source},{:.6}", r.group, r.algo, r.seed, r.label_fraction, r.macro_f1);
    }
    out
}

/// Mean macro-F1 per (pretrain source, fraction) over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionPoint {
    pub pretrain_source: PretrainSource,
    pub label_fraction: f64,
    pub mean_macro_f1: f64,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<f64>,
}

pub fn fraction_points(reports: &[EvalReport]) -> Result<Vec<FractionPoint>> {
    let mut grouped: BTreeMap<(PretrainSource, u64), FractionPoint> = BTreeMap::new();
    for r in reports {
        let source = r.pretrain_source.ok_or_else(|| invalid_input("label-fraction report without a pretrain source"))?;
        let p = grouped.entry((source, r.label_fraction.to_bits())).or_insert_with(|| FractionPoint {
            pretrain_source: source,
            label_fraction: r.label_fraction,
            mean_macro_f1: 0.0,
            seeds: Vec::new(),
            per_seed: Vec::new(),
        });
        p.seeds.push(r.seed);
        p.per_seed.push(r.macro_f1);
    }
    let mut points: Vec<FractionPoint> = grouped.into_values().collect();
    for p in &mut points {
        p.mean_macro_f1 = p.per_seed.iter().sum::<f64>() / p.per_seed.len() as f64;
    }
    points.sort_by(|a, b| a.pretrain_source.cmp(&b.pretrain_source).then(a.label_fraction.total_cmp(&b.label_fraction)));
    Ok(points)
}

/// Plot-ready table: one row per (pretrain source, fraction).
pub fn fraction_tsv(points: &[FractionPoint]) -> String {
    let mut out = String::from("pretrain_source\tlabel_fraction\tmean_macro_f1\tseeds\tper_seed_macro_f1\n");
    for p in points {
        let seeds: Vec<String> = p.seeds.iter().map(u64::to_string).collect();
        let per_seed: Vec<String> = p.per_seed.iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(
            out,
            "{}\t{}\t{:.6}\t{}\t{}",
            p.pretrain_source,
            p.label_fraction,
            p.mean_macro_f1,
            seeds.join(","),
            per_seed.join(",")
        );
    }
    out
}

/// Checks of the label-fraction curve for one pretrain source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionFindings {
    pub pretrain_source: PretrainSource,
    pub f1_at_10: Option<f64>,
    pub f1_at_20: Option<f64>,
    pub f1_at_100: Option<f64>,
    /// 20% within 0.10 of 100%.
    pub stable_at_20: Option<bool>,
    /// 10% strictly below 20%.
    pub declines_at_10: Option<bool>,
}

pub fn fraction_findings(points: &[FractionPoint]) -> Vec<FractionFindings> {
    let at = |source: PretrainSource, f: f64| {
        points.iter().find(|p| p.pretrain_source == source && (p.label_fraction - f).abs() < 1e-9).map(|p| p.mean_macro_f1)
    };
    let mut sources: Vec<PretrainSource> = points.iter().map(|p| p.pretrain_source).collect();
    sources.dedup();
    sources
        .into_iter()
        .map(|s| {
            let (f10, f20, f100) = (at(s, 0.1), at(s, 0.2), at(s, 1.0));
            FractionFindings {
                pretrain_source: s,
                f1_at_10: f10,
                f1_at_20: f20,
                f1_at_100: f100,
                stable_at_20: f20.zip(f100).map(|(a, b)| (a - b).abs() <= 0.10),
                declines_at_10: f10.zip(f20).map(|(a, b)| a < b),
            }
        })
        .collect()
}
