use std::collections::HashSet;

use rand::seq::{index::sample, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::cascade::{Cascade, TimeUnit};
use crate::error::{invalid_config, invalid_input, Result};
use crate::seed::derived_rng;

/// One labeled pool of cascades, e.g. one simulated dataset or one platform.
#[derive(Clone, Debug)]
pub struct Source {
    pub class_name: String,
    pub time_unit: Option<TimeUnit>,
    pub cascades: Vec<Cascade>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSize {
    PerClass(usize),
    /// Total split as evenly as possible; the remainder goes one each to the
    /// first sources.
    Total(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    pub size: GroupSize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct GroupItem {
    /// `<class_name>:<cascade_id>`, unique within the group.
    pub uid: String,
    pub class_index: usize,
    pub time_unit: Option<TimeUnit>,
    pub cascade: Cascade,
}

#[derive(Clone, Debug)]
pub struct GroupDataset {
    pub name: String,
    pub class_names: Vec<String>,
    pub items: Vec<GroupItem>,
}

impl GroupDataset {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for item in &self.items {
            counts[item.class_index] += 1;
        }
        counts
    }

    pub fn labels(&self) -> Vec<usize> {
        self.items.iter().map(|i| i.class_index).collect()
    }
}

fn per_source_counts(size: GroupSize, sources: usize) -> Vec<usize> {
    match size {
        GroupSize::PerClass(n) => vec![n; sources],
        GroupSize::Total(total) => (0..sources).map(|i| total / sources + usize::from(i < total % sources)).collect(),
    }
}

/// Samples each source without replacement, labels by source, then shuffles.
pub fn build_group(spec: &GroupSpec, sources: &[Source]) -> Result<GroupDataset> {
    if sources.len() < 2 {
        return Err(invalid_config("a group needs at least two sources"));
    }
    let mut names = HashSet::new();
    if let Some(dup) = sources.iter().find(|s| !names.insert(s.class_name.as_str())) {
        return Err(invalid_config(format!("duplicate class name `{}`", dup.class_name)));
    }
    let counts = per_source_counts(spec.size, sources.len());
    if counts.contains(&0) {
        return Err(invalid_config("every source must contribute at least one cascade"));
    }
    let mut items = Vec::with_capacity(counts.iter().sum());
    for (class_index, (source, &count)) in sources.iter().zip(&counts).enumerate() {
        if count > source.cascades.len() {
            return Err(invalid_config(format!(
                "source `{}` has {} cascades, {} requested",
                source.class_name,
                source.cascades.len(),
                count
            )));
        }
        let mut rng = derived_rng(spec.seed, "group-sample", class_index as u64);
        let mut picked = sample(&mut rng, source.cascades.len(), count).into_vec();
        picked.sort_unstable();
        for i in picked {
            let cascade = source.cascades[i].clone();
            items.push(GroupItem {
                uid: format!("{}:{}", source.class_name, cascade.id()),
                class_index,
                time_unit: source.time_unit,
                cascade,
            });
        }
    }
    let mut seen = HashSet::new();
    if let Some(dup) = items.iter().find(|i| !seen.insert(i.uid.as_str())) {
        return Err(invalid_input(format!("duplicate cascade id `{}`", dup.uid)));
    }
    items.shuffle(&mut derived_rng(spec.seed, "group-shuffle", 0));
    Ok(GroupDataset {
        name: spec.name.clone(),
        class_names: sources.iter().map(|s| s.class_name.clone()).collect(),
        items,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train_fraction: f64,
    /// Share of the training pool held out for validation.
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train_fraction: 0.6, val_fraction: 1.0 / 6.0, seed: 0 }
    }
}

/// Indices into a dataset's items, each partition in dataset order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

fn class_members(labels: &[usize], subset: &[usize], class_count: usize) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); class_count];
    for &i in subset {
        members[labels[i]].push(i);
    }
    members
}

/// Stratified train/validation/test split.
pub fn split(dataset: &GroupDataset, spec: &SplitSpec) -> Result<Split> {
    let open = |f: f64| f > 0.0 && f < 1.0;
    if !open(spec.train_fraction) || !open(spec.val_fraction) {
        return Err(invalid_config("split fractions must lie in (0, 1)"));
    }
    if dataset.len() < 10 {
        return Err(invalid_config("a dataset needs at least 10 cascades to split"));
    }
    let labels = dataset.labels();
    let all: Vec<usize> = (0..dataset.len()).collect();
    let mut out = Split { train: Vec::new(), val: Vec::new(), test: Vec::new() };
    for (c, mut members) in class_members(&labels, &all, dataset.class_count()).into_iter().enumerate() {
        let n = members.len();
        let n_test = (n as f64 * (1.0 - spec.train_fraction)).round() as usize;
        let pool = n - n_test.min(n);
        let n_val = (pool as f64 * spec.val_fraction).round() as usize;
        if n_test == 0 || n_val == 0 || pool <= n_val {
            return Err(invalid_config(format!("class `{}` has too few cascades ({n}) to stratify", dataset.class_names[c])));
        }
        members.shuffle(&mut derived_rng(spec.seed, "split", c as u64));
        out.test.extend_from_slice(&members[..n_test]);
        out.val.extend_from_slice(&members[n_test..n_test + n_val]);
        out.train.extend_from_slice(&members[n_test + n_val..]);
    }
    out.train.sort_unstable();
    out.val.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}

/// Stratified subset of `subset` holding `fraction` of each class. The
/// per-class order is a fixed permutation, so smaller fractions are always
/// prefixes of larger ones.
pub fn nested_subsample(labels: &[usize], subset: &[usize], class_count: usize, fraction: f64, seed: u64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid_config("label fraction must lie in (0, 1]"));
    }
    let mut out = Vec::new();
    for (c, mut members) in class_members(labels, subset, class_count).into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let take = (members.len() as f64 * fraction).round() as usize;
        if take == 0 {
            return Err(invalid_config(format!("fraction {fraction} leaves class {c} without examples")));
        }
        members.shuffle(&mut derived_rng(seed, "fraction-order", c as u64));
        out.extend_from_slice(&members[..take]);
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::Event;

    fn source(name: &str, n: usize) -> Source {
        let cascades = (0..n).map(|i| Cascade::new(format!("c{i}"), vec![Event::origin(i as u32)]).unwrap()).collect();
        Source { class_name: name.into(), time_unit: None, cascades }
    }

    #[test]
    fn total_size_remainder_is_round_robin() {
        assert_eq!(per_source_counts(GroupSize::Total(4000), 3), vec![1334, 1333, 1333]);
        assert_eq!(per_source_counts(GroupSize::Total(4000), 4), vec![1000; 4]);
    }

    #[test]
    fn oversized_request_is_a_config_error() {
        let spec = GroupSpec { name: "g".into(), size: GroupSize::PerClass(11), seed: 1 };
        assert!(build_group(&spec, &[source("a", 10), source("b", 20)]).is_err());
    }

    #[test]
    fn split_counts_for_balanced_classes() {
        let spec = GroupSpec { name: "g".into(), size: GroupSize::PerClass(2000), seed: 1 };
        let ds = build_group(&spec, &[source("a", 2000), source("b", 2000), source("c", 2000)]).unwrap();
        let s = split(&ds, &SplitSpec::default()).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (3000, 600, 2400));
    }
}
