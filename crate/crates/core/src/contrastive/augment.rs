use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::CascadeGraph;
use crate::error::{invalid_config, Result};
use crate::scalar::{cast, Scalar};
use crate::seed::rng_from;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub leaf_drop_rate: f64,
    pub node_add_rate: f64,
    /// Half-width of the multiplicative time perturbation.
    pub time_jitter: f64,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig { leaf_drop_rate: 0.1, node_add_rate: 0.1, time_jitter: 0.05, seed: 0 }
    }
}

impl AugmentConfig {
    pub fn identity() -> Self {
        AugmentConfig { leaf_drop_rate: 0.0, node_add_rate: 0.0, time_jitter: 0.0, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        let rate = |r: f64| (0.0..=1.0).contains(&r);
        if !rate(self.leaf_drop_rate) || !rate(self.node_add_rate) {
            return Err(invalid_config("augmentation rates must lie in [0, 1]"));
        }
        if !(self.time_jitter >= 0.0) || !self.time_jitter.is_finite() {
            return Err(invalid_config("time_jitter must be a non-negative number"));
        }
        Ok(())
    }
}

struct Work<T> {
    id: u32,
    parent: Option<usize>,
    time: T,
    key: usize,
}

/// Augmented view seeded from `cfg.seed`.
pub fn augment<T: Scalar>(g: &CascadeGraph<T>, cfg: &AugmentConfig) -> CascadeGraph<T> {
    augment_with(g, cfg, &mut rng_from(cfg.seed))
}

/// Drops leaves, grows degree-proportional leaves, perturbs times, re-sorts.
/// The result keeps the input's id, label and time unit.
pub fn augment_with<T: Scalar, R: Rng>(g: &CascadeGraph<T>, cfg: &AugmentConfig, rng: &mut R) -> CascadeGraph<T> {
    let n = g.len();
    let (parents, times, ids) = (g.parents(), g.times(), g.node_ids());
    let mut children = vec![0usize; n];
    for p in parents.iter().flatten() {
        children[*p] += 1;
    }

    let mut new_index = vec![usize::MAX; n];
    let mut work: Vec<Work<T>> = Vec::with_capacity(n + n / 4 + 1);
    for i in 0..n {
        let is_leaf = i > 0 && children[i] == 0;
        if is_leaf && cfg.leaf_drop_rate > 0.0 && rng.gen_bool(cfg.leaf_drop_rate) {
            continue;
        }
        new_index[i] = work.len();
        let parent = parents[i].map(|p| new_index[p]);
        work.push(Work { id: ids[i], parent, time: times[i], key: i });
    }

    let kept = work.len();
    let gap = median_gap(&work);
    let mut degree = vec![0.0f64; kept];
    for w in &work[1..] {
        let p = w.parent.expect("non-root has a parent");
        degree[p] += 1.0;
    }
    for d in degree.iter_mut().skip(1) {
        *d += 1.0;
    }
    let picker = WeightedIndex::new(&degree).ok();
    let mut next_id = ids.iter().copied().max().unwrap_or(0);
    let jitter = cfg.time_jitter;
    for _ in 0..kept {
        if !(cfg.node_add_rate > 0.0 && rng.gen_bool(cfg.node_add_rate)) {
            continue;
        }
        let parent = match &picker {
            Some(w) => w.sample(rng),
            None => rng.gen_range(0..kept),
        };
        let factor = if jitter > 0.0 { 1.0 + rng.gen_range(-jitter..=jitter) } else { 1.0 };
        next_id += 1;
        let time = work[parent].time + gap * cast::<T>(factor.max(0.5));
        let key = n + work.len();
        work.push(Work { id: next_id, parent: Some(parent), time, key });
    }

    if jitter > 0.0 {
        let original: Vec<T> = work.iter().map(|w| w.time).collect();
        let floor: T = cast((1.0 - jitter).max(0.5));
        for i in 1..work.len() {
            let p = work[i].parent.expect("non-root has a parent");
            let u: T = cast(rng.gen_range(-jitter..=jitter));
            let scaled = original[i] * (T::one() + u);
            let min_time = work[p].time + (original[i] - original[p]) * floor;
            work[i].time = scaled.max(min_time);
        }
    }

    let mut order: Vec<usize> = (1..work.len()).collect();
    order.sort_by(|&a, &b| {
        work[a].time.partial_cmp(&work[b].time).expect("finite times").then(work[a].key.cmp(&work[b].key))
    });
    order.insert(0, 0);
    let mut position = vec![0usize; work.len()];
    for (pos, &i) in order.iter().enumerate() {
        position[i] = pos;
    }
    let nodes = order.iter().map(|&i| work[i].id).collect();
    let new_parents = order.iter().map(|&i| work[i].parent.map(|p| position[p])).collect();
    let new_times = order.iter().map(|&i| work[i].time).collect();
    let mut out = CascadeGraph::from_parts(g.id(), nodes, new_parents, new_times, g.time_unit())
        .expect("augmentation preserves cascade graph invariants");
    out.set_label(g.label().cloned());
    out
}

/// Median parent-to-child delay, or 1 for a graph without edges.
fn median_gap<T: Scalar>(work: &[Work<T>]) -> T {
    let mut gaps: Vec<T> = work[1..].iter().map(|w| w.time - work[w.parent.expect("non-root")].time).collect();
    if gaps.is_empty() {
        return T::one();
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let m = gaps.len();
    if m % 2 == 1 {
        gaps[m / 2]
    } else {
        (gaps[m / 2 - 1] + gaps[m / 2]) / cast(2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::TimeUnit;

    fn star(leaves: u32) -> CascadeGraph<f64> {
        let n = leaves as usize + 1;
        let parents = (0..n).map(|i| if i == 0 { None } else { Some(0) }).collect();
        let times = (0..n).map(|i| if i == 0 { 0.0 } else { 1.0 }).collect();
        CascadeGraph::from_parts("s", (0..n as u32).collect(), parents, times, Some(TimeUnit::Steps)).unwrap()
    }

    #[test]
    fn identity_config_is_a_no_op() {
        let g = star(4);
        assert_eq!(augment(&g, &AugmentConfig::identity()), g);
    }

    #[test]
    fn full_leaf_drop_leaves_the_root() {
        let cfg = AugmentConfig { leaf_drop_rate: 1.0, node_add_rate: 0.0, time_jitter: 0.0, seed: 3 };
        let out = augment(&star(4), &cfg);
        assert_eq!(out.len(), 1);
        assert_eq!(out.node_ids(), &[0]);
    }

    #[test]
    fn single_node_grows_validly() {
        let g = CascadeGraph::from_parts("one", vec![7], vec![None], vec![0.0], Some(TimeUnit::Steps)).unwrap();
        let cfg = AugmentConfig { leaf_drop_rate: 0.5, node_add_rate: 1.0, time_jitter: 0.05, seed: 1 };
        let out = augment(&g, &cfg);
        assert_eq!(out.len(), 2);
        assert_eq!(out.node_ids(), &[7, 8]);
        out.validate().unwrap();
    }
}
