//! Independent Cascade, Linear Threshold and Profile diffusion on a
//! [`Network`], plus filtered dataset generation.
//!
//! All three models run in synchronous rounds; the round index is the event
//! time. Within a round, newly activated nodes are recorded in node-id order.

mod dataset;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::{Cascade, Event, Timestamp};
use crate::error::{invalid_config, invalid_input, Error, Result};
use crate::netgen::{Network, NodeId};

pub use dataset::{generate_dataset, MAX_CONSECUTIVE_REJECTIONS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffusionModel {
    Ic,
    Lt,
    Profile,
}

impl DiffusionModel {
    pub const ALL: [DiffusionModel; 3] = [DiffusionModel::Ic, DiffusionModel::Lt, DiffusionModel::Profile];

    pub fn name(self) -> &'static str {
        match self {
            DiffusionModel::Ic => "ic",
            DiffusionModel::Lt => "lt",
            DiffusionModel::Profile => "profile",
        }
    }
}

impl fmt::Display for DiffusionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DiffusionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ic" => Ok(DiffusionModel::Ic),
            "lt" => Ok(DiffusionModel::Lt),
            "profile" => Ok(DiffusionModel::Profile),
            other => Err(invalid_config(format!("unknown diffusion model `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffusionConfig {
    pub model: DiffusionModel,
    pub ic_p: f64,
    pub lt_threshold: f64,
    pub profile_q: f64,
    /// Cascades with fewer events (origin included) are discarded.
    pub min_size: usize,
    /// Longer cascades keep only their first `max_size` events.
    pub max_size: usize,
    pub seed: u64,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig {
            model: DiffusionModel::Ic,
            ic_p: 0.1,
            lt_threshold: 0.09,
            profile_q: 0.3,
            min_size: 50,
            max_size: 500,
            seed: 0,
        }
    }
}

impl DiffusionConfig {
    pub fn with_model(model: DiffusionModel) -> Self {
        DiffusionConfig { model, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(invalid_config(format!("{name} must be in [0, 1], got {p}")))
            }
        };
        prob("ic_p", self.ic_p)?;
        prob("profile_q", self.profile_q)?;
        if !(self.lt_threshold >= 0.0) {
            return Err(invalid_config("lt_threshold must be non-negative"));
        }
        if self.max_size == 0 || self.min_size > self.max_size {
            return Err(invalid_config(format!(
                "require 0 < max_size and min_size <= max_size (got {}..{})",
                self.min_size, self.max_size
            )));
        }
        Ok(())
    }
}

/// Runs the configured model from `seed_node`.
pub fn simulate<R: Rng>(net: &Network, config: &DiffusionConfig, seed_node: NodeId, rng: &mut R) -> Result<Cascade> {
    match config.model {
        DiffusionModel::Ic => simulate_ic(net, config, seed_node, rng),
        DiffusionModel::Lt => simulate_lt(net, config, seed_node),
        DiffusionModel::Profile => simulate_profile(net, config, seed_node, rng),
    }
}

fn check_seed(net: &Network, seed_node: NodeId) -> Result<()> {
    if seed_node as usize >= net.node_count() {
        return Err(invalid_input(format!("seed node {seed_node} outside network of {} nodes", net.node_count())));
    }
    Ok(())
}

const INACTIVE: u32 = u32::MAX;

/// Event log shared by the round-based simulators.
struct Rounds {
    activated_at: Vec<u32>,
    events: Vec<Event>,
    max_events: usize,
}

impl Rounds {
    fn new(net: &Network, seed_node: NodeId, max_events: usize) -> Self {
        let mut activated_at = vec![INACTIVE; net.node_count()];
        activated_at[seed_node as usize] = 0;
        Rounds { activated_at, events: vec![Event::origin(seed_node)], max_events }
    }

    fn is_active(&self, v: NodeId) -> bool {
        self.activated_at[v as usize] != INACTIVE
    }

    fn full(&self) -> bool {
        self.events.len() >= self.max_events
    }

    /// Records `(node, parent)` pairs, sorted by node, as round `step`.
    /// Returns the nodes actually recorded (stops at the size cap).
    fn record(&mut self, step: u32, mut activations: Vec<(NodeId, NodeId)>) -> Vec<NodeId> {
        activations.sort_unstable_by_key(|&(v, _)| v);
        let room = self.max_events.saturating_sub(self.events.len());
        activations.truncate(room);
        for &(v, parent) in &activations {
            self.activated_at[v as usize] = step;
            self.events.push(Event::new(v, parent, Timestamp::from_int(u64::from(step))));
        }
        activations.into_iter().map(|(v, _)| v).collect()
    }

    fn finish(self, name: &str) -> Cascade {
        Cascade::new_unchecked(name.to_string(), self.events)
    }
}

/// Picks one influencer per target uniformly among its successful attempts.
/// `hits` is grouped after a stable sort, so draw order is reproducible.
fn resolve_parents<R: Rng>(mut hits: Vec<(NodeId, NodeId)>, rng: &mut R) -> Vec<(NodeId, NodeId)> {
    hits.sort_by_key(|&(v, _)| v);
    let mut chosen = Vec::new();
    for group in hits.chunk_by(|a, b| a.0 == b.0) {
        let pick = if group.len() == 1 { 0 } else { rng.gen_range(0..group.len()) };
        chosen.push(group[pick]);
    }
    chosen
}

/// Independent Cascade: every node activated in round `s` makes one
/// Bernoulli(`ic_p`) attempt on each still-inactive neighbor in round `s+1`.
pub fn simulate_ic<R: Rng>(net: &Network, config: &DiffusionConfig, seed_node: NodeId, rng: &mut R) -> Result<Cascade> {
    check_seed(net, seed_node)?;
    let p = config.ic_p;
    let mut state = Rounds::new(net, seed_node, config.max_size);
    let mut frontier = vec![seed_node];
    let mut step = 0;
    while !frontier.is_empty() && !state.full() {
        step += 1;
        let mut hits = Vec::new();
        for &u in &frontier {
            for &v in net.neighbors(u) {
                if !state.is_active(v) && rng.gen_bool(p) {
                    hits.push((v, u));
                }
            }
        }
        let activations = resolve_parents(hits, rng);
        frontier = state.record(step, activations);
    }
    Ok(state.finish("ic"))
}

/// Profile model, receiver side: each exposure of an inactive node to a
/// newly active neighbor grants it one Bernoulli(`profile_q`) adoption trial
/// in the next round.
pub fn simulate_profile<R: Rng>(
    net: &Network,
    config: &DiffusionConfig,
    seed_node: NodeId,
    rng: &mut R,
) -> Result<Cascade> {
    check_seed(net, seed_node)?;
    let q = config.profile_q;
    let mut state = Rounds::new(net, seed_node, config.max_size);
    let mut frontier = vec![seed_node];
    let mut step = 0;
    while !frontier.is_empty() && !state.full() {
        step += 1;
        let mut exposures: Vec<(NodeId, NodeId)> = frontier
            .iter()
            .flat_map(|&u| net.neighbors(u).iter().map(move |&v| (v, u)))
            .filter(|&(v, _)| !state.is_active(v))
            .collect();
        exposures.sort_by_key(|&(v, _)| v);
        let mut hits = Vec::new();
        for group in exposures.chunk_by(|a, b| a.0 == b.0) {
            for &exposure in group {
                if rng.gen_bool(q) {
                    hits.push(exposure);
                }
            }
        }
        let activations = resolve_parents(hits, rng);
        frontier = state.record(step, activations);
    }
    Ok(state.finish("profile"))
}

/// Linear Threshold with uniform weights `1/deg(v)`: inactive `v` activates
/// once the fraction of its active neighbors reaches `lt_threshold`. The
/// parent is the earliest-activated contributing neighbor, ties broken by
/// smallest id. Fully deterministic.
pub fn simulate_lt(net: &Network, config: &DiffusionConfig, seed_node: NodeId) -> Result<Cascade> {
    check_seed(net, seed_node)?;
    let threshold = config.lt_threshold;
    let mut active_neighbors = vec![0u32; net.node_count()];
    let mut state = Rounds::new(net, seed_node, config.max_size);
    let mut frontier = vec![seed_node];
    let mut step = 0;
    while !frontier.is_empty() && !state.full() {
        step += 1;
        let mut candidates = Vec::new();
        for &u in &frontier {
            for &v in net.neighbors(u) {
                active_neighbors[v as usize] += 1;
                if !state.is_active(v) {
                    candidates.push(v);
                }
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        let mut activations = Vec::new();
        for v in candidates {
            let weight = f64::from(active_neighbors[v as usize]) / net.degree(v) as f64;
            if weight >= threshold {
                let parent = net
                    .neighbors(v)
                    .iter()
                    .copied()
                    .filter(|&w| state.is_active(w))
                    .min_by_key(|&w| (state.activated_at[w as usize], w))
                    .expect("an activating node has an active neighbor");
                activations.push((v, parent));
            }
        }
        frontier = state.record(step, activations);
    }
    Ok(state.finish("lt"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    fn star(leaves: u32) -> Network {
        Network::from_edges(leaves as usize + 1, (1..=leaves).map(|v| (0, v))).unwrap()
    }

    fn path(n: u32) -> Network {
        Network::from_edges(n as usize, (1..n).map(|v| (v - 1, v))).unwrap()
    }

    fn grid(side: u32) -> Network {
        let id = |r: u32, c: u32| r * side + c;
        let mut edges = Vec::new();
        for r in 0..side {
            for c in 0..side {
                if c + 1 < side {
                    edges.push((id(r, c), id(r, c + 1)));
                }
                if r + 1 < side {
                    edges.push((id(r, c), id(r + 1, c)));
                }
            }
        }
        Network::from_edges((side * side) as usize, edges).unwrap()
    }

    fn bfs_depths(net: &Network, src: NodeId) -> Vec<u32> {
        let mut depth = vec![u32::MAX; net.node_count()];
        depth[src as usize] = 0;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in net.neighbors(u) {
                if depth[v as usize] == u32::MAX {
                    depth[v as usize] = depth[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        depth
    }

    fn cfg(model: DiffusionModel) -> DiffusionConfig {
        DiffusionConfig { model, min_size: 0, max_size: 10_000, ..Default::default() }
    }

    #[test]
    fn zero_probability_gives_single_event() {
        let net = grid(5);
        let mut rng = rng_from(1);
        let ic = DiffusionConfig { ic_p: 0.0, ..cfg(DiffusionModel::Ic) };
        assert_eq!(simulate_ic(&net, &ic, 3, &mut rng).unwrap().len(), 1);
        let pr = DiffusionConfig { profile_q: 0.0, ..cfg(DiffusionModel::Profile) };
        assert_eq!(simulate_profile(&net, &pr, 3, &mut rng).unwrap().len(), 1);
        let lt = DiffusionConfig { lt_threshold: 1.01, ..cfg(DiffusionModel::Lt) };
        assert_eq!(simulate_lt(&net, &lt, 3).unwrap().len(), 1);
    }

    #[test]
    fn certain_transmission_is_bfs() {
        let net = grid(6);
        let depth = bfs_depths(&net, 7);
        let mut rng = rng_from(5);
        for config in [
            DiffusionConfig { ic_p: 1.0, ..cfg(DiffusionModel::Ic) },
            DiffusionConfig { profile_q: 1.0, ..cfg(DiffusionModel::Profile) },
        ] {
            let c = simulate(&net, &config, 7, &mut rng).unwrap();
            assert_eq!(c.len(), 36);
            for ev in c.events() {
                assert_eq!(ev.time, Timestamp::from_int(u64::from(depth[ev.node as usize])));
            }
        }
    }

    #[test]
    fn lt_triangle() {
        let net = Network::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let c = simulate_lt(&net, &cfg(DiffusionModel::Lt), 0).unwrap();
        assert_eq!(
            c.events(),
            &[Event::origin(0), Event::new(1, 0, Timestamp::from_int(1)), Event::new(2, 0, Timestamp::from_int(1))]
        );
    }

    #[test]
    fn lt_path_below_threshold() {
        let config = DiffusionConfig { lt_threshold: 0.6, ..cfg(DiffusionModel::Lt) };
        assert_eq!(simulate_lt(&path(3), &config, 0).unwrap().len(), 1);
    }

    #[test]
    fn lt_parent_is_earliest_then_smallest() {
        // 0 -> {1, 2} at step 1; 3 is adjacent to 2 and 1 (deg 2) and needs both.
        let net = Network::from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let config = DiffusionConfig { lt_threshold: 0.5, ..cfg(DiffusionModel::Lt) };
        let c = simulate_lt(&net, &config, 0).unwrap();
        assert_eq!(c.events()[3], Event::new(3, 1, Timestamp::from_int(2)));
    }

    #[test]
    fn star_means_match_closed_form() {
        let net = star(5);
        let mut rng = rng_from(11);
        let ic = DiffusionConfig { ic_p: 0.5, ..cfg(DiffusionModel::Ic) };
        let pr = DiffusionConfig { profile_q: 0.3, ..cfg(DiffusionModel::Profile) };
        let runs = 10_000;
        let mean = |c: &DiffusionConfig, rng: &mut crate::seed::Rng| {
            (0..runs).map(|_| simulate(&net, c, 0, rng).unwrap().len()).sum::<usize>() as f64 / runs as f64
        };
        assert!((mean(&ic, &mut rng) - 3.5).abs() < 0.1);
        assert!((mean(&pr, &mut rng) - 2.5).abs() < 0.1);
    }

    #[test]
    fn size_cap_stops_simulation() {
        let config = DiffusionConfig { ic_p: 1.0, max_size: 10, ..cfg(DiffusionModel::Ic) };
        let c = simulate_ic(&grid(10), &config, 0, &mut rng_from(1)).unwrap();
        assert_eq!(c.len(), 10);
    }

    #[test]
    fn rejects_out_of_range_seed() {
        assert!(simulate_lt(&path(3), &cfg(DiffusionModel::Lt), 3).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(DiffusionConfig { ic_p: 1.5, ..Default::default() }.validate().is_err());
        assert!(DiffusionConfig { min_size: 10, max_size: 5, ..Default::default() }.validate().is_err());
        DiffusionConfig::default().validate().unwrap();
    }
}
