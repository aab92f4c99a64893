//! Synthetic undirected networks: Barabási–Albert, Watts–Strogatz and LFR.

mod ba;
mod io;
mod lfr;
mod ws;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_config, invalid_input, Error, Result};

pub use ba::generate_ba;
pub use io::{parse_network, read_network, write_network};
pub use lfr::{generate_lfr, LfrNetwork};
pub use ws::generate_ws;

pub type NodeId = u32;

/// Simple undirected graph. Edges are stored canonically as `(u, v)` with
/// `u < v`, sorted, so two networks compare equal iff their edge sets match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    node_count: usize,
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
}

impl Network {
    /// Builds a network from an edge list, rejecting self-loops, duplicates
    /// and out-of-range endpoints.
    pub fn from_edges(node_count: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        if node_count == 0 {
            return Err(invalid_input("network must have at least one node"));
        }
        let mut canonical: Vec<(NodeId, NodeId)> = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(invalid_input(format!("self-loop on node {u}")));
            }
            if u as usize >= node_count || v as usize >= node_count {
                return Err(invalid_input(format!("edge ({u}, {v}) out of range for {node_count} nodes")));
            }
            canonical.push((u.min(v), u.max(v)));
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid_input(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        Ok(Self::from_canonical(node_count, canonical))
    }

    fn from_canonical(node_count: usize, edges: Vec<(NodeId, NodeId)>) -> Self {
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &edges {
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Network { node_count, edges, adjacency }
    }

    /// Generator-internal constructor; callers guarantee the invariants.
    pub(crate) fn from_edge_set(node_count: usize, edges: HashSet<(NodeId, NodeId)>) -> Self {
        let mut edges: Vec<_> = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        edges.sort_unstable();
        Self::from_canonical(node_count, edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node as usize]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node as usize].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u as usize].binary_search(&v).is_ok()
    }

    /// Structural invariant check: canonical ordering, no loops, no duplicates.
    pub fn validate(&self) -> Result<()> {
        for w in self.edges.windows(2) {
            if w[0] >= w[1] {
                return Err(invalid_input("edges not strictly sorted"));
            }
        }
        for &(u, v) in &self.edges {
            if u >= v || v as usize >= self.node_count {
                return Err(invalid_input(format!("bad edge ({u}, {v})")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkModel {
    Ba,
    Ws,
    Lfr,
}

impl NetworkModel {
    pub const ALL: [NetworkModel; 3] = [NetworkModel::Ba, NetworkModel::Ws, NetworkModel::Lfr];

    pub fn name(self) -> &'static str {
        match self {
            NetworkModel::Ba => "ba",
            NetworkModel::Ws => "ws",
            NetworkModel::Lfr => "lfr",
        }
    }
}

impl fmt::Display for NetworkModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NetworkModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ba" => Ok(NetworkModel::Ba),
            "ws" => Ok(NetworkModel::Ws),
            "lfr" => Ok(NetworkModel::Lfr),
            other => Err(invalid_config(format!("unknown network model `{other}`"))),
        }
    }
}

/// Parameters for all three generators. Defaults are the 5,000-node settings
/// used for the published synthetic datasets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetGenConfig {
    pub model: NetworkModel,
    pub node_count: usize,
    pub ba_m: usize,
    pub ws_k: usize,
    pub ws_beta: f64,
    pub lfr_gamma: f64,
    pub lfr_beta_c: f64,
    pub lfr_mu: f64,
    pub lfr_avg_deg: f64,
    pub lfr_max_deg: usize,
    pub lfr_min_comm: usize,
    pub lfr_max_comm: usize,
    pub lfr_max_iters: usize,
    pub seed: u64,
}

impl Default for NetGenConfig {
    fn default() -> Self {
        NetGenConfig {
            model: NetworkModel::Ba,
            node_count: 5000,
            ba_m: 10,
            ws_k: 10,
            ws_beta: 0.1,
            lfr_gamma: 2.5,
            lfr_beta_c: 1.5,
            lfr_mu: 0.1,
            lfr_avg_deg: 10.0,
            lfr_max_deg: 100,
            lfr_min_comm: 100,
            lfr_max_comm: 600,
            lfr_max_iters: 1000,
            seed: 0,
        }
    }
}

impl NetGenConfig {
    pub fn with_model(model: NetworkModel) -> Self {
        NetGenConfig { model, ..Default::default() }
    }

    fn check_model(&self, expected: NetworkModel) -> Result<()> {
        if self.model != expected {
            return Err(invalid_config(format!(
                "config is for model {}, generator expects {}",
                self.model, expected
            )));
        }
        if self.node_count == 0 {
            return Err(invalid_config("node_count must be positive"));
        }
        Ok(())
    }
}

/// Dispatches on `config.model`.
pub fn generate(config: &NetGenConfig) -> Result<Network> {
    match config.model {
        NetworkModel::Ba => generate_ba(config),
        NetworkModel::Ws => generate_ws(config),
        NetworkModel::Lfr => generate_lfr(config).map(|out| out.network),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(Network::from_edges(3, [(0, 0)]).is_err());
        assert!(Network::from_edges(3, [(0, 3)]).is_err());
        assert!(Network::from_edges(3, [(0, 1), (1, 0)]).is_err());
        let net = Network::from_edges(3, [(2, 0), (1, 0)]).unwrap();
        assert_eq!(net.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(net.neighbors(0), &[1, 2]);
        assert!(net.has_edge(2, 0));
        net.validate().unwrap();
    }

    #[test]
    fn generate_dispatches_on_model() {
        let cfg = NetGenConfig { model: NetworkModel::Ws, node_count: 30, ws_k: 4, seed: 2, ..Default::default() };
        assert_eq!(generate(&cfg).unwrap().edge_count(), 60);
        assert!(generate_ba(&cfg).is_err());
    }
}
