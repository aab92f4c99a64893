use std::collections::HashSet;

use rand::Rng;

use super::{NetGenConfig, Network, NetworkModel, NodeId};
use crate::error::{invalid_config, Result};
use crate::seed::rng_from;

/// Watts–Strogatz small world: ring lattice with `ws_k / 2` neighbors per
/// side, then every lattice edge `(u, u + j)` is rewired with probability
/// `ws_beta` to `(u, w)` for a uniform `w` that is neither `u` nor a current
/// neighbor of `u`. Edge count is preserved.
pub fn generate_ws(config: &NetGenConfig) -> Result<Network> {
    config.check_model(NetworkModel::Ws)?;
    let (n, k) = (config.node_count, config.ws_k);
    if k == 0 || k % 2 != 0 {
        return Err(invalid_config(format!("ws_k must be a positive even integer, got {k}")));
    }
    if k >= n {
        return Err(invalid_config(format!("ws_k ({k}) must be below node_count ({n})")));
    }
    if !(0.0..=1.0).contains(&config.ws_beta) {
        return Err(invalid_config(format!("ws_beta must be a probability, got {}", config.ws_beta)));
    }
    let mut rng = rng_from(config.seed);
    let mut adj: Vec<HashSet<NodeId>> = vec![HashSet::with_capacity(k + 2); n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u].insert(v as NodeId);
            adj[v].insert(u as NodeId);
        }
    }
    // Rewire in the classical order: ring distance first, then around the ring.
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = ((u + j) % n) as NodeId;
            if !rng.gen_bool(config.ws_beta) {
                continue;
            }
            if !adj[u].contains(&v) || adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.gen_range(0..n) as NodeId;
                if w as usize != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v as usize].remove(&(u as NodeId));
            adj[u].insert(w);
            adj[w as usize].insert(u as NodeId);
        }
    }
    let edges: HashSet<(NodeId, NodeId)> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| (u as NodeId) < v).map(move |&v| (u as NodeId, v)))
        .collect();
    Ok(Network::from_edge_set(n, edges))
}
