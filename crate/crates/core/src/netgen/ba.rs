use std::collections::HashSet;

use rand::Rng;

use super::{NetGenConfig, Network, NetworkModel, NodeId};
use crate::error::{invalid_config, Result};
use crate::seed::rng_from;

/// Barabási–Albert preferential attachment.
///
/// Starts from `ba_m` isolated nodes. Each subsequent node attaches to `ba_m`
/// distinct existing nodes; targets are drawn from an urn holding every edge
/// endpoint once, so draws are proportional to degree. The first added node
/// sees an empty urn and connects to all of the seed nodes.
pub fn generate_ba(config: &NetGenConfig) -> Result<Network> {
    config.check_model(NetworkModel::Ba)?;
    let (n, m) = (config.node_count, config.ba_m);
    if m == 0 || m >= n {
        return Err(invalid_config(format!("ba_m must be in 1..node_count, got {m} for {n} nodes")));
    }
    let mut rng = rng_from(config.seed);
    let mut urn: Vec<NodeId> = Vec::with_capacity(2 * m * (n - m));
    let mut edges = HashSet::with_capacity(m * (n - m));
    let mut targets: Vec<NodeId> = Vec::with_capacity(m);

    for new in m..n {
        targets.clear();
        if urn.is_empty() {
            targets.extend(0..m as NodeId);
        } else {
            while targets.len() < m {
                let candidate = urn[rng.gen_range(0..urn.len())];
                if !targets.contains(&candidate) {
                    targets.push(candidate);
                }
            }
        }
        for &t in &targets {
            edges.insert((t, new as NodeId));
            urn.push(t);
            urn.push(new as NodeId);
        }
    }
    Ok(Network::from_edge_set(n, edges))
}
