use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{NetGenConfig, Network, NetworkModel, NodeId};
use crate::error::{invalid_config, Error, Result};
use crate::seed::{derived_rng, Rng as SeedRng};

/// LFR output: the network plus the planted community of every node.
#[derive(Clone, Debug)]
pub struct LfrNetwork {
    pub network: Network,
    pub communities: Vec<u32>,
    pub community_sizes: Vec<usize>,
    /// Attempt on which generation succeeded (1-based).
    pub iterations: usize,
}

impl LfrNetwork {
    /// Fraction of edges whose endpoints lie in different communities.
    pub fn empirical_mixing(&self) -> f64 {
        let edges = self.network.edges();
        if edges.is_empty() {
            return 0.0;
        }
        let external = edges
            .iter()
            .filter(|&&(u, v)| self.communities[u as usize] != self.communities[v as usize])
            .count();
        external as f64 / edges.len() as f64
    }
}

/// Fraction of stubs an attempt may leave unmatched before it is retried.
const MAX_DROPPED_STUB_FRACTION: f64 = 0.01;

/// LFR benchmark graph.
///
/// Degrees follow a power law with exponent `lfr_gamma` truncated to
/// `[k_min, lfr_max_deg]`, with `k_min` chosen so the mean is `lfr_avg_deg`.
/// Community sizes follow a power law with exponent `lfr_beta_c` on
/// `[lfr_min_comm, lfr_max_comm]` and sum to `node_count`. Each node keeps
/// about `(1 - lfr_mu)` of its stubs inside its community; internal and
/// external stubs are paired by a configuration model that rejects
/// self-loops and multi-edges. Failed attempts are retried with fresh
/// randomness up to `lfr_max_iters` times.
pub fn generate_lfr(config: &NetGenConfig) -> Result<LfrNetwork> {
    config.check_model(NetworkModel::Lfr)?;
    validate(config)?;
    let k_min = solve_min_degree(config.lfr_avg_deg, config.lfr_max_deg as f64, config.lfr_gamma)?;
    let mut last_reason = String::new();
    for attempt in 0..config.lfr_max_iters {
        let mut rng = derived_rng(config.seed, "lfr-attempt", attempt as u64);
        match try_generate(config, k_min, &mut rng) {
            Ok((network, communities, community_sizes)) => {
                return Ok(LfrNetwork { network, communities, community_sizes, iterations: attempt + 1 })
            }
            Err(reason) => last_reason = reason,
        }
    }
    Err(Error::GenerationFailure { iterations: config.lfr_max_iters, reason: last_reason })
}

fn validate(c: &NetGenConfig) -> Result<()> {
    let n = c.node_count;
    if c.lfr_gamma <= 1.0 || c.lfr_beta_c <= 1.0 {
        return Err(invalid_config("LFR exponents must exceed 1"));
    }
    if !(0.0..=1.0).contains(&c.lfr_mu) {
        return Err(invalid_config(format!("lfr_mu must be a probability, got {}", c.lfr_mu)));
    }
    if c.lfr_avg_deg <= 0.0 || c.lfr_avg_deg > c.lfr_max_deg as f64 {
        return Err(invalid_config("require 0 < lfr_avg_deg <= lfr_max_deg"));
    }
    if c.lfr_max_deg >= n {
        return Err(invalid_config("lfr_max_deg must be below node_count"));
    }
    if c.lfr_min_comm == 0 || c.lfr_min_comm > c.lfr_max_comm || c.lfr_max_comm > n {
        return Err(invalid_config("require 0 < lfr_min_comm <= lfr_max_comm <= node_count"));
    }
    if c.lfr_max_iters == 0 {
        return Err(invalid_config("lfr_max_iters must be positive"));
    }
    Ok(())
}

/// `∫_a^b x^e dx`.
fn integral_pow(a: f64, b: f64, e: f64) -> f64 {
    if (e + 1.0).abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0)
    }
}

/// Mean of the continuous density `∝ x^-gamma` on `[a, b]`.
fn power_law_mean(a: f64, b: f64, gamma: f64) -> f64 {
    integral_pow(a, b, 1.0 - gamma) / integral_pow(a, b, -gamma)
}

/// Inverse-CDF draw from the density `∝ x^-gamma` on `[a, b]`.
fn sample_power_law<R: Rng>(rng: &mut R, a: f64, b: f64, gamma: f64) -> f64 {
    let u: f64 = rng.gen();
    if (gamma - 1.0).abs() < 1e-12 {
        a * (b / a).powf(u)
    } else {
        let e = 1.0 - gamma;
        (a.powf(e) + u * (b.powf(e) - a.powf(e))).powf(1.0 / e)
    }
}

/// Lower cutoff whose truncated power law has the requested mean.
fn solve_min_degree(avg: f64, max: f64, gamma: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1.0, max);
    if power_law_mean(lo, max, gamma) > avg {
        return Err(invalid_config(format!("lfr_avg_deg {avg} is below the smallest attainable mean")));
    }
    if avg >= max {
        return Ok(max);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if power_law_mean(mid, max, gamma) < avg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn sample_degrees(c: &NetGenConfig, k_min: f64, rng: &mut SeedRng) -> Vec<usize> {
    let max = c.lfr_max_deg;
    let mut degrees: Vec<usize> = (0..c.node_count)
        .map(|_| {
            let x = sample_power_law(rng, k_min, max as f64, c.lfr_gamma).round() as usize;
            x.clamp(1, max)
        })
        .collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        let start = rng.gen_range(0..degrees.len());
        let i = (0..degrees.len())
            .map(|j| (start + j) % degrees.len())
            .find(|&i| degrees[i] < max)
            .expect("lfr_max_deg >= 1 leaves room to fix parity");
        degrees[i] += 1;
    }
    degrees
}

fn sample_community_sizes(c: &NetGenConfig, rng: &mut SeedRng) -> Result<Vec<usize>, String> {
    let n = c.node_count;
    let (lo, hi) = (c.lfr_min_comm, c.lfr_max_comm);
    let mut sizes = Vec::new();
    let mut total = 0;
    while total < n {
        let s = (sample_power_law(rng, lo as f64, hi as f64, c.lfr_beta_c).round() as usize).clamp(lo, hi);
        if total + s <= n {
            sizes.push(s);
            total += s;
            continue;
        }
        let mut rest = n - total;
        if rest >= lo {
            sizes.push(rest);
            break;
        }
        // Spread the remainder over communities that still have room.
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.shuffle(rng);
        for i in order {
            let take = (hi - sizes[i]).min(rest);
            sizes[i] += take;
            rest -= take;
            if rest == 0 {
                break;
            }
        }
        if rest > 0 {
            return Err(format!("cannot partition {n} nodes into communities of size {lo}..={hi}"));
        }
        break;
    }
    Ok(sizes)
}

type Attempt = (Network, Vec<u32>, Vec<usize>);

fn try_generate(c: &NetGenConfig, k_min: f64, rng: &mut SeedRng) -> Result<Attempt, String> {
    let n = c.node_count;
    let sizes = sample_community_sizes(c, rng)?;
    let degrees = sample_degrees(c, k_min, rng);

    // Split each degree into internal / external stubs with unbiased rounding.
    let mut internal = vec![0usize; n];
    let mut external = vec![0usize; n];
    for i in 0..n {
        let target = (1.0 - c.lfr_mu) * degrees[i] as f64;
        let base = target.floor();
        let k_in = base as usize + usize::from(rng.gen::<f64>() < target - base);
        internal[i] = k_in.min(degrees[i]);
        external[i] = degrees[i] - internal[i];
    }

    // Hardest nodes first; each goes to a random community with room for it.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.sort_by(|&a, &b| internal[b].cmp(&internal[a]));
    let mut free: Vec<usize> = sizes.clone();
    let mut communities = vec![u32::MAX; n];
    let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); sizes.len()];
    let mut eligible = Vec::with_capacity(sizes.len());
    for node in order {
        eligible.clear();
        eligible.extend((0..sizes.len()).filter(|&ci| free[ci] > 0 && sizes[ci] > internal[node]));
        let Some(&ci) = eligible.choose(rng) else {
            return Err(format!("no community can host node with internal degree {}", internal[node]));
        };
        free[ci] -= 1;
        communities[node] = ci as u32;
        members[ci].push(node as NodeId);
    }

    // Each community needs an even number of internal stubs.
    for (ci, nodes) in members.iter().enumerate() {
        let stub_sum: usize = nodes.iter().map(|&v| internal[v as usize]).sum();
        if stub_sum % 2 == 0 {
            continue;
        }
        let size = sizes[ci];
        let fix = nodes
            .iter()
            .map(|&v| v as usize)
            .find(|&v| external[v] > 0 && internal[v] + 1 < size)
            .map(|v| (v, true))
            .or_else(|| nodes.iter().map(|&v| v as usize).find(|&v| internal[v] > 0).map(|v| (v, false)));
        match fix {
            Some((v, true)) => {
                internal[v] += 1;
                external[v] -= 1;
            }
            Some((v, false)) => {
                internal[v] -= 1;
                external[v] += 1;
            }
            None => return Err("cannot fix internal stub parity".into()),
        }
    }

    let mut edges: HashSet<(NodeId, NodeId)> = HashSet::new();
    let mut dropped = 0usize;
    for nodes in &members {
        let stubs: Vec<NodeId> = nodes.iter().flat_map(|&v| std::iter::repeat(v).take(internal[v as usize])).collect();
        dropped += match_stubs(stubs, rng, &mut edges, |_, _| true);
    }
    let stubs: Vec<NodeId> = (0..n).flat_map(|v| std::iter::repeat(v as NodeId).take(external[v])).collect();
    dropped += match_stubs(stubs, rng, &mut edges, |a, b| communities[a as usize] != communities[b as usize]);

    let total_stubs: usize = degrees.iter().sum();
    if dropped as f64 > MAX_DROPPED_STUB_FRACTION * total_stubs as f64 {
        return Err(format!("{dropped} of {total_stubs} stubs could not be matched"));
    }
    Ok((Network::from_edge_set(n, edges), communities, sizes))
}

fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

/// Configuration-model pairing with rejection. Leftover stub pairs are
/// rescued by swapping against an edge created in this phase; whatever still
/// cannot be placed is dropped. Returns the number of dropped stubs.
fn match_stubs<F>(mut pool: Vec<NodeId>, rng: &mut SeedRng, edges: &mut HashSet<(NodeId, NodeId)>, allowed: F) -> usize
where
    F: Fn(NodeId, NodeId) -> bool,
{
    let ok = |a: NodeId, b: NodeId, edges: &HashSet<(NodeId, NodeId)>| a != b && allowed(a, b) && !edges.contains(&key(a, b));
    let mut phase_edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(pool.len() / 2);
    let mut stalled = 0;
    while pool.len() >= 2 && stalled < 5 {
        pool.shuffle(rng);
        let mut leftover = Vec::new();
        for pair in pool.chunks(2) {
            match *pair {
                [a, b] if ok(a, b, edges) => {
                    edges.insert(key(a, b));
                    phase_edges.push((a, b));
                }
                _ => leftover.extend_from_slice(pair),
            }
        }
        stalled = if leftover.len() == pool.len() { stalled + 1 } else { 0 };
        pool = leftover;
    }

    // Swap rescue: (a, b) invalid and (c, d) existing -> (a, c) + (b, d).
    let mut rest = Vec::new();
    let mut i = 0;
    while i + 1 < pool.len() {
        let (a, b) = (pool[i], pool[i + 1]);
        let mut placed = false;
        for _ in 0..50 {
            if phase_edges.is_empty() {
                break;
            }
            let j = rng.gen_range(0..phase_edges.len());
            let (c, d) = phase_edges[j];
            let (c, d) = if rng.gen_bool(0.5) { (c, d) } else { (d, c) };
            if key(a, c) == key(b, d) || !ok(a, c, edges) || !ok(b, d, edges) {
                continue;
            }
            edges.remove(&key(c, d));
            edges.insert(key(a, c));
            edges.insert(key(b, d));
            phase_edges[j] = (a, c);
            phase_edges.push((b, d));
            placed = true;
            break;
        }
        if !placed {
            rest.push(a);
            rest.push(b);
        }
        i += 2;
    }
    rest.len() + pool.len() % 2
}
