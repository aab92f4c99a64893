//! Brute-force reference computations shared by the test targets.

use std::collections::{HashMap, VecDeque};

use cascadelab::cascade::{Cascade, Timestamp};
use cascadelab::diffusion::{simulate, DiffusionConfig};
use cascadelab::netgen::Network;

use super::rng;

/// All-pairs distances by Floyd-Warshall on the adjacency matrix.
pub fn distances(adj: &[Vec<usize>]) -> Vec<Vec<f64>> {
    let n = adj.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (u, nbrs) in adj.iter().enumerate() {
        d[u][u] = 0.0;
        for &v in nbrs {
            d[u][v] = 1.0;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// [avg_degree, avg_path_length, density, clustering] by brute force.
pub fn feature_oracle(adj: &[Vec<usize>]) -> [f64; 4] {
    let n = adj.len();
    if n == 1 {
        return [0.0; 4];
    }
    let has = |u: usize, v: usize| adj[u].contains(&v);
    let m = adj.iter().map(Vec::len).sum::<usize>() as f64 / 2.0;
    let d = distances(adj);
    let (mut total, mut pairs) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            total += d[i][j];
            pairs += 1.0;
        }
    }
    let mut clustering = 0.0;
    for v in 0..n {
        let k = adj[v].len();
        if k < 2 {
            continue;
        }
        let mut tri = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                if has(v, a) && has(v, b) && has(a, b) {
                    tri += 1.0;
                }
            }
        }
        clustering += tri / (k * (k - 1)) as f64 * 2.0;
    }
    [2.0 * m / n as f64, total / pairs, 2.0 * m / (n * (n - 1)) as f64, clustering / n as f64]
}

/// Hop distance from `source`, `None` when unreachable.
pub fn bfs_depths(net: &Network, source: u32) -> Vec<Option<u64>> {
    let mut depth = vec![None; net.node_count()];
    depth[source as usize] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in net.neighbors(u) {
            if depth[v as usize].is_none() {
                depth[v as usize] = Some(depth[u as usize].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    depth
}

/// Mean cascade size over `runs` simulations from node 0.
pub fn mean_size(net: &Network, cfg: &DiffusionConfig, runs: u64, seed: u64) -> f64 {
    (0..runs).map(|i| simulate(net, cfg, 0, &mut rng(seed ^ i.wrapping_mul(0x9e37))).unwrap().len() as f64).sum::<f64>()
        / runs as f64
}

/// F1 per class from precision and recall, computed from a confusion matrix.
pub fn oracle_f1(pairs: &[(usize, usize)], k: usize) -> (Vec<Vec<u64>>, Vec<f64>) {
    let mut m = vec![vec![0u64; k]; k];
    for &(p, t) in pairs {
        m[t][p] += 1;
    }
    let f1 = (0..k)
        .map(|c| {
            let tp = m[c][c];
            let col: u64 = (0..k).map(|r| m[r][c]).sum();
            let row: u64 = m[c].iter().sum();
            if tp == 0 {
                return 0.0;
            }
            // P = tp/col, R = tp/row; 2PR/(P+R) as one exact fraction.
            let num = 2 * tp * tp * row * col;
            let den = row * col * tp * (row + col);
            let g = gcd(num, den);
            (num / g) as f64 / (den / g) as f64
        })
        .collect();
    (m, f1)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Checks one simulated cascade from scratch: a tree rooted at a parentless
/// origin at time 0, parents strictly earlier in whole rounds, every edge a
/// network edge, size within bounds.
pub fn check_cascade(c: &Cascade, net: &Network, cfg: &DiffusionConfig) -> Result<(), String> {
    let ev = c.events();
    if ev.len() < cfg.min_size || ev.len() > cfg.max_size {
        return Err(format!("size {} outside {}..={}", ev.len(), cfg.min_size, cfg.max_size));
    }
    if ev[0].parent.is_some() || ev[0].time != Timestamp::ZERO {
        return Err("bad origin".into());
    }
    let mut round: HashMap<u32, f64> = HashMap::new();
    round.insert(ev[0].node, 0.0);
    let mut last = 0.0;
    for e in &ev[1..] {
        let t = e.time.to_f64();
        if t.fract() != 0.0 || t < last {
            return Err(format!("time {t} after {last}"));
        }
        let p = e.parent.ok_or("missing parent")?;
        let pt = *round.get(&p).ok_or(format!("parent {p} not yet active"))?;
        if pt >= t {
            return Err(format!("parent {p} at {pt} not before child at {t}"));
        }
        if !net.has_edge(p, e.node) {
            return Err(format!("{p}-{} is not a network edge", e.node));
        }
        if round.insert(e.node, t).is_some() {
            return Err(format!("node {} repeats", e.node));
        }
        last = t;
    }
    Ok(())
}
