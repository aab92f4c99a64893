#![allow(dead_code)]

pub mod gradcheck;
pub mod oracle;

use cascadelab::cascade::{build_graph, Cascade, CascadeGraph, Event, ObservationWindow, TimeUnit, Timestamp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random step-time cascade of `n` events: each event picks a uniform
/// earlier parent and activates at least one round after it.
pub fn random_cascade(seed: u64, n: usize) -> Cascade {
    let mut r = rng(seed);
    let mut events = vec![Event::origin(r.gen_range(0..1000))];
    let mut times = vec![0u64];
    let mut used: std::collections::HashSet<u32> = [events[0].node].into_iter().collect();
    for i in 1..n {
        let p = r.gen_range(0..i);
        let t = (times[p] + 1).max(*times.last().unwrap()) + r.gen_range(0..2);
        let node = loop {
            let c = r.gen_range(0..100_000u32);
            if used.insert(c) {
                break c;
            }
        };
        events.push(Event::new(node, events[p].node, Timestamp::from_int(t)));
        times.push(t);
    }
    Cascade::new(format!("c{seed}"), events).unwrap()
}

pub fn random_graph(seed: u64, n: usize) -> CascadeGraph<f64> {
    build_graph(&random_cascade(seed, n), &ObservationWindow::new(u64::MAX / 2, Timestamp::from_int(1)).unwrap(), Some(TimeUnit::Steps))
        .unwrap()
}

/// Sorted undirected adjacency lists.
pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    adj.iter_mut().for_each(|l| {
        l.sort_unstable();
        l.dedup();
    });
    adj
}

/// Random connected simple graph: a random spanning tree plus extra edges.
pub fn random_connected(seed: u64, max_nodes: usize) -> Vec<Vec<usize>> {
    let mut r = rng(seed);
    let n = r.gen_range(1..=max_nodes);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((r.gen_range(0..v), v));
    }
    let density: f64 = r.gen();
    for u in 0..n {
        for v in u + 1..n {
            if r.gen::<f64>() < density * 0.5 {
                edges.push((u, v));
            }
        }
    }
    adjacency(n, &edges)
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}
