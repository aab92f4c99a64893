//! Graph-level features for the tree ensembles and per-node features for the
//! graph networks. All distances are taken on the undirected view.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cascade::{CascadeGraph, ObservationWindow};
use crate::error::{invalid_input, Result};
use crate::nn::Matrix;
use crate::scalar::{cast, from_usize, Scalar};
use crate::Real;

pub const GRAPH_FEATURE_NAMES: [&str; 4] = ["avg_degree", "avg_path_length", "link_density", "clustering"];
pub const NODE_FEATURE_NAMES: [&str; 3] = ["degree", "avg_sp_length", "timestamp"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T = Real> {
    pub avg_degree: T,
    pub avg_path_length: T,
    pub link_density: T,
    pub clustering_coefficient: T,
}

impl<T: Scalar> FeatureVector<T> {
    pub const DIM: usize = 4;

    pub fn to_array(&self) -> [T; 4] {
        [self.avg_degree, self.avg_path_length, self.link_density, self.clustering_coefficient]
    }
}

/// Per-node rows `(degree, avg_sp_length, timestamp)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeFeatureMatrix<T = Real>(pub Matrix<T>);

impl<T: Scalar> NodeFeatureMatrix<T> {
    pub const DIM: usize = 3;

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn degree(&self, node: usize) -> T {
        self.0[(node, 0)]
    }

    pub fn avg_sp_length(&self, node: usize) -> T {
        self.0[(node, 1)]
    }

    pub fn timestamp(&self, node: usize) -> T {
        self.0[(node, 2)]
    }
}

/// Sum of BFS distances from every node. Assumes a connected graph.
fn distance_sums(adj: &[Vec<usize>]) -> Vec<u64> {
    let n = adj.len();
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    (0..n)
        .map(|src| {
            dist.iter_mut().for_each(|d| *d = u32::MAX);
            dist[src] = 0;
            queue.push_back(src);
            let mut total = 0u64;
            while let Some(u) = queue.pop_front() {
                let du = dist[u];
                total += u64::from(du);
                for &v in &adj[u] {
                    if dist[v] == u32::MAX {
                        dist[v] = du + 1;
                        queue.push_back(v);
                    }
                }
            }
            total
        })
        .collect()
}

fn check_connected(adj: &[Vec<usize>]) -> Result<()> {
    if adj.is_empty() {
        return Err(invalid_input("graph has no nodes"));
    }
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    if count != adj.len() {
        return Err(invalid_input("graph is not connected"));
    }
    Ok(())
}

/// Features of a connected simple undirected graph given as sorted
/// adjacency lists.
pub fn undirected_features<T: Scalar>(adj: &[Vec<usize>]) -> Result<FeatureVector<T>> {
    check_connected(adj)?;
    let n = adj.len();
    if n == 1 {
        let zero = T::zero();
        return Ok(FeatureVector { avg_degree: zero, avg_path_length: zero, link_density: zero, clustering_coefficient: zero });
    }
    let degree_sum: usize = adj.iter().map(Vec::len).sum();
    let pair_count = (n * (n - 1) / 2) as f64;
    // Each unordered pair is counted twice in the per-source sums.
    let distance_total: u64 = distance_sums(adj).iter().sum();

    let mut clustering = 0.0;
    for nbrs in adj {
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        let mut links = 0usize;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if adj[a].binary_search(&b).is_ok() {
                    links += 1;
                }
            }
        }
        clustering += links as f64 / (k * (k - 1) / 2) as f64;
    }

    Ok(FeatureVector {
        avg_degree: cast(degree_sum as f64 / n as f64),
        avg_path_length: cast(distance_total as f64 / 2.0 / pair_count),
        link_density: cast(degree_sum as f64 / 2.0 / pair_count),
        clustering_coefficient: cast(clustering / n as f64),
    })
}

pub fn graph_features<T: Scalar>(g: &CascadeGraph<T>) -> Result<FeatureVector<T>> {
    undirected_features(&g.adjacency())
}

/// Per-node features of a connected graph; `times` are already normalized.
pub fn undirected_node_features<T: Scalar>(adj: &[Vec<usize>], times: &[T]) -> Result<NodeFeatureMatrix<T>> {
    check_connected(adj)?;
    if times.len() != adj.len() {
        return Err(invalid_input("one timestamp per node required"));
    }
    let n = adj.len();
    let sums = distance_sums(adj);
    let mut m = Matrix::zeros(n, NodeFeatureMatrix::<T>::DIM);
    for i in 0..n {
        m[(i, 0)] = from_usize(adj[i].len());
        m[(i, 1)] = if n > 1 { cast(sums[i] as f64 / (n - 1) as f64) } else { T::zero() };
        m[(i, 2)] = times[i];
    }
    Ok(NodeFeatureMatrix(m))
}

/// Node features with timestamps divided by the window bound for the
/// graph's time unit, clamped to `[0, 1]`.
pub fn node_features<T: Scalar>(g: &CascadeGraph<T>, window: &ObservationWindow) -> Result<NodeFeatureMatrix<T>> {
    let bound: T = cast(window.bound(g.time_unit()).to_f64());
    let times: Vec<T> = g.times().iter().map(|&t| (t / bound).max(T::zero()).min(T::one())).collect();
    undirected_node_features(&g.adjacency(), &times)
}

/// Feature CSV: `cascade_id,class_name,avg_degree,avg_path_length,link_density,clustering`.
pub fn features_csv<'a, T: Scalar>(rows: impl IntoIterator<Item = (&'a str, &'a str, FeatureVector<T>)>) -> String {
    let mut out = String::from("cascade_id,class_name,avg_degree,avg_path_length,link_density,clustering\n");
    for (id, class, f) in rows {
        let [a, b, c, d] = f.to_array();
        let _ = writeln!(out, "{id},{class},{a:?},{b:?},{c:?},{d:?}");
    }
    out
}
