mod common;

use cascadelab::features::{graph_features, undirected_features, undirected_node_features};
use common::oracle::{distances, feature_oracle};
use common::{adjacency, random_connected, random_graph, rng};
use proptest::prelude::*;
use rand::seq::SliceRandom;

#[test]
fn graph_features_match_oracle_on_random_small_graphs() {
    for seed in 0..500 {
        let adj = random_connected(seed, 8);
        let got = undirected_features::<f64>(&adj).unwrap().to_array();
        let want = feature_oracle(&adj);
        for k in 0..4 {
            assert!((got[k] - want[k]).abs() <= 1e-12, "seed {seed} feature {k}: {} vs {}", got[k], want[k]);
        }
    }
}

#[test]
fn node_features_match_oracle_on_random_small_graphs() {
    for seed in 0..500 {
        let adj = random_connected(seed, 8);
        let n = adj.len();
        let times: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let m = undirected_node_features(&adj, &times).unwrap();
        let d = distances(&adj);
        for v in 0..n {
            let mean = if n > 1 { d[v].iter().sum::<f64>() / (n - 1) as f64 } else { 0.0 };
            assert_eq!(m.degree(v), adj[v].len() as f64);
            assert!((m.avg_sp_length(v) - mean).abs() <= 1e-12);
            assert_eq!(m.timestamp(v), times[v]);
        }
    }
}

#[test]
fn path_and_star_cases() {
    let path = undirected_features::<f64>(&adjacency(3, &[(0, 1), (1, 2)])).unwrap();
    assert!((path.avg_degree - 4.0 / 3.0).abs() < 1e-15);
    assert!((path.avg_path_length - 4.0 / 3.0).abs() < 1e-15);
    assert!((path.link_density - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(path.clustering_coefficient, 0.0);

    let star = adjacency(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
    let m = undirected_node_features(&star, &[0.0; 5]).unwrap();
    assert_eq!((m.degree(0), m.avg_sp_length(0)), (4.0, 1.0));
    assert_eq!((m.degree(1), m.avg_sp_length(1)), (1.0, 1.75));
}

#[test]
fn disconnected_graph_is_rejected() {
    assert!(undirected_features::<f64>(&adjacency(3, &[(0, 1)])).is_err());
}

proptest! {
    #[test]
    fn relabeling_nodes_leaves_features_unchanged(seed in any::<u64>()) {
        let adj = random_connected(seed, 12);
        let n = adj.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng(seed ^ 1));
        let mut edges = Vec::new();
        for (u, nbrs) in adj.iter().enumerate() {
            for &v in nbrs {
                edges.push((perm[u], perm[v]));
            }
        }
        let a = undirected_features::<f64>(&adj).unwrap().to_array();
        let b = undirected_features::<f64>(&adjacency(n, &edges)).unwrap().to_array();
        for k in 0..4 {
            prop_assert!((a[k] - b[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn cascade_features_are_finite_and_bounded(seed in any::<u64>(), n in 1usize..80) {
        let f = graph_features(&random_graph(seed, n)).unwrap();
        prop_assert!(f.to_array().iter().all(|x| x.is_finite()));
        prop_assert!((0.0..=1.0).contains(&f.link_density));
        // Cascade graphs are trees.
        prop_assert_eq!(f.clustering_coefficient, 0.0);
    }
}
