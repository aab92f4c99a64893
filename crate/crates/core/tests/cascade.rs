mod common;

use cascadelab::cascade::{
    build_graph, parse_cascades, serialize_cascades, window_cascade, CascadeSet, ObservationWindow, TimeUnit, Timestamp,
};
use common::random_cascade;
use proptest::prelude::*;

fn steps(max: u64) -> ObservationWindow {
    ObservationWindow::new(max, Timestamp::from_int(1)).unwrap()
}

proptest! {
    #[test]
    fn built_graphs_are_valid_trees(seed in any::<u64>(), n in 1usize..120, max in 1u64..40) {
        let c = random_cascade(seed, n);
        let g = build_graph::<f64>(&c, &steps(max), Some(TimeUnit::Steps)).unwrap();
        prop_assert!(g.validate().is_ok());
        prop_assert_eq!(g.edge_count(), g.len() - 1);
        prop_assert!(g.times().iter().all(|&t| t <= max as f64));
    }

    #[test]
    fn windowing_is_idempotent(seed in any::<u64>(), n in 1usize..120, max in 1u64..40) {
        let w = steps(max);
        let once = window_cascade(&random_cascade(seed, n), &w, Some(TimeUnit::Steps));
        let twice = window_cascade(&once, &w, Some(TimeUnit::Steps));
        prop_assert_eq!(&once, &twice);
        let a = build_graph::<f64>(&once, &w, Some(TimeUnit::Steps)).unwrap();
        let b = build_graph::<f64>(&twice, &w, Some(TimeUnit::Steps)).unwrap();
        prop_assert_eq!(a.node_ids(), b.node_ids());
        prop_assert_eq!(a.parents(), b.parents());
    }

    #[test]
    fn larger_windows_never_remove_nodes(seed in any::<u64>(), n in 1usize..120, max in 1u64..40, extra in 0u64..10) {
        let c = random_cascade(seed, n);
        let small = build_graph::<f64>(&c, &steps(max), Some(TimeUnit::Steps)).unwrap();
        let large = build_graph::<f64>(&c, &steps(max + extra), Some(TimeUnit::Steps)).unwrap();
        prop_assert!(large.len() >= small.len());
        prop_assert_eq!(&large.node_ids()[..small.len()], small.node_ids());
    }

    #[test]
    fn cascade_files_round_trip(seeds in proptest::collection::vec(any::<u64>(), 1..6)) {
        let cascades = seeds.iter().enumerate().map(|(i, &s)| random_cascade(s, 1 + i * 7)).collect();
        let set = CascadeSet { time_unit: Some(TimeUnit::Steps), cascades };
        prop_assert_eq!(parse_cascades(&serialize_cascades(&set)).unwrap(), set);
    }
}

#[test]
fn seconds_window_uses_time_threshold() {
    let text = "# time_unit=seconds\nc\t1\t0\t4\t1/2:0.5 2/3:31536000 3/4:31536000.001\n";
    let set = parse_cascades(text).unwrap();
    let g = build_graph::<f64>(&set.cascades[0], &ObservationWindow::default(), set.time_unit).unwrap();
    assert_eq!(g.len(), 3);
}
