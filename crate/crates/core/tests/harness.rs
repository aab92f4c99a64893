mod common;

use std::collections::HashSet;

use cascadelab::cascade::{Cascade, Event, Timestamp};
use cascadelab::classifiers::{Algo, TrainSpec};
use cascadelab::contrastive::{AugmentConfig, ContrastiveSpec};
use cascadelab::diffusion::{generate_dataset, DiffusionConfig, DiffusionModel};
use cascadelab::harness::{
    build_group, evaluate_algorithms, nested_subsample, run_group_experiment, run_label_fraction_experiment, split,
    ExperimentConfig, ExternalPool, GroupDataset, GroupSize, GroupSpec, PreparedGroup, PretrainSource, Source, Split,
    SplitSpec,
};
use cascadelab::metrics::macro_f1;
use cascadelab::netgen::{generate, NetGenConfig, NetworkModel};
use common::oracle::oracle_f1;
use common::{random_cascade, rng};
use proptest::prelude::*;
use rand::Rng;

fn dummy_source(name: &str, n: usize) -> Source {
    let cascades = (0..n).map(|i| Cascade::new(format!("c{i}"), vec![Event::origin(i as u32)]).unwrap()).collect();
    Source { class_name: name.into(), time_unit: None, cascades }
}

fn group_of(sizes: &[usize], per_class: usize, seed: u64) -> GroupDataset {
    let sources: Vec<Source> = sizes.iter().enumerate().map(|(i, &n)| dummy_source(&format!("s{i}"), n)).collect();
    build_group(&GroupSpec { name: "g".into(), size: GroupSize::PerClass(per_class), seed }, &sources).unwrap()
}

fn class_counts(labels: &[usize], idx: &[usize], k: usize) -> Vec<usize> {
    let mut c = vec![0; k];
    for &i in idx {
        c[labels[i]] += 1;
    }
    c
}

#[test]
fn macro_f1_matches_confusion_matrix_oracle() {
    let mut r = rng(42);
    for _ in 0..1000 {
        let k = r.gen_range(1..7);
        let n = r.gen_range(1..300);
        let skew: f64 = r.gen();
        let pairs: Vec<(usize, usize)> = (0..n)
            .map(|_| {
                let t = r.gen_range(0..k);
                let p = if r.gen::<f64>() < skew { t } else { r.gen_range(0..k) };
                (p, t)
            })
            .collect();
        let got = macro_f1(&pairs, k).unwrap();
        let (m, f1) = oracle_f1(&pairs, k);
        assert_eq!(got.confusion_matrix, m);
        assert_eq!(got.per_class_f1, f1);
        assert_eq!(got.macro_f1, f1.iter().sum::<f64>() / k as f64);
        for (c, row) in m.iter().enumerate() {
            assert_eq!(row.iter().sum::<u64>(), pairs.iter().filter(|p| p.1 == c).count() as u64);
        }
    }
}

#[test]
fn macro_f1_hand_cases() {
    let s = macro_f1(&[(0, 0), (0, 0), (0, 1), (1, 1)], 2).unwrap();
    assert_eq!(s.confusion_matrix, vec![vec![2, 0], vec![1, 1]]);
    assert_eq!(s.per_class_f1[0], 0.8);
    assert!((s.per_class_f1[1] - 2.0 / 3.0).abs() < 1e-15);
    assert!((s.macro_f1 - 11.0 / 15.0).abs() < 1e-15);
    // Class 2 is present but never predicted.
    let s = macro_f1(&[(0, 0), (1, 1), (0, 2)], 3).unwrap();
    assert_eq!(s.per_class_f1[2], 0.0);
    assert!((s.macro_f1 - (2.0 / 3.0 + 1.0) / 3.0).abs() < 1e-15);
    assert!(macro_f1(&[], 2).is_err());
}

#[test]
fn group_sizes() {
    let g = group_of(&[2500, 2500, 2500], 2000, 1);
    assert_eq!(g.len(), 6000);
    assert_eq!(class_counts(&g.labels(), &(0..g.len()).collect::<Vec<_>>(), 3), vec![2000; 3]);

    let g4 = group_of(&[1500, 1200, 1000, 3000], 1000, 2);
    assert_eq!(g4.len(), 4000);
    let uids: HashSet<&str> = g4.items.iter().map(|i| i.uid.as_str()).collect();
    assert_eq!(uids.len(), 4000);

    let sources = vec![dummy_source("a", 10), dummy_source("b", 5)];
    let spec = GroupSpec { name: "g".into(), size: GroupSize::PerClass(6), seed: 0 };
    assert!(build_group(&spec, &sources).is_err());
    assert!(build_group(&spec, &sources[..1]).is_err());
}

#[test]
fn paper_scale_split_counts() {
    let g = group_of(&[2000, 2000, 2000], 2000, 3);
    let s = split(&g, &SplitSpec { seed: 9, ..SplitSpec::default() }).unwrap();
    assert_eq!((s.test.len(), s.val.len(), s.train.len()), (2400, 600, 3000));
    assert_eq!(s, split(&g, &SplitSpec { seed: 9, ..SplitSpec::default() }).unwrap());
}

proptest! {
    #[test]
    fn split_is_a_stratified_partition(seed in any::<u64>(), sizes in proptest::collection::vec(20usize..200, 2..5)) {
        let per_class = *sizes.iter().min().unwrap();
        let g = group_of(&sizes, per_class, seed);
        let spec = SplitSpec { seed, ..SplitSpec::default() };
        let s = split(&g, &spec).unwrap();
        let all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        let unique: HashSet<usize> = all.iter().copied().collect();
        prop_assert_eq!(all.len(), g.len());
        prop_assert_eq!(unique.len(), g.len());

        let labels = g.labels();
        let k = sizes.len();
        let n = g.len() as f64;
        for (part, share) in [(&s.test, 0.4), (&s.val, 0.6 / 6.0), (&s.train, 0.5)] {
            let counts = class_counts(&labels, part, k);
            for c in 0..k {
                let expected = per_class as f64 * share;
                prop_assert!((counts[c] as f64 - expected).abs() <= 1.0, "class {} has {} want {}", c, counts[c], expected);
            }
            prop_assert!((part.len() as f64 - n * share).abs() <= k as f64);
        }
    }

    #[test]
    fn subsamples_are_nested(seed in any::<u64>(), n in 50usize..300) {
        let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let subset: Vec<usize> = (0..n).filter(|i| i % 5 != 0).collect();
        let mut prev: Option<HashSet<usize>> = None;
        for f in [0.1, 0.2, 0.5, 1.0] {
            let s: HashSet<usize> = nested_subsample(&labels, &subset, 3, f, seed).unwrap().into_iter().collect();
            prop_assert!(s.iter().all(|i| subset.contains(i)));
            if let Some(p) = &prev {
                prop_assert!(p.is_subset(&s));
            }
            prev = Some(s);
        }
        prop_assert_eq!(prev.unwrap().len(), subset.len());
    }
}

fn fast_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        train: TrainSpec { trees: 50, gbt_rounds: 50, epochs: 5, ..TrainSpec::default() },
        contrastive: ContrastiveSpec {
            batch_size: 32,
            pretrain_epochs: 2,
            finetune_epochs: 4,
            distill_epochs: 4,
            finetune_batch_size: 16,
            learning_rate: 0.003,
            encoder_widths: vec![16, 16],
            projection_hidden: 16,
            projection_dim: 16,
            ..ContrastiveSpec::default()
        },
        augment: AugmentConfig::default(),
        ..ExperimentConfig::default()
    }
    .seeded(seed, "test")
}

fn random_source(name: &str, seed: u64, n: usize) -> Source {
    let cascades = (0..n).map(|i| random_cascade(seed * 10_000 + i as u64, 8 + i % 20).with_id(format!("r{i}")).unwrap()).collect();
    Source { class_name: name.into(), time_unit: Some(cascadelab::cascade::TimeUnit::Steps), cascades }
}

#[test]
fn test_cascades_never_reach_training() {
    let group = build_group(
        &GroupSpec { name: "g".into(), size: GroupSize::PerClass(40), seed: 1 },
        &[random_source("a", 1, 40), random_source("b", 2, 40)],
    )
    .unwrap();
    let cfg = ExperimentConfig { algos: vec![Algo::RandomForest], ..fast_config(1) };
    let prepared = PreparedGroup::new(&group, &cfg.window).unwrap();
    let parts = split(&group, &cfg.split).unwrap();
    let leaky = Split { train: [parts.train.clone(), vec![parts.test[0]]].concat(), ..parts.clone() };
    assert!(evaluate_algorithms(&prepared, &leaky, &cfg).is_err());
    assert!(evaluate_algorithms(&prepared, &parts, &cfg).is_ok());

    let test_item = &group.items[parts.test[0]];
    let pool = ExternalPool::new(vec![test_item.uid.clone()], vec![prepared.graphs[parts.test[0]].clone()], &cfg.window).unwrap();
    let cfg = ExperimentConfig { algos: vec![Algo::Contrastive], ..cfg };
    let err = run_label_fraction_experiment(&prepared, &parts, &[1.0], &[PretrainSource::Mixed], Some(&pool), &cfg);
    assert!(err.is_err());
    assert!(run_label_fraction_experiment(&prepared, &parts, &[1.0], &[PretrainSource::Mixed], None, &cfg).is_err());
}

#[test]
fn full_fraction_self_pretraining_matches_the_table_run() {
    let group = build_group(
        &GroupSpec { name: "g".into(), size: GroupSize::PerClass(60), seed: 4 },
        &[random_source("a", 3, 60), random_source("b", 4, 60)],
    )
    .unwrap();
    let cfg = ExperimentConfig { algos: vec![Algo::Contrastive], ..fast_config(2) };
    let table = run_group_experiment(&group, &cfg).unwrap();
    let prepared = PreparedGroup::new(&group, &cfg.window).unwrap();
    let parts = split(&group, &cfg.split).unwrap();
    let study = run_label_fraction_experiment(&prepared, &parts, &[1.0], &[PretrainSource::SelfOnly], None, &cfg).unwrap();
    assert_eq!(study[0].macro_f1, table[0].macro_f1);
    assert_eq!(study[0].confusion_matrix, table[0].confusion_matrix);
    assert!(run_label_fraction_experiment(&prepared, &parts, &[0.001], &[PretrainSource::SelfOnly], None, &cfg).is_err());
}

#[test]
fn indistinguishable_sources_score_at_chance() {
    let net = generate(&NetGenConfig { node_count: 1000, seed: 5, ..NetGenConfig::with_model(NetworkModel::Ws) }).unwrap();
    let d = DiffusionConfig { min_size: 10, max_size: 60, seed: 6, ..DiffusionConfig::with_model(DiffusionModel::Ic) };
    let cascades = generate_dataset(&net, &d, 2000).unwrap();
    let (a, b) = cascades.split_at(1000);
    let unit = Some(cascadelab::cascade::TimeUnit::Steps);
    let sources = [
        Source { class_name: "a".into(), time_unit: unit, cascades: a.to_vec() },
        Source { class_name: "b".into(), time_unit: unit, cascades: b.to_vec() },
    ];
    let group = build_group(&GroupSpec { name: "same".into(), size: GroupSize::PerClass(1000), seed: 7 }, &sources).unwrap();
    let cfg = ExperimentConfig { train: TrainSpec::default(), ..fast_config(3) };
    for r in run_group_experiment(&group, &cfg).unwrap() {
        assert!((r.macro_f1 - 0.5).abs() <= 0.05, "{}: {:.4} {:?}", r.algo, r.macro_f1, r.confusion_matrix);
        let totals: Vec<u64> = r.confusion_matrix.iter().map(|row| row.iter().sum()).collect();
        assert_eq!(totals, vec![400, 400]);
    }
}

#[test]
fn ids_repeat_across_classes_but_uids_do_not() {
    let t = |x| Timestamp::from_int(x);
    let c = Cascade::new("same", vec![Event::origin(1), Event::new(2, 1, t(1))]).unwrap();
    let sources = vec![
        Source { class_name: "a".into(), time_unit: None, cascades: vec![c.clone(); 1] },
        Source { class_name: "b".into(), time_unit: None, cascades: vec![c] },
    ];
    let g = build_group(&GroupSpec { name: "g".into(), size: GroupSize::PerClass(1), seed: 0 }, &sources).unwrap();
    let uids: HashSet<&str> = g.items.iter().map(|i| i.uid.as_str()).collect();
    assert_eq!(uids, HashSet::from(["a:same", "b:same"]));
}
