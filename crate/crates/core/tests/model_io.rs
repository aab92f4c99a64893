mod common;

use cascadelab::cascade::{CascadeGraph, ObservationWindow};
use cascadelab::classifiers::{train_gbt, train_gcn, train_random_forest, GraphInput, Labeled, TrainSpec};
use cascadelab::contrastive::{train_contrastive, AugmentConfig, ContrastiveSpec};
use cascadelab::features::{graph_features, FeatureVector};
use cascadelab::model_io::{ModelBody, SavedModel};
use common::random_graph;

struct Data {
    graphs: Vec<CascadeGraph<f64>>,
    features: Vec<FeatureVector<f64>>,
    inputs: Vec<GraphInput<f64>>,
    labels: Vec<usize>,
}

/// Small trees (class 0) against larger ones (class 1).
fn data() -> Data {
    let window = ObservationWindow::default();
    let graphs: Vec<CascadeGraph<f64>> = (0..60).map(|i| random_graph(i, if i % 2 == 0 { 4 + i as usize % 5 } else { 15 + i as usize % 9 })).collect();
    Data {
        features: graphs.iter().map(|g| graph_features(g).unwrap()).collect(),
        inputs: graphs.iter().map(|g| GraphInput::from_graph(g, &window).unwrap()).collect(),
        labels: (0..60).map(|i| i % 2).collect(),
        graphs,
    }
}

fn round_trip(body: ModelBody, graphs: &[CascadeGraph<f64>]) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let names = vec!["small".to_string(), "large".to_string()];
    let model = SavedModel::new(names, ObservationWindow::default(), serde_json::json!({"seed": 3}), body);
    model.save(&path).unwrap();
    let loaded = SavedModel::load(&path).unwrap();
    assert_eq!(loaded, model);
    for g in graphs {
        let (a, b) = (model.predict_proba(g).unwrap(), loaded.predict_proba(g).unwrap());
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}

#[test]
fn every_model_kind_reloads_bit_exact() {
    let d = data();
    let spec = TrainSpec { trees: 20, gbt_rounds: 30, epochs: 3, seed: 1, ..TrainSpec::default() };
    let feats = Labeled::new(d.features.iter().collect(), d.labels.clone(), 2).unwrap();
    let inputs = Labeled::new(d.inputs.iter().collect(), d.labels.clone(), 2).unwrap();

    round_trip(ModelBody::RandomForest(train_random_forest(&feats, &spec).unwrap()), &d.graphs);
    round_trip(ModelBody::Gbt(train_gbt(&feats, &feats, &spec).unwrap()), &d.graphs);
    round_trip(ModelBody::Gcn(train_gcn(&inputs, &inputs, &spec).unwrap()), &d.graphs);

    let cspec = ContrastiveSpec {
        batch_size: 16,
        pretrain_epochs: 1,
        finetune_epochs: 2,
        distill_epochs: 2,
        encoder_widths: vec![8, 8],
        projection_hidden: 8,
        projection_dim: 8,
        ..ContrastiveSpec::default()
    };
    let pool: Vec<&CascadeGraph<f64>> = d.graphs.iter().collect();
    let run = train_contrastive(&pool, &inputs, &[], None, &ObservationWindow::default(), &cspec, &AugmentConfig::default()).unwrap();
    round_trip(ModelBody::Contrastive(run.student), &d.graphs);
    round_trip(ModelBody::Contrastive(run.teacher), &d.graphs);

    let encoder = SavedModel::new(vec![], ObservationWindow::default(), serde_json::Value::Null, ModelBody::Encoder(run.encoder));
    let back = SavedModel::from_json(&encoder.to_json().unwrap()).unwrap();
    assert_eq!(back, encoder);
    assert!(back.predict_proba(&d.graphs[0]).is_err());
}

#[test]
fn rejects_foreign_versions_and_mismatched_tags() {
    let d = data();
    let feats = Labeled::new(d.features.iter().collect(), d.labels.clone(), 2).unwrap();
    let forest = train_random_forest(&feats, &TrainSpec { trees: 3, ..TrainSpec::default() }).unwrap();
    let model = SavedModel::new(vec!["a".into(), "b".into()], ObservationWindow::default(), serde_json::Value::Null, ModelBody::RandomForest(forest));
    let mut value: serde_json::Value = serde_json::from_str(&model.to_json().unwrap()).unwrap();

    value["format_version"] = 99.into();
    assert!(SavedModel::from_json(&value.to_string()).is_err());
    value["format_version"] = 1.into();
    value["algo"] = "gcn".into();
    assert!(SavedModel::from_json(&value.to_string()).is_err());
    assert!(SavedModel::from_json("{not json").is_err());
}
