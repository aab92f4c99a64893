//! Versioned JSON container for trained models and encoder checkpoints.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cascade::{CascadeGraph, ObservationWindow};
use crate::classifiers::{Algo, Classifier, ForestModel, GbtModel, GcnModel, GraphInput};
use crate::contrastive::{ContrastiveClassifier, EncoderModel, Phase};
use crate::error::{invalid_input, Result};
use crate::features::graph_features;
use crate::Real;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum ModelBody {
    RandomForest(ForestModel<Real>),
    Gbt(GbtModel<Real>),
    Gcn(GcnModel<Real>),
    Contrastive(ContrastiveClassifier<Real>),
    Encoder(EncoderModel<Real>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format_version: u32,
    pub algo: Algo,
    pub phase: Option<Phase>,
    pub class_names: Vec<String>,
    pub window: ObservationWindow,
    pub hyperparameters: serde_json::Value,
    pub body: ModelBody,
}

impl SavedModel {
    pub fn new(
        class_names: Vec<String>,
        window: ObservationWindow,
        hyperparameters: serde_json::Value,
        body: ModelBody,
    ) -> Self {
        let (algo, phase) = match &body {
            ModelBody::RandomForest(_) => (Algo::RandomForest, None),
            ModelBody::Gbt(_) => (Algo::Gbt, None),
            ModelBody::Gcn(_) => (Algo::Gcn, None),
            ModelBody::Contrastive(c) => (Algo::Contrastive, Some(c.phase)),
            ModelBody::Encoder(_) => (Algo::Contrastive, Some(Phase::Pretrained)),
        };
        SavedModel { format_version: FORMAT_VERSION, algo, phase, class_names, window, hyperparameters, body }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: SavedModel = serde_json::from_str(text)?;
        if model.format_version != FORMAT_VERSION {
            return Err(invalid_input(format!("unsupported model format version {}", model.format_version)));
        }
        let consistent = matches!(
            (&model.body, model.algo),
            (ModelBody::RandomForest(_), Algo::RandomForest)
                | (ModelBody::Gbt(_), Algo::Gbt)
                | (ModelBody::Gcn(_), Algo::Gcn)
                | (ModelBody::Contrastive(_), Algo::Contrastive)
                | (ModelBody::Encoder(_), Algo::Contrastive)
        );
        if !consistent {
            return Err(invalid_input("model body does not match its algorithm tag"));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Class probabilities for a cascade graph built with this model's window.
    pub fn predict_proba(&self, g: &CascadeGraph<Real>) -> Result<Vec<Real>> {
        match &self.body {
            ModelBody::RandomForest(m) => m.predict_proba(&graph_features(g)?),
            ModelBody::Gbt(m) => m.predict_proba(&graph_features(g)?),
            ModelBody::Gcn(m) => m.predict_proba(&GraphInput::from_graph(g, &self.window)?),
            ModelBody::Contrastive(m) => m.predict_proba(&GraphInput::from_graph(g, &self.window)?),
            ModelBody::Encoder(_) => Err(invalid_input("a pre-trained encoder checkpoint has no classifier head")),
        }
    }
}
