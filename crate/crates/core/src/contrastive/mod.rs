//! Contrastive cascade representation learning: augmentation, NT-Xent
//! pre-training, supervised fine-tuning and teacher-student distillation.

mod augment;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use augment::{augment, augment_with, AugmentConfig};

use crate::cascade::{CascadeGraph, ObservationWindow};
use crate::classifiers::{
    fit_graph_net, Classifier, FitOptions, GraphInput, GraphNet, GraphNetParams, ItemLoss, Labeled, Standardizer, TrainItem,
    TrainingHistory,
};
use crate::error::{invalid_config, invalid_input, Error, Result};
use crate::features::NodeFeatureMatrix;
use crate::nn::loss::{nt_xent, softmax_with_temperature};
use crate::nn::{accumulate, all_finite, Adam, AdamConfig, ConvCache, ConvStack, Linear, ParamSet};
use crate::scalar::{cast, to_f64, Scalar};
use crate::seed::{derive_seed, derived_rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContrastiveSpec {
    pub temperature: f64,
    pub batch_size: usize,
    pub pretrain_epochs: usize,
    pub finetune_epochs: usize,
    pub distill_epochs: usize,
    pub distill_temperature: f64,
    pub distill_alpha: f64,
    pub learning_rate: f64,
    /// Mini-batch size for the supervised phases.
    pub finetune_batch_size: usize,
    pub encoder_widths: Vec<usize>,
    pub projection_hidden: usize,
    pub projection_dim: usize,
    pub seed: u64,
}

impl Default for ContrastiveSpec {
    fn default() -> Self {
        ContrastiveSpec {
            temperature: 0.5,
            batch_size: 64,
            pretrain_epochs: 30,
            finetune_epochs: 20,
            distill_epochs: 20,
            distill_temperature: 2.0,
            distill_alpha: 0.5,
            learning_rate: 0.001,
            finetune_batch_size: 64,
            encoder_widths: vec![64, 64],
            projection_hidden: 64,
            projection_dim: 32,
            seed: 0,
        }
    }
}

impl ContrastiveSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("batch_size", self.batch_size),
            ("pretrain_epochs", self.pretrain_epochs),
            ("finetune_epochs", self.finetune_epochs),
            ("distill_epochs", self.distill_epochs),
            ("finetune_batch_size", self.finetune_batch_size),
            ("projection_hidden", self.projection_hidden),
            ("projection_dim", self.projection_dim),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(invalid_config(format!("{name} must be positive")));
        }
        if self.batch_size < 2 {
            return Err(invalid_config("contrastive batch_size must be at least 2"));
        }
        if self.encoder_widths.is_empty() || self.encoder_widths.contains(&0) {
            return Err(invalid_config("encoder_widths must be non-empty and positive"));
        }
        for (name, v) in [
            ("temperature", self.temperature),
            ("distill_temperature", self.distill_temperature),
            ("learning_rate", self.learning_rate),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid_config(format!("{name} must be positive")));
            }
        }
        if !(0.0..=1.0).contains(&self.distill_alpha) {
            return Err(invalid_config("distill_alpha must lie in [0, 1]"));
        }
        Ok(())
    }

    fn embedding_dim(&self) -> usize {
        *self.encoder_widths.last().expect("validated")
    }
}

/// Training phase recorded in checkpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Pretrained,
    Finetuned,
    Distilled,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Pretrained => "pretrained",
            Phase::Finetuned => "finetuned",
            Phase::Distilled => "distilled",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pretrained" => Ok(Phase::Pretrained),
            "finetuned" => Ok(Phase::Finetuned),
            "distilled" => Ok(Phase::Distilled),
            other => Err(invalid_input(format!("unknown phase `{other}`"))),
        }
    }
}

/// Graph convolutions plus the projection head used only during pre-training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EncoderParams<T> {
    pub conv: ConvStack<T>,
    pub proj_hidden: Linear<T>,
    pub proj_out: Linear<T>,
}

impl<T: Scalar> EncoderParams<T> {
    fn zeros_like(&self) -> Self {
        EncoderParams { conv: self.conv.zeros_like(), proj_hidden: self.proj_hidden.zeros_like(), proj_out: self.proj_out.zeros_like() }
    }
}

impl<T: Scalar> ParamSet<T> for EncoderParams<T> {
    fn tensors(&self) -> Vec<&[T]> {
        let mut t = self.conv.tensors();
        t.extend(self.proj_hidden.tensors());
        t.extend(self.proj_out.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut t = self.conv.tensors_mut();
        t.extend(self.proj_hidden.tensors_mut());
        t.extend(self.proj_out.tensors_mut());
        t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EncoderModel<T> {
    pub scaler: Standardizer<T>,
    pub params: EncoderParams<T>,
    /// Mean contrastive loss per pre-training epoch.
    pub loss_history: Vec<f64>,
}

struct ViewForward<T> {
    pooled: Vec<T>,
    cache: ConvCache<T>,
    hidden_pre: Vec<T>,
    hidden: Vec<T>,
    z: Vec<T>,
}

impl<T: Scalar> EncoderModel<T> {
    /// Untrained encoder for `NodeFeatureMatrix::DIM` inputs.
    pub fn init(scaler: Standardizer<T>, spec: &ContrastiveSpec) -> Result<Self> {
        spec.validate()?;
        if scaler.dim() != NodeFeatureMatrix::<T>::DIM {
            return Err(invalid_input("standardizer width differs from the node feature width"));
        }
        let mut rng = derived_rng(spec.seed, "encoder-init", 0);
        let mut widths = vec![NodeFeatureMatrix::<T>::DIM];
        widths.extend(&spec.encoder_widths);
        let conv = ConvStack::new(&widths, &mut rng);
        let proj_hidden = Linear::new(spec.embedding_dim(), spec.projection_hidden, &mut rng);
        let proj_out = Linear::new(spec.projection_hidden, spec.projection_dim, &mut rng);
        Ok(EncoderModel { scaler, params: EncoderParams { conv, proj_hidden, proj_out }, loss_history: Vec::new() })
    }

    pub fn embedding_dim(&self) -> usize {
        self.params.conv.output_dim()
    }

    /// Mean-pooled graph embedding `e`.
    pub fn embedding(&self, input: &GraphInput<T>) -> Result<Vec<T>> {
        let x = self.scaler.apply(&input.x)?;
        Ok(self.params.conv.forward(&input.adj, &x)?.0)
    }

    /// Projection `z` used by the contrastive objective.
    pub fn projection(&self, input: &GraphInput<T>) -> Result<Vec<T>> {
        Ok(self.forward_view(input)?.z)
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.params)
    }

    fn forward_view(&self, input: &GraphInput<T>) -> Result<ViewForward<T>> {
        let x = self.scaler.apply(&input.x)?;
        let (pooled, cache) = self.params.conv.forward(&input.adj, &x)?;
        let hidden_pre = self.params.proj_hidden.forward(&pooled);
        let hidden: Vec<T> = hidden_pre.iter().map(|&v| v.max(T::zero())).collect();
        let z = self.params.proj_out.forward(&hidden);
        Ok(ViewForward { pooled, cache, hidden_pre, hidden, z })
    }

    /// NT-Xent over `views` (views `2i` and `2i + 1` are a positive pair)
    /// and its gradient with respect to every encoder parameter.
    pub fn contrastive_loss_and_grad(&self, views: &[GraphInput<T>], temperature: T) -> Result<(T, EncoderParams<T>)> {
        let forwards = views.par_iter().map(|v| self.forward_view(v)).collect::<Result<Vec<_>>>()?;
        let z: Vec<Vec<T>> = forwards.iter().map(|f| f.z.clone()).collect();
        let (loss, d_z) = nt_xent(&z, temperature)?;
        let grads: Vec<EncoderParams<T>> = forwards
            .par_iter()
            .zip(views.par_iter())
            .zip(d_z.par_iter())
            .map(|((f, view), dz)| {
                let mut g = self.params.zeros_like();
                let d_hidden = self.params.proj_out.backward(&f.hidden, dz, &mut g.proj_out);
                let d_pre: Vec<T> =
                    d_hidden.iter().zip(&f.hidden_pre).map(|(&d, &a)| if a > T::zero() { d } else { T::zero() }).collect();
                let d_pooled = self.params.proj_hidden.backward(&f.pooled, &d_pre, &mut g.proj_hidden);
                self.params.conv.backward(&view.adj, &f.cache, &d_pooled, &mut g.conv);
                g
            })
            .collect();
        let mut total = self.params.zeros_like();
        for g in &grads {
            accumulate(&mut total, g, T::one());
        }
        Ok((loss, total))
    }

    /// NT-Xent only.
    pub fn contrastive_loss(&self, views: &[GraphInput<T>], temperature: T) -> Result<T> {
        let z = views.iter().map(|v| self.projection(v)).collect::<Result<Vec<_>>>()?;
        Ok(nt_xent(&z, temperature)?.0)
    }

    /// Classifier sharing this encoder's convolutions with a fresh linear head.
    pub fn classifier(&self, class_count: usize, seed: u64) -> Result<GraphNet<T>> {
        let mut rng = derived_rng(seed, "head-init", 0);
        let head = Linear::new(self.embedding_dim(), class_count, &mut rng);
        GraphNet::new(self.scaler.clone(), GraphNetParams { conv: self.params.conv.clone(), head })
    }
}

/// Two augmented views per graph, laid out as consecutive pairs.
pub fn make_views<T: Scalar>(
    graphs: &[&CascadeGraph<T>],
    window: &ObservationWindow,
    aug: &AugmentConfig,
    view_seed: u64,
) -> Result<Vec<GraphInput<T>>> {
    (0..graphs.len() * 2)
        .into_par_iter()
        .map(|k| {
            let mut rng = derived_rng(view_seed, "view", k as u64);
            let view = augment_with(graphs[k / 2], aug, &mut rng);
            GraphInput::from_graph(&view, window)
        })
        .collect()
}

/// Contrastive pre-training with Adam on shuffled batches of `batch_size`
/// graphs. A trailing batch with fewer than two graphs is skipped.
pub fn pretrain<T: Scalar>(
    unlabeled: &[&CascadeGraph<T>],
    window: &ObservationWindow,
    spec: &ContrastiveSpec,
    aug: &AugmentConfig,
) -> Result<EncoderModel<T>> {
    spec.validate()?;
    aug.validate()?;
    if unlabeled.len() < spec.batch_size {
        return Err(invalid_input(format!(
            "pre-training needs at least batch_size={} graphs, got {}",
            spec.batch_size,
            unlabeled.len()
        )));
    }
    let base = unlabeled.par_iter().map(|g| GraphInput::from_graph(g, window)).collect::<Result<Vec<_>>>()?;
    let scaler = Standardizer::fit(base.iter())?;
    let mut encoder = EncoderModel::init(scaler, spec)?;
    let mut adam = Adam::new(AdamConfig::with_lr(spec.learning_rate), &encoder.params);
    let tau: T = cast(spec.temperature);
    let mut order: Vec<usize> = (0..unlabeled.len()).collect();
    for epoch in 0..spec.pretrain_epochs {
        order.shuffle(&mut derived_rng(spec.seed, "pretrain-epoch", epoch as u64));
        let mut loss_sum = 0.0;
        let mut counted = 0usize;
        for (b, chunk) in order.chunks(spec.batch_size).enumerate() {
            if chunk.len() < 2 {
                continue;
            }
            let graphs: Vec<&CascadeGraph<T>> = chunk.iter().map(|&i| unlabeled[i]).collect();
            let view_seed = derive_seed(derive_seed(aug.seed, "augment-epoch", epoch as u64), "batch", b as u64);
            let views = make_views(&graphs, window, aug, view_seed)?;
            let (loss, grads) = encoder.contrastive_loss_and_grad(&views, tau)?;
            adam.step(&mut encoder.params, &grads);
            loss_sum += to_f64(loss) * chunk.len() as f64;
            counted += chunk.len();
        }
        if !encoder.is_finite() {
            return Err(Error::DegenerateModel(format!("encoder diverged in epoch {}", epoch + 1)));
        }
        encoder.loss_history.push(loss_sum / counted.max(1) as f64);
    }
    Ok(encoder)
}

/// Supervised classifier in the contrastive family, tagged with its phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ContrastiveClassifier<T> {
    pub phase: Phase,
    pub net: GraphNet<T>,
    pub history: TrainingHistory,
}

impl<T: Scalar> Classifier<GraphInput<T>, T> for ContrastiveClassifier<T> {
    fn class_count(&self) -> usize {
        self.net.class_count()
    }

    fn predict_proba(&self, input: &GraphInput<T>) -> Result<Vec<T>> {
        self.net.predict_proba(input)
    }
}

fn supervised_options(spec: &ContrastiveSpec, epochs: usize, tag: &str) -> FitOptions {
    FitOptions {
        epochs,
        batch_size: spec.finetune_batch_size,
        learning_rate: spec.learning_rate,
        seed: derive_seed(spec.seed, tag, 0),
    }
}

/// Joint training of the encoder and a new softmax head with cross-entropy.
pub fn finetune<T: Scalar>(
    encoder: &EncoderModel<T>,
    labeled: &Labeled<'_, GraphInput<T>>,
    val: Option<&Labeled<'_, GraphInput<T>>>,
    spec: &ContrastiveSpec,
) -> Result<ContrastiveClassifier<T>> {
    spec.validate()?;
    labeled.require_multiclass()?;
    let net = encoder.classifier(labeled.class_count, derive_seed(spec.seed, "finetune-head", 0))?;
    let items: Vec<TrainItem<'_, T>> =
        labeled.x.iter().zip(&labeled.y).map(|(&input, &y)| TrainItem { input, loss: ItemLoss::CrossEntropy(y) }).collect();
    let (net, history) = fit_graph_net(net, &items, val, &supervised_options(spec, spec.finetune_epochs, "finetune"))?;
    Ok(ContrastiveClassifier { phase: Phase::Finetuned, net, history })
}

/// Distillation items: labeled graphs carry both terms, unlabeled graphs
/// only the softened teacher term.
pub fn distillation_items<'a, T: Scalar>(
    teacher: &GraphNet<T>,
    labeled: &Labeled<'a, GraphInput<T>>,
    unlabeled: &[&'a GraphInput<T>],
    spec: &ContrastiveSpec,
) -> Result<Vec<TrainItem<'a, T>>> {
    let temperature: T = cast(spec.distill_temperature);
    let alpha: T = cast(spec.distill_alpha);
    let inputs: Vec<(&'a GraphInput<T>, Option<usize>)> = labeled
        .x
        .iter()
        .zip(&labeled.y)
        .map(|(&g, &y)| (g, Some(y)))
        .chain(unlabeled.iter().map(|&g| (g, None)))
        .collect();
    inputs
        .par_iter()
        .map(|&(input, label)| {
            let teacher_soft = softmax_with_temperature(&teacher.logits(input)?, temperature);
            Ok(TrainItem { input, loss: ItemLoss::Distill { label, teacher_soft, alpha, temperature } })
        })
        .collect()
}

/// Student with the encoder's convolutions and a fresh head, trained on
/// `alpha · CE + (1 - alpha) · T² · KL(teacher_T ‖ student_T)`.
pub fn distill<T: Scalar>(
    teacher: &ContrastiveClassifier<T>,
    encoder: &EncoderModel<T>,
    labeled: &Labeled<'_, GraphInput<T>>,
    unlabeled: &[&GraphInput<T>],
    val: Option<&Labeled<'_, GraphInput<T>>>,
    spec: &ContrastiveSpec,
) -> Result<ContrastiveClassifier<T>> {
    spec.validate()?;
    labeled.require_multiclass()?;
    if teacher.class_count() != labeled.class_count {
        return Err(invalid_input("teacher and labeled data disagree on the class count"));
    }
    let student = encoder.classifier(labeled.class_count, derive_seed(spec.seed, "student-head", 0))?;
    let items = distillation_items(&teacher.net, labeled, unlabeled, spec)?;
    let (net, history) = fit_graph_net(student, &items, val, &supervised_options(spec, spec.distill_epochs, "distill"))?;
    Ok(ContrastiveClassifier { phase: Phase::Distilled, net, history })
}

/// All artifacts of one contrastive run.
#[derive(Clone, Debug)]
pub struct ContrastiveRun<T> {
    pub encoder: EncoderModel<T>,
    pub teacher: ContrastiveClassifier<T>,
    pub student: ContrastiveClassifier<T>,
}

/// Pre-train on `pool`, fine-tune on `labeled`, distill over `labeled`
/// plus `unlabeled`.
pub fn train_contrastive<T: Scalar>(
    pool: &[&CascadeGraph<T>],
    labeled: &Labeled<'_, GraphInput<T>>,
    unlabeled: &[&GraphInput<T>],
    val: Option<&Labeled<'_, GraphInput<T>>>,
    window: &ObservationWindow,
    spec: &ContrastiveSpec,
    aug: &AugmentConfig,
) -> Result<ContrastiveRun<T>> {
    let encoder = pretrain(pool, window, spec, aug)?;
    let teacher = finetune(&encoder, labeled, val, spec)?;
    let student = distill(&teacher, &encoder, labeled, unlabeled, val, spec)?;
    Ok(ContrastiveRun { encoder, teacher, student })
}
