//! Central finite differences for the network losses.

use cascadelab::cascade::{ObservationWindow, Timestamp};
use cascadelab::classifiers::{GraphInput, GraphNet, GraphNetParams, Standardizer};
use cascadelab::contrastive::{ContrastiveSpec, EncoderModel, EncoderParams};
use cascadelab::nn::{ConvStack, ParamSet};
use rand::Rng;

use super::{random_graph, relative_error, rng};

pub const EPS: f64 = 1e-4;
pub const TOL: f64 = 1e-3;
pub const DRAWS: u64 = 12;

pub fn inputs(seed: u64, count: usize, max_nodes: usize) -> Vec<GraphInput<f64>> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| GraphInput::from_graph(&random_graph(seed * 31 + i as u64, r.gen_range(2..max_nodes)), &ObservationWindow::new(10, Timestamp::from_int(1)).unwrap()).unwrap())
        .collect()
}

/// ReLU sign pattern of every pre-activation, recomputed from the public
/// weights. Differences are only meaningful when a step keeps it fixed.
pub fn conv_pattern(scaler: &Standardizer<f64>, conv: &ConvStack<f64>, inputs: &[GraphInput<f64>], out: &mut Vec<bool>) -> Vec<Vec<f64>> {
    let mut pooled = Vec::new();
    for g in inputs {
        let mut h = scaler.apply(&g.x).unwrap();
        for w in conv.layers() {
            let z = g.adj.propagate(&h).matmul(w);
            out.extend(z.as_slice().iter().map(|&v| v > 0.0));
            h = z;
            h.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
        }
        pooled.push(h.mean_rows());
    }
    pooled
}

pub fn net_pattern(net: &GraphNet<f64>, inputs: &[GraphInput<f64>]) -> Vec<bool> {
    let mut out = Vec::new();
    conv_pattern(&net.scaler, &net.params.conv, inputs, &mut out);
    out
}

pub fn encoder_pattern(e: &EncoderModel<f64>, inputs: &[GraphInput<f64>]) -> Vec<bool> {
    let mut out = Vec::new();
    for pooled in conv_pattern(&e.scaler, &e.params.conv, inputs, &mut out) {
        out.extend(e.params.proj_hidden.forward(&pooled).iter().map(|&v| v > 0.0));
    }
    out
}

pub struct FdCheck {
    pub worst: f64,
    pub checked: usize,
    pub skipped: usize,
}

/// Compares `analytic` with central differences of `loss` for every
/// parameter whose ±EPS step leaves the ReLU pattern unchanged.
pub fn fd_check<M: Clone, P: ParamSet<f64>>(
    model: &M,
    analytic: &P,
    params: fn(&mut M) -> &mut P,
    loss: impl Fn(&M) -> f64,
    pattern: impl Fn(&M) -> Vec<bool>,
) -> FdCheck {
    let flat: Vec<f64> = analytic.tensors().iter().flat_map(|t| t.iter().copied()).collect();
    let base = pattern(model);
    let mut check = FdCheck { worst: 0.0, checked: 0, skipped: 0 };
    let mut index = 0;
    let mut probe = model.clone();
    let shapes: Vec<usize> = analytic.tensors().iter().map(|t| t.len()).collect();
    for (ti, &len) in shapes.iter().enumerate() {
        for j in 0..len {
            let orig = params(&mut probe).tensors_mut()[ti][j];
            params(&mut probe).tensors_mut()[ti][j] = orig + EPS;
            let (up, up_pattern) = (loss(&probe), pattern(&probe));
            params(&mut probe).tensors_mut()[ti][j] = orig - EPS;
            let (down, down_pattern) = (loss(&probe), pattern(&probe));
            params(&mut probe).tensors_mut()[ti][j] = orig;
            if up_pattern != base || down_pattern != base {
                check.skipped += 1;
            } else {
                check.checked += 1;
                check.worst = check.worst.max(relative_error(flat[index], (up - down) / (2.0 * EPS)));
            }
            index += 1;
        }
    }
    check
}

/// At most a tenth of the parameters may be skipped and every checked one
/// must agree within `TOL`.
pub fn verdict(draw: u64, c: &FdCheck) -> Result<(), String> {
    if c.worst > TOL {
        return Err(format!("draw {draw}: relative error {}", c.worst));
    }
    if c.skipped * 10 > c.checked + c.skipped {
        return Err(format!("draw {draw}: {} of {} parameters sit on a kink", c.skipped, c.checked + c.skipped));
    }
    Ok(())
}

pub fn assert_check(draw: u64, c: &FdCheck) {
    if let Err(e) = verdict(draw, c) {
        panic!("{e}");
    }
}

pub fn net_params(n: &mut GraphNet<f64>) -> &mut GraphNetParams<f64> {
    &mut n.params
}

pub fn encoder_params(e: &mut EncoderModel<f64>) -> &mut EncoderParams<f64> {
    &mut e.params
}

pub fn encoder(views: &[GraphInput<f64>], width: usize, seed: u64) -> EncoderModel<f64> {
    let spec = ContrastiveSpec {
        encoder_widths: vec![width, width],
        projection_hidden: width,
        projection_dim: width / 2,
        seed,
        ..ContrastiveSpec::default()
    };
    EncoderModel::init(Standardizer::fit(views).unwrap(), &spec).unwrap()
}
