//! Axis-aligned binary trees: entropy classification trees for the forest
//! and least-squares regression trees for boosting.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::nn::Matrix;
use crate::scalar::{cast, from_usize, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar, L: Serialize + serde::de::DeserializeOwned")]
enum Node<T, L> {
    Leaf(L),
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: T, left: usize, right: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar, L: Serialize + serde::de::DeserializeOwned")]
struct Tree<T, L> {
    nodes: Vec<Node<T, L>>,
}

impl<T: Scalar, L> Tree<T, L> {
    fn leaf(&self, x: &[T]) -> &L {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(payload) => return payload,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    fn depth(&self) -> usize {
        fn walk<T, L>(nodes: &[Node<T, L>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    fn leaves(&self) -> impl Iterator<Item = &L> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf(l) => Some(l),
            Node::Split { .. } => None,
        })
    }
}

/// Shannon entropy in bits of a class-count histogram.
pub fn entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Midpoint threshold that still separates `lo` from `hi`.
fn midpoint<T: Scalar>(lo: T, hi: T) -> T {
    let mid = (lo + hi) / cast(2.0);
    if mid >= hi {
        lo
    } else {
        mid
    }
}

fn sort_by_feature<T: Scalar>(x: &Matrix<T>, samples: &mut [usize], feature: usize) {
    samples.sort_by(|&a, &b| x[(a, feature)].partial_cmp(&x[(b, feature)]).expect("finite features"));
}

struct SplitChoice<T> {
    feature: usize,
    threshold: T,
    score: f64,
}

/// Classification tree grown to purity with information-gain splits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ClassTree<T> {
    tree: Tree<T, Vec<T>>,
}

pub(crate) struct ClassTreeParams {
    pub class_count: usize,
    pub max_features: usize,
    pub min_samples_split: usize,
}

impl<T: Scalar> ClassTree<T> {
    /// `samples` may contain repeats (bootstrap draws).
    pub(crate) fn fit<R: Rng>(x: &Matrix<T>, y: &[usize], samples: Vec<usize>, params: &ClassTreeParams, rng: &mut R) -> Self {
        let mut tree = Tree { nodes: Vec::new() };
        grow_class(&mut tree, x, y, samples, params, rng);
        ClassTree { tree }
    }

    /// Class distribution of the leaf reached by `x`.
    pub fn leaf_distribution(&self, x: &[T]) -> &[T] {
        self.tree.leaf(x)
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    pub fn leaf_distributions(&self) -> impl Iterator<Item = &[T]> {
        self.tree.leaves().map(Vec::as_slice)
    }
}

fn class_counts(y: &[usize], samples: &[usize], k: usize) -> Vec<usize> {
    let mut counts = vec![0; k];
    for &s in samples {
        counts[y[s]] += 1;
    }
    counts
}

fn grow_class<T: Scalar, R: Rng>(
    tree: &mut Tree<T, Vec<T>>,
    x: &Matrix<T>,
    y: &[usize],
    mut samples: Vec<usize>,
    params: &ClassTreeParams,
    rng: &mut R,
) -> usize {
    let id = tree.nodes.len();
    let counts = class_counts(y, &samples, params.class_count);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let split = if pure || samples.len() < params.min_samples_split {
        None
    } else {
        best_class_split(x, y, &mut samples, &counts, params, rng)
    };
    let Some(split) = split else {
        let n = from_usize::<T>(samples.len());
        tree.nodes.push(Node::Leaf(counts.iter().map(|&c| from_usize::<T>(c) / n).collect()));
        return id;
    };
    tree.nodes.push(Node::Leaf(Vec::new()));
    let (left, right): (Vec<usize>, Vec<usize>) =
        samples.into_iter().partition(|&s| x[(s, split.feature)] <= split.threshold);
    let l = grow_class(tree, x, y, left, params, rng);
    let r = grow_class(tree, x, y, right, params, rng);
    tree.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left: l, right: r };
    id
}

fn best_class_split<T: Scalar, R: Rng>(
    x: &Matrix<T>,
    y: &[usize],
    samples: &mut [usize],
    counts: &[usize],
    params: &ClassTreeParams,
    rng: &mut R,
) -> Option<SplitChoice<T>> {
    let d = x.cols();
    let drawn = sample(rng, d, params.max_features.clamp(1, d)).into_vec();
    let parent = entropy(counts);
    let n = samples.len() as f64;
    let search = |features: &[usize], samples: &mut [usize]| {
        let mut best: Option<SplitChoice<T>> = None;
        for &f in features {
            sort_by_feature(x, samples, f);
            let mut left = vec![0usize; counts.len()];
            let mut right = counts.to_vec();
            for i in 0..samples.len() - 1 {
                let c = y[samples[i]];
                left[c] += 1;
                right[c] -= 1;
                let (a, b) = (x[(samples[i], f)], x[(samples[i + 1], f)]);
                if a == b {
                    continue;
                }
                let nl = (i + 1) as f64;
                let gain = parent - nl / n * entropy(&left) - (n - nl) / n * entropy(&right);
                if best.as_ref().map_or(true, |b| gain > b.score) {
                    best = Some(SplitChoice { feature: f, threshold: midpoint(a, b), score: gain });
                }
            }
        }
        best
    };
    search(&drawn, samples).or_else(|| {
        // Drawn features were all constant here; fall back to the rest.
        let rest: Vec<usize> = (0..d).filter(|f| !drawn.contains(f)).collect();
        search(&rest, samples)
    })
}

/// Least-squares regression tree with mean-valued leaves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RegressionTree<T> {
    tree: Tree<T, T>,
}

impl<T: Scalar> RegressionTree<T> {
    pub(crate) fn fit(x: &Matrix<T>, target: &[T], samples: Vec<usize>, max_depth: usize, min_samples_leaf: usize) -> Self {
        let mut tree = Tree { nodes: Vec::new() };
        grow_regression(&mut tree, x, target, samples, max_depth, min_samples_leaf.max(1));
        RegressionTree { tree }
    }

    pub fn predict(&self, x: &[T]) -> T {
        *self.tree.leaf(x)
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }
}

fn grow_regression<T: Scalar>(
    tree: &mut Tree<T, T>,
    x: &Matrix<T>,
    target: &[T],
    mut samples: Vec<usize>,
    depth_left: usize,
    min_leaf: usize,
) -> usize {
    let id = tree.nodes.len();
    let n = samples.len();
    let sum: f64 = samples.iter().map(|&s| crate::scalar::to_f64(target[s])).sum();
    let split = if depth_left == 0 || n < 2 * min_leaf { None } else { best_regression_split(x, target, &mut samples, sum, min_leaf) };
    let Some(split) = split else {
        let mean = if n == 0 { 0.0 } else { sum / n as f64 };
        tree.nodes.push(Node::Leaf(cast(mean)));
        return id;
    };
    tree.nodes.push(Node::Leaf(T::zero()));
    let (left, right): (Vec<usize>, Vec<usize>) =
        samples.into_iter().partition(|&s| x[(s, split.feature)] <= split.threshold);
    let l = grow_regression(tree, x, target, left, depth_left - 1, min_leaf);
    let r = grow_regression(tree, x, target, right, depth_left - 1, min_leaf);
    tree.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left: l, right: r };
    id
}

fn best_regression_split<T: Scalar>(
    x: &Matrix<T>,
    target: &[T],
    samples: &mut [usize],
    total: f64,
    min_leaf: usize,
) -> Option<SplitChoice<T>> {
    let n = samples.len();
    let parent_score = total * total / n as f64;
    let mut best: Option<SplitChoice<T>> = None;
    for f in 0..x.cols() {
        sort_by_feature(x, samples, f);
        let mut left_sum = 0.0;
        for i in 0..n - 1 {
            left_sum += crate::scalar::to_f64(target[samples[i]]);
            let nl = i + 1;
            if nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let (a, b) = (x[(samples[i], f)], x[(samples[i + 1], f)]);
            if a == b {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / nl as f64 + right_sum * right_sum / (n - nl) as f64 - parent_score;
            if gain > 1e-12 && best.as_ref().map_or(true, |b| gain > b.score) {
                best = Some(SplitChoice { feature: f, threshold: midpoint(a, b), score: gain });
            }
        }
    }
    best
}
