//! Histogram gradient-boosted trees on the logistic loss.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::nn::sigmoid;
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    pub min_child_weight: f64,
    pub min_samples_leaf: usize,
    /// Row fraction drawn (without replacement) per round.
    pub subsample: f64,
    /// Feature fraction drawn per round.
    pub colsample: f64,
    pub max_bins: usize,
}

impl GbtParams {
    /// Level-wise boosting with L2-regularized leaves and all rows/features.
    pub fn xgb_like() -> GbtParams {
        GbtParams {
            rounds: 200,
            max_depth: 3,
            learning_rate: 0.1,
            lambda: 1.0,
            min_child_weight: 1.0,
            min_samples_leaf: 1,
            subsample: 1.0,
            colsample: 1.0,
            max_bins: 256,
        }
    }

    /// Unregularized leaves, minimum leaf size 20, row and feature bagging.
    pub fn lgbm_like() -> GbtParams {
        GbtParams {
            rounds: 200,
            max_depth: 3,
            learning_rate: 0.1,
            lambda: 0.0,
            min_child_weight: 1e-3,
            min_samples_leaf: 20,
            subsample: 0.8,
            colsample: 0.8,
            max_bins: 255,
        }
    }

    pub(crate) fn is_valid(&self) -> bool {
        self.rounds > 0
            && self.max_depth > 0
            && self.learning_rate > 0.0
            && self.lambda >= 0.0
            && self.min_child_weight >= 0.0
            && self.min_samples_leaf > 0
            && self.subsample > 0.0
            && self.subsample <= 1.0
            && self.colsample > 0.0
            && self.colsample <= 1.0
            && self.max_bins >= 2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base: f64,
    /// Leaf values already include the learning rate.
    pub trees: Vec<Vec<RegNode>>,
}

impl GbtModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.base + self.trees.iter().map(|t| eval(t, x)).sum::<f64>()
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

fn eval(nodes: &[RegNode], x: &[f64]) -> f64 {
    let mut i = 0;
    loop {
        match &nodes[i] {
            RegNode::Leaf { value } => return *value,
            RegNode::Split {
                feature,
                threshold,
                left,
                right,
            } => i = if x[*feature] <= *threshold { *left } else { *right },
        }
    }
}

/// Per-feature split thresholds and the bin code of every training value:
/// `code(x) = #{t : t < x}`, so `code <= s` iff `x <= thresholds[s]`.
struct Binned {
    thresholds: Vec<Vec<f64>>,
    codes: Vec<Vec<u16>>,
}

fn bin(x: &Matrix, max_bins: usize) -> Binned {
    let mut thresholds = Vec::with_capacity(x.cols);
    let mut codes = Vec::with_capacity(x.cols);
    for f in 0..x.cols {
        let mut v: Vec<f64> = (0..x.rows).map(|i| x.get(i, f)).collect();
        v.sort_by(f64::total_cmp);
        let mut uniq = v.clone();
        uniq.dedup();
        let t: Vec<f64> = if uniq.len() <= max_bins {
            uniq.windows(2)
                .map(|w| {
                    let mid = w[0] + (w[1] - w[0]) / 2.0;
                    if mid < w[1] {
                        mid
                    } else {
                        w[0]
                    }
                })
                .collect()
        } else {
            let mut t: Vec<f64> = (1..max_bins).map(|k| v[k * v.len() / max_bins]).collect();
            t.dedup();
            // the largest value can never be a useful threshold
            if t.last() == v.last() {
                t.pop();
            }
            t
        };
        codes.push(
            (0..x.rows)
                .map(|i| t.partition_point(|&th| th < x.get(i, f)) as u16)
                .collect(),
        );
        thresholds.push(t);
    }
    Binned { thresholds, codes }
}

struct Frame {
    id: usize,
    rows: Vec<usize>,
    depth: usize,
}

fn grow_round(b: &Binned, g: &[f64], h: &[f64], rows: Vec<usize>, features: &[usize], p: &GbtParams) -> Vec<RegNode> {
    let leaf = |rows: &[usize]| {
        let gs: f64 = rows.iter().map(|&i| g[i]).sum();
        let hs: f64 = rows.iter().map(|&i| h[i]).sum();
        RegNode::Leaf {
            value: -gs / (hs + p.lambda).max(1e-12) * p.learning_rate,
        }
    };
    let mut nodes = vec![RegNode::Leaf { value: 0.0 }];
    let mut stack = vec![Frame { id: 0, rows, depth: 0 }];
    let mut hg: Vec<f64> = Vec::new();
    let mut hh: Vec<f64> = Vec::new();
    let mut hc: Vec<usize> = Vec::new();
    while let Some(Frame { id, rows, depth }) = stack.pop() {
        nodes[id] = leaf(&rows);
        if depth >= p.max_depth || rows.len() < 2 * p.min_samples_leaf {
            continue;
        }
        let gs: f64 = rows.iter().map(|&i| g[i]).sum();
        let hs: f64 = rows.iter().map(|&i| h[i]).sum();
        let parent = gs * gs / (hs + p.lambda);
        let mut best: Option<(f64, usize, usize)> = None;
        for &f in features {
            let nb = b.thresholds[f].len() + 1;
            if nb < 2 {
                continue;
            }
            hg.clear();
            hg.resize(nb, 0.0);
            hh.clear();
            hh.resize(nb, 0.0);
            hc.clear();
            hc.resize(nb, 0);
            for &i in &rows {
                let c = b.codes[f][i] as usize;
                hg[c] += g[i];
                hh[c] += h[i];
                hc[c] += 1;
            }
            let (mut gl, mut hl, mut cl) = (0.0, 0.0, 0usize);
            for s in 0..nb - 1 {
                gl += hg[s];
                hl += hh[s];
                cl += hc[s];
                let (gr, hr, cr) = (gs - gl, hs - hl, rows.len() - cl);
                if cl < p.min_samples_leaf || cr < p.min_samples_leaf {
                    continue;
                }
                if hl < p.min_child_weight || hr < p.min_child_weight {
                    continue;
                }
                let gain = gl * gl / (hl + p.lambda) + gr * gr / (hr + p.lambda) - parent;
                if gain > 1e-12 && best.is_none_or(|(bg, _, _)| gain > bg) {
                    best = Some((gain, f, s));
                }
            }
        }
        let Some((_, f, s)) = best else { continue };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| (b.codes[f][i] as usize) <= s);
        let (left, right) = (nodes.len(), nodes.len() + 1);
        nodes.push(RegNode::Leaf { value: 0.0 });
        nodes.push(RegNode::Leaf { value: 0.0 });
        nodes[id] = RegNode::Split {
            feature: f,
            threshold: b.thresholds[f][s],
            left,
            right,
        };
        stack.push(Frame {
            id: right,
            rows: r,
            depth: depth + 1,
        });
        stack.push(Frame {
            id: left,
            rows: l,
            depth: depth + 1,
        });
    }
    nodes
}

fn draw(rng: &mut ChaCha8Rng, n: usize, fraction: f64) -> Vec<usize> {
    if fraction >= 1.0 {
        return (0..n).collect();
    }
    let m = ((n as f64 * fraction).round() as usize).clamp(1, n);
    let mut v = sample(rng, n, m).into_vec();
    v.sort_unstable();
    v
}

pub(crate) fn fit(x: &Matrix, y: &[bool], p: &GbtParams, seed: u64) -> GbtModel {
    let b = bin(x, p.max_bins);
    let pos = y.iter().filter(|&&v| v).count() as f64 / y.len() as f64;
    let pos = pos.clamp(1e-6, 1.0 - 1e-6);
    let base = (pos / (1.0 - pos)).ln();
    let mut margin = vec![base; x.rows];
    let mut trees = Vec::with_capacity(p.rounds);
    let mut g = vec![0.0; x.rows];
    let mut h = vec![0.0; x.rows];
    for round in 0..p.rounds {
        for i in 0..x.rows {
            let prob = sigmoid(margin[i]);
            g[i] = prob - if y[i] { 1.0 } else { 0.0 };
            h[i] = prob * (1.0 - prob);
        }
        let mut rng = stream(seed, round as u64);
        let rows = draw(&mut rng, x.rows, p.subsample);
        let features = draw(&mut rng, x.cols, p.colsample);
        let tree = grow_round(&b, &g, &h, rows, &features, p);
        for (i, m) in margin.iter_mut().enumerate() {
            *m += eval(&tree, x.row(i));
        }
        trees.push(tree);
    }
    GbtModel { base, trees }
}
