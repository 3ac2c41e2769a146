//! Weighted-Gini CART trees and the bagged / randomized forests built on them.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ForestParams, Matrix};
use crate::rng::stream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Leaf {
        p: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { p } => return *p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }
}

pub(crate) struct TreeParams {
    pub max_depth: usize,
    /// Features examined per node; `None` examines all.
    pub max_features: Option<usize>,
    pub random_thresholds: bool,
}

/// Weighted Gini impurity times node weight: `2 P (W - P) / W`.
fn weighted_gini(w: f64, pos: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        2.0 * pos * (w - pos) / w
    }
}

struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
}

/// Grow a classification tree on the samples with positive weight.
pub(crate) fn grow(x: &Matrix, y: &[bool], w: &[f64], params: &TreeParams, rng: &mut ChaCha8Rng) -> Tree {
    let samples: Vec<usize> = (0..x.rows).filter(|&i| w[i] > 0.0).collect();
    let mut nodes = vec![Node::Leaf { p: 0.0 }];
    let mut stack = vec![(0usize, samples, 0usize)];
    let mut perm: Vec<usize> = (0..x.cols).collect();
    let mut buf: Vec<(f64, usize)> = Vec::new();

    while let Some((id, idx, depth)) = stack.pop() {
        let wsum: f64 = idx.iter().map(|&i| w[i]).sum();
        let wpos: f64 = idx.iter().filter(|&&i| y[i]).map(|&i| w[i]).sum();
        let p = if wsum > 0.0 { wpos / wsum } else { 0.0 };
        nodes[id] = Node::Leaf { p };
        if depth >= params.max_depth || idx.len() < 2 || wpos <= 0.0 || wpos >= wsum {
            continue;
        }
        let parent = weighted_gini(wsum, wpos);
        let limit = params.max_features.unwrap_or(x.cols).min(x.cols);
        let mut best: Option<Best> = None;
        let mut visited = 0;
        for slot in 0..x.cols {
            if visited >= limit {
                break;
            }
            // partial Fisher-Yates over a buffer reused across nodes
            let pick = if params.max_features.is_some() {
                let j = rng.gen_range(slot..x.cols);
                perm.swap(slot, j);
                perm[slot]
            } else {
                slot
            };
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &idx {
                let v = x.get(i, pick);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if lo >= hi {
                continue;
            }
            visited += 1;
            let candidate = if params.random_thresholds {
                let t = rng.gen_range(lo..hi);
                let (mut wl, mut pl) = (0.0, 0.0);
                for &i in &idx {
                    if x.get(i, pick) <= t {
                        wl += w[i];
                        if y[i] {
                            pl += w[i];
                        }
                    }
                }
                Some((weighted_gini(wl, pl) + weighted_gini(wsum - wl, wpos - pl), t))
            } else {
                buf.clear();
                buf.extend(idx.iter().map(|&i| (x.get(i, pick), i)));
                buf.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let (mut wl, mut pl) = (0.0, 0.0);
                let mut local: Option<(f64, f64)> = None;
                for k in 0..buf.len() - 1 {
                    let i = buf[k].1;
                    wl += w[i];
                    if y[i] {
                        pl += w[i];
                    }
                    let (v, next) = (buf[k].0, buf[k + 1].0);
                    if v == next {
                        continue;
                    }
                    let score = weighted_gini(wl, pl) + weighted_gini(wsum - wl, wpos - pl);
                    if local.is_none_or(|(s, _)| score < s) {
                        let mid = v + (next - v) / 2.0;
                        local = Some((score, if mid < next { mid } else { v }));
                    }
                }
                local
            };
            if let Some((score, threshold)) = candidate {
                if best.as_ref().is_none_or(|b| score < b.score) {
                    best = Some(Best {
                        score,
                        feature: pick,
                        threshold,
                    });
                }
            }
        }
        let Some(b) = best else { continue };
        if b.score > parent + 1e-12 {
            continue;
        }
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x.get(i, b.feature) <= b.threshold);
        let (left, right) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { p: 0.0 });
        nodes.push(Node::Leaf { p: 0.0 });
        nodes[id] = Node::Split {
            feature: b.feature,
            threshold: b.threshold,
            left,
            right,
        };
        stack.push((right, r, depth + 1));
        stack.push((left, l, depth + 1));
    }
    Tree { nodes }
}

pub(crate) fn sqrt_features(d: usize) -> usize {
    ((d as f64).sqrt().floor() as usize).max(1)
}

/// Random forest (`bootstrap = true`) or extremely randomized trees.
pub(crate) fn fit_forest(x: &Matrix, y: &[bool], f: &ForestParams, bootstrap: bool, seed: u64) -> Vec<Tree> {
    let params = TreeParams {
        max_depth: f.max_depth,
        max_features: Some(sqrt_features(x.cols)),
        random_thresholds: !bootstrap,
    };
    (0..f.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t as u64);
            let mut w = vec![0.0; x.rows];
            if bootstrap {
                for _ in 0..x.rows {
                    w[rng.gen_range(0..x.rows)] += 1.0;
                }
            } else {
                w.fill(1.0);
            }
            grow(x, y, &w, &params, &mut rng)
        })
        .collect()
}

pub(crate) fn fit_single(x: &Matrix, y: &[bool], max_depth: Option<usize>, seed: u64) -> Tree {
    let params = TreeParams {
        max_depth: max_depth.unwrap_or(usize::MAX),
        max_features: None,
        random_thresholds: false,
    };
    grow(x, y, &vec![1.0; x.rows], &params, &mut stream(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_split() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let y = [false, true];
        let t = fit_single(&x, &y, None, 0);
        assert_eq!(t.predict_row(&[0.0]), 0.0);
        assert_eq!(t.predict_row(&[1.0]), 1.0);
        assert_eq!(t.nodes[0], Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2 });
    }

    #[test]
    fn xor_needs_depth_two() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let y = [false, true, true, false];
        let t = fit_single(&x, &y, None, 0);
        for i in 0..4 {
            assert_eq!(t.predict_row(x.row(i)), if y[i] { 1.0 } else { 0.0 });
        }
        let stump = fit_single(&x, &y, Some(1), 0);
        assert_eq!(stump.depth(), 1);
    }

    #[test]
    fn weights_shift_leaf_probability() {
        let x = Matrix::from_rows(&[vec![0.0], vec![0.0], vec![1.0]]).unwrap();
        let y = [false, true, true];
        let params = TreeParams {
            max_depth: 3,
            max_features: None,
            random_thresholds: false,
        };
        let t = grow(&x, &y, &[3.0, 1.0, 1.0], &params, &mut stream(0, 0));
        assert_eq!(t.predict_row(&[0.0]), 0.25);
        assert_eq!(t.predict_row(&[1.0]), 1.0);
    }

    #[test]
    fn forests_are_deterministic() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i * 7 % 11) as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let f = ForestParams { trees: 10, max_depth: 4 };
        for bootstrap in [true, false] {
            let a = fit_forest(&x, &y, &f, bootstrap, 3);
            assert_eq!(a, fit_forest(&x, &y, &f, bootstrap, 3));
            assert!(a.iter().all(|t| t.depth() <= 4));
        }
    }
}
