//! SAMME boosting over depth-1 stumps (two classes).

use serde::{Deserialize, Serialize};

use super::tree::{grow, Tree, TreeParams};
use super::Matrix;
use crate::nn::sigmoid;
use crate::rng::stream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaModel {
    pub stumps: Vec<Tree>,
    pub alphas: Vec<f64>,
}

impl AdaModel {
    /// Normalized vote in [-1, 1].
    pub fn decision(&self, x: &[f64]) -> f64 {
        let total: f64 = self.alphas.iter().sum();
        let s: f64 = self
            .stumps
            .iter()
            .zip(&self.alphas)
            .map(|(t, a)| if t.predict_row(x) >= 0.5 { *a } else { -*a })
            .sum();
        s / total
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }
}

pub(crate) fn fit(x: &Matrix, y: &[bool], rounds: usize, learning_rate: f64, seed: u64) -> AdaModel {
    let params = TreeParams {
        max_depth: 1,
        max_features: None,
        random_thresholds: false,
    };
    let n = x.rows;
    let mut w = vec![1.0 / n as f64; n];
    let mut stumps = Vec::new();
    let mut alphas = Vec::new();
    for round in 0..rounds {
        let stump = grow(x, y, &w, &params, &mut stream(seed, round as u64));
        let wrong: Vec<bool> = (0..n).map(|i| (stump.predict_row(x.row(i)) >= 0.5) != y[i]).collect();
        let total: f64 = w.iter().sum();
        let err: f64 = w.iter().zip(&wrong).filter(|(_, &m)| m).map(|(v, _)| v).sum::<f64>() / total;
        if err <= 0.0 {
            stumps.push(stump);
            alphas.push(1.0);
            break;
        }
        if err >= 0.5 {
            if stumps.is_empty() {
                stumps.push(stump);
                alphas.push(1.0);
            }
            break;
        }
        let alpha = learning_rate * ((1.0 - err) / err).ln();
        for (v, &m) in w.iter_mut().zip(&wrong) {
            if m {
                *v *= alpha.exp();
            }
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        stumps.push(stump);
        alphas.push(alpha);
    }
    AdaModel { stumps, alphas }
}
