//! L2-regularized logistic regression fitted by full-batch gradient descent
//! with backtracking line search.

use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::nn::sigmoid;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    pub l2: f64,
    /// Stop once the largest gradient component falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams {
            l2: 1e-4,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

impl LrModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean log loss plus `l2 / 2 * |w|^2` (bias unpenalized), and its gradient.
fn objective(x: &Matrix, y: &[bool], w: &[f64], b: f64, l2: f64, grad: Option<(&mut [f64], &mut f64)>) -> f64 {
    let n = x.rows as f64;
    let mut loss = 0.0;
    let mut resid = Vec::with_capacity(x.rows);
    for i in 0..x.rows {
        let z = b + x.row(i).iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        loss += if y[i] { softplus(-z) } else { softplus(z) };
        resid.push(sigmoid(z) - if y[i] { 1.0 } else { 0.0 });
    }
    let reg: f64 = w.iter().map(|v| v * v).sum::<f64>() * l2 / 2.0;
    if let Some((gw, gb)) = grad {
        gw.iter_mut().zip(w).for_each(|(g, v)| *g = l2 * v);
        *gb = 0.0;
        for (i, r) in resid.iter().enumerate() {
            for (g, a) in gw.iter_mut().zip(x.row(i)) {
                *g += r * a / n;
            }
            *gb += r / n;
        }
    }
    loss / n + reg
}

pub(crate) fn fit(x: &Matrix, y: &[bool], p: &LrParams) -> LrModel {
    let d = x.cols;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut gw = vec![0.0; d];
    let mut gb = 0.0;
    let mut f = objective(x, y, &w, b, p.l2, Some((&mut gw, &mut gb)));
    let mut step = 1.0;
    let mut iterations = 0;
    while iterations < p.max_iter {
        let gmax = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if gmax < p.tol {
            break;
        }
        iterations += 1;
        let gnorm2 = gb * gb + gw.iter().map(|g| g * g).sum::<f64>();
        let mut accepted = false;
        for _ in 0..60 {
            let nw: Vec<f64> = w.iter().zip(&gw).map(|(v, g)| v - step * g).collect();
            let nb = b - step * gb;
            let nf = objective(x, y, &nw, nb, p.l2, None);
            if nf <= f - 0.5 * step * gnorm2 {
                w = nw;
                b = nb;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        f = objective(x, y, &w, b, p.l2, Some((&mut gw, &mut gb)));
        step *= 2.0;
    }
    LrModel {
        weights: w,
        bias: b,
        iterations,
    }
}
