//! Small differentiable layer stacks with hand-written gradients.
//!
//! A [`Stack`] describes a feed-forward chain over one sample. Parameters
//! live in a caller-owned flat `f64` slice; each layer records its offset,
//! so several stacks can share one parameter vector and one optimizer.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Probability clamp used by the reconstruction loss.
pub const BCE_EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LayerSpec {
    /// Stride-1, same-padded 1-D convolution over a `(length, channels)` input.
    Conv1d { filters: usize, kernel: usize },
    /// Fully connected layer over the flattened input; `l1_lambda` penalizes
    /// the weights (not the bias).
    Dense { units: usize, l1_lambda: f64 },
    /// Inverted dropout; only active in training mode.
    Dropout { rate: f64 },
    Relu,
    Sigmoid,
    /// Reinterpret the flat activation as `(rows, cols)`.
    Reshape { rows: usize, cols: usize },
}

impl LayerSpec {
    pub fn conv(filters: usize, kernel: usize) -> Self {
        LayerSpec::Conv1d { filters, kernel }
    }

    pub fn dense(units: usize) -> Self {
        LayerSpec::Dense { units, l1_lambda: 0.01 }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            LayerSpec::Conv1d { filters, kernel } if filters == 0 || kernel == 0 => {
                Err("conv filters and kernel must be >= 1".into())
            }
            LayerSpec::Dense { units, .. } if units == 0 => Err("dense units must be >= 1".into()),
            LayerSpec::Dense { l1_lambda, .. } if !(l1_lambda >= 0.0) => Err("l1_lambda must be >= 0".into()),
            LayerSpec::Dropout { rate } if !(0.0..1.0).contains(&rate) => Err("dropout rate must lie in [0, 1)".into()),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl Shape {
    pub fn new(rows: usize, cols: usize) -> Self {
        Shape { rows, cols }
    }

    pub fn size(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Layer {
    Conv1d {
        len: usize,
        in_ch: usize,
        filters: usize,
        kernel: usize,
        offset: usize,
    },
    Dense {
        inputs: usize,
        units: usize,
        l1: f64,
        offset: usize,
    },
    Dropout {
        rate: f64,
    },
    Relu,
    Sigmoid,
    Reshape,
}

impl Layer {
    fn param_count(&self) -> usize {
        match *self {
            Layer::Conv1d {
                in_ch, filters, kernel, ..
            } => filters * kernel * in_ch + filters,
            Layer::Dense { inputs, units, .. } => units * inputs + units,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stack {
    specs: Vec<LayerSpec>,
    layers: Vec<Layer>,
    shapes: Vec<Shape>,
    offset: usize,
    param_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
    pub range: std::ops::Range<usize>,
}

/// Cached activations of one forward pass.
#[derive(Clone, Debug)]
pub struct Trace {
    /// `acts[0]` is the input, `acts[i + 1]` the output of layer `i`.
    pub acts: Vec<Vec<f64>>,
    masks: Vec<Option<Vec<f64>>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("trace has an input")
    }
}

impl Stack {
    /// Lay out `specs` over an input of shape `input`, with parameters
    /// starting at `offset` in the shared parameter vector.
    pub fn new(input: Shape, specs: &[LayerSpec], offset: usize) -> Result<Stack> {
        let mut shapes = vec![input];
        let mut layers = Vec::with_capacity(specs.len());
        let mut next = offset;
        for (i, spec) in specs.iter().enumerate() {
            spec.validate().map_err(|msg| Error::Shape { layer: i, msg })?;
            let cur = *shapes.last().unwrap();
            let (layer, out) = match *spec {
                LayerSpec::Conv1d { filters, kernel } => (
                    Layer::Conv1d {
                        len: cur.rows,
                        in_ch: cur.cols,
                        filters,
                        kernel,
                        offset: next,
                    },
                    Shape::new(cur.rows, filters),
                ),
                LayerSpec::Dense { units, l1_lambda } => (
                    Layer::Dense {
                        inputs: cur.size(),
                        units,
                        l1: l1_lambda,
                        offset: next,
                    },
                    Shape::new(1, units),
                ),
                LayerSpec::Dropout { rate } => (Layer::Dropout { rate }, cur),
                LayerSpec::Relu => (Layer::Relu, cur),
                LayerSpec::Sigmoid => (Layer::Sigmoid, cur),
                LayerSpec::Reshape { rows, cols } => {
                    if rows * cols != cur.size() {
                        return Err(Error::Shape {
                            layer: i,
                            msg: format!("cannot reshape {} values to {rows}x{cols}", cur.size()),
                        });
                    }
                    (Layer::Reshape, Shape::new(rows, cols))
                }
            };
            next += layer.param_count();
            layers.push(layer);
            shapes.push(out);
        }
        Ok(Stack {
            specs: specs.to_vec(),
            layers,
            shapes,
            offset,
            param_count: next - offset,
        })
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn input_shape(&self) -> Shape {
        self.shapes[0]
    }

    pub fn output_shape(&self) -> Shape {
        *self.shapes.last().unwrap()
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// He-uniform weights (`U(-a, a)`, `a = sqrt(6 / fan_in)`) and zero biases.
    pub fn init_params(&self, params: &mut [f64], rng: &mut ChaCha8Rng) {
        for layer in &self.layers {
            let (offset, fan_in, n_weights, n_total) = match *layer {
                Layer::Conv1d {
                    in_ch,
                    filters,
                    kernel,
                    offset,
                    ..
                } => (offset, kernel * in_ch, filters * kernel * in_ch, layer.param_count()),
                Layer::Dense {
                    inputs, units, offset, ..
                } => (offset, inputs, units * inputs, layer.param_count()),
                _ => continue,
            };
            let a = (6.0 / fan_in as f64).sqrt();
            for w in &mut params[offset..offset + n_weights] {
                *w = rng.gen_range(-a..a);
            }
            params[offset + n_weights..offset + n_total].fill(0.0);
        }
    }

    /// Forward pass. Passing a generator enables training mode (dropout
    /// masks are drawn from it); `None` is evaluation mode.
    pub fn forward(&self, params: &[f64], input: &[f64], mut rng: Option<&mut ChaCha8Rng>) -> Result<Trace> {
        if input.len() != self.shapes[0].size() {
            return Err(Error::Shape {
                layer: 0,
                msg: format!("expected {} inputs, got {}", self.shapes[0].size(), input.len()),
            });
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        let mut masks = Vec::with_capacity(self.layers.len());
        acts.push(input.to_vec());
        for layer in &self.layers {
            let x = acts.last().unwrap();
            let mut mask = None;
            let y = match *layer {
                Layer::Conv1d {
                    len,
                    in_ch,
                    filters,
                    kernel,
                    offset,
                } => {
                    let w = &params[offset..offset + filters * kernel * in_ch];
                    let b = &params[offset + filters * kernel * in_ch..offset + layer.param_count()];
                    let pad = (kernel - 1) / 2;
                    let mut y = vec![0.0; len * filters];
                    for t in 0..len {
                        let out = &mut y[t * filters..(t + 1) * filters];
                        out.copy_from_slice(b);
                        for j in 0..kernel {
                            let s = t + j;
                            if s < pad || s - pad >= len {
                                continue;
                            }
                            let xin = &x[(s - pad) * in_ch..(s - pad + 1) * in_ch];
                            for (f, o) in out.iter_mut().enumerate() {
                                let wf = &w[(f * kernel + j) * in_ch..(f * kernel + j + 1) * in_ch];
                                *o += dot(wf, xin);
                            }
                        }
                    }
                    y
                }
                Layer::Dense {
                    inputs, units, offset, ..
                } => {
                    let w = &params[offset..offset + units * inputs];
                    let b = &params[offset + units * inputs..offset + units * inputs + units];
                    (0..units).map(|u| b[u] + dot(&w[u * inputs..(u + 1) * inputs], x)).collect()
                }
                Layer::Dropout { rate } => match rng.as_deref_mut() {
                    Some(r) if rate > 0.0 => {
                        let scale = 1.0 / (1.0 - rate);
                        let m: Vec<f64> = (0..x.len())
                            .map(|_| if r.gen::<f64>() < rate { 0.0 } else { scale })
                            .collect();
                        let y = x.iter().zip(&m).map(|(a, b)| a * b).collect();
                        mask = Some(m);
                        y
                    }
                    _ => x.clone(),
                },
                Layer::Relu => x.iter().map(|&v| v.max(0.0)).collect(),
                Layer::Sigmoid => x.iter().map(|&v| sigmoid(v)).collect(),
                Layer::Reshape => x.clone(),
            };
            masks.push(mask);
            acts.push(y);
        }
        Ok(Trace { acts, masks })
    }

    /// Backpropagate `grad` (the gradient with respect to the full stack
    /// output) and accumulate parameter gradients into `grads`. Returns the
    /// gradient with respect to the input.
    pub fn backward(&self, params: &[f64], trace: &Trace, grad: &[f64], grads: &mut [f64]) -> Result<Vec<f64>> {
        self.backward_from(self.layers.len(), params, trace, grad, grads)
    }

    /// Like [`Stack::backward`], but starting from the output of layer
    /// `upto - 1` (layers `upto..` are skipped). Used to fuse an output
    /// activation with its loss.
    pub fn backward_from(
        &self,
        upto: usize,
        params: &[f64],
        trace: &Trace,
        grad: &[f64],
        grads: &mut [f64],
    ) -> Result<Vec<f64>> {
        if grad.len() != trace.acts[upto].len() {
            return Err(Error::Shape {
                layer: upto.saturating_sub(1),
                msg: format!("expected {} output gradients, got {}", trace.acts[upto].len(), grad.len()),
            });
        }
        let mut g = grad.to_vec();
        for i in (0..upto).rev() {
            let x = &trace.acts[i];
            let y = &trace.acts[i + 1];
            g = match self.layers[i] {
                Layer::Conv1d {
                    len,
                    in_ch,
                    filters,
                    kernel,
                    offset,
                } => {
                    let nw = filters * kernel * in_ch;
                    let w = &params[offset..offset + nw];
                    let pad = (kernel - 1) / 2;
                    let mut gx = vec![0.0; len * in_ch];
                    let (gw, gb) = grads[offset..offset + nw + filters].split_at_mut(nw);
                    for t in 0..len {
                        let gt = &g[t * filters..(t + 1) * filters];
                        for (f, &gv) in gt.iter().enumerate() {
                            gb[f] += gv;
                        }
                        for j in 0..kernel {
                            let s = t + j;
                            if s < pad || s - pad >= len {
                                continue;
                            }
                            let s = s - pad;
                            let xin = &x[s * in_ch..(s + 1) * in_ch];
                            for (f, &gv) in gt.iter().enumerate() {
                                if gv == 0.0 {
                                    continue;
                                }
                                let base = (f * kernel + j) * in_ch;
                                axpy(gv, xin, &mut gw[base..base + in_ch]);
                                axpy(gv, &w[base..base + in_ch], &mut gx[s * in_ch..(s + 1) * in_ch]);
                            }
                        }
                    }
                    gx
                }
                Layer::Dense {
                    inputs, units, offset, ..
                } => {
                    let nw = units * inputs;
                    let w = &params[offset..offset + nw];
                    let mut gx = vec![0.0; inputs];
                    let (gw, gb) = grads[offset..offset + nw + units].split_at_mut(nw);
                    for (u, &gv) in g.iter().enumerate() {
                        gb[u] += gv;
                        if gv == 0.0 {
                            continue;
                        }
                        axpy(gv, x, &mut gw[u * inputs..(u + 1) * inputs]);
                        axpy(gv, &w[u * inputs..(u + 1) * inputs], &mut gx);
                    }
                    gx
                }
                Layer::Dropout { .. } => match &trace.masks[i] {
                    Some(m) => g.iter().zip(m.iter()).map(|(a, b)| a * b).collect(),
                    None => g,
                },
                Layer::Relu => g.iter().zip(y).map(|(&a, &v)| if v > 0.0 { a } else { 0.0 }).collect(),
                Layer::Sigmoid => g.iter().zip(y).map(|(&a, &p)| a * p * (1.0 - p)).collect(),
                Layer::Reshape => g,
            };
        }
        Ok(g)
    }

    /// Named parameter tensors of this stack, as ranges into the shared
    /// parameter vector. Weight shapes are `[filters, kernel, in_channels]`
    /// for convolutions and `[units, inputs]` for dense layers.
    pub fn tensors(&self, prefix: &str) -> Vec<TensorInfo> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let (offset, weight_shape, bias) = match *layer {
                Layer::Conv1d {
                    in_ch,
                    filters,
                    kernel,
                    offset,
                    ..
                } => (offset, vec![filters, kernel, in_ch], filters),
                Layer::Dense {
                    inputs, units, offset, ..
                } => (offset, vec![units, inputs], units),
                _ => continue,
            };
            let nw: usize = weight_shape.iter().product();
            out.push(TensorInfo {
                name: format!("{prefix}.{i}.weight"),
                shape: weight_shape,
                range: offset..offset + nw,
            });
            out.push(TensorInfo {
                name: format!("{prefix}.{i}.bias"),
                shape: vec![bias],
                range: offset + nw..offset + nw + bias,
            });
        }
        out
    }

    /// `sum_l lambda_l * |W_l|_1` over this stack's dense weights.
    pub fn l1_penalty(&self, params: &[f64]) -> f64 {
        let mut total = 0.0;
        for layer in &self.layers {
            if let Layer::Dense {
                inputs,
                units,
                l1,
                offset,
            } = *layer
            {
                if l1 > 0.0 {
                    total += l1 * params[offset..offset + units * inputs].iter().map(|w| w.abs()).sum::<f64>();
                }
            }
        }
        total
    }

    /// Add the L1 subgradient (`lambda * sign(w)`, zero at `w = 0`).
    pub fn l1_grad(&self, params: &[f64], grads: &mut [f64]) {
        for layer in &self.layers {
            if let Layer::Dense {
                inputs,
                units,
                l1,
                offset,
            } = *layer
            {
                if l1 > 0.0 {
                    for k in offset..offset + units * inputs {
                        grads[k] += l1 * sign(params[k]);
                    }
                }
            }
        }
    }
}

fn sign(w: f64) -> f64 {
    if w > 0.0 {
        1.0
    } else if w < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-epoch losses. `loss_tol = loss_rec + loss_kl + l1_penalty`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub loss_tol: f64,
    pub loss_rec: f64,
    pub loss_kl: f64,
    pub l1_penalty: f64,
}

impl LossRecord {
    pub fn from_terms(loss_rec: f64, loss_kl: f64, l1_penalty: f64) -> Self {
        LossRecord {
            loss_tol: loss_rec + loss_kl + l1_penalty,
            loss_rec,
            loss_kl,
            l1_penalty,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.loss_tol.is_finite() && self.loss_rec.is_finite() && self.loss_kl.is_finite()
    }
}

fn check_finite(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().any(|v| v.is_nan()) {
        return Err(Error::Numeric(format!("{name} contains NaN")));
    }
    Ok(())
}

/// Binary cross-entropy averaged over every element; predictions are
/// clamped to `[BCE_EPS, 1 - BCE_EPS]`.
pub fn loss_bce(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_finite("prediction", pred)?;
    check_finite("target", target)?;
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::Shape {
            layer: 0,
            msg: format!("bce over {} predictions and {} targets", pred.len(), target.len()),
        });
    }
    let total: f64 = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum();
    Ok(total / pred.len() as f64)
}

/// KL divergence of `N(mean, exp(log_var))` from the standard normal,
/// summed over latent dimensions, for one sample.
pub fn loss_kl(mean: &[f64], log_var: &[f64]) -> Result<f64> {
    check_finite("z_mean", mean)?;
    check_finite("z_log_var", log_var)?;
    if mean.len() != log_var.len() {
        return Err(Error::Shape {
            layer: 0,
            msg: "z_mean and z_log_var differ in length".into(),
        });
    }
    Ok(-0.5
        * mean
            .iter()
            .zip(log_var)
            .map(|(&m, &lv)| 1.0 + lv - m * m - lv.exp())
            .sum::<f64>())
}

/// Mean KL over a batch of samples.
pub fn loss_kl_batch(means: &[Vec<f64>], log_vars: &[Vec<f64>]) -> Result<f64> {
    if means.is_empty() || means.len() != log_vars.len() {
        return Err(Error::Shape {
            layer: 0,
            msg: "empty or mismatched KL batch".into(),
        });
    }
    let mut total = 0.0;
    for (m, lv) in means.iter().zip(log_vars) {
        total += loss_kl(m, lv)?;
    }
    Ok(total / means.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        AdamState {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64]) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Shape {
            layer: 0,
            msg: format!(
                "adam over {} params, {} grads, {} moments",
                params.len(),
                grads.len(),
                state.m.len()
            ),
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    let (b1, b2) = (state.beta1, state.beta2);
    for k in 0..params.len() {
        let g = grads[k];
        state.m[k] = b1 * state.m[k] + (1.0 - b1) * g;
        state.v[k] = b2 * state.v[k] + (1.0 - b2) * g * g;
        let mh = state.m[k] / c1;
        let vh = state.v[k] / c2;
        params[k] -= state.learning_rate * mh / (vh.sqrt() + state.epsilon);
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_param: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub passed: bool,
}

/// Finite-difference step for gradient checks.
pub const GRAD_CHECK_STEP: f64 = 1e-5;
/// Denominator floor of the relative error, so parameters whose true
/// gradient is (near) zero are judged on absolute error.
pub const GRAD_CHECK_FLOOR: f64 = 1e-6;

/// Compare `analytic` against central differences of `loss` at `params`.
/// `loss` must be deterministic (fixed dropout masks and noise).
pub fn grad_check(
    params: &[f64],
    analytic: &[f64],
    loss: impl Fn(&[f64]) -> Result<f64>,
    tolerance: f64,
) -> Result<GradCheckReport> {
    let mut p = params.to_vec();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_param: 0,
        analytic: 0.0,
        numeric: 0.0,
        passed: true,
    };
    for k in 0..p.len() {
        let orig = p[k];
        p[k] = orig + GRAD_CHECK_STEP;
        let up = loss(&p)?;
        p[k] = orig - GRAD_CHECK_STEP;
        let down = loss(&p)?;
        p[k] = orig;
        let numeric = (up - down) / (2.0 * GRAD_CHECK_STEP);
        let err = (analytic[k] - numeric).abs() / analytic[k].abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
        if err > report.max_rel_error || k == 0 {
            report.max_rel_error = err;
            report.worst_param = k;
            report.analytic = analytic[k];
            report.numeric = numeric;
        }
    }
    report.passed = report.max_rel_error < tolerance;
    Ok(report)
}
