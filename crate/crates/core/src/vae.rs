//! Convolutional variational autoencoder over one-hot peptides, trained
//! under a loss-supervised schedule.
//!
//! Training runs in up to three phases. Phase I (the first half of the
//! epochs) tracks the best total loss and snapshots its weights. Phase II
//! stops as soon as an epoch beats that best on total, reconstruction and
//! KL loss at once. If that never happens an extension phase applies the
//! same rule, and if it is also fruitless the Phase-I snapshot is restored.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::nn::{adam_step, AdamState, LayerSpec, LossRecord, Shape, Stack, TensorInfo, BCE_EPS};
use crate::rng;
use crate::seq::{decode_argmax, decode_residues, one_hot_encode, Peptide, CHANNELS, MIN_PEPTIDE_LEN};
use crate::{Error, Result};

/// Samples per parallel work unit inside a batch. Partial gradients are
/// summed in chunk order, so results do not depend on the thread count.
const CHUNK: usize = 4;

const STREAM_INIT: u64 = 0;
const STREAM_SHUFFLE: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_GENERATE: u64 = 3;
const STREAM_NEGATIVE: u64 = 4;

pub const MODEL_FORMAT: &str = "tastepep-vae";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GenerationMode {
    /// Decode `z ~ N(0, I)`.
    Prior,
    /// Decode `z = z_mean(x) + tau * eps` for a random training item `x`.
    PosteriorJitter { tau: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VaeConfig {
    pub max_len: usize,
    pub latent_dim: usize,
    pub epochs: usize,
    /// Defaults to `ceil(0.2 * epochs)` when unset.
    pub extension_epochs: Option<usize>,
    pub conv_filters: usize,
    pub kernel: usize,
    pub hidden_units: usize,
    pub dropout: f64,
    pub l1_lambda: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub generation_count: usize,
    pub generation: GenerationMode,
}

impl Default for VaeConfig {
    fn default() -> Self {
        VaeConfig {
            max_len: 14,
            latent_dim: 2000,
            epochs: 500,
            extension_epochs: None,
            conv_filters: 32,
            kernel: 3,
            hidden_units: 128,
            dropout: 0.1,
            l1_lambda: 0.01,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 0,
            generation_count: 100,
            generation: GenerationMode::Prior,
        }
    }
}

impl VaeConfig {
    pub fn extension(&self) -> usize {
        self.extension_epochs.unwrap_or_else(|| (self.epochs as f64 * 0.2).ceil() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.latent_dim < 2 {
            return fail("latent_dim must be >= 2");
        }
        if self.epochs < 2 {
            return fail("epochs must be >= 2");
        }
        if self.max_len < MIN_PEPTIDE_LEN {
            return fail("max_len must be >= 2");
        }
        if self.conv_filters == 0 || self.kernel == 0 || self.hidden_units == 0 || self.batch_size == 0 {
            return fail("filters, kernel, hidden units and batch size must be >= 1");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail("dropout must lie in [0, 1)");
        }
        if !(self.l1_lambda >= 0.0) {
            return fail("l1_lambda must be >= 0");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning rate must be positive");
        }
        if let GenerationMode::PosteriorJitter { tau } = self.generation {
            if !(tau >= 0.0 && tau.is_finite()) {
                return fail("jitter scale must be finite and >= 0");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "I")]
    PhaseI,
    #[serde(rename = "II")]
    PhaseII,
    Extension,
    Fallback,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::PhaseI => "I",
            Phase::PhaseII => "II",
            Phase::Extension => "Extension",
            Phase::Fallback => "Fallback",
        }
    }
}

/// Last Phase-I epoch: `ceil(epochs / 2)`.
pub fn phase_one_end(epochs: usize) -> usize {
    epochs.div_ceil(2)
}

/// Phase of a 1-based epoch index, or `None` past the extension.
pub fn phase_of(epoch: usize, epochs: usize, extension: usize) -> Option<Phase> {
    match epoch {
        0 => None,
        e if e <= phase_one_end(epochs) => Some(Phase::PhaseI),
        e if e <= epochs => Some(Phase::PhaseII),
        e if e <= epochs + extension => Some(Phase::Extension),
        _ => None,
    }
}

/// Strict improvement of all three losses over `best`.
pub fn dual_improvement(current: &LossRecord, best: &LossRecord) -> bool {
    current.loss_tol < best.loss_tol && current.loss_rec < best.loss_rec && current.loss_kl < best.loss_kl
}

/// Something that can be trained one epoch at a time and rolled back.
pub trait EpochRunner {
    type Snapshot;
    fn run_epoch(&mut self, epoch: usize) -> Result<LossRecord>;
    fn snapshot(&self) -> Self::Snapshot;
    fn restore(&mut self, snapshot: &Self::Snapshot);
}

#[derive(Clone, Debug, PartialEq)]
pub struct Best<S> {
    pub record: LossRecord,
    pub epoch: usize,
    pub snapshot: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Supervision<S> {
    pub phase_reached: Phase,
    pub trigger_epoch: Option<usize>,
    pub history: Vec<LossRecord>,
    /// Best Phase-I epoch.
    pub best: Best<S>,
}

/// Drive `runner` through the phased schedule. On return the runner holds
/// the weights of the trigger epoch, or the restored Phase-I best.
pub fn supervise<R: EpochRunner>(runner: &mut R, epochs: usize, extension: usize) -> Result<Supervision<R::Snapshot>> {
    if epochs < 2 {
        return Err(Error::Config("epochs must be >= 2".into()));
    }
    let mut history = Vec::new();
    let mut best: Option<Best<R::Snapshot>> = None;
    for epoch in 1..=epochs + extension {
        let record = runner.run_epoch(epoch)?;
        history.push(record);
        if !record.is_finite() {
            return Err(Error::Diverged { epoch, history });
        }
        let phase = phase_of(epoch, epochs, extension).expect("epoch within schedule");
        if phase == Phase::PhaseI {
            if best.as_ref().is_none_or(|b| record.loss_tol < b.record.loss_tol) {
                best = Some(Best {
                    record,
                    epoch,
                    snapshot: runner.snapshot(),
                });
            }
            continue;
        }
        let b = best.as_ref().expect("phase I ran");
        if dual_improvement(&record, &b.record) {
            log::info!("dual-constraint trigger at epoch {epoch} ({})", phase.name());
            return Ok(Supervision {
                phase_reached: phase,
                trigger_epoch: Some(epoch),
                history,
                best: best.unwrap(),
            });
        }
    }
    let best = best.expect("phase I ran");
    log::info!("no trigger; restoring phase I best from epoch {}", best.epoch);
    runner.restore(&best.snapshot);
    Ok(Supervision {
        phase_reached: Phase::Fallback,
        trigger_epoch: None,
        history,
        best,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub params: Vec<f64>,
    pub record: LossRecord,
    pub epoch: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VaeModel {
    config: VaeConfig,
    encoder: Stack,
    mean_head: Stack,
    log_var_head: Stack,
    decoder: Stack,
    params: Vec<f64>,
    adam: AdamState,
    history: Vec<LossRecord>,
    snapshot: Option<Snapshot>,
}

/// Losses of one batch, averaged over its samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchLoss {
    pub rec: f64,
    pub kl: f64,
    pub l1: f64,
}

impl BatchLoss {
    pub fn total(&self) -> f64 {
        self.rec + self.kl + self.l1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub peptide: Peptide,
    /// Training item whose posterior mean seeded this sample (jitter mode).
    pub source: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub phase_reached: Phase,
    pub trigger_epoch: Option<usize>,
    pub generated: Vec<Peptide>,
    pub history: Vec<LossRecord>,
}

#[derive(Clone, Debug)]
pub struct TrainedVae {
    pub model: VaeModel,
    pub outcome: TrainOutcome,
}

#[derive(Clone, Debug)]
pub struct LaOutcome {
    pub positive: TrainedVae,
    pub negative: Option<TrainedVae>,
}

impl VaeModel {
    pub fn build(config: &VaeConfig) -> Result<VaeModel> {
        config.validate()?;
        let c = config;
        let input = Shape::new(c.max_len, CHANNELS);
        let dense = |units| LayerSpec::Dense {
            units,
            l1_lambda: c.l1_lambda,
        };
        let encoder = Stack::new(
            input,
            &[
                LayerSpec::conv(c.conv_filters, c.kernel),
                LayerSpec::Relu,
                LayerSpec::Dropout { rate: c.dropout },
                dense(c.hidden_units),
                LayerSpec::Relu,
            ],
            0,
        )?;
        let trunk = encoder.output_shape();
        let mean_head = Stack::new(trunk, &[dense(c.latent_dim)], encoder.param_count())?;
        let log_var_head = Stack::new(trunk, &[dense(c.latent_dim)], mean_head.offset() + mean_head.param_count())?;
        let decoder = Stack::new(
            Shape::new(1, c.latent_dim),
            &[
                dense(c.hidden_units),
                LayerSpec::Relu,
                dense(c.max_len * c.conv_filters),
                LayerSpec::Relu,
                LayerSpec::Reshape {
                    rows: c.max_len,
                    cols: c.conv_filters,
                },
                LayerSpec::conv(CHANNELS, c.kernel),
                LayerSpec::Sigmoid,
            ],
            log_var_head.offset() + log_var_head.param_count(),
        )?;
        let n = decoder.offset() + decoder.param_count();
        let mut params = vec![0.0; n];
        let mut r = rng::stream(c.seed, STREAM_INIT);
        for s in [&encoder, &mean_head, &log_var_head, &decoder] {
            s.init_params(&mut params, &mut r);
        }
        let mut adam = AdamState::new(n);
        adam.learning_rate = c.learning_rate;
        Ok(VaeModel {
            config: c.clone(),
            encoder,
            mean_head,
            log_var_head,
            decoder,
            params,
            adam,
            history: Vec::new(),
            snapshot: None,
        })
    }

    pub fn config(&self) -> &VaeConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn history(&self) -> &[LossRecord] {
        &self.history
    }

    pub fn snapshot(&self) -> Option<&Snapshot> {
        self.snapshot.as_ref()
    }

    pub fn adam(&self) -> &AdamState {
        &self.adam
    }

    pub fn latent_dim(&self) -> usize {
        self.config.latent_dim
    }

    pub fn stacks(&self) -> [&Stack; 4] {
        [&self.encoder, &self.mean_head, &self.log_var_head, &self.decoder]
    }

    pub fn tensors(&self) -> Vec<TensorInfo> {
        let mut t = self.encoder.tensors("encoder");
        t.extend(self.mean_head.tensors("z_mean"));
        t.extend(self.log_var_head.tensors("z_log_var"));
        t.extend(self.decoder.tensors("decoder"));
        t
    }

    fn l1_penalty(&self, params: &[f64]) -> f64 {
        self.stacks().iter().map(|s| s.l1_penalty(params)).sum()
    }

    pub fn encode_one(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let h = self.encoder.forward(&self.params, x, None)?;
        let m = self.mean_head.forward(&self.params, h.output(), None)?;
        let v = self.log_var_head.forward(&self.params, h.output(), None)?;
        Ok((m.output().to_vec(), v.output().to_vec()))
    }

    /// Posterior means, one `latent_dim` vector per peptide.
    pub fn encode(&self, peptides: &[Peptide]) -> Result<Vec<Vec<f64>>> {
        peptides
            .par_iter()
            .map(|p| {
                let x = one_hot_encode(p, self.config.max_len)?;
                Ok(self.encode_one(&x.data)?.0)
            })
            .collect()
    }

    /// Decoder output probabilities, `max_len x 21` row-major.
    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.decoder.forward(&self.params, z, None)?.output().to_vec())
    }

    /// Argmax decoding of the posterior mean of `p`; may be empty or
    /// shorter than a valid peptide.
    pub fn reconstruct(&self, p: &Peptide) -> Result<String> {
        let x = one_hot_encode(p, self.config.max_len)?;
        let z = self.encode_one(&x.data)?.0;
        let residues = decode_residues(&self.decode(&z)?);
        Ok(String::from_utf8(residues).expect("ascii residues"))
    }

    /// Per-sample losses and (optionally) gradients, with dropout masks and
    /// reparameterization noise drawn from `rng`. Gradients are scaled by
    /// `scale` and accumulated into `grads`.
    fn sample_terms(
        &self,
        params: &[f64],
        x: &[f64],
        rng: &mut ChaCha8Rng,
        scale: f64,
        grads: Option<&mut [f64]>,
    ) -> Result<(f64, f64)> {
        let h = self.encoder.forward(params, x, Some(rng))?;
        let m = self.mean_head.forward(params, h.output(), None)?;
        let v = self.log_var_head.forward(params, h.output(), None)?;
        let (mean, log_var) = (m.output(), v.output());
        let eps: Vec<f64> = (0..mean.len()).map(|_| rng.sample(StandardNormal)).collect();
        let z: Vec<f64> = (0..mean.len())
            .map(|j| mean[j] + (0.5 * log_var[j]).exp() * eps[j])
            .collect();
        let d = self.decoder.forward(params, &z, None)?;
        let n_out = x.len() as f64;
        let rec = bce_mean(d.output(), x);
        let kl = -0.5
            * mean
                .iter()
                .zip(log_var)
                .map(|(&mu, &lv)| 1.0 + lv - mu * mu - lv.exp())
                .sum::<f64>();
        if let Some(grads) = grads {
            // sigmoid and mean BCE fused: dL/dlogit = (p - t) / N
            let logits_layer = self.decoder.len() - 1;
            let g_logits: Vec<f64> = d
                .output()
                .iter()
                .zip(x)
                .map(|(&p, &t)| scale * (p - t) / n_out)
                .collect();
            let gz = self.decoder.backward_from(logits_layer, params, &d, &g_logits, grads)?;
            let g_mean: Vec<f64> = (0..mean.len()).map(|j| gz[j] + scale * mean[j]).collect();
            let g_log_var: Vec<f64> = (0..mean.len())
                .map(|j| {
                    let s = (0.5 * log_var[j]).exp();
                    gz[j] * 0.5 * s * eps[j] + scale * 0.5 * (log_var[j].exp() - 1.0)
                })
                .collect();
            let mut gh = self.mean_head.backward(params, &m, &g_mean, grads)?;
            let gh2 = self.log_var_head.backward(params, &v, &g_log_var, grads)?;
            for (a, b) in gh.iter_mut().zip(gh2) {
                *a += b;
            }
            self.encoder.backward(params, &h, &gh, grads)?;
        }
        Ok((rec, kl))
    }

    /// Mean batch losses at `params`, plus the full gradient when
    /// `want_grad`. Each sample draws its randomness from its own seed.
    pub fn batch_terms(
        &self,
        params: &[f64],
        batch: &[&[f64]],
        seeds: &[u64],
        want_grad: bool,
    ) -> Result<(BatchLoss, Option<Vec<f64>>)> {
        if batch.is_empty() || batch.len() != seeds.len() {
            return Err(Error::Shape {
                layer: 0,
                msg: "empty batch or seed count mismatch".into(),
            });
        }
        let scale = 1.0 / batch.len() as f64;
        let n = params.len();
        let parts: Vec<Result<(f64, f64, Option<Vec<f64>>)>> = batch
            .par_chunks(CHUNK)
            .zip(seeds.par_chunks(CHUNK))
            .map(|(xs, ss)| {
                let mut g = want_grad.then(|| vec![0.0; n]);
                let (mut rec, mut kl) = (0.0, 0.0);
                for (x, &s) in xs.iter().zip(ss) {
                    let mut r = rng::stream(s, 0);
                    let (a, b) = self.sample_terms(params, x, &mut r, scale, g.as_deref_mut())?;
                    rec += a;
                    kl += b;
                }
                Ok((rec, kl, g))
            })
            .collect();
        let (mut rec, mut kl) = (0.0, 0.0);
        let mut grads = want_grad.then(|| vec![0.0; n]);
        for part in parts {
            let (a, b, g) = part?;
            rec += a;
            kl += b;
            if let (Some(total), Some(g)) = (grads.as_mut(), g) {
                for (t, v) in total.iter_mut().zip(g) {
                    *t += v;
                }
            }
        }
        if let Some(g) = grads.as_mut() {
            for s in self.stacks() {
                s.l1_grad(params, g);
            }
        }
        let loss = BatchLoss {
            rec: rec * scale,
            kl: kl * scale,
            l1: self.l1_penalty(params),
        };
        Ok((loss, grads))
    }

    /// One pass over `data` in a seeded shuffled order; the record is the
    /// batch-size-weighted mean of the per-batch losses.
    pub fn train_epoch(&mut self, data: &[Vec<f64>], epoch: usize) -> Result<LossRecord> {
        if data.is_empty() {
            return Err(Error::Data("empty training set".into()));
        }
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut rng::stream(rng::child_seed(self.config.seed, STREAM_SHUFFLE), epoch as u64));
        let noise = rng::child_seed(rng::child_seed(self.config.seed, STREAM_NOISE), epoch as u64);
        let (mut rec, mut kl, mut l1) = (0.0, 0.0, 0.0);
        for (b, idx) in order.chunks(self.config.batch_size).enumerate() {
            let xs: Vec<&[f64]> = idx.iter().map(|&i| data[i].as_slice()).collect();
            let seeds: Vec<u64> = (0..idx.len())
                .map(|j| rng::child_seed(noise, (b * self.config.batch_size + j) as u64))
                .collect();
            let (loss, grads) = self.batch_terms(&self.params, &xs, &seeds, true)?;
            let w = idx.len() as f64;
            rec += loss.rec * w;
            kl += loss.kl * w;
            l1 += loss.l1 * w;
            if !loss.total().is_finite() {
                break;
            }
            adam_step(&mut self.adam, &mut self.params, &grads.expect("gradient requested"))?;
        }
        let n = data.len() as f64;
        let record = LossRecord::from_terms(rec / n, kl / n, l1 / n);
        self.history.push(record);
        Ok(record)
    }

    /// Run the phased schedule on `data` (one-hot rows).
    pub fn train(&mut self, data: &[Vec<f64>]) -> Result<Supervision<Vec<f64>>> {
        let (epochs, ext) = (self.config.epochs, self.config.extension());
        let sup = {
            let mut runner = Trainer { model: self, data };
            supervise(&mut runner, epochs, ext)?
        };
        self.snapshot = Some(match sup.trigger_epoch {
            Some(e) => Snapshot {
                params: self.params.clone(),
                record: sup.history[e - 1],
                epoch: e,
            },
            None => Snapshot {
                params: sup.best.snapshot.clone(),
                record: sup.best.record,
                epoch: sup.best.epoch,
            },
        });
        Ok(sup)
    }

    /// Sample `n` peptides. Decodes shorter than two residues are rejected
    /// and redrawn, up to `100 * n` attempts.
    pub fn generate(&self, n: usize, mode: GenerationMode, training: &[Peptide], seed: u64) -> Result<Vec<Generated>> {
        if n == 0 {
            return Err(Error::Config("generation count must be >= 1".into()));
        }
        let means = match mode {
            GenerationMode::Prior => Vec::new(),
            GenerationMode::PosteriorJitter { tau } => {
                if !(tau >= 0.0 && tau.is_finite()) {
                    return Err(Error::Config("jitter scale must be finite and >= 0".into()));
                }
                if training.is_empty() {
                    return Err(Error::Config("posterior jitter needs training sequences".into()));
                }
                self.encode(training)?
            }
        };
        let mut r = rng::stream(seed, STREAM_GENERATE);
        let budget = 100 * n;
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0;
        while out.len() < n {
            if attempts == budget {
                return Err(Error::Numeric(format!(
                    "generation accepted {} of {attempts} decodes ({:.1}%), needed {n}",
                    out.len(),
                    100.0 * out.len() as f64 / attempts as f64
                )));
            }
            attempts += 1;
            let (z, source) = match mode {
                GenerationMode::Prior => (
                    (0..self.config.latent_dim).map(|_| r.sample(StandardNormal)).collect::<Vec<f64>>(),
                    None,
                ),
                GenerationMode::PosteriorJitter { tau } => {
                    let i = r.gen_range(0..means.len());
                    let z = means[i]
                        .iter()
                        .map(|&m| m + tau * r.sample::<f64, _>(StandardNormal))
                        .collect();
                    (z, Some(i))
                }
            };
            match decode_argmax(&self.decode(&z)?) {
                Ok(peptide) => out.push(Generated { peptide, source }),
                Err(Error::EmptySequence | Error::TooShort { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let tensors = self
            .tensors()
            .into_iter()
            .map(|t| TensorFile {
                values: self.params[t.range.clone()].to_vec(),
                name: t.name,
                shape: t.shape,
            })
            .collect();
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            config: self.config.clone(),
            tensors,
            adam: self.adam.clone(),
            history: self.history.clone(),
            snapshot: self.snapshot.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<VaeModel> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(Error::Data(format!(
                "unsupported model file {} v{}",
                file.format, file.version
            )));
        }
        let mut model = VaeModel::build(&file.config)?;
        let layout = model.tensors();
        if layout.len() != file.tensors.len() {
            return Err(Error::Data("model file tensor count does not match its config".into()));
        }
        for (want, got) in layout.iter().zip(&file.tensors) {
            if want.name != got.name || want.shape != got.shape || want.range.len() != got.values.len() {
                return Err(Error::Data(format!("tensor {} does not match the configured layout", got.name)));
            }
            model.params[want.range.clone()].copy_from_slice(&got.values);
        }
        let n = model.params.len();
        if file.adam.m.len() != n || file.adam.v.len() != n {
            return Err(Error::Data("optimizer state does not match parameter count".into()));
        }
        if file.snapshot.as_ref().is_some_and(|s| s.params.len() != n) {
            return Err(Error::Data("snapshot does not match parameter count".into()));
        }
        model.adam = file.adam;
        model.history = file.history;
        model.snapshot = file.snapshot;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<VaeModel> {
        VaeModel::from_json(&std::fs::read_to_string(path)?)
    }
}

fn bce_mean(pred: &[f64], target: &[f64]) -> f64 {
    let total: f64 = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum();
    total / pred.len() as f64
}

struct Trainer<'a> {
    model: &'a mut VaeModel,
    data: &'a [Vec<f64>],
}

impl EpochRunner for Trainer<'_> {
    type Snapshot = Vec<f64>;

    fn run_epoch(&mut self, epoch: usize) -> Result<LossRecord> {
        self.model.train_epoch(self.data, epoch)
    }

    fn snapshot(&self) -> Vec<f64> {
        self.model.params.clone()
    }

    fn restore(&mut self, snapshot: &Vec<f64>) {
        self.model.params.copy_from_slice(snapshot);
    }
}

#[derive(Serialize, Deserialize)]
struct TensorFile {
    name: String,
    shape: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: VaeConfig,
    tensors: Vec<TensorFile>,
    adam: AdamState,
    history: Vec<LossRecord>,
    snapshot: Option<Snapshot>,
}

/// One-hot rows for a peptide set.
pub fn encode_set(peptides: &[Peptide], max_len: usize) -> Result<Vec<Vec<f64>>> {
    peptides
        .iter()
        .map(|p| Ok(one_hot_encode(p, max_len)?.data))
        .collect()
}

fn train_one(config: &VaeConfig, peptides: &[Peptide], generate: bool) -> Result<TrainedVae> {
    if peptides.is_empty() {
        return Err(Error::Data("no training sequences".into()));
    }
    let data = encode_set(peptides, config.max_len)?;
    let mut model = VaeModel::build(config)?;
    let sup = model.train(&data)?;
    let generated = if generate {
        model
            .generate(
                config.generation_count,
                config.generation,
                peptides,
                rng::child_seed(config.seed, STREAM_GENERATE),
            )?
            .into_iter()
            .map(|g| g.peptide)
            .collect()
    } else {
        Vec::new()
    };
    Ok(TrainedVae {
        model,
        outcome: TrainOutcome {
            phase_reached: sup.phase_reached,
            trigger_epoch: sup.trigger_epoch,
            generated,
            history: sup.history,
        },
    })
}

/// Train the positive model (and, when negatives are given, an independent
/// negative model concurrently) and generate from the positive model.
pub fn train_la(positives: &[Peptide], negatives: Option<&[Peptide]>, config: &VaeConfig) -> Result<LaOutcome> {
    config.validate()?;
    match negatives {
        None => Ok(LaOutcome {
            positive: train_one(config, positives, true)?,
            negative: None,
        }),
        Some(neg) => {
            let neg_config = VaeConfig {
                seed: rng::child_seed(config.seed, STREAM_NEGATIVE),
                ..config.clone()
            };
            let (p, n) = rayon::join(
                || train_one(config, positives, true),
                || train_one(&neg_config, neg, false),
            );
            Ok(LaOutcome {
                positive: p?,
                negative: Some(n.map_err(|e| e.in_stage("negative model"))?),
            })
        }
    }
}
