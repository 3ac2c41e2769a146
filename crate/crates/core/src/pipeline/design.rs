//! Taste-directed design run: corpus assignment, VAE generation, latent
//! screening, clustering, toxicity screening and physicochemical profiling.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::report::{candidates_tsv, CandidateRow};
use super::{sha256_hex, write_output, TOOL_VERSION};
use crate::align::{AlignParams, Clustering};
use crate::corpus::{dedup_greedy, length_filter, Corpus, DEDUP_IDENTITY, TASTE_MAX_LEN};
use crate::latent::{
    coords_tsv, pca2, scores_tsv, select_avoidance, select_standard, DistanceSpace, DEFAULT_ALPHA, DEFAULT_K,
    DEFAULT_KEEP_FRACTION,
};
use crate::nn::LossRecord;
use crate::physchem::{profile_with, PhyschemConfig};
use crate::rng::stage_seed;
use crate::seq::{assign_record, parse_taste_corpus, Assignment, PatternMode, TastePattern};
use crate::tox::EnsembleModel;
use crate::vae::{train_la, Phase, VaeConfig};
use crate::{Error, Peptide, Result};

pub const DEFAULT_CLUSTER_THRESHOLD: f64 = 0.70;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DesignRun {
    pub pattern: TastePattern,
    pub mode: PatternMode,
    pub corpus: PathBuf,
    /// `seed` is overwritten from the master seed.
    pub vae: VaeConfig,
    pub k: usize,
    pub keep_fraction: f64,
    pub alpha: f64,
    pub distance_space: DistanceSpace,
    pub cluster_threshold: f64,
    pub tox_model: Option<PathBuf>,
    pub physchem: PhyschemConfig,
    pub out: PathBuf,
    pub seed: u64,
}

impl DesignRun {
    pub fn new(pattern: TastePattern, mode: PatternMode, corpus: PathBuf, out: PathBuf) -> DesignRun {
        DesignRun {
            pattern,
            mode,
            corpus,
            vae: VaeConfig::default(),
            k: DEFAULT_K,
            keep_fraction: DEFAULT_KEEP_FRACTION,
            alpha: DEFAULT_ALPHA,
            distance_space: DistanceSpace::Projected,
            cluster_threshold: DEFAULT_CLUSTER_THRESHOLD,
            tox_model: None,
            physchem: PhyschemConfig::default(),
            out,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            return Err(Error::Config(format!("keep fraction {} must lie in (0, 1]", self.keep_fraction)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha {} must lie in (0, 1]", self.alpha)));
        }
        if !(self.cluster_threshold > 0.0 && self.cluster_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "cluster threshold {} must lie in (0, 1]",
                self.cluster_threshold
            )));
        }
        if self.vae.max_len > TASTE_MAX_LEN {
            return Err(Error::Config(format!("VAE max_len must be <= {TASTE_MAX_LEN}")));
        }
        self.vae.validate()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StageCounts {
    pub corpus_records: usize,
    pub positives: usize,
    pub negatives: usize,
    pub excluded: usize,
    pub positives_after_length_filter: usize,
    pub negatives_after_length_filter: usize,
    pub positives_after_dedup: usize,
    pub negatives_after_dedup: usize,
    pub generated: usize,
    pub unique_candidates: usize,
    pub filtered: usize,
    /// Filtered candidates the toxicity model cannot encode.
    pub tox_unscreenable: usize,
    pub clusters: usize,
    pub reported: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Seeds {
    pub master: u64,
    pub vae: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSummary {
    pub model: &'static str,
    pub phase_reached: &'static str,
    pub trigger_epoch: Option<usize>,
    pub epochs_run: usize,
    pub history: Vec<LossRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputDigest {
    pub role: &'static str,
    pub file_name: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run. Paths are reduced to file names
/// so the manifest does not depend on where the run was written.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub pattern: String,
    pub mode: PatternMode,
    pub avoidance: bool,
    pub seeds: Seeds,
    pub vae: VaeConfig,
    pub k: usize,
    pub keep_fraction: f64,
    pub alpha: f64,
    pub distance_space: DistanceSpace,
    pub cluster_threshold: f64,
    pub physchem: PhyschemConfig,
    pub dedup_identity: f64,
    pub max_len: usize,
    pub inputs: Vec<InputDigest>,
    pub counts: StageCounts,
    pub pca_variances: [f64; 2],
    pub pca_rank_deficient: bool,
    pub models: Vec<ModelSummary>,
    pub tox_screening: bool,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct DesignOutput {
    pub candidates: Vec<CandidateRow>,
    pub manifest: RunManifest,
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

fn summary(model: &'static str, phase: Phase, trigger: Option<usize>, history: &[LossRecord]) -> ModelSummary {
    ModelSummary {
        model,
        phase_reached: phase.name(),
        trigger_epoch: trigger,
        epochs_run: history.len(),
        history: history.to_vec(),
    }
}

fn loss_history_tsv(models: &[ModelSummary]) -> String {
    let mut s = String::from("model\tepoch\tloss_tol\tloss_rec\tloss_kl\tl1_penalty\n");
    for m in models {
        for (i, r) in m.history.iter().enumerate() {
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                m.model,
                i + 1,
                r.loss_tol,
                r.loss_rec,
                r.loss_kl,
                r.l1_penalty
            ));
        }
    }
    s
}

/// Execute a design run and write its artifacts under `run.out`.
pub fn run_design(run: &DesignRun) -> Result<DesignOutput> {
    run.validate()?;
    let avoidance = run.pattern.avoidance_mode();
    let mut counts = StageCounts::default();

    let corpus_bytes = std::fs::read(&run.corpus).map_err(|e| Error::from(e).in_stage("read corpus"))?;
    let corpus_text = String::from_utf8(corpus_bytes.clone())
        .map_err(|_| Error::Data("corpus is not UTF-8".into()).in_stage("read corpus"))?;
    let records = parse_taste_corpus(&corpus_text).map_err(|e| e.in_stage("parse corpus"))?;
    let corpus = Corpus::ingest_taste(records, &file_name(&run.corpus));
    counts.corpus_records = corpus.len();

    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for r in corpus.into_records() {
        match assign_record(&r.label, &run.pattern, run.mode) {
            Assignment::Positive => pos.push(r),
            Assignment::Negative => neg.push(r),
            Assignment::Excluded => counts.excluded += 1,
        }
    }
    counts.positives = pos.len();
    counts.negatives = neg.len();
    let mode_name = match run.mode {
        PatternMode::Single => "single",
        PatternMode::Multiple => "multiple",
    };
    if pos.is_empty() {
        return Err(Error::Data(format!(
            "pattern {} in {mode_name} mode selects no positive peptides",
            run.pattern
        ))
        .in_stage("assign"));
    }
    if avoidance && neg.is_empty() {
        return Err(Error::Data(format!(
            "pattern {} in {mode_name} mode avoids tastes but no negative peptides were found",
            run.pattern
        ))
        .in_stage("assign"));
    }

    let params = AlignParams::default();
    let prepare = |records, max_len| -> Result<(usize, Corpus<crate::TasteLabel>)> {
        let c = length_filter(&Corpus::new(records), max_len)?.corpus;
        let n = c.len();
        Ok((n, dedup_greedy(&c, DEDUP_IDENTITY, &params)?.corpus))
    };
    let (n, pos) = prepare(pos, run.vae.max_len).map_err(|e| e.in_stage("prepare positives"))?;
    counts.positives_after_length_filter = n;
    counts.positives_after_dedup = pos.len();
    let (n, neg) = prepare(neg, run.vae.max_len).map_err(|e| e.in_stage("prepare negatives"))?;
    counts.negatives_after_length_filter = n;
    counts.negatives_after_dedup = neg.len();
    if pos.is_empty() {
        return Err(Error::Data("no positive peptide survives the length filter".into()).in_stage("prepare positives"));
    }
    if avoidance && neg.is_empty() {
        return Err(Error::Data("no negative peptide survives the length filter".into()).in_stage("prepare negatives"));
    }
    let pos = pos.peptides();
    let neg = neg.peptides();

    let seeds = Seeds {
        master: run.seed,
        vae: stage_seed(run.seed, "vae"),
    };
    let vae_cfg = VaeConfig {
        seed: seeds.vae,
        ..run.vae.clone()
    };
    let la = train_la(&pos, avoidance.then_some(&neg[..]), &vae_cfg).map_err(|e| e.in_stage("train"))?;
    let po = &la.positive.outcome;
    let mut models = vec![summary("positive", po.phase_reached, po.trigger_epoch, &po.history)];
    if let Some(n) = &la.negative {
        let o = &n.outcome;
        models.push(summary("negative", o.phase_reached, o.trigger_epoch, &o.history));
    }
    counts.generated = po.generated.len();
    let mut seen = HashSet::new();
    let candidates: Vec<Peptide> = po.generated.iter().filter(|p| seen.insert(p.as_str().to_string())).cloned().collect();
    counts.unique_candidates = candidates.len();

    // every point set goes through the positive encoder
    let model = &la.positive.model;
    let enc = |s: &[Peptide]| model.encode(s).map_err(|e| e.in_stage("encode"));
    let (zp, zn, zc) = (enc(&pos)?, enc(&neg)?, enc(&candidates)?);
    let union: Vec<Vec<f64>> = zp.iter().chain(&zn).chain(&zc).cloned().collect();
    let pca = pca2(&union).map_err(|e| e.in_stage("projection"))?;
    let (pp, pn, pc) = (pca.project_all(&zp), pca.project_all(&zn), pca.project_all(&zc));
    let as_vecs = |v: &[[f64; 2]]| v.iter().map(|p| p.to_vec()).collect::<Vec<_>>();
    let (sp, sn, sc) = match run.distance_space {
        DistanceSpace::Projected => (as_vecs(&pp), as_vecs(&pn), as_vecs(&pc)),
        DistanceSpace::Latent => (zp, zn, zc),
    };
    let selection = if avoidance {
        select_avoidance(&sc, &sp, &sn, run.k, run.alpha)
    } else {
        select_standard(&sc, &sp, run.keep_fraction, run.k)
    }
    .map_err(|e| e.in_stage("filter"))?;
    counts.filtered = selection.ranking.len();

    let tox = match &run.tox_model {
        Some(p) => Some(EnsembleModel::load(p).map_err(|e| e.in_stage("load toxicity model"))?),
        None => {
            log::warn!("no toxicity model given; toxicity columns will be NA");
            None
        }
    };
    // candidates the toxicity model cannot encode leave before clustering
    let mut screened: Vec<(usize, Option<(f64, bool)>)> = Vec::new();
    let ranked: Vec<Peptide> = selection.ranking.iter().map(|&i| candidates[i].clone()).collect();
    let preds = tox.as_ref().map(|m| m.predict(&ranked));
    for (pos_in_rank, &ci) in selection.ranking.iter().enumerate() {
        match preds.as_ref().map(|p| &p[pos_in_rank]) {
            None => screened.push((pos_in_rank, None)),
            Some(Ok(pr)) => screened.push((pos_in_rank, Some((pr.probability, pr.toxic)))),
            Some(Err(e)) => {
                log::warn!("{}: not screenable for toxicity: {e}", candidates[ci]);
                counts.tox_unscreenable += 1;
            }
        }
    }
    let cluster_input: Vec<Peptide> = screened.iter().map(|(r, _)| ranked[*r].clone()).collect();
    let clustering = if cluster_input.is_empty() {
        Clustering {
            clusters: Vec::new(),
            representatives: Vec::new(),
        }
    } else {
        Clustering::run(&cluster_input, &params, run.cluster_threshold).map_err(|e| e.in_stage("cluster"))?
    };
    counts.clusters = clustering.clusters.len();

    let mut rows: Vec<CandidateRow> = clustering
        .representatives
        .iter()
        .enumerate()
        .map(|(cid, &m)| {
            let (rank_pos, tox) = screened[m];
            let ci = selection.ranking[rank_pos];
            let sc = &selection.scores[ci];
            CandidateRow {
                sequence: candidates[ci].to_string(),
                d_plus: sc.d_plus,
                d_minus: sc.d_minus,
                delta: sc.delta(),
                p_value: sc.p_value,
                rank: rank_pos + 1,
                cluster: cid,
                cluster_size: clustering.clusters[cid].len(),
                representative: true,
                tox_probability: tox.map(|t| t.0),
                tox_call: tox.map(|t| t.1),
                physchem: profile_with(&candidates[ci], &run.physchem),
            }
        })
        .collect();
    rows.sort_by_key(|r| r.rank);
    counts.reported = rows.len();

    let mut inputs = vec![InputDigest {
        role: "corpus",
        file_name: file_name(&run.corpus),
        sha256: sha256_hex(&corpus_bytes),
    }];
    if let Some(p) = &run.tox_model {
        let bytes = std::fs::read(p)?;
        inputs.push(InputDigest {
            role: "tox_model",
            file_name: file_name(p),
            sha256: sha256_hex(&bytes),
        });
    }

    let mut files: Vec<(&str, String)> = Vec::new();
    files.push(("candidates.tsv", candidates_tsv(&rows)));
    files.push(("loss_history.tsv", loss_history_tsv(&models)));
    let mut coords: Vec<(&str, &str, [f64; 2])> = Vec::new();
    coords.extend(pos.iter().zip(&pp).map(|(p, c)| ("positive", p.as_str(), *c)));
    coords.extend(neg.iter().zip(&pn).map(|(p, c)| ("negative", p.as_str(), *c)));
    coords.extend(candidates.iter().zip(&pc).map(|(p, c)| ("candidate", p.as_str(), *c)));
    files.push(("latent_coords.tsv", coords_tsv(&coords)));
    let seqs: Vec<String> = candidates.iter().map(|p| p.to_string()).collect();
    files.push(("filter_scores.tsv", scores_tsv(&seqs, &selection)));
    files.push(("clusters.tsv", clustering.to_tsv(&cluster_input)));

    let mut outputs: Vec<String> = files.iter().map(|f| f.0.to_string()).collect();
    outputs.push("run_manifest.json".into());
    let manifest = RunManifest {
        tool: "tastepep",
        version: TOOL_VERSION,
        pattern: run.pattern.to_string(),
        mode: run.mode,
        avoidance,
        seeds,
        vae: vae_cfg,
        k: run.k,
        keep_fraction: run.keep_fraction,
        alpha: run.alpha,
        distance_space: run.distance_space,
        cluster_threshold: run.cluster_threshold,
        physchem: run.physchem,
        dedup_identity: DEDUP_IDENTITY,
        max_len: run.vae.max_len,
        inputs,
        counts,
        pca_variances: pca.variances,
        pca_rank_deficient: pca.rank_deficient,
        models,
        tox_screening: tox.is_some(),
        outputs,
    };
    files.push(("run_manifest.json", serde_json::to_string_pretty(&manifest)? + "\n"));
    for (name, body) in &files {
        write_output(&run.out, name, body).map_err(|e| e.in_stage("write report"))?;
    }
    Ok(DesignOutput {
        candidates: rows,
        manifest,
    })
}
