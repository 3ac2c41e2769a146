//! End-to-end workflows and their on-disk artifacts.

mod design;
mod report;
mod toxtrain;

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use design::{
    run_design, DesignOutput, DesignRun, InputDigest, ModelSummary, RunManifest, Seeds, StageCounts,
    DEFAULT_CLUSTER_THRESHOLD,
};
pub use report::{candidates_header, candidates_tsv, parse_candidates_tsv, CandidateRow, CANDIDATE_COLUMNS};
pub use toxtrain::{
    labelled_predictions_tsv, run_toxtrain, ClassCounts, ToxTrainConfig, ToxTrainOutput, ToxTrainReport, WeightPolicy,
};

use crate::tox::ensemble::predictions_tsv;
use crate::tox::{synthetic::separable_peptides, EnsembleModel};
use crate::{Error, Peptide, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Write `body` to `dir/name`, creating `dir` if needed.
pub fn write_output(dir: &Path, name: &str, body: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), body)?;
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Write `model.json`, `toxtrain_report.json`, `selection_trace.tsv`,
/// `train_predictions.tsv`, `test_predictions.tsv` and `metrics.tsv`.
pub fn write_toxtrain(out: &ToxTrainOutput, dir: &Path) -> Result<()> {
    out.model.save(&{
        std::fs::create_dir_all(dir)?;
        dir.join("model.json")
    })?;
    write_output(dir, "toxtrain_report.json", &json(&out.report)?)?;
    if let Some(sel) = &out.report.selection {
        write_output(dir, "selection_trace.tsv", &sel.trace_tsv())?;
    }
    let train: Vec<Option<f64>> = out.train_probabilities.iter().map(|&p| Some(p)).collect();
    write_output(dir, "train_predictions.tsv", &labelled_predictions_tsv(&out.train, &train))?;
    write_output(
        dir,
        "test_predictions.tsv",
        &labelled_predictions_tsv(&out.test, &out.test_probabilities),
    )?;
    let mut m = String::new();
    for (i, (name, r)) in [("ensemble_cv", &out.report.ensemble_cv), ("test", &out.report.test_metrics)]
        .into_iter()
        .enumerate()
    {
        let tsv = r.to_tsv();
        let mut lines = tsv.lines();
        let header = lines.next().unwrap_or_default();
        if i == 0 {
            m.push_str(&format!("set\t{header}\n"));
        }
        for l in lines {
            m.push_str(&format!("{name}\t{l}\n"));
        }
    }
    write_output(dir, "metrics.tsv", &m)
}

/// Score sequences with a stored model; returns the predictions TSV.
pub fn run_toxpredict(model: &Path, peptides: &[Peptide]) -> Result<String> {
    let m = EnsembleModel::load(model).map_err(|e| e.in_stage("load toxicity model"))?;
    Ok(predictions_tsv(peptides, &m.predict(peptides)))
}

/// Train on a synthetic corpus whose classes are linearly separable in
/// amino acid composition.
pub fn run_toxbench(n_per_class: usize, seed: u64, cfg: &ToxTrainConfig) -> Result<ToxTrainOutput> {
    if n_per_class < cfg.folds {
        return Err(Error::Config(format!(
            "{n_per_class} peptides per class is too few for {} folds",
            cfg.folds
        )));
    }
    let (toxic, non_toxic) = separable_peptides(n_per_class, seed);
    run_toxtrain(toxic, non_toxic, cfg)
}
