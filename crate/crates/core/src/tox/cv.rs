//! Stratified k-fold cross-validation with pooled confusion counts.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::metrics::{Confusion, MetricReport};
use super::{fit, ClassifierSpec, Matrix};
use crate::rng::stream;
use crate::{Error, Result};

pub const DEFAULT_FOLDS: usize = 10;

/// Fold index of every sample. Each class is shuffled on its own stream and
/// dealt round-robin, so per-class fold sizes differ by at most one.
pub fn stratified_folds(y: &[bool], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut folds = vec![0; y.len()];
    for (stream_id, class) in [(0, true), (1, false)] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if idx.len() < k {
            return Err(Error::Data(format!(
                "{} samples of class {} is fewer than {k} folds",
                idx.len(),
                if class { "toxic" } else { "non-toxic" }
            )));
        }
        idx.shuffle(&mut stream(seed, stream_id));
        // offset the second class so total fold sizes stay balanced too
        let offset = if class { 0 } else { y.iter().filter(|&&v| v).count() % k };
        for (j, &i) in idx.iter().enumerate() {
            folds[i] = (j + offset) % k;
        }
    }
    Ok(folds)
}

/// Out-of-fold probabilities: each sample is scored by the model fitted on
/// the other folds. Folds are evaluated in parallel.
pub fn oof_predictions(spec: &ClassifierSpec, x: &Matrix, y: &[bool], folds: &[usize], k: usize) -> Result<Vec<f64>> {
    let per_fold: Vec<(Vec<usize>, Vec<f64>)> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..x.rows).filter(|&i| folds[i] != f).collect();
            let test: Vec<usize> = (0..x.rows).filter(|&i| folds[i] == f).collect();
            let ty: Vec<bool> = train.iter().map(|&i| y[i]).collect();
            let model = fit(spec, &x.select_rows(&train), &ty)?;
            Ok((test.clone(), model.predict(&x.select_rows(&test))))
        })
        .collect::<Result<_>>()?;
    let mut oof = vec![f64::NAN; x.rows];
    for (idx, p) in per_fold {
        for (i, v) in idx.into_iter().zip(p) {
            oof[i] = v;
        }
    }
    Ok(oof)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvResult {
    pub folds: Vec<usize>,
    pub oof: Vec<f64>,
    pub per_fold: Vec<Confusion>,
    /// Metrics on the pooled (summed) confusion counts.
    pub report: MetricReport,
}

pub fn pool(oof: &[f64], y: &[bool], folds: &[usize], k: usize) -> (Vec<Confusion>, MetricReport) {
    let mut per_fold = vec![Confusion::default(); k];
    for i in 0..y.len() {
        per_fold[folds[i]].add(super::call(oof[i]), y[i]);
    }
    let total = per_fold.iter().fold(Confusion::default(), |a, c| a.merge(c));
    (per_fold, total.report())
}

pub fn cross_validate(spec: &ClassifierSpec, x: &Matrix, y: &[bool], k: usize, seed: u64) -> Result<CvResult> {
    let folds = stratified_folds(y, k, seed)?;
    let oof = oof_predictions(spec, x, y, &folds, k)?;
    let (per_fold, report) = pool(&oof, y, &folds, k);
    Ok(CvResult {
        folds,
        oof,
        per_fold,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tox::synthetic::linear_dataset;

    #[test]
    fn twenty_samples_ten_folds() {
        let y: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let folds = stratified_folds(&y, 10, 1).unwrap();
        for f in 0..10 {
            let members: Vec<usize> = (0..20).filter(|&i| folds[i] == f).collect();
            assert_eq!(members.len(), 2);
            assert_eq!(members.iter().filter(|&&i| y[i]).count(), 1);
        }
        assert!(stratified_folds(&y[..8], 10, 1).is_err());
    }

    #[test]
    fn pooled_equals_sum_of_folds() {
        let (x, y) = linear_dataset(60, 4, 0.2, 9);
        let spec = ClassifierSpec::preset("knn", 0).unwrap();
        let cv = cross_validate(&spec, &x, &y, 5, 2).unwrap();
        // recompute each fold independently
        let mut total = Confusion::default();
        for f in 0..5 {
            let train: Vec<usize> = (0..x.rows).filter(|&i| cv.folds[i] != f).collect();
            let test: Vec<usize> = (0..x.rows).filter(|&i| cv.folds[i] == f).collect();
            let ty: Vec<bool> = train.iter().map(|&i| y[i]).collect();
            let m = fit(&spec, &x.select_rows(&train), &ty).unwrap();
            let p = m.predict(&x.select_rows(&test));
            let c = Confusion::from_probabilities(&p, &test.iter().map(|&i| y[i]).collect::<Vec<_>>());
            assert_eq!(c, cv.per_fold[f]);
            total = total.merge(&c);
        }
        assert_eq!(total.report(), cv.report);
    }

    #[test]
    fn constant_predictor_scores_zero() {
        let y: Vec<bool> = (0..20).map(|i| i < 10).collect();
        let folds = stratified_folds(&y, 5, 0).unwrap();
        let (_, r) = pool(&[0.9; 20], &y, &folds, 5);
        assert_eq!(r.mcc, 0.0);
    }
}
