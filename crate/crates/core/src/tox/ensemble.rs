//! Weighted soft-voting ensemble over fitted base learners.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{call, MetricReport};
use super::{ClassifierSpec, Fitted, Matrix};
use crate::descriptors::{encode_concat, DescriptorConfig, DescriptorId, Normalizer};
use crate::seq::Peptide;
use crate::{Error, Result};

pub const MODEL_FORMAT: &str = "tastepep-tox";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub spec: ClassifierSpec,
    pub model: Fitted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub format: String,
    pub version: u32,
    pub descriptors: Vec<DescriptorId>,
    pub descriptor_config: DescriptorConfig,
    pub normalizer: Normalizer,
    pub members: Vec<Member>,
    pub weights: Vec<f64>,
    pub cv_report: Option<MetricReport>,
    pub test_report: Option<MetricReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub probability: f64,
    pub toxic: bool,
}

pub fn ensemble_probability(probas: &[f64], weights: &[f64]) -> f64 {
    probas.iter().zip(weights).map(|(p, w)| p * w).sum()
}

impl EnsembleModel {
    pub fn new(
        descriptors: Vec<DescriptorId>,
        descriptor_config: DescriptorConfig,
        normalizer: Normalizer,
        members: Vec<Member>,
        weights: Vec<f64>,
    ) -> Result<EnsembleModel> {
        let m = EnsembleModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            descriptors,
            descriptor_config,
            normalizer,
            members,
            weights,
            cv_report: None,
            test_report: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() || self.members.len() != self.weights.len() {
            return Err(Error::Config(format!(
                "{} members but {} weights",
                self.members.len(),
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Config("ensemble weights must be non-negative".into()));
        }
        let s: f64 = self.weights.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("ensemble weights sum to {s}, not 1")));
        }
        let width: usize = self.descriptors.iter().map(|d| d.dim(&self.descriptor_config)).sum();
        if width != self.normalizer.width() {
            return Err(Error::Config(format!(
                "normalizer width {} does not match descriptor width {width}",
                self.normalizer.width()
            )));
        }
        Ok(())
    }

    /// Per-member probabilities for one normalized row.
    pub fn member_probabilities(&self, row: &[f64]) -> Vec<f64> {
        self.members.iter().map(|m| m.model.predict_row(row)).collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        ensemble_probability(&self.member_probabilities(row), &self.weights)
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows).into_par_iter().map(|i| self.predict_row(x.row(i))).collect()
    }

    pub fn featurize(&self, p: &Peptide) -> Result<Vec<f64>> {
        let raw = encode_concat(&self.descriptors, p, &self.descriptor_config)?;
        Ok(self.normalizer.transform(&raw))
    }

    /// Score every peptide; descriptor failures are reported per peptide.
    pub fn predict(&self, peptides: &[Peptide]) -> Vec<Result<Prediction>> {
        peptides
            .par_iter()
            .map(|p| {
                let probability = self.predict_row(&self.featurize(p)?);
                Ok(Prediction {
                    probability,
                    toxic: call(probability),
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<EnsembleModel> {
        let m: EnsembleModel = serde_json::from_str(s)?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(Error::Data(format!(
                "unsupported model format {} v{} (expected {MODEL_FORMAT} v{MODEL_VERSION})",
                m.format, m.version
            )));
        }
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<EnsembleModel> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `sequence, probability, call`; failed rows carry `NA` and `error`.
pub fn predictions_tsv(peptides: &[Peptide], preds: &[Result<Prediction>]) -> String {
    let mut s = String::from("sequence\tprobability\tcall\n");
    for (p, r) in peptides.iter().zip(preds) {
        match r {
            Ok(pr) => s.push_str(&format!(
                "{p}\t{}\t{}\n",
                pr.probability,
                if pr.toxic { "toxic" } else { "non-toxic" }
            )),
            Err(_) => s.push_str(&format!("{p}\tNA\terror\n")),
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::{encode_rows, Normalizer};
    use crate::tox::{fit, ClassifierSpec};

    fn toy() -> (Vec<Peptide>, Vec<bool>) {
        let pos = ["KKRWLKK", "RRWKKLC", "KWKRRKL", "CKRKWKR", "KKLLRKW", "RKWCKRK"];
        let neg = ["DEESSGA", "SDEGQNT", "EEDGSAS", "GSDENQT", "TDESGEA", "NDEQGSE"];
        let peps: Vec<Peptide> = pos.iter().chain(&neg).map(|s| Peptide::new(s).unwrap()).collect();
        let y = (0..12).map(|i| i < 6).collect();
        (peps, y)
    }

    fn build(names: &[&str], weights: Vec<f64>) -> EnsembleModel {
        let (peps, y) = toy();
        let cfg = DescriptorConfig::default();
        let ids = vec![DescriptorId::Aac];
        let raw = encode_rows(&ids, &peps, &cfg).unwrap();
        let norm = Normalizer::fit(&raw).unwrap();
        let x = Matrix::from_rows(&norm.transform_all(&raw)).unwrap();
        let members = names
            .iter()
            .map(|n| {
                let spec = ClassifierSpec::preset(n, 1).unwrap();
                Member {
                    model: fit(&spec, &x, &y).unwrap(),
                    spec,
                }
            })
            .collect();
        EnsembleModel::new(ids, cfg, norm, members, weights).unwrap()
    }

    #[test]
    fn degenerate_single_member() {
        let (peps, _) = toy();
        let m = build(&["lr"], vec![1.0]);
        for (p, r) in peps.iter().zip(m.predict(&peps)) {
            let row = m.featurize(p).unwrap();
            assert_eq!(r.unwrap().probability, m.members[0].model.predict_row(&row));
        }
    }

    #[test]
    fn blend_is_a_convex_combination() {
        let (peps, _) = toy();
        let m = build(&["knn", "lr", "dt"], vec![0.2, 0.5, 0.3]);
        for p in &peps {
            let row = m.featurize(p).unwrap();
            let probs = m.member_probabilities(&row);
            let want = 0.2 * probs[0] + 0.5 * probs[1] + 0.3 * probs[2];
            let got = m.predict_row(&row);
            assert!((got - want).abs() < 1e-15);
            let lo = probs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(got >= lo - 1e-15 && got <= hi + 1e-15);
        }
        assert_eq!(ensemble_probability(&[0.8, 0.2], &[0.5, 0.5]), 0.5);
        assert!(call(ensemble_probability(&[0.8, 0.2], &[0.5, 0.5])));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let (peps, _) = toy();
        let m = build(&["rf", "gbt-x", "knn", "lr", "adb"], vec![0.3, 0.2, 0.2, 0.2, 0.1]);
        let back = EnsembleModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let a: Vec<f64> = m.predict(&peps).into_iter().map(|r| r.unwrap().probability).collect();
        let b: Vec<f64> = back.predict(&peps).into_iter().map(|r| r.unwrap().probability).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn validation_and_per_peptide_errors() {
        let m = build(&["lr"], vec![1.0]);
        let mut bad = m.clone();
        bad.weights = vec![0.9];
        assert!(bad.validate().is_err());
        let mut m2 = m.clone();
        m2.descriptors = vec![DescriptorId::Binary];
        m2.normalizer = Normalizer {
            mean: vec![0.0; 500],
            scale: vec![1.0; 500],
        };
        let long = Peptide::new(&"K".repeat(30)).unwrap();
        let ok = Peptide::new("KKWR").unwrap();
        let out = m2.predict(&[long.clone(), ok.clone()]);
        assert!(out[0].is_err());
        assert!(out[1].is_ok());
        let tsv = predictions_tsv(&[long, ok], &out);
        assert!(tsv.lines().nth(1).unwrap().ends_with("NA\terror"));
    }
}
