//! Peptide toxicity classification: from-scratch base learners, stratified
//! cross-validation, descriptor forward selection, simplex weight search and
//! the weighted soft-voting ensemble.

mod ada;
pub mod cv;
pub mod ensemble;
mod gbt;
mod knn;
mod linear;
pub mod metrics;
pub mod select;
pub mod synthetic;
mod tree;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use ada::AdaModel;
pub use cv::{cross_validate, oof_predictions, stratified_folds, CvResult};
pub use ensemble::{ensemble_probability, EnsembleModel, Member, Prediction};
pub use gbt::{GbtModel, GbtParams};
pub use knn::KnnModel;
pub use linear::{LrModel, LrParams};
pub use metrics::{call, compute_metrics, Confusion, MetricReport};
pub use select::{forward_select, simplex_grid, weight_grid_search, FeatureSelection, WeightSearch};
pub use tree::{Node, Tree};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Matrix> {
        if data.len() != rows * cols {
            return Err(Error::Data(format!("matrix data has {} values, expected {rows}x{cols}", data.len())));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Matrix> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.as_ref().len() != cols {
                return Err(Error::Data(format!("row {i} has {} columns, expected {cols}", r.as_ref().len())));
            }
            data.extend_from_slice(r.as_ref());
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Column-wise concatenation of matrices with equal row counts.
    pub fn hstack(parts: &[&Matrix]) -> Result<Matrix> {
        let rows = parts.first().map_or(0, |m| m.rows);
        if parts.iter().any(|m| m.rows != rows) {
            return Err(Error::Data("hstack row counts differ".into()));
        }
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for m in parts {
                data.extend_from_slice(m.row(i));
            }
        }
        Ok(Matrix { rows, cols, data })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum Algorithm {
    Rf(ForestParams),
    Ert(ForestParams),
    Gbt(GbtParams),
    Knn { k: usize },
    Lr(LrParams),
    Adb { rounds: usize, learning_rate: f64 },
    Dt { max_depth: Option<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub name: String,
    #[serde(flatten)]
    pub algorithm: Algorithm,
    pub seed: u64,
}

pub const PRESETS: [&str; 8] = ["rf", "ert", "gbt-x", "gbt-l", "knn", "lr", "adb", "dt"];

/// Default ensemble members and their fixed weight preset.
pub const DEFAULT_MEMBERS: [&str; 5] = ["rf", "gbt-l", "gbt-x", "knn", "lr"];
pub const DEFAULT_MEMBER_WEIGHTS: [f64; 5] = [0.3, 0.1, 0.2, 0.2, 0.2];

impl ClassifierSpec {
    pub fn preset(name: &str, seed: u64) -> Result<ClassifierSpec> {
        let forest = ForestParams {
            trees: 200,
            max_depth: 12,
        };
        let algorithm = match name {
            "rf" => Algorithm::Rf(forest),
            "ert" => Algorithm::Ert(forest),
            "gbt-x" => Algorithm::Gbt(GbtParams::xgb_like()),
            "gbt-l" => Algorithm::Gbt(GbtParams::lgbm_like()),
            "knn" => Algorithm::Knn { k: 5 },
            "lr" => Algorithm::Lr(LrParams::default()),
            "adb" => Algorithm::Adb {
                rounds: 100,
                learning_rate: 1.0,
            },
            "dt" => Algorithm::Dt { max_depth: None },
            other => return Err(Error::Config(format!("unknown classifier preset {other:?}"))),
        };
        Ok(ClassifierSpec {
            name: name.to_string(),
            algorithm,
            seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match &self.algorithm {
            Algorithm::Rf(f) | Algorithm::Ert(f) => f.trees > 0 && f.max_depth > 0,
            Algorithm::Gbt(g) => g.is_valid(),
            Algorithm::Knn { k } => *k > 0,
            Algorithm::Lr(p) => p.l2 >= 0.0 && p.tol > 0.0 && p.max_iter > 0,
            Algorithm::Adb { rounds, learning_rate } => *rounds > 0 && *learning_rate > 0.0,
            Algorithm::Dt { max_depth } => max_depth.is_none_or(|d| d > 0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("classifier {:?} has a non-positive hyperparameter", self.name)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Fitted {
    Forest { trees: Vec<Tree> },
    Gbt(GbtModel),
    Knn(KnnModel),
    Lr(LrModel),
    Ada(AdaModel),
    Tree(Tree),
}

impl Fitted {
    /// Probability of the toxic class for one row.
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        match self {
            Fitted::Forest { trees } => trees.iter().map(|t| t.predict_row(x)).sum::<f64>() / trees.len() as f64,
            Fitted::Gbt(m) => m.predict_row(x),
            Fitted::Knn(m) => m.predict_row(x),
            Fitted::Lr(m) => m.predict_row(x),
            Fitted::Ada(m) => m.predict_row(x),
            Fitted::Tree(t) => t.predict_row(x),
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows).map(|i| self.predict_row(x.row(i))).collect()
    }
}

pub fn fit(spec: &ClassifierSpec, x: &Matrix, y: &[bool]) -> Result<Fitted> {
    spec.validate()?;
    if x.rows != y.len() {
        return Err(Error::Data(format!("{} rows but {} labels", x.rows, y.len())));
    }
    if x.rows < 2 {
        return Err(Error::Data("need at least two training samples".into()));
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(Error::Data("training labels contain a single class".into()));
    }
    Ok(match &spec.algorithm {
        Algorithm::Rf(f) => Fitted::Forest {
            trees: tree::fit_forest(x, y, f, true, spec.seed),
        },
        Algorithm::Ert(f) => Fitted::Forest {
            trees: tree::fit_forest(x, y, f, false, spec.seed),
        },
        Algorithm::Gbt(p) => Fitted::Gbt(gbt::fit(x, y, p, spec.seed)),
        Algorithm::Knn { k } => Fitted::Knn(KnnModel::fit(x, y, *k)),
        Algorithm::Lr(p) => Fitted::Lr(linear::fit(x, y, p)),
        Algorithm::Adb { rounds, learning_rate } => Fitted::Ada(ada::fit(x, y, *rounds, *learning_rate, spec.seed)),
        Algorithm::Dt { max_depth } => Fitted::Tree(tree::fit_single(x, y, *max_depth, spec.seed)),
    })
}
