//! Descriptor forward selection and ensemble weight search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{oof_predictions, pool};
use super::metrics::{brier, Confusion};
use super::{ClassifierSpec, Matrix};
use crate::descriptors::DescriptorId;
use crate::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 0.001;
pub const DEFAULT_WEIGHT_STEP: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Single,
    Pair,
    Forward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub stage: Stage,
    pub descriptors: Vec<DescriptorId>,
    pub mcc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub selected: Vec<DescriptorId>,
    pub mcc: f64,
    pub trace: Vec<TraceEntry>,
}

impl FeatureSelection {
    pub fn trace_tsv(&self) -> String {
        let mut s = String::from("stage\tdescriptors\tmcc\n");
        for t in &self.trace {
            let names: Vec<&str> = t.descriptors.iter().map(|d| d.name()).collect();
            let stage = serde_json::to_value(t.stage).expect("stage serializes");
            s.push_str(&format!("{}\t{}\t{}\n", stage.as_str().unwrap_or(""), names.join(","), t.mcc));
        }
        s
    }
}

/// First entry with the highest MCC.
fn best_of(entries: &[TraceEntry]) -> Option<&TraceEntry> {
    entries.iter().fold(None, |b: Option<&TraceEntry>, e| match b {
        Some(b) if b.mcc >= e.mcc => Some(b),
        _ => Some(e),
    })
}

/// Score all single descriptors, then all pairs, then grow the best set
/// greedily while the CV MCC gain exceeds `epsilon`.
pub fn forward_select<B>(
    universe: &[DescriptorId],
    spec: &ClassifierSpec,
    build: B,
    y: &[bool],
    folds: &[usize],
    k: usize,
    epsilon: f64,
) -> Result<FeatureSelection>
where
    B: Fn(&[DescriptorId]) -> Result<Matrix> + Sync,
{
    if universe.is_empty() {
        return Err(Error::Config("descriptor universe is empty".into()));
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::Config("selection epsilon must be >= 0".into()));
    }
    let score = |set: &[DescriptorId], stage: Stage| -> Result<TraceEntry> {
        let x = build(set)?;
        let oof = oof_predictions(spec, &x, y, folds, k)?;
        let (_, report) = pool(&oof, y, folds, k);
        Ok(TraceEntry {
            stage,
            descriptors: set.to_vec(),
            mcc: report.mcc,
        })
    };
    let evaluate = |sets: Vec<Vec<DescriptorId>>, stage: Stage| -> Result<Vec<TraceEntry>> {
        sets.par_iter().map(|s| score(s, stage)).collect()
    };

    let singles = evaluate(universe.iter().map(|&d| vec![d]).collect(), Stage::Single)?;
    let mut pairs_sets = Vec::new();
    for i in 0..universe.len() {
        for j in i + 1..universe.len() {
            pairs_sets.push(vec![universe[i], universe[j]]);
        }
    }
    let pairs = evaluate(pairs_sets, Stage::Pair)?;
    let mut trace = singles.clone();
    trace.extend(pairs.iter().cloned());

    let seed_pool: Vec<TraceEntry> = singles.into_iter().chain(pairs).collect();
    let start = best_of(&seed_pool).expect("non-empty universe").clone();
    let mut selected = start.descriptors;
    let mut mcc = start.mcc;
    loop {
        let rest: Vec<Vec<DescriptorId>> = universe
            .iter()
            .filter(|d| !selected.contains(d))
            .map(|&d| {
                let mut s = selected.clone();
                s.push(d);
                s
            })
            .collect();
        if rest.is_empty() || !epsilon.is_finite() {
            break;
        }
        let round = evaluate(rest, Stage::Forward)?;
        let best = best_of(&round).expect("non-empty round").clone();
        trace.extend(round);
        if best.mcc - mcc > epsilon {
            selected = best.descriptors;
            mcc = best.mcc;
        } else {
            break;
        }
    }
    Ok(FeatureSelection { selected, mcc, trace })
}

/// All non-negative integer vectors of length `members` summing to `steps`,
/// in ascending lexicographic order.
pub fn simplex_grid(members: usize, steps: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(left - v, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if members > 0 {
        rec(steps, members, &mut Vec::new(), &mut out);
    }
    out
}

pub fn grid_steps(step: f64) -> Result<usize> {
    let steps = (1.0 / step).round();
    if !(step > 0.0) || steps < 1.0 || (steps * step - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("weight step {step} must divide 1 evenly")));
    }
    Ok(steps as usize)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSearch {
    pub weights: Vec<f64>,
    pub mcc: f64,
    pub brier: f64,
    pub evaluated: usize,
}

/// Weighted soft vote of member probabilities.
pub fn blend(member_probs: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = member_probs.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| member_probs.iter().zip(weights).map(|(p, w)| w * p[i]).sum())
        .collect()
}

/// Enumerate the weight simplex at `step` and keep the vector whose blended
/// out-of-fold probabilities give the highest pooled MCC; ties go to the
/// lower Brier score, then to the earlier vector in lexicographic order.
pub fn weight_grid_search(member_oof: &[Vec<f64>], y: &[bool], step: f64) -> Result<WeightSearch> {
    let m = member_oof.len();
    if !(2..=5).contains(&m) {
        return Err(Error::Config(format!("weight search needs 2 to 5 members, got {m}")));
    }
    let steps = grid_steps(step)?;
    let grid = simplex_grid(m, steps);
    let scored: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|g| {
            let w: Vec<f64> = g.iter().map(|&v| v as f64 / steps as f64).collect();
            let p = blend(member_oof, &w);
            (Confusion::from_probabilities(&p, y).report().mcc, brier(&p, y))
        })
        .collect();
    let mut best = 0;
    for (i, s) in scored.iter().enumerate() {
        let b = scored[best];
        if s.0 > b.0 || (s.0 == b.0 && s.1 < b.1) {
            best = i;
        }
    }
    Ok(WeightSearch {
        weights: grid[best].iter().map(|&v| v as f64 / steps as f64).collect(),
        mcc: scored[best].0,
        brier: scored[best].1,
        evaluated: grid.len(),
    })
}
