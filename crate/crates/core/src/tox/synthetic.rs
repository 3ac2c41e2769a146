//! Synthetic datasets with a known linear separator, for benchmarks and
//! tests.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::Matrix;
use crate::rng::stream;
use crate::seq::Peptide;

/// Residues that mark a synthetic peptide as toxic.
pub const MARKER_RESIDUES: &[u8] = b"CKRWH";
const OTHER_RESIDUES: &[u8] = b"ADEFGILMNPQSTVY";
pub const TOXIC_MIN_MARKER_FRACTION: f64 = 0.5;
pub const NONTOXIC_MAX_MARKER_FRACTION: f64 = 0.2;

/// `n` points (half per class) in `d` dimensions, uniform in [-2, 2]^d,
/// labelled by the sign of `w . x` for a random unit `w`; points with
/// `|w . x| < margin / 2` are rejected, leaving a gap of width `margin`.
pub fn linear_dataset(n: usize, d: usize, margin: f64, seed: u64) -> (Matrix, Vec<bool>) {
    let mut rng = stream(seed, 0);
    let mut w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter_mut().for_each(|v| *v /= norm);
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    while pos.len() < n / 2 || neg.len() < n - n / 2 {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let s: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        if s.abs() < margin / 2.0 {
            continue;
        }
        if s > 0.0 && pos.len() < n / 2 {
            pos.push(x);
        } else if s < 0.0 && neg.len() < n - n / 2 {
            neg.push(x);
        }
    }
    // interleave so any prefix is roughly balanced
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n.div_ceil(2) {
        if let Some(p) = pos.get(i) {
            rows.push(p.clone());
            y.push(true);
        }
        if let Some(q) = neg.get(i) {
            rows.push(q.clone());
            y.push(false);
        }
    }
    (Matrix::from_rows(&rows).expect("rectangular"), y)
}

fn synth_peptide(rng: &mut impl Rng, toxic: bool) -> String {
    let len = rng.gen_range(10..=20usize);
    let markers = if toxic {
        let lo = (len as f64 * TOXIC_MIN_MARKER_FRACTION).ceil() as usize;
        rng.gen_range(lo..=len)
    } else {
        let hi = (len as f64 * NONTOXIC_MAX_MARKER_FRACTION).floor() as usize;
        rng.gen_range(0..=hi)
    };
    let mut s: Vec<u8> = (0..len)
        .map(|i| {
            let pool = if i < markers { MARKER_RESIDUES } else { OTHER_RESIDUES };
            pool[rng.gen_range(0..pool.len())]
        })
        .collect();
    s.shuffle(rng);
    String::from_utf8(s).expect("ascii")
}

/// Distinct toxic and non-toxic peptides that are linearly separable in
/// amino acid composition: toxic peptides have at least half of their
/// residues in [`MARKER_RESIDUES`], non-toxic ones at most a fifth.
pub fn separable_peptides(n_per_class: usize, seed: u64) -> (Vec<Peptide>, Vec<Peptide>) {
    let mut seen = HashSet::new();
    let mut make = |toxic: bool, stream_id: u64| {
        let mut rng = stream(seed, stream_id);
        let mut out = Vec::with_capacity(n_per_class);
        while out.len() < n_per_class {
            let s = synth_peptide(&mut rng, toxic);
            if seen.insert(s.clone()) {
                out.push(Peptide::new(&s).expect("valid residues"));
            }
        }
        out
    };
    let toxic = make(true, 1);
    let non_toxic = make(false, 2);
    (toxic, non_toxic)
}

pub fn marker_fraction(p: &Peptide) -> f64 {
    p.residues().iter().filter(|b| MARKER_RESIDUES.contains(b)).count() as f64 / p.len() as f64
}
