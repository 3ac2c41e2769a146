//! Affine-gap global alignment, normalized similarity and similarity-graph
//! clustering.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seq::Peptide;
use crate::{Error, Result};

/// Flat match/mismatch scoring with affine gaps. A gap of length `g`
/// costs `gap_open + (g - 1) * gap_extend`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignParams {
    pub match_score: f64,
    pub mismatch: f64,
    pub gap_open: f64,
    pub gap_extend: f64,
}

impl Default for AlignParams {
    fn default() -> Self {
        AlignParams {
            match_score: 2.0,
            mismatch: -1.0,
            gap_open: -0.5,
            gap_extend: -0.1,
        }
    }
}

impl AlignParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.match_score > 0.0
            && self.mismatch < 0.0
            && self.gap_open <= 0.0
            && self.gap_extend <= 0.0
            && self.gap_extend.abs() <= self.gap_open.abs();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid alignment parameters {self:?}")))
        }
    }

    fn substitution(&self, a: u8, b: u8) -> f64 {
        if a == b {
            self.match_score
        } else {
            self.mismatch
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Alignment {
    pub score: f64,
    /// Both rows of the alignment, `-` for gaps.
    pub top: String,
    pub bottom: String,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum State {
    Match,
    /// `a[i]` against a gap.
    Delete,
    /// `b[j]` against a gap.
    Insert,
}

/// The three Gotoh matrices, `(n + 1) x (m + 1)` each.
struct Dp {
    cols: usize,
    m: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dp {
    fn fill(a: &[u8], b: &[u8], p: &AlignParams) -> Dp {
        let (n, mlen) = (a.len(), b.len());
        let cols = mlen + 1;
        let size = (n + 1) * cols;
        let ninf = f64::NEG_INFINITY;
        let mut m = vec![ninf; size];
        let mut x = vec![ninf; size];
        let mut y = vec![ninf; size];
        m[0] = 0.0;
        for i in 1..=n {
            x[i * cols] = p.gap_open + (i - 1) as f64 * p.gap_extend;
        }
        for j in 1..=mlen {
            y[j] = p.gap_open + (j - 1) as f64 * p.gap_extend;
        }
        for i in 1..=n {
            for j in 1..=mlen {
                let d = (i - 1) * cols + (j - 1);
                let up = (i - 1) * cols + j;
                let left = i * cols + (j - 1);
                let here = i * cols + j;
                m[here] = p.substitution(a[i - 1], b[j - 1]) + m[d].max(x[d]).max(y[d]);
                x[here] = (m[up] + p.gap_open).max(x[up] + p.gap_extend).max(y[up] + p.gap_open);
                y[here] = (m[left] + p.gap_open).max(y[left] + p.gap_extend).max(x[left] + p.gap_open);
            }
        }
        Dp { cols, m, x, y }
    }

    fn best_at(&self, idx: usize) -> (f64, State) {
        // tie preference: match > delete > insert
        let mut best = (self.m[idx], State::Match);
        if self.x[idx] > best.0 {
            best = (self.x[idx], State::Delete);
        }
        if self.y[idx] > best.0 {
            best = (self.y[idx], State::Insert);
        }
        best
    }
}

/// Optimal global alignment score (no traceback).
pub fn nw_score(a: &[u8], b: &[u8], params: &AlignParams) -> f64 {
    let dp = Dp::fill(a, b, params);
    dp.best_at(a.len() * dp.cols + b.len()).0
}

/// Optimal global alignment with deterministic traceback.
pub fn nw_align(a: &[u8], b: &[u8], params: &AlignParams) -> Alignment {
    let dp = Dp::fill(a, b, params);
    let (score, mut state) = dp.best_at(a.len() * dp.cols + b.len());
    let (mut i, mut j) = (a.len(), b.len());
    let (mut top, mut bottom) = (Vec::new(), Vec::new());
    let p = params;
    while i > 0 || j > 0 {
        let here = i * dp.cols + j;
        match state {
            State::Match => {
                let d = (i - 1) * dp.cols + (j - 1);
                let target = dp.m[here] - p.substitution(a[i - 1], b[j - 1]);
                top.push(a[i - 1]);
                bottom.push(b[j - 1]);
                state = pick(&[(dp.m[d], State::Match), (dp.x[d], State::Delete), (dp.y[d], State::Insert)], target);
                i -= 1;
                j -= 1;
            }
            State::Delete => {
                top.push(a[i - 1]);
                bottom.push(b'-');
                if i == 1 && j == 0 {
                    i -= 1;
                    continue;
                }
                let up = (i - 1) * dp.cols + j;
                let v = dp.x[here];
                state = pick(
                    &[
                        (dp.m[up] + p.gap_open, State::Match),
                        (dp.x[up] + p.gap_extend, State::Delete),
                        (dp.y[up] + p.gap_open, State::Insert),
                    ],
                    v,
                );
                i -= 1;
            }
            State::Insert => {
                top.push(b'-');
                bottom.push(b[j - 1]);
                if i == 0 && j == 1 {
                    j -= 1;
                    continue;
                }
                let left = i * dp.cols + (j - 1);
                let v = dp.y[here];
                state = pick(
                    &[
                        (dp.m[left] + p.gap_open, State::Match),
                        (dp.y[left] + p.gap_extend, State::Insert),
                        (dp.x[left] + p.gap_open, State::Delete),
                    ],
                    v,
                );
                j -= 1;
            }
        }
    }
    top.reverse();
    bottom.reverse();
    Alignment {
        score,
        top: String::from_utf8(top).expect("ascii"),
        bottom: String::from_utf8(bottom).expect("ascii"),
    }
}

/// First candidate (in preference order) whose value reproduces `target`.
fn pick(candidates: &[(f64, State)], target: f64) -> State {
    let tol = 1e-9 * target.abs().max(1.0);
    for &(v, s) in candidates {
        if v.is_finite() && (v - target).abs() <= tol {
            return s;
        }
    }
    candidates
        .iter()
        .copied()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|c| c.1)
        .expect("non-empty candidates")
}

/// `score(a, b) / max(score(a, a), score(b, b))`, clamped at 0.
pub fn normalized_similarity(a: &[u8], b: &[u8], params: &AlignParams) -> f64 {
    let self_score = params.match_score * a.len().max(b.len()) as f64;
    if self_score <= 0.0 {
        return 0.0;
    }
    (nw_score(a, b, params) / self_score).clamp(0.0, 1.0)
}

/// Cheap upper bound on [`normalized_similarity`]: every match column uses
/// one residue of each sequence.
pub fn similarity_upper_bound(len_a: usize, len_b: usize) -> f64 {
    let (lo, hi) = (len_a.min(len_b), len_a.max(len_b));
    if hi == 0 {
        return 1.0;
    }
    lo as f64 / hi as f64
}

/// Dense symmetric similarity matrix with unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    pub n: usize,
    pub values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn compute(peptides: &[Peptide], params: &AlignParams) -> SimilarityMatrix {
        let n = peptides.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            1.0
                        } else if j < i {
                            f64::NAN // filled from the mirrored entry
                        } else {
                            normalized_similarity(peptides[i].residues(), peptides[j].residues(), params)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                values[i * n + j] = rows[i][j];
                values[j * n + i] = rows[i][j];
            }
        }
        SimilarityMatrix { n, values }
    }

    pub fn from_values(n: usize, values: Vec<f64>) -> Result<SimilarityMatrix> {
        if values.len() != n * n {
            return Err(Error::Data(format!("similarity matrix needs {} values, got {}", n * n, values.len())));
        }
        Ok(SimilarityMatrix { n, values })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// Undirected graph with an edge wherever similarity reaches the threshold.
#[derive(Clone, Debug)]
pub struct SimilarityGraph {
    pub n: usize,
    pub threshold: f64,
    pub edges: Vec<(usize, usize, f64)>,
}

impl SimilarityGraph {
    pub fn build(sim: &SimilarityMatrix, threshold: f64) -> Result<SimilarityGraph> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::Config(format!("cluster threshold {threshold} must lie in (0, 1]")));
        }
        let mut edges = Vec::new();
        for i in 0..sim.n {
            for j in (i + 1)..sim.n {
                let w = sim.get(i, j);
                if w >= threshold {
                    edges.push((i, j, w));
                }
            }
        }
        Ok(SimilarityGraph {
            n: sim.n,
            threshold,
            edges,
        })
    }

    /// Connected components, each sorted ascending; components ordered by
    /// their smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.n];
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, _) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut out = Vec::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            label[start] = id;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if label[w] == usize::MAX {
                        label[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

pub fn build_components(sim: &SimilarityMatrix, threshold: f64) -> Result<Vec<Vec<usize>>> {
    Ok(SimilarityGraph::build(sim, threshold)?.components())
}

/// Per cluster, the member with the highest mean similarity to the other
/// members (lowest index on ties).
pub fn pick_representatives(clusters: &[Vec<usize>], sim: &SimilarityMatrix) -> Vec<usize> {
    clusters
        .iter()
        .map(|members| {
            if members.len() == 1 {
                return members[0];
            }
            let mut best = (members[0], f64::NEG_INFINITY);
            for &i in members {
                let total: f64 = members.iter().filter(|&&j| j != i).map(|&j| sim.get(i, j)).sum();
                let mean = total / (members.len() - 1) as f64;
                if mean > best.1 {
                    best = (i, mean);
                }
            }
            best.0
        })
        .collect()
}

/// Clustering result for a set of peptides.
#[derive(Clone, Debug)]
pub struct Clustering {
    pub clusters: Vec<Vec<usize>>,
    pub representatives: Vec<usize>,
}

impl Clustering {
    pub fn run(peptides: &[Peptide], params: &AlignParams, threshold: f64) -> Result<Clustering> {
        let sim = SimilarityMatrix::compute(peptides, params);
        let clusters = build_components(&sim, threshold)?;
        let representatives = pick_representatives(&clusters, &sim);
        Ok(Clustering {
            clusters,
            representatives,
        })
    }

    /// Cluster id of every input index.
    pub fn cluster_of(&self, n: usize) -> Vec<usize> {
        let mut out = vec![0; n];
        for (id, members) in self.clusters.iter().enumerate() {
            for &m in members {
                out[m] = id;
            }
        }
        out
    }

    /// `cluster_id<TAB>member<TAB>is_representative` rows.
    pub fn to_tsv(&self, peptides: &[Peptide]) -> String {
        let mut s = String::from("cluster_id\tmember\tis_representative\n");
        for (id, members) in self.clusters.iter().enumerate() {
            for &m in members {
                let rep = self.representatives[id] == m;
                s.push_str(&format!("{id}\t{}\t{rep}\n", peptides[m]));
            }
        }
        s
    }
}
