//! Dataset curation: length filtering, redundancy removal, class balancing,
//! train/test splitting and taste statistics.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{normalized_similarity, similarity_upper_bound, AlignParams};
use crate::rng;
use crate::seq::{residue_index, Peptide, Taste, TasteLabel, AMINO_ACIDS};
use crate::{Error, Result};

/// Sizes of the curated sets behind the published toxicity model, kept for
/// reference: toxic and non-toxic counts after filtering and redundancy
/// removal, and the per-class train/test sizes after the 9:1 split.
pub const REFERENCE_TOXIC: usize = 2821;
pub const REFERENCE_NON_TOXIC: usize = 4880;
pub const REFERENCE_TRAIN_PER_CLASS: usize = 2538;
pub const REFERENCE_TEST_PER_CLASS: usize = 283;

/// Maximum taste-peptide length kept for generation (15-mers and longer
/// are dropped).
pub const TASTE_MAX_LEN: usize = 14;
/// Maximum length kept for toxicity modelling.
pub const TOX_MAX_LEN: usize = 25;
pub const DEDUP_IDENTITY: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ToxLabel {
    Toxic,
    NonToxic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Record<L> {
    pub peptide: Peptide,
    pub label: L,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus<L> {
    records: Vec<Record<L>>,
}

impl<L: Clone + PartialEq> Corpus<L> {
    /// Build a corpus, dropping repeated (sequence, label) pairs; the first
    /// occurrence wins.
    pub fn new(records: Vec<Record<L>>) -> Self {
        let mut out: Vec<Record<L>> = Vec::with_capacity(records.len());
        let mut seen: HashMap<Peptide, Vec<usize>> = HashMap::new();
        for r in records {
            let slots = seen.entry(r.peptide.clone()).or_default();
            if slots.iter().any(|&i| out[i].label == r.label) {
                continue;
            }
            slots.push(out.len());
            out.push(r);
        }
        Corpus { records: out }
    }

    pub fn from_peptides(peptides: impl IntoIterator<Item = Peptide>, label: L, source: &str) -> Self {
        Corpus::new(
            peptides
                .into_iter()
                .map(|peptide| Record {
                    peptide,
                    label: label.clone(),
                    source: source.to_string(),
                })
                .collect(),
        )
    }

    pub fn records(&self) -> &[Record<L>] {
        &self.records
    }

    pub fn into_records(self) -> Vec<Record<L>> {
        self.records
    }

    pub fn peptides(&self) -> Vec<Peptide> {
        self.records.iter().map(|r| r.peptide.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl Corpus<TasteLabel> {
    /// Ingest taste records, merging every annotation reported for the same
    /// sequence into one label (see [`TasteLabel::merge`]).
    pub fn ingest_taste(records: Vec<(Peptide, TasteLabel)>, source: &str) -> Self {
        let mut order: Vec<Peptide> = Vec::new();
        let mut merged: HashMap<Peptide, TasteLabel> = HashMap::new();
        for (p, l) in records {
            match merged.get_mut(&p) {
                Some(existing) => *existing = existing.merge(&l),
                None => {
                    order.push(p.clone());
                    merged.insert(p, l);
                }
            }
        }
        Corpus {
            records: order
                .into_iter()
                .map(|p| {
                    let label = merged[&p];
                    Record {
                        peptide: p,
                        label,
                        source: source.to_string(),
                    }
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Filtered<L> {
    pub corpus: Corpus<L>,
    pub removed: usize,
}

/// Keep records of length `<= max_len`.
pub fn length_filter<L: Clone + PartialEq>(c: &Corpus<L>, max_len: usize) -> Result<Filtered<L>> {
    if max_len < 2 {
        return Err(Error::Config(format!("length filter maximum {max_len} is below 2")));
    }
    let kept: Vec<Record<L>> = c.records.iter().filter(|r| r.peptide.len() <= max_len).cloned().collect();
    let removed = c.len() - kept.len();
    if kept.is_empty() && !c.is_empty() {
        log::warn!("length filter at {max_len} removed every record");
    }
    Ok(Filtered {
        corpus: Corpus { records: kept },
        removed,
    })
}

/// Greedy longest-first redundancy removal.
///
/// Records are visited by length descending, then lexicographically; a
/// record is kept iff its normalized similarity to every record kept so far
/// is below `threshold`.
pub fn dedup_greedy<L: Clone + PartialEq + Send + Sync>(
    c: &Corpus<L>,
    threshold: f64,
    params: &AlignParams,
) -> Result<Filtered<L>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Config(format!("identity threshold {threshold} must lie in (0, 1]")));
    }
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&c.records[a].peptide, &c.records[b].peptide);
        pb.len().cmp(&pa.len()).then_with(|| pa.cmp(pb)).then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let cand = c.records[i].peptide.residues();
        let redundant = kept.par_iter().any(|&k| {
            let other = c.records[k].peptide.residues();
            similarity_upper_bound(cand.len(), other.len()) >= threshold
                && normalized_similarity(cand, other, params) >= threshold
        });
        if !redundant {
            kept.push(i);
        }
    }
    let records: Vec<Record<L>> = kept.iter().map(|&i| c.records[i].clone()).collect();
    Ok(Filtered {
        removed: c.len() - records.len(),
        corpus: Corpus { records },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub balanced: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.9,
            seed: 0,
            balanced: true,
        }
    }
}

/// `floor(n * fraction)`, robust to representation error in the product.
pub fn train_count(n: usize, fraction: f64) -> usize {
    ((n as f64) * fraction + 1e-9).floor() as usize
}

#[derive(Clone, Debug)]
pub struct Split<L> {
    pub train_pos: Corpus<L>,
    pub train_neg: Corpus<L>,
    pub test_pos: Corpus<L>,
    pub test_neg: Corpus<L>,
}

/// Down-sample negatives to the positive count (when balanced) and split
/// each class into train/test.
pub fn balance_and_split<L: Clone + PartialEq>(pos: &Corpus<L>, neg: &Corpus<L>, spec: &SplitSpec) -> Result<Split<L>> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Config(format!("train fraction {} must lie in (0, 1)", spec.train_fraction)));
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Data("both classes must be non-empty".into()));
    }
    let mut neg_idx: Vec<usize> = (0..neg.len()).collect();
    if spec.balanced {
        if neg.len() < pos.len() {
            return Err(Error::Data(format!(
                "cannot balance: {} negatives for {} positives",
                neg.len(),
                pos.len()
            )));
        }
        neg_idx.shuffle(&mut rng::stream(spec.seed, 0));
        neg_idx.truncate(pos.len());
        neg_idx.sort_unstable();
    }
    let split_class = |c: &Corpus<L>, idx: Vec<usize>, stream: u64| {
        let mut idx = idx;
        idx.shuffle(&mut rng::stream(spec.seed, stream));
        let n_train = train_count(idx.len(), spec.train_fraction);
        let pick = |ids: &[usize]| Corpus {
            records: ids.iter().map(|&i| c.records[i].clone()).collect(),
        };
        (pick(&idx[..n_train]), pick(&idx[n_train..]))
    };
    let (train_pos, test_pos) = split_class(pos, (0..pos.len()).collect(), 1);
    let (train_neg, test_neg) = split_class(neg, neg_idx, 2);
    Ok(Split {
        train_pos,
        train_neg,
        test_pos,
        test_neg,
    })
}

/// Taste statistics of a corpus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Census {
    pub records: usize,
    /// Number of peptides with exactly k confirmed tastes, k = 1..=5.
    pub multiplicity: BTreeMap<usize, usize>,
    /// Counts per exact combination of confirmed tastes, e.g. `sour-umami`.
    pub combinations: BTreeMap<String, usize>,
    /// Peptides confirmed for each taste, in slot order.
    pub per_taste: [usize; 5],
    /// Residue frequencies within each taste's peptides, in slot order;
    /// rows follow the canonical residue order.
    pub composition: [[f64; 20]; 5],
}

pub fn taste_census(c: &Corpus<TasteLabel>) -> Census {
    let mut multiplicity = BTreeMap::new();
    let mut combinations = BTreeMap::new();
    let mut per_taste = [0usize; 5];
    let mut residue_counts = [[0usize; 20]; 5];
    for r in &c.records {
        let present: Vec<Taste> = r.label.present().collect();
        if present.is_empty() {
            continue;
        }
        *multiplicity.entry(present.len()).or_insert(0) += 1;
        let key = present.iter().map(|t| t.name()).collect::<Vec<_>>().join("-");
        *combinations.entry(key).or_insert(0) += 1;
        for t in present {
            per_taste[t as usize] += 1;
            for idx in r.peptide.indices() {
                residue_counts[t as usize][idx] += 1;
            }
        }
    }
    let mut composition = [[0.0; 20]; 5];
    for (row, counts) in composition.iter_mut().zip(residue_counts) {
        let total: usize = counts.iter().sum();
        if total > 0 {
            for (v, n) in row.iter_mut().zip(counts) {
                *v = n as f64 / total as f64;
            }
        }
    }
    Census {
        records: c.len(),
        multiplicity,
        combinations,
        per_taste,
        composition,
    }
}

impl Census {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("section\tkey\tvalue\n");
        for (k, v) in &self.multiplicity {
            s.push_str(&format!("multiplicity\t{k}\t{v}\n"));
        }
        for (k, v) in &self.combinations {
            s.push_str(&format!("combination\t{k}\t{v}\n"));
        }
        for t in Taste::ALL {
            s.push_str(&format!("taste_total\t{}\t{}\n", t.name(), self.per_taste[t as usize]));
        }
        for t in Taste::ALL {
            for (i, aa) in AMINO_ACIDS.iter().enumerate() {
                s.push_str(&format!(
                    "composition\t{}:{}\t{}\n",
                    t.name(),
                    *aa as char,
                    self.composition[t as usize][i]
                ));
            }
        }
        s
    }

    pub fn summary(&self) -> String {
        let labelled: usize = self.multiplicity.values().sum();
        let mut s = format!("{} records, {} with at least one confirmed taste\n", self.records, labelled);
        for (k, v) in &self.multiplicity {
            s.push_str(&format!("  {k} taste(s): {v}\n"));
        }
        for t in Taste::ALL {
            s.push_str(&format!("  {}: {}\n", t.name(), self.per_taste[t as usize]));
        }
        s
    }
}

/// Residue index lookup for callers that only hold raw bytes.
pub fn composition_of(seq: &[u8]) -> [f64; 20] {
    let mut out = [0.0; 20];
    for &b in seq {
        if let Some(i) = residue_index(b) {
            out[i] += 1.0;
        }
    }
    let n = seq.len().max(1) as f64;
    out.iter_mut().for_each(|v| *v /= n);
    out
}
