//! Fixed-width sequence descriptors for peptide classification, and the
//! z-score normalizer applied on top of them.
//!
//! Conventions follow the iFeature family of encoders: composition
//! descriptors are frequencies, positional descriptors are laid out over a
//! fixed `pad_len` with zero rows past the sequence end.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seq::{Peptide, AMINO_ACIDS};
use crate::tables::{BLOSUM62, CTD_PARTITIONS, CTRIAD_CLASS, SCALES, ZSCALES};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DescriptorId {
    #[serde(rename = "AAC")]
    Aac,
    #[serde(rename = "DPC")]
    Dpc,
    #[serde(rename = "TPC")]
    Tpc,
    #[serde(rename = "GAAC")]
    Gaac,
    #[serde(rename = "GDPC")]
    Gdpc,
    #[serde(rename = "GTPC")]
    Gtpc,
    #[serde(rename = "CTDC")]
    Ctdc,
    #[serde(rename = "CTDT")]
    Ctdt,
    #[serde(rename = "CTDD")]
    Ctdd,
    #[serde(rename = "CTriad")]
    CTriad,
    #[serde(rename = "EAAC")]
    Eaac,
    #[serde(rename = "EGAAC")]
    Egaac,
    #[serde(rename = "CKSAAP")]
    Cksaap,
    #[serde(rename = "CKSAAGP")]
    Cksaagp,
    #[serde(rename = "Binary")]
    Binary,
    #[serde(rename = "BLOSUM62")]
    Blosum62,
    #[serde(rename = "DDE")]
    Dde,
    #[serde(rename = "PAAC")]
    Paac,
    #[serde(rename = "APAAC")]
    Apaac,
    #[serde(rename = "Zscale")]
    Zscale,
}

use DescriptorId::*;

impl DescriptorId {
    pub const ALL: [DescriptorId; 20] = [
        Aac, Dpc, Tpc, Gaac, Gdpc, Gtpc, Ctdc, Ctdt, Ctdd, CTriad, Eaac, Egaac, Cksaap, Cksaagp, Binary, Blosum62, Dde,
        Paac, Apaac, Zscale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Aac => "AAC",
            Dpc => "DPC",
            Tpc => "TPC",
            Gaac => "GAAC",
            Gdpc => "GDPC",
            Gtpc => "GTPC",
            Ctdc => "CTDC",
            Ctdt => "CTDT",
            Ctdd => "CTDD",
            CTriad => "CTriad",
            Eaac => "EAAC",
            Egaac => "EGAAC",
            Cksaap => "CKSAAP",
            Cksaagp => "CKSAAGP",
            Binary => "Binary",
            Blosum62 => "BLOSUM62",
            Dde => "DDE",
            Paac => "PAAC",
            Apaac => "APAAC",
            Zscale => "Zscale",
        }
    }

    /// Frequency descriptors whose entries sum to one.
    pub fn is_composition(self) -> bool {
        matches!(self, Aac | Dpc | Tpc | Gaac | Gdpc | Gtpc)
    }

    pub fn dim(self, c: &DescriptorConfig) -> usize {
        let windows = c.pad_len.saturating_sub(c.window) + 1;
        let gaps = c.k_max + 1;
        match self {
            Aac => 20,
            Dpc => 400,
            Tpc => 8000,
            Gaac => 5,
            Gdpc => 25,
            Gtpc => 125,
            Ctdc => 3 * CTD_PARTITIONS.len(),
            Ctdt => 3 * CTD_PARTITIONS.len(),
            Ctdd => 15 * CTD_PARTITIONS.len(),
            CTriad => 343,
            Eaac => windows * 20,
            Egaac => windows * 5,
            Cksaap => gaps * 400,
            Cksaagp => gaps * 25,
            Binary => c.pad_len * 20,
            Blosum62 => c.pad_len * 20,
            Dde => 400,
            Paac => 20 + c.lambda,
            Apaac => 20 + 2 * c.lambda,
            Zscale => c.pad_len * 5,
        }
    }
}

impl fmt::Display for DescriptorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DescriptorId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DescriptorId::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown descriptor {s:?}")))
    }
}

/// Parse a comma-separated descriptor list.
pub fn parse_descriptor_list(s: &str) -> Result<Vec<DescriptorId>> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptorConfig {
    pub pad_len: usize,
    pub window: usize,
    pub k_max: usize,
    pub lambda: usize,
    pub weight: f64,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        DescriptorConfig {
            pad_len: 25,
            window: 5,
            k_max: 3,
            lambda: 1,
            weight: 0.05,
        }
    }
}

impl DescriptorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pad_len == 0 || self.window == 0 || self.window > self.pad_len || self.lambda == 0 {
            return Err(Error::Config(
                "descriptor config needs pad_len >= window >= 1 and lambda >= 1".into(),
            ));
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(Error::Config("descriptor weight must be positive".into()));
        }
        Ok(())
    }
}

/// Dimensions of all 20 descriptors under `config`.
pub fn descriptor_dims(config: &DescriptorConfig) -> Vec<(DescriptorId, usize)> {
    DescriptorId::ALL.iter().map(|&d| (d, d.dim(config))).collect()
}

/// Residue groups used by the grouped descriptors: aliphatic, aromatic,
/// positive, negative, uncharged.
pub const GROUPS: [&str; 5] = ["GAVLMI", "FYW", "KRH", "DE", "STCPNQ"];
pub const GROUP_NAMES: [&str; 5] = ["aliphatic", "aromatic", "positive", "negative", "uncharged"];

fn group_of(aa: usize) -> usize {
    let b = AMINO_ACIDS[aa];
    GROUPS.iter().position(|g| g.as_bytes().contains(&b)).expect("every residue is grouped")
}

const CTDD_CUTS: [&str; 5] = ["first", "q25", "q50", "q75", "last"];

fn precondition(id: DescriptorId, msg: String) -> Error {
    Error::Descriptor {
        descriptor: id.name(),
        msg,
    }
}

/// Check the length constraints of `id` for a sequence of length `len`.
pub fn check(id: DescriptorId, len: usize, c: &DescriptorConfig) -> Result<()> {
    match id {
        Binary | Blosum62 | Zscale | Eaac | Egaac if len > c.pad_len => Err(precondition(
            id,
            format!("sequence length {len} exceeds pad length {}", c.pad_len),
        )),
        Paac | Apaac if len <= c.lambda => Err(precondition(
            id,
            format!("sequence length {len} must exceed lambda {}", c.lambda),
        )),
        Tpc | Gtpc | CTriad if len < 3 => Err(precondition(id, format!("sequence length {len} is below 3"))),
        _ => Ok(()),
    }
}

fn counts_k(idx: &[usize], k: usize, base: usize, map: impl Fn(usize) -> usize) -> (Vec<f64>, usize) {
    let mut out = vec![0.0; base.pow(k as u32)];
    let n = idx.len().saturating_sub(k - 1);
    for w in idx.windows(k) {
        let code = w.iter().fold(0, |acc, &a| acc * base + map(a));
        out[code] += 1.0;
    }
    (out, n)
}

fn normalized(mut v: Vec<f64>, n: usize) -> Vec<f64> {
    if n > 0 {
        v.iter_mut().for_each(|x| *x /= n as f64);
    }
    v
}

/// Standardized property scales (population standard deviation).
fn standardized(scale: &[f64; 20]) -> [f64; 20] {
    let mean = scale.iter().sum::<f64>() / 20.0;
    let sd = (scale.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 20.0).sqrt();
    let mut out = [0.0; 20];
    for (o, v) in out.iter_mut().zip(scale) {
        *o = (v - mean) / sd;
    }
    out
}

pub fn encode(id: DescriptorId, p: &Peptide, c: &DescriptorConfig) -> Result<Vec<f64>> {
    let idx: Vec<usize> = p.indices().collect();
    let len = idx.len();
    check(id, len, c)?;
    let v = match id {
        Aac => normalized(counts_k(&idx, 1, 20, |a| a).0, len),
        Dpc => {
            let (v, n) = counts_k(&idx, 2, 20, |a| a);
            normalized(v, n)
        }
        Tpc => {
            let (v, n) = counts_k(&idx, 3, 20, |a| a);
            normalized(v, n)
        }
        Gaac => normalized(counts_k(&idx, 1, 5, group_of).0, len),
        Gdpc => {
            let (v, n) = counts_k(&idx, 2, 5, group_of);
            normalized(v, n)
        }
        Gtpc => {
            let (v, n) = counts_k(&idx, 3, 5, group_of);
            normalized(v, n)
        }
        Ctdc => {
            let mut out = Vec::with_capacity(id.dim(c));
            for part in CTD_PARTITIONS.iter() {
                let mut cnt = [0.0; 3];
                for &a in &idx {
                    cnt[part.class_of[a]] += 1.0;
                }
                out.extend(cnt.iter().map(|x| x / len as f64));
            }
            out
        }
        Ctdt => {
            let mut out = Vec::with_capacity(id.dim(c));
            for part in CTD_PARTITIONS.iter() {
                let mut t = [0.0; 3];
                for w in idx.windows(2) {
                    let (x, y) = (part.class_of[w[0]], part.class_of[w[1]]);
                    match (x.min(y), x.max(y)) {
                        (0, 1) => t[0] += 1.0,
                        (0, 2) => t[1] += 1.0,
                        (1, 2) => t[2] += 1.0,
                        _ => {}
                    }
                }
                out.extend(t.iter().map(|x| x / (len - 1) as f64));
            }
            out
        }
        Ctdd => {
            let mut out = Vec::with_capacity(id.dim(c));
            for part in CTD_PARTITIONS.iter() {
                for class in 0..3 {
                    let pos: Vec<usize> = (0..len).filter(|&i| part.class_of[idx[i]] == class).collect();
                    let n = pos.len();
                    let cutoffs = [1, n / 4, n / 2, 3 * n / 4, n];
                    for cut in cutoffs {
                        out.push(if n == 0 {
                            0.0
                        } else {
                            (pos[cut.max(1) - 1] + 1) as f64 / len as f64 * 100.0
                        });
                    }
                }
            }
            out
        }
        CTriad => {
            let (counts, _) = counts_k(&idx, 3, 7, |a| CTRIAD_CLASS[a]);
            let min = counts.iter().copied().fold(f64::INFINITY, f64::min);
            let max = counts.iter().copied().fold(0.0, f64::max);
            counts.iter().map(|x| (x - min) / max).collect()
        }
        Eaac | Egaac => {
            let (base, map): (usize, fn(usize) -> usize) = if id == Eaac { (20, |a| a) } else { (5, group_of) };
            let windows = c.pad_len - c.window + 1;
            let mut out = vec![0.0; windows * base];
            for w in 0..windows {
                let lo = w.min(len);
                let hi = (w + c.window).min(len);
                let present = hi - lo;
                for &a in &idx[lo..hi] {
                    out[w * base + map(a)] += 1.0 / present as f64;
                }
            }
            out
        }
        Cksaap | Cksaagp => {
            let (base, map): (usize, fn(usize) -> usize) = if id == Cksaap { (20, |a| a) } else { (5, group_of) };
            let mut out = vec![0.0; (c.k_max + 1) * base * base];
            for gap in 0..=c.k_max {
                let pairs = len.saturating_sub(gap + 1);
                for i in 0..pairs {
                    let code = map(idx[i]) * base + map(idx[i + gap + 1]);
                    out[gap * base * base + code] += 1.0 / pairs as f64;
                }
            }
            out
        }
        Binary => {
            let mut out = vec![0.0; c.pad_len * 20];
            for (i, &a) in idx.iter().enumerate() {
                out[i * 20 + a] = 1.0;
            }
            out
        }
        Blosum62 => {
            let mut out = vec![0.0; c.pad_len * 20];
            for (i, &a) in idx.iter().enumerate() {
                out[i * 20..(i + 1) * 20].copy_from_slice(&BLOSUM62.rows[a]);
            }
            out
        }
        Zscale => {
            let mut out = vec![0.0; c.pad_len * 5];
            for (i, &a) in idx.iter().enumerate() {
                out[i * 5..(i + 1) * 5].copy_from_slice(&ZSCALES[a]);
            }
            out
        }
        Dde => {
            let (dc, n) = counts_k(&idx, 2, 20, |a| a);
            let codons = &SCALES.codons;
            let mut out = Vec::with_capacity(400);
            for i in 0..20 {
                for j in 0..20 {
                    let tm = (codons[i] / 61.0) * (codons[j] / 61.0);
                    let tv = tm * (1.0 - tm) / n as f64;
                    out.push((dc[i * 20 + j] / n as f64 - tm) / tv.sqrt());
                }
            }
            out
        }
        Paac => {
            let props = [
                standardized(&SCALES.eisenberg),
                standardized(&SCALES.hopp_woods),
                standardized(&SCALES.side_chain_mass),
            ];
            let theta: Vec<f64> = (1..=c.lambda)
                .map(|n| {
                    let s: f64 = (0..len - n)
                        .map(|j| props.iter().map(|p| (p[idx[j]] - p[idx[j + n]]).powi(2)).sum::<f64>() / 3.0)
                        .sum();
                    s / (len - n) as f64
                })
                .collect();
            pseudo_composition(&idx, &theta, c.weight)
        }
        Apaac => {
            let props = [standardized(&SCALES.eisenberg), standardized(&SCALES.hopp_woods)];
            let mut tau = Vec::with_capacity(2 * c.lambda);
            for n in 1..=c.lambda {
                for p in &props {
                    let s: f64 = (0..len - n).map(|j| p[idx[j]] * p[idx[j + n]]).sum();
                    tau.push(s / (len - n) as f64);
                }
            }
            pseudo_composition(&idx, &tau, c.weight)
        }
    };
    debug_assert_eq!(v.len(), id.dim(c));
    Ok(v)
}

/// Residue frequencies followed by weighted correlation factors, jointly
/// normalized by `1 + w * sum(factors)`.
fn pseudo_composition(idx: &[usize], factors: &[f64], w: f64) -> Vec<f64> {
    let denom = 1.0 + w * factors.iter().sum::<f64>();
    let mut out = normalized(counts_k(idx, 1, 20, |a| a).0, idx.len());
    out.iter_mut().for_each(|x| *x /= denom);
    out.extend(factors.iter().map(|f| w * f / denom));
    out
}

fn aa_char(i: usize) -> char {
    AMINO_ACIDS[i] as char
}

/// Column names of `id`, prefixed with the descriptor name.
pub fn column_names(id: DescriptorId, c: &DescriptorConfig) -> Vec<String> {
    let n = id.name();
    let g = |i: usize| format!("g{}", i + 1);
    let pairs = |base: usize, f: &dyn Fn(usize) -> String| -> Vec<String> {
        (0..base * base).map(|k| format!("{}{}", f(k / base), f(k % base))).collect()
    };
    let aa = |i: usize| aa_char(i).to_string();
    let names: Vec<String> = match id {
        Aac => (0..20).map(aa).collect(),
        Dpc | Dde => pairs(20, &aa),
        Tpc => (0..8000)
            .map(|k| format!("{}{}{}", aa_char(k / 400), aa_char(k / 20 % 20), aa_char(k % 20)))
            .collect(),
        Gaac => (0..5).map(g).collect(),
        Gdpc => pairs(5, &g),
        Gtpc => (0..125).map(|k| format!("{}{}{}", g(k / 25), g(k / 5 % 5), g(k % 5))).collect(),
        Ctdc => CTD_PARTITIONS
            .iter()
            .flat_map(|p| (1..=3).map(move |k| format!("{}.c{k}", p.name)))
            .collect(),
        Ctdt => CTD_PARTITIONS
            .iter()
            .flat_map(|p| ["c12", "c13", "c23"].map(|t| format!("{}.{t}", p.name)))
            .collect(),
        Ctdd => CTD_PARTITIONS
            .iter()
            .flat_map(|p| {
                (1..=3).flat_map(move |k| CTDD_CUTS.iter().map(move |cut| format!("{}.c{k}.{cut}", p.name)))
            })
            .collect(),
        CTriad => (0..343).map(|k| format!("{}{}{}", k / 49 + 1, k / 7 % 7 + 1, k % 7 + 1)).collect(),
        Eaac => (0..c.pad_len - c.window + 1)
            .flat_map(|w| (0..20).map(move |a| format!("w{}.{}", w + 1, aa_char(a))))
            .collect(),
        Egaac => (0..c.pad_len - c.window + 1)
            .flat_map(|w| (0..5).map(move |k| format!("w{}.g{}", w + 1, k + 1)))
            .collect(),
        Cksaap => (0..=c.k_max)
            .flat_map(|gap| pairs(20, &aa).into_iter().map(move |p| format!("k{gap}.{p}")))
            .collect(),
        Cksaagp => (0..=c.k_max)
            .flat_map(|gap| pairs(5, &g).into_iter().map(move |p| format!("k{gap}.{p}")))
            .collect(),
        Binary => (0..c.pad_len)
            .flat_map(|i| (0..20).map(move |a| format!("p{}.{}", i + 1, aa_char(a))))
            .collect(),
        Blosum62 => (0..c.pad_len)
            .flat_map(|i| BLOSUM62.order.iter().map(move |&b| format!("p{}.{}", i + 1, b as char)))
            .collect(),
        Paac => (0..20)
            .map(aa)
            .chain((1..=c.lambda).map(|l| format!("lambda{l}")))
            .collect(),
        Apaac => (0..20)
            .map(aa)
            .chain(
                (1..=c.lambda)
                    .flat_map(|l| ["hydrophobicity", "hydrophilicity"].map(|p| format!("{p}.lambda{l}"))),
            )
            .collect(),
        Zscale => (0..c.pad_len)
            .flat_map(|i| (1..=5).map(move |z| format!("p{}.z{z}", i + 1)))
            .collect(),
    };
    names.into_iter().map(|s| format!("{n}.{s}")).collect()
}

/// Concatenated descriptor vector for one peptide.
pub fn encode_concat(ids: &[DescriptorId], p: &Peptide, c: &DescriptorConfig) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ids.iter().map(|d| d.dim(c)).sum());
    for &id in ids {
        out.extend(encode(id, p, c)?);
    }
    Ok(out)
}

fn validate_ids(ids: &[DescriptorId]) -> Result<()> {
    if ids.is_empty() {
        return Err(Error::Config("descriptor list is empty".into()));
    }
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::Config(format!("descriptor {id} listed twice")));
        }
    }
    Ok(())
}

/// Raw (unnormalized) rows, encoded in parallel and kept in input order.
pub fn encode_rows(ids: &[DescriptorId], peptides: &[Peptide], c: &DescriptorConfig) -> Result<Vec<Vec<f64>>> {
    validate_ids(ids)?;
    peptides
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            encode_concat(ids, p, c).map_err(|e| match e {
                Error::Descriptor { descriptor, msg } => Error::Descriptor {
                    descriptor,
                    msg: format!("peptide {} ({p}): {msg}", i + 1),
                },
                other => other,
            })
        })
        .collect()
}

/// Per-column z-score statistics (population standard deviation);
/// zero-variance columns get unit scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Normalizer {
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Normalizer> {
        let Some(first) = rows.first() else {
            return Err(Error::Data("cannot fit a normalizer on zero rows".into()));
        };
        let d = first.as_ref().len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            mean.iter_mut().zip(r.as_ref()).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            var.iter_mut()
                .zip(r.as_ref())
                .zip(&mean)
                .for_each(|((v, x), m)| *v += (x - m) * (x - m));
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let sd = (v / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Normalizer { mean, scale })
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<DescriptorId>,
    pub columns: Vec<String>,
    /// Normalized rows, one per input peptide.
    pub rows: Vec<Vec<f64>>,
    pub normalizer: Normalizer,
}

/// Encode `peptides` with `ids` (in order), fit z-score statistics on
/// `fit_rows` only, and normalize every row.
pub fn encode_set(
    ids: &[DescriptorId],
    peptides: &[Peptide],
    fit_rows: &[usize],
    c: &DescriptorConfig,
) -> Result<FeatureMatrix> {
    c.validate()?;
    let raw = encode_rows(ids, peptides, c)?;
    if let Some(&bad) = fit_rows.iter().find(|&&i| i >= raw.len()) {
        return Err(Error::Config(format!("fit row {bad} out of range")));
    }
    let fit: Vec<&[f64]> = fit_rows.iter().map(|&i| raw[i].as_slice()).collect();
    let normalizer = Normalizer::fit(&fit)?;
    Ok(FeatureMatrix {
        ids: ids.to_vec(),
        columns: ids.iter().flat_map(|&d| column_names(d, c)).collect(),
        rows: normalizer.transform_all(&raw),
        normalizer,
    })
}

/// TSV with a `sequence` column followed by one column per feature.
pub fn features_tsv(columns: &[String], peptides: &[Peptide], rows: &[Vec<f64>]) -> String {
    let mut s = String::from("sequence");
    for c in columns {
        s.push('\t');
        s.push_str(c);
    }
    s.push('\n');
    for (p, r) in peptides.iter().zip(rows) {
        s.push_str(p.as_str());
        for v in r {
            s.push('\t');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}
