//! Constant tables bundled under `data/`.
//!
//! The files are plain TSV so they can be diffed and reviewed; they are
//! compiled in with `include_str!` and parsed once on first use.

use std::sync::LazyLock;

use crate::seq::residue_index;

pub const BLOSUM62_TSV: &str = include_str!("../data/blosum62.tsv");
pub const CTD_GROUPS_TSV: &str = include_str!("../data/ctd_groups.tsv");
pub const CTRIAD_TSV: &str = include_str!("../data/ctriad_classes.tsv");
pub const RESIDUE_SCALES_TSV: &str = include_str!("../data/residue_scales.tsv");
pub const ZSCALE_TSV: &str = include_str!("../data/zscale.tsv");
pub const PKA_TSV: &str = include_str!("../data/pka.tsv");
pub const INSTABILITY_TSV: &str = include_str!("../data/instability_diwv.tsv");

fn data_lines(text: &str) -> impl Iterator<Item = Vec<&str>> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').map(str::trim).collect())
}

fn aa(symbol: &str) -> usize {
    let b = symbol.as_bytes();
    assert_eq!(b.len(), 1, "bad residue symbol {symbol:?} in bundled table");
    residue_index(b[0]).unwrap_or_else(|| panic!("unknown residue {symbol:?} in bundled table"))
}

fn num(s: &str) -> f64 {
    s.parse()
        .unwrap_or_else(|_| panic!("bad number {s:?} in bundled table"))
}

/// Square residue-by-residue table, parsed from a header row of column
/// residues followed by one row per residue. Indexed by canonical order.
fn square_table(text: &str) -> [[f64; 20]; 20] {
    let mut rows = data_lines(text);
    let header = rows.next().expect("table header");
    let cols: Vec<usize> = header[1..].iter().map(|s| aa(s)).collect();
    let mut out = [[f64::NAN; 20]; 20];
    for row in rows {
        let r = aa(row[0]);
        for (c, v) in cols.iter().zip(&row[1..]) {
            out[r][*c] = num(v);
        }
    }
    assert!(out.iter().flatten().all(|v| v.is_finite()), "incomplete square table");
    out
}

/// BLOSUM62 in the published row/column order, plus that order.
pub struct Blosum62 {
    pub order: Vec<u8>,
    /// `rows[i]` is the published row for canonical residue `i`, columns in
    /// published order.
    pub rows: [[f64; 20]; 20],
}

pub static BLOSUM62: LazyLock<Blosum62> = LazyLock::new(|| {
    let mut lines = data_lines(BLOSUM62_TSV);
    let header = lines.next().expect("blosum header");
    let order: Vec<u8> = header[1..].iter().map(|s| s.as_bytes()[0]).collect();
    let mut rows = [[f64::NAN; 20]; 20];
    for row in lines {
        let r = aa(row[0]);
        for (c, v) in row[1..].iter().enumerate() {
            rows[r][c] = num(v);
        }
    }
    Blosum62 { order, rows }
});

/// A named three-way partition of the amino-acid alphabet.
pub struct Partition {
    pub name: String,
    /// Class (0..3) of each canonical residue.
    pub class_of: [usize; 20],
}

pub static CTD_PARTITIONS: LazyLock<Vec<Partition>> = LazyLock::new(|| {
    data_lines(CTD_GROUPS_TSV)
        .map(|row| {
            let mut class_of = [usize::MAX; 20];
            for (class, members) in row[1..4].iter().enumerate() {
                for b in members.bytes() {
                    class_of[residue_index(b).expect("ctd residue")] = class;
                }
            }
            assert!(class_of.iter().all(|&c| c < 3), "partition {} incomplete", row[0]);
            Partition {
                name: row[0].to_string(),
                class_of,
            }
        })
        .collect()
});

/// Conjoint-triad class (0..7) of each canonical residue.
pub static CTRIAD_CLASS: LazyLock<[usize; 20]> = LazyLock::new(|| {
    let mut class_of = [usize::MAX; 20];
    for row in data_lines(CTRIAD_TSV) {
        let class: usize = row[0].parse().expect("ctriad class");
        for b in row[1].bytes() {
            class_of[residue_index(b).expect("ctriad residue")] = class - 1;
        }
    }
    assert!(class_of.iter().all(|&c| c < 7));
    class_of
});

pub struct ResidueScales {
    pub codons: [f64; 20],
    pub kyte_doolittle: [f64; 20],
    pub eisenberg: [f64; 20],
    pub hopp_woods: [f64; 20],
    pub side_chain_mass: [f64; 20],
    pub residue_mass: [f64; 20],
    pub monoisotopic_mass: [f64; 20],
}

pub static SCALES: LazyLock<ResidueScales> = LazyLock::new(|| {
    let mut lines = data_lines(RESIDUE_SCALES_TSV);
    let header = lines.next().expect("scales header");
    let col = |name: &str| header.iter().position(|h| *h == name).expect("scale column");
    let idx = [
        col("codons"),
        col("kyte_doolittle"),
        col("eisenberg"),
        col("hopp_woods"),
        col("side_chain_mass"),
        col("residue_mass"),
        col("monoisotopic_mass"),
    ];
    let mut t = [[f64::NAN; 20]; 7];
    for row in lines {
        let r = aa(row[0]);
        for (k, &c) in idx.iter().enumerate() {
            t[k][r] = num(row[c]);
        }
    }
    assert!(t.iter().flatten().all(|v| v.is_finite()));
    ResidueScales {
        codons: t[0],
        kyte_doolittle: t[1],
        eisenberg: t[2],
        hopp_woods: t[3],
        side_chain_mass: t[4],
        residue_mass: t[5],
        monoisotopic_mass: t[6],
    }
});

pub static ZSCALES: LazyLock<[[f64; 5]; 20]> = LazyLock::new(|| {
    let mut out = [[f64::NAN; 5]; 20];
    for row in data_lines(ZSCALE_TSV).skip(1) {
        let r = aa(row[0]);
        for k in 0..5 {
            out[r][k] = num(row[k + 1]);
        }
    }
    assert!(out.iter().flatten().all(|v| v.is_finite()));
    out
});

/// One ionizable group: pKa and charge sign (+1 basic, -1 acidic).
#[derive(Debug, Clone, Copy)]
pub struct Ionizable {
    pub pka: f64,
    pub sign: f64,
}

pub struct PkaTable {
    pub n_term: Ionizable,
    pub c_term: Ionizable,
    /// Side-chain group for each canonical residue, if ionizable.
    pub side_chain: [Option<Ionizable>; 20],
}

pub static PKA: LazyLock<PkaTable> = LazyLock::new(|| {
    let mut n_term = None;
    let mut c_term = None;
    let mut side_chain = [None; 20];
    for row in data_lines(PKA_TSV) {
        let group = Ionizable {
            pka: num(row[1]),
            sign: num(row[2]),
        };
        match row[0] {
            "N_TERM" => n_term = Some(group),
            "C_TERM" => c_term = Some(group),
            r => side_chain[aa(r)] = Some(group),
        }
    }
    PkaTable {
        n_term: n_term.expect("N_TERM pKa"),
        c_term: c_term.expect("C_TERM pKa"),
        side_chain,
    }
});

pub static INSTABILITY: LazyLock<[[f64; 20]; 20]> = LazyLock::new(|| square_table(INSTABILITY_TSV));
