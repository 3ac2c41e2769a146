//! Candidate report rows and their TSV form.

use crate::physchem::PhyschemProfile;
use crate::{Error, Result};

pub const CANDIDATE_COLUMNS: [&str; 11] = [
    "sequence",
    "d_plus",
    "d_minus",
    "delta",
    "p_value",
    "rank",
    "cluster",
    "cluster_size",
    "representative",
    "tox_probability",
    "tox_call",
];

/// One screened candidate. Optional fields are `NA` in the TSV: the
/// negative-side scores outside avoidance mode, and the toxicity fields
/// when no model was supplied.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateRow {
    pub sequence: String,
    pub d_plus: f64,
    pub d_minus: Option<f64>,
    pub delta: Option<f64>,
    pub p_value: Option<f64>,
    /// 1-based position in the filter ranking.
    pub rank: usize,
    pub cluster: usize,
    pub cluster_size: usize,
    pub representative: bool,
    pub tox_probability: Option<f64>,
    pub tox_call: Option<bool>,
    pub physchem: PhyschemProfile,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| x.to_string())
}

fn call_name(c: Option<bool>) -> &'static str {
    match c {
        Some(true) => "toxic",
        Some(false) => "non-toxic",
        None => "NA",
    }
}

pub fn candidates_header() -> String {
    let mut cols: Vec<&str> = CANDIDATE_COLUMNS.to_vec();
    cols.extend(PhyschemProfile::COLUMNS);
    cols.join("\t")
}

pub fn candidates_tsv(rows: &[CandidateRow]) -> String {
    let mut s = candidates_header();
    s.push('\n');
    for r in rows {
        let mut f = vec![
            r.sequence.clone(),
            r.d_plus.to_string(),
            opt(r.d_minus),
            opt(r.delta),
            opt(r.p_value),
            r.rank.to_string(),
            r.cluster.to_string(),
            r.cluster_size.to_string(),
            r.representative.to_string(),
            opt(r.tox_probability),
            call_name(r.tox_call).into(),
        ];
        f.extend(r.physchem.values().iter().map(f64::to_string));
        s.push_str(&f.join("\t"));
        s.push('\n');
    }
    s
}

fn field<T: std::str::FromStr>(v: &str, name: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad {name} value {v:?}"),
    })
}

fn opt_field(v: &str, name: &str, line: usize) -> Result<Option<f64>> {
    if v == "NA" {
        Ok(None)
    } else {
        field(v, name, line).map(Some)
    }
}

pub fn parse_candidates_tsv(text: &str) -> Result<Vec<CandidateRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == candidates_header() => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "unexpected candidates header".into(),
            })
        }
    }
    let width = CANDIDATE_COLUMNS.len() + PhyschemProfile::COLUMNS.len();
    let mut out = Vec::new();
    for (i, l) in lines {
        let line = i + 1;
        if l.is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split('\t').collect();
        if f.len() != width {
            return Err(Error::Parse {
                line,
                msg: format!("expected {width} fields, found {}", f.len()),
            });
        }
        let tox_call = match f[10] {
            "toxic" => Some(true),
            "non-toxic" => Some(false),
            "NA" => None,
            v => {
                return Err(Error::Parse {
                    line,
                    msg: format!("bad tox_call {v:?}"),
                })
            }
        };
        out.push(CandidateRow {
            sequence: f[0].to_string(),
            d_plus: field(f[1], "d_plus", line)?,
            d_minus: opt_field(f[2], "d_minus", line)?,
            delta: opt_field(f[3], "delta", line)?,
            p_value: opt_field(f[4], "p_value", line)?,
            rank: field(f[5], "rank", line)?,
            cluster: field(f[6], "cluster", line)?,
            cluster_size: field(f[7], "cluster_size", line)?,
            representative: field(f[8], "representative", line)?,
            tox_probability: opt_field(f[9], "tox_probability", line)?,
            tox_call,
            physchem: PhyschemProfile::parse_fields(&f[11..]).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?,
        });
    }
    Ok(out)
}
