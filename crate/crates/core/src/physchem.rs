//! Sequence-level physicochemical profile.

use serde::{Deserialize, Serialize};

use crate::seq::{residue_index, Peptide};
use crate::tables::{Ionizable, INSTABILITY, PKA, SCALES};
use crate::{Error, Result};

pub const WATER_AVERAGE: f64 = 18.02;
pub const WATER_MONOISOTOPIC: f64 = 18.01056;
pub const EXT_TYR: f64 = 1490.0;
pub const EXT_TRP: f64 = 5500.0;
pub const EXT_CYSTINE: f64 = 125.0;
const PI_TOL: f64 = 1e-4;
const PI_MAX_ITER: usize = 100;
const MOMENT_ANGLE_DEG: f64 = 100.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassKind {
    #[default]
    Average,
    Monoisotopic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhyschemConfig {
    pub mass: MassKind,
    /// Sliding window for the hydrophobic moment; `None` uses the whole
    /// sequence. With a window, the maximum window moment is reported.
    pub moment_window: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhyschemProfile {
    pub gravy: f64,
    pub molecular_weight: f64,
    pub isoelectric_point: f64,
    pub net_charge_ph7: f64,
    pub aromaticity: f64,
    pub instability_index: f64,
    pub helix_fraction: f64,
    pub turn_fraction: f64,
    pub sheet_fraction: f64,
    pub extinction_reduced: f64,
    pub extinction_oxidized: f64,
    pub aliphatic_index: f64,
    pub charge_density: f64,
    pub hydrophobic_ratio: f64,
    pub hydrophobic_moment: f64,
}

impl PhyschemProfile {
    pub const COLUMNS: [&'static str; 15] = [
        "gravy",
        "molecular_weight",
        "isoelectric_point",
        "net_charge_ph7",
        "aromaticity",
        "instability_index",
        "helix_fraction",
        "turn_fraction",
        "sheet_fraction",
        "extinction_reduced",
        "extinction_oxidized",
        "aliphatic_index",
        "charge_density",
        "hydrophobic_ratio",
        "hydrophobic_moment",
    ];

    pub fn values(&self) -> [f64; 15] {
        [
            self.gravy,
            self.molecular_weight,
            self.isoelectric_point,
            self.net_charge_ph7,
            self.aromaticity,
            self.instability_index,
            self.helix_fraction,
            self.turn_fraction,
            self.sheet_fraction,
            self.extinction_reduced,
            self.extinction_oxidized,
            self.aliphatic_index,
            self.charge_density,
            self.hydrophobic_ratio,
            self.hydrophobic_moment,
        ]
    }

    pub fn from_values(v: [f64; 15]) -> Self {
        PhyschemProfile {
            gravy: v[0],
            molecular_weight: v[1],
            isoelectric_point: v[2],
            net_charge_ph7: v[3],
            aromaticity: v[4],
            instability_index: v[5],
            helix_fraction: v[6],
            turn_fraction: v[7],
            sheet_fraction: v[8],
            extinction_reduced: v[9],
            extinction_oxidized: v[10],
            aliphatic_index: v[11],
            charge_density: v[12],
            hydrophobic_ratio: v[13],
            hydrophobic_moment: v[14],
        }
    }

    /// Parse the 15 profile columns from TSV fields.
    pub fn parse_fields(fields: &[&str]) -> Result<Self> {
        if fields.len() != 15 {
            return Err(Error::Data(format!("expected 15 profile fields, got {}", fields.len())));
        }
        let mut v = [0.0; 15];
        for (slot, f) in v.iter_mut().zip(fields) {
            *slot = f
                .parse()
                .map_err(|_| Error::Data(format!("bad profile value {f:?}")))?;
        }
        Ok(Self::from_values(v))
    }
}

fn positive_fraction(h: f64, ph: f64) -> f64 {
    // 10^pKa / (10^pKa + 10^pH), written to stay finite
    1.0 / (1.0 + 10f64.powf(ph - h))
}

fn group_charge(g: &Ionizable, ph: f64) -> f64 {
    if g.sign > 0.0 {
        positive_fraction(g.pka, ph)
    } else {
        -(1.0 - positive_fraction(g.pka, ph))
    }
}

/// Henderson–Hasselbalch net charge with the bundled pKa table.
pub fn net_charge(p: &Peptide, ph: f64) -> f64 {
    let t = &*PKA;
    let mut q = group_charge(&t.n_term, ph) + group_charge(&t.c_term, ph);
    for a in p.indices() {
        if let Some(g) = &t.side_chain[a] {
            q += group_charge(g, ph);
        }
    }
    q
}

/// Isoelectric point by bisection over pH [0, 14]. The flag is set when
/// the charge does not change sign on the interval and the result is a
/// clamped boundary.
pub fn isoelectric_point_flagged(p: &Peptide) -> (f64, bool) {
    let (mut lo, mut hi) = (0.0f64, 14.0f64);
    let (q_lo, q_hi) = (net_charge(p, lo), net_charge(p, hi));
    if q_lo <= 0.0 {
        return (lo, true);
    }
    if q_hi >= 0.0 {
        return (hi, true);
    }
    let mut mid = 7.0;
    for _ in 0..PI_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let q = net_charge(p, mid);
        if q.abs() < PI_TOL {
            break;
        }
        if q > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (mid, false)
}

pub fn isoelectric_point(p: &Peptide) -> f64 {
    isoelectric_point_flagged(p).0
}

fn count(p: &Peptide, set: &[u8]) -> usize {
    p.residues().iter().filter(|b| set.contains(b)).count()
}

fn fraction(p: &Peptide, set: &[u8]) -> f64 {
    count(p, set) as f64 / p.len() as f64
}

pub fn molecular_weight(p: &Peptide, kind: MassKind) -> f64 {
    let (table, water) = match kind {
        MassKind::Average => (&SCALES.residue_mass, WATER_AVERAGE),
        MassKind::Monoisotopic => (&SCALES.monoisotopic_mass, WATER_MONOISOTOPIC),
    };
    p.indices().map(|a| table[a]).sum::<f64>() + water
}

pub fn gravy(p: &Peptide) -> f64 {
    p.indices().map(|a| SCALES.kyte_doolittle[a]).sum::<f64>() / p.len() as f64
}

pub fn instability_index(p: &Peptide) -> f64 {
    let idx: Vec<usize> = p.indices().collect();
    let s: f64 = idx.windows(2).map(|w| INSTABILITY[w[0]][w[1]]).sum();
    10.0 / idx.len() as f64 * s
}

pub fn aliphatic_index(p: &Peptide) -> f64 {
    let x = |s: &[u8]| fraction(p, s);
    100.0 * (x(b"A") + 2.9 * x(b"V") + 3.9 * (x(b"I") + x(b"L")))
}

fn moment_of(h: &[f64]) -> f64 {
    let angle = MOMENT_ANGLE_DEG.to_radians();
    let (mut c, mut s) = (0.0, 0.0);
    for (i, v) in h.iter().enumerate() {
        let t = i as f64 * angle;
        c += v * t.cos();
        s += v * t.sin();
    }
    (c * c + s * s).sqrt() / h.len() as f64
}

/// Eisenberg hydrophobic moment at 100° per residue.
pub fn hydrophobic_moment(p: &Peptide, window: Option<usize>) -> f64 {
    let h: Vec<f64> = p.indices().map(|a| SCALES.eisenberg[a]).collect();
    match window {
        Some(w) if w > 0 && w < h.len() => h.windows(w).map(moment_of).fold(0.0, f64::max),
        _ => moment_of(&h),
    }
}

pub fn profile(p: &Peptide) -> PhyschemProfile {
    profile_with(p, &PhyschemConfig::default())
}

pub fn profile_with(p: &Peptide, c: &PhyschemConfig) -> PhyschemProfile {
    let mw = molecular_weight(p, c.mass);
    let q7 = net_charge(p, 7.0);
    let ny = count(p, b"Y") as f64;
    let nw = count(p, b"W") as f64;
    let nc = count(p, b"C");
    let reduced = EXT_TYR * ny + EXT_TRP * nw;
    PhyschemProfile {
        gravy: gravy(p),
        molecular_weight: mw,
        isoelectric_point: isoelectric_point(p),
        net_charge_ph7: q7,
        aromaticity: fraction(p, b"FWY"),
        instability_index: instability_index(p),
        helix_fraction: fraction(p, b"VIYFWL"),
        turn_fraction: fraction(p, b"NPGS"),
        sheet_fraction: fraction(p, b"EMAL"),
        extinction_reduced: reduced,
        extinction_oxidized: reduced + EXT_CYSTINE * (nc / 2) as f64,
        aliphatic_index: aliphatic_index(p),
        charge_density: q7 / mw,
        hydrophobic_ratio: fraction(p, b"ACFILMVW"),
        hydrophobic_moment: hydrophobic_moment(p, c.moment_window),
    }
}

/// TSV with a `sequence` column and one column per profile field.
pub fn profiles_tsv(rows: &[(Peptide, PhyschemProfile)]) -> String {
    let mut s = String::from("sequence");
    for c in PhyschemProfile::COLUMNS {
        s.push('\t');
        s.push_str(c);
    }
    s.push('\n');
    for (p, prof) in rows {
        s.push_str(p.as_str());
        for v in prof.values() {
            s.push('\t');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}

/// Eisenberg value of a single residue symbol.
pub fn eisenberg(symbol: u8) -> Option<f64> {
    residue_index(symbol).map(|i| SCALES.eisenberg[i])
}
