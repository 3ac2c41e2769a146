//! Peptide sequences, taste annotations and one-hot encoding.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The 20 canonical residues in alphabetical one-letter order. Every
/// per-residue table in the crate is indexed by this order.
pub const AMINO_ACIDS: [u8; 20] = *b"ACDEFGHIKLMNPQRSTVWY";

pub const MIN_PEPTIDE_LEN: usize = 2;

/// Channels per position in the one-hot layout: 20 residues plus PAD.
pub const CHANNELS: usize = 21;
pub const PAD_CHANNEL: usize = 20;

pub fn residue_index(symbol: u8) -> Option<usize> {
    match symbol {
        b'A' => Some(0),
        b'C' => Some(1),
        b'D' => Some(2),
        b'E' => Some(3),
        b'F' => Some(4),
        b'G' => Some(5),
        b'H' => Some(6),
        b'I' => Some(7),
        b'K' => Some(8),
        b'L' => Some(9),
        b'M' => Some(10),
        b'N' => Some(11),
        b'P' => Some(12),
        b'Q' => Some(13),
        b'R' => Some(14),
        b'S' => Some(15),
        b'T' => Some(16),
        b'V' => Some(17),
        b'W' => Some(18),
        b'Y' => Some(19),
        _ => None,
    }
}

/// A validated peptide: canonical uppercase residues, at least two long.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Peptide(String);

impl Peptide {
    pub fn new(seq: &str) -> Result<Self> {
        for (position, symbol) in seq.chars().enumerate() {
            if !symbol.is_ascii() || residue_index(symbol as u8).is_none() {
                return Err(Error::InvalidResidue { symbol, position });
            }
        }
        if seq.len() < MIN_PEPTIDE_LEN {
            return Err(Error::TooShort {
                len: seq.len(),
                min: MIN_PEPTIDE_LEN,
            });
        }
        Ok(Peptide(seq.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn residues(&self) -> &[u8] {
        self.0.as_bytes()
    }

    /// Canonical indices (0..20) of the residues.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.bytes().map(|b| residue_index(b).expect("validated residue"))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Peptide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Peptide {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Peptide::new(&s)
    }
}

impl From<Peptide> for String {
    fn from(p: Peptide) -> String {
        p.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Taste {
    Sour,
    Sweet,
    Bitter,
    Salty,
    Umami,
}

impl Taste {
    /// Slot order of the five-character codes.
    pub const ALL: [Taste; 5] = [Taste::Sour, Taste::Sweet, Taste::Bitter, Taste::Salty, Taste::Umami];

    pub fn name(self) -> &'static str {
        match self {
            Taste::Sour => "sour",
            Taste::Sweet => "sweet",
            Taste::Bitter => "bitter",
            Taste::Salty => "salty",
            Taste::Umami => "umami",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelSlot {
    Present,
    Absent,
    Unknown,
}

impl LabelSlot {
    fn from_char(c: char) -> Option<Self> {
        match c {
            '1' => Some(LabelSlot::Present),
            '0' => Some(LabelSlot::Absent),
            'x' => Some(LabelSlot::Unknown),
            _ => None,
        }
    }

    fn symbol(self) -> char {
        match self {
            LabelSlot::Present => '1',
            LabelSlot::Absent => '0',
            LabelSlot::Unknown => 'x',
        }
    }
}

/// Five-slot taste annotation in (sour, sweet, bitter, salty, umami) order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TasteLabel(pub [LabelSlot; 5]);

impl TasteLabel {
    /// Parse a bare five-character code such as `xxx11`.
    pub fn parse_code(code: &str) -> std::result::Result<Self, String> {
        let slots = parse_slots(code, LabelSlot::from_char)?;
        Ok(TasteLabel(slots))
    }

    pub fn slot(&self, taste: Taste) -> LabelSlot {
        self.0[taste as usize]
    }

    pub fn is_present(&self, taste: Taste) -> bool {
        self.slot(taste) == LabelSlot::Present
    }

    pub fn present(&self) -> impl Iterator<Item = Taste> + '_ {
        Taste::ALL.into_iter().filter(|t| self.is_present(*t))
    }

    /// Slot-wise merge of two annotations of the same sequence: any report of
    /// a taste wins, then a confirmed absence, then unknown.
    pub fn merge(&self, other: &TasteLabel) -> TasteLabel {
        let mut out = self.0;
        for (slot, theirs) in out.iter_mut().zip(other.0) {
            *slot = match (*slot, theirs) {
                (LabelSlot::Present, _) | (_, LabelSlot::Present) => LabelSlot::Present,
                (LabelSlot::Absent, _) | (_, LabelSlot::Absent) => LabelSlot::Absent,
                _ => LabelSlot::Unknown,
            };
        }
        TasteLabel(out)
    }
}

impl fmt::Display for TasteLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.0 {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternSlot {
    Desired,
    Avoided,
    Free,
}

impl PatternSlot {
    fn from_char(c: char) -> Option<Self> {
        match c {
            '1' => Some(PatternSlot::Desired),
            '0' => Some(PatternSlot::Avoided),
            'x' => Some(PatternSlot::Free),
            _ => None,
        }
    }

    fn symbol(self) -> char {
        match self {
            PatternSlot::Desired => '1',
            PatternSlot::Avoided => '0',
            PatternSlot::Free => 'x',
        }
    }
}

/// A design request: which tastes are wanted, avoided or unconstrained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TastePattern([PatternSlot; 5]);

impl TastePattern {
    pub fn slot(&self, taste: Taste) -> PatternSlot {
        self.0[taste as usize]
    }

    pub fn slots(&self) -> [PatternSlot; 5] {
        self.0
    }

    pub fn desired(&self) -> Vec<Taste> {
        self.with(PatternSlot::Desired)
    }

    pub fn avoided(&self) -> Vec<Taste> {
        self.with(PatternSlot::Avoided)
    }

    pub fn free(&self) -> Vec<Taste> {
        self.with(PatternSlot::Free)
    }

    fn with(&self, kind: PatternSlot) -> Vec<Taste> {
        Taste::ALL.into_iter().filter(|t| self.slot(*t) == kind).collect()
    }

    pub fn avoidance_mode(&self) -> bool {
        self.0.contains(&PatternSlot::Avoided)
    }
}

impl fmt::Display for TastePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(">")?;
        for s in self.0 {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

impl TryFrom<String> for TastePattern {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        parse_pattern(&s)
    }
}

impl From<TastePattern> for String {
    fn from(p: TastePattern) -> String {
        p.to_string()
    }
}

fn parse_slots<T: Copy>(code: &str, f: impl Fn(char) -> Option<T>) -> std::result::Result<[T; 5], String> {
    let chars: Vec<char> = code.chars().collect();
    if chars.len() != 5 {
        return Err(format!("expected 5 code characters, found {} in {code:?}", chars.len()));
    }
    let mut out = Vec::with_capacity(5);
    for c in chars {
        out.push(f(c).ok_or_else(|| format!("code character {c:?} is not one of 0, 1, x"))?);
    }
    Ok([out[0], out[1], out[2], out[3], out[4]])
}

/// Parse a design pattern such as `>x1x00`.
pub fn parse_pattern(code: &str) -> Result<TastePattern> {
    let body = code
        .trim()
        .strip_prefix('>')
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("pattern {code:?} must start with '>'"),
        })?;
    let slots = parse_slots(body, PatternSlot::from_char).map_err(|msg| Error::Parse { line: 1, msg })?;
    if !slots.contains(&PatternSlot::Desired) {
        return Err(Error::EmptyPattern);
    }
    Ok(TastePattern(slots))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternMode {
    Single,
    Multiple,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Assignment {
    Positive,
    Negative,
    Excluded,
}

/// Decide which training set a labelled record belongs to under `pattern`.
///
/// Unknown slots never count as present or absent.
pub fn assign_record(label: &TasteLabel, pattern: &TastePattern, mode: PatternMode) -> Assignment {
    let avoided_present = Taste::ALL
        .iter()
        .any(|&t| pattern.slot(t) == PatternSlot::Avoided && label.is_present(t));
    if avoided_present {
        return Assignment::Negative;
    }
    let present: Vec<Taste> = label.present().collect();
    let all_present_desired = present.iter().all(|&t| pattern.slot(t) == PatternSlot::Desired);
    let positive = match mode {
        PatternMode::Single => {
            let desired_all_present = pattern.desired().iter().all(|&t| label.is_present(t));
            desired_all_present && all_present_desired
        }
        PatternMode::Multiple => !present.is_empty() && all_present_desired,
    };
    if positive {
        Assignment::Positive
    } else {
        Assignment::Excluded
    }
}

/// Parse the taste FASTA layout: `>abcde` headers, one (possibly wrapped)
/// sequence per record.
pub fn parse_taste_fasta(text: &str) -> Result<Vec<(Peptide, TasteLabel)>> {
    let mut out = Vec::new();
    let mut current: Option<(usize, TasteLabel, String)> = None;
    let finish = |rec: Option<(usize, TasteLabel, String)>, out: &mut Vec<(Peptide, TasteLabel)>| -> Result<()> {
        if let Some((line, label, seq)) = rec {
            if seq.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: "record has no sequence".into(),
                });
            }
            out.push((Peptide::new(&seq)?, label));
        }
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(code) = line.strip_prefix('>') {
            finish(current.take(), &mut out)?;
            let label = TasteLabel::parse_code(code).map_err(|msg| Error::Parse { line: line_no, msg })?;
            current = Some((line_no, label, String::new()));
        } else {
            match current.as_mut() {
                Some((_, _, seq)) => seq.push_str(line),
                None => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "sequence line before any header".into(),
                    })
                }
            }
        }
    }
    finish(current, &mut out)?;
    Ok(out)
}

/// Parse the TSV corpus layout: `sequence<TAB>abcde`, `#` comments.
pub fn parse_taste_tsv(text: &str) -> Result<Vec<(Peptide, TasteLabel)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(seq), Some(code), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: i + 1,
                msg: "expected two tab-separated fields".into(),
            });
        };
        let label = TasteLabel::parse_code(code.trim()).map_err(|msg| Error::Parse { line: i + 1, msg })?;
        out.push((Peptide::new(seq.trim())?, label));
    }
    Ok(out)
}

/// Parse either layout, choosing by the first non-comment line.
pub fn parse_taste_corpus(text: &str) -> Result<Vec<(Peptide, TasteLabel)>> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
    match first {
        Some(l) if l.starts_with('>') => parse_taste_fasta(text),
        _ => parse_taste_tsv(text),
    }
}

pub fn write_taste_tsv(records: &[(Peptide, TasteLabel)]) -> String {
    let mut s = String::new();
    for (p, l) in records {
        s.push_str(&format!("{p}\t{l}\n"));
    }
    s
}

/// Read plain sequences: FASTA with arbitrary headers, or one sequence per
/// line. `#` lines are comments.
pub fn parse_sequences(text: &str) -> Result<Vec<Peptide>> {
    let is_fasta = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with('>'));
    let mut out = Vec::new();
    if is_fasta {
        let mut seq = String::new();
        let mut started = false;
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('>') {
                if started && !seq.is_empty() {
                    out.push(Peptide::new(&seq)?);
                }
                seq.clear();
                started = true;
            } else {
                seq.push_str(line);
            }
        }
        if !seq.is_empty() {
            out.push(Peptide::new(&seq)?);
        }
    } else {
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let seq = line.split('\t').next().unwrap_or_default();
            out.push(Peptide::new(seq)?);
        }
    }
    Ok(out)
}

/// `max_len x 21` one-hot matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedSequence {
    pub max_len: usize,
    pub data: Vec<f64>,
}

impl EncodedSequence {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * CHANNELS..(i + 1) * CHANNELS]
    }
}

pub fn one_hot_encode(p: &Peptide, max_len: usize) -> Result<EncodedSequence> {
    if p.len() > max_len {
        return Err(Error::TooLong { len: p.len(), max: max_len });
    }
    let mut data = vec![0.0; max_len * CHANNELS];
    for (row, idx) in p.indices().enumerate() {
        data[row * CHANNELS + idx] = 1.0;
    }
    for row in p.len()..max_len {
        data[row * CHANNELS + PAD_CHANNEL] = 1.0;
    }
    Ok(EncodedSequence { max_len, data })
}

/// Row-wise argmax over `rows x 21` values, truncated at the first PAD.
/// Ties go to the lowest channel.
pub fn decode_residues(matrix: &[f64]) -> Vec<u8> {
    let mut out = Vec::new();
    for row in matrix.chunks_exact(CHANNELS) {
        let mut best = 0;
        for c in 1..CHANNELS {
            if row[c] > row[best] {
                best = c;
            }
        }
        if best == PAD_CHANNEL {
            break;
        }
        out.push(AMINO_ACIDS[best]);
    }
    out
}

pub fn decode_argmax(matrix: &[f64]) -> Result<Peptide> {
    let residues = decode_residues(matrix);
    if residues.is_empty() {
        return Err(Error::EmptySequence);
    }
    Peptide::new(std::str::from_utf8(&residues).expect("ascii residues"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use LabelSlot::{Absent as O, Present as I, Unknown as X};

    #[test]
    fn fasta_salty_umami_record() {
        let recs = parse_taste_fasta(">xxx11\nGR").unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].0.as_str(), "GR");
        assert_eq!(recs[0].1, TasteLabel([X, X, X, I, I]));
    }

    #[test]
    fn fasta_sweet_record() {
        let recs = parse_taste_fasta(">x1xxx\nAD").unwrap();
        assert_eq!(recs[0].1, TasteLabel([X, I, X, X, X]));
        assert_eq!(recs[0].1.present().collect::<Vec<_>>(), vec![Taste::Sweet]);
    }

    #[test]
    fn fasta_single_residue_is_rejected() {
        let err = parse_taste_fasta(">11111\nA").unwrap_err();
        assert!(matches!(err, Error::TooShort { len: 1, min: 2 }), "{err}");
    }

    #[test]
    fn fasta_wrapped_lines_and_errors() {
        let recs = parse_taste_fasta(">x1xxx\nAD\nEF\n>0000x\nGG\n").unwrap();
        assert_eq!(recs[0].0.as_str(), "ADEF");
        assert_eq!(recs.len(), 2);

        let err = parse_taste_fasta(">x1xxx\nAD\n>x1x\nGG").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_taste_fasta(">x1xx2\nAD").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_taste_fasta(">x1xxx\nABD").unwrap_err();
        assert!(matches!(err, Error::InvalidResidue { symbol: 'B', position: 1 }));
        let err = parse_taste_fasta(">x1xxx\nad").unwrap_err();
        assert!(matches!(err, Error::InvalidResidue { symbol: 'a', .. }));
    }

    #[test]
    fn tsv_corpus_with_comments() {
        let recs = parse_taste_tsv("# header\nGR\txxx11\n\nADE\tx1xxx\n").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(write_taste_tsv(&recs), "GR\txxx11\nADE\tx1xxx\n");
        assert!(parse_taste_tsv("GR xxx11\n").is_err());
    }

    #[test]
    fn pattern_with_avoidance() {
        let p = parse_pattern(">x1x00").unwrap();
        assert_eq!(p.desired(), vec![Taste::Sweet]);
        assert_eq!(p.avoided(), vec![Taste::Salty, Taste::Umami]);
        assert_eq!(p.free(), vec![Taste::Sour, Taste::Bitter]);
        assert!(p.avoidance_mode());
    }

    #[test]
    fn pattern_all_desired_and_empty() {
        let p = parse_pattern(">11111").unwrap();
        assert_eq!(p.desired().len(), 5);
        assert!(!p.avoidance_mode());
        assert!(matches!(parse_pattern(">xxxxx"), Err(Error::EmptyPattern)));
        assert!(matches!(parse_pattern(">x1x0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_pattern("x1x00"), Err(Error::Parse { .. })));
        assert!(matches!(parse_pattern(">x1x0a"), Err(Error::Parse { .. })));
    }

    #[test]
    fn assignment_examples() {
        let p = parse_pattern(">x1x00").unwrap();
        let label = TasteLabel([X, I, X, I, X]);
        for mode in [PatternMode::Single, PatternMode::Multiple] {
            assert_eq!(assign_record(&label, &p, mode), Assignment::Negative);
        }

        let p = parse_pattern(">x1xx1").unwrap();
        let label = TasteLabel([O, I, O, O, I]);
        assert_eq!(assign_record(&label, &p, PatternMode::Single), Assignment::Positive);

        let label = TasteLabel([X, I, X, X, X]);
        assert_eq!(assign_record(&label, &p, PatternMode::Multiple), Assignment::Positive);
        assert_eq!(assign_record(&label, &p, PatternMode::Single), Assignment::Excluded);
    }

    fn all_codes() -> Vec<[char; 5]> {
        let alphabet = ['0', '1', 'x'];
        let mut out = Vec::new();
        for n in 0..243usize {
            let mut c = ['0'; 5];
            let mut m = n;
            for slot in c.iter_mut() {
                *slot = alphabet[m % 3];
                m /= 3;
            }
            out.push(c);
        }
        out
    }

    #[test]
    fn pattern_format_round_trip_over_all_codes() {
        let mut valid = 0;
        for code in all_codes() {
            let s: String = std::iter::once('>').chain(code).collect();
            match parse_pattern(&s) {
                Ok(p) => {
                    valid += 1;
                    assert_eq!(p.to_string(), s);
                    assert_eq!(parse_pattern(&p.to_string()).unwrap(), p);
                }
                Err(e) => {
                    assert!(!code.contains(&'1'));
                    assert!(matches!(e, Error::EmptyPattern));
                }
            }
        }
        // 3^5 codes minus the 2^5 without any '1'
        assert_eq!(valid, 243 - 32);
    }

    #[test]
    fn never_positive_when_avoided_taste_present() {
        let codes = all_codes();
        for lc in &codes {
            let label = TasteLabel::parse_code(&lc.iter().collect::<String>()).unwrap();
            for pc in &codes {
                let Ok(pattern) = parse_pattern(&std::iter::once('>').chain(pc.iter().copied()).collect::<String>()) else {
                    continue;
                };
                let avoided_hit = pattern.avoided().iter().any(|&t| label.is_present(t));
                for mode in [PatternMode::Single, PatternMode::Multiple] {
                    let a = assign_record(&label, &pattern, mode);
                    if avoided_hit {
                        assert_eq!(a, Assignment::Negative);
                    } else {
                        assert_ne!(a, Assignment::Negative);
                    }
                }
            }
        }
    }

    #[test]
    fn encode_layout() {
        let p = Peptide::new("AC").unwrap();
        let e = one_hot_encode(&p, 4).unwrap();
        let basis = |c: usize| {
            let mut v = vec![0.0; CHANNELS];
            v[c] = 1.0;
            v
        };
        assert_eq!(e.row(0), basis(0).as_slice());
        assert_eq!(e.row(1), basis(1).as_slice());
        assert_eq!(e.row(2), basis(PAD_CHANNEL).as_slice());
        assert_eq!(e.row(3), basis(PAD_CHANNEL).as_slice());
        assert!(matches!(one_hot_encode(&p, 1), Err(Error::TooLong { len: 2, max: 1 })));
    }

    #[test]
    fn decode_all_pad_is_an_error() {
        let mut m = vec![0.0; 3 * CHANNELS];
        for r in 0..3 {
            m[r * CHANNELS + PAD_CHANNEL] = 1.0;
        }
        assert!(matches!(decode_argmax(&m), Err(Error::EmptySequence)));
    }

    #[test]
    fn decode_ties_prefer_low_channel_and_stop_at_pad() {
        let mut m = vec![0.0; 3 * CHANNELS];
        m[3] = 0.5;
        m[7] = 0.5; // row 0 tie E/I -> E
        m[CHANNELS + 4] = 0.9; // row 1 F
        m[2 * CHANNELS + PAD_CHANNEL] = 0.9;
        assert_eq!(decode_argmax(&m).unwrap().as_str(), "EF");
    }

    fn peptide_strategy(max_len: usize) -> impl Strategy<Value = String> {
        proptest::collection::vec(0usize..20, MIN_PEPTIDE_LEN..=max_len)
            .prop_map(|v| v.into_iter().map(|i| AMINO_ACIDS[i] as char).collect())
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(s in peptide_strategy(14)) {
            let p = Peptide::new(&s).unwrap();
            let e = one_hot_encode(&p, 14).unwrap();
            for r in 0..14 {
                prop_assert_eq!(e.row(r).iter().sum::<f64>(), 1.0);
            }
            prop_assert_eq!(decode_argmax(&e.data).unwrap(), p);
        }

        #[test]
        fn decode_matches_per_row_scan(values in proptest::collection::vec(0.0f64..1.0, 6 * CHANNELS)) {
            // independent oracle: per-row max scan, then truncate
            let mut expect = String::new();
            for row in values.chunks(CHANNELS) {
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let c = row.iter().position(|&v| v == max).unwrap();
                if c == PAD_CHANNEL { break; }
                expect.push(AMINO_ACIDS[c] as char);
            }
            prop_assert_eq!(String::from_utf8(decode_residues(&values)).unwrap(), expect);
        }
    }
}
