use proptest::prelude::*;

use tastepep::align::{AlignParams, Clustering};
use tastepep::descriptors::{column_names, encode, encode_set, features_tsv, DescriptorConfig, DescriptorId};
use tastepep::physchem::{profile, profiles_tsv, PhyschemProfile};
use tastepep::seq::parse_sequences;
use tastepep::Peptide;

fn peptide() -> impl Strategy<Value = Peptide> {
    proptest::collection::vec(proptest::sample::select(b"ACDEFGHIKLMNPQRSTVWY".to_vec()), 3..=25)
        .prop_map(|v| Peptide::new(std::str::from_utf8(&v).unwrap()).unwrap())
}

#[test]
fn column_names_cover_every_dimension() {
    let cfg = DescriptorConfig::default();
    for id in DescriptorId::ALL {
        let names = column_names(id, &cfg);
        assert_eq!(names.len(), id.dim(&cfg), "{id}");
        let unique: std::collections::HashSet<&String> = names.iter().collect();
        assert_eq!(unique.len(), names.len(), "{id}");
        assert!(names.iter().all(|n| n.starts_with(id.name())), "{id}");
    }
}

#[test]
fn feature_table_layout() {
    let peps = parse_sequences(">a\nKLWKW\n>b\nDEDEG\n>c\nGGAVL\n").unwrap();
    let ids = [DescriptorId::Aac, DescriptorId::Ctdd];
    let cfg = DescriptorConfig::default();
    let fm = encode_set(&ids, &peps, &[0, 1, 2], &cfg).unwrap();
    assert_eq!(fm.columns.len(), 20 + 195);
    let tsv = features_tsv(&fm.columns, &peps, &fm.rows);
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("KLWKW\t"));
    assert!(lines.iter().all(|l| l.split('\t').count() == 1 + 215));
    // normalized columns have zero mean over the fitting rows
    for j in 0..fm.columns.len() {
        let m: f64 = fm.rows.iter().map(|r| r[j]).sum::<f64>() / 3.0;
        assert!(m.abs() < 1e-12);
    }
}

#[test]
fn profile_table_round_trips() {
    let peps = parse_sequences("KLWKW\nGG\nCCWY\n").unwrap();
    let rows: Vec<(Peptide, PhyschemProfile)> = peps.iter().map(|p| (p.clone(), profile(p))).collect();
    let tsv = profiles_tsv(&rows);
    for (line, (_, prof)) in tsv.lines().skip(1).zip(&rows) {
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!(&PhyschemProfile::parse_fields(&f[1..]).unwrap(), prof);
    }
}

#[test]
fn clustering_partitions_input() {
    let peps = parse_sequences("KLWKWL\nKLWKWV\nDEDEDE\nDEDEDG\nGGGG\n").unwrap();
    let c = Clustering::run(&peps, &AlignParams::default(), 0.7).unwrap();
    let mut seen: Vec<usize> = c.clusters.iter().flatten().copied().collect();
    seen.sort_unstable();
    assert_eq!(seen, (0..peps.len()).collect::<Vec<_>>());
    for (members, rep) in c.clusters.iter().zip(&c.representatives) {
        assert!(members.contains(rep));
    }
    let of = c.cluster_of(peps.len());
    assert_eq!(of[0], of[1]);
    assert_eq!(of[2], of[3]);
    assert_ne!(of[0], of[2]);
}

proptest! {
    #[test]
    fn encoding_is_pure(p in peptide()) {
        let cfg = DescriptorConfig::default();
        for id in [DescriptorId::Ctdd, DescriptorId::Cksaap, DescriptorId::Paac, DescriptorId::Zscale] {
            prop_assert_eq!(encode(id, &p, &cfg).unwrap(), encode(id, &p, &cfg).unwrap());
        }
    }

    #[test]
    fn profile_fields_are_finite(p in peptide()) {
        prop_assert!(profile(&p).values().iter().all(|v| v.is_finite()));
    }
}
