use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tastepep"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn align_prints_rows_and_scores() {
    let o = run(&["align", "AAAA", "AAAC"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("AAAA\nAAAC\n"));
    assert!(s.contains("similarity\t0.625\n"));
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    let corpus = data("toy_taste.tsv");
    let corpus = corpus.to_str().unwrap();
    // configuration error
    let o = run(&["design", "--pattern", ">x1xxx", "--corpus", corpus, "--keep-fraction", "0", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    // empty pattern is a configuration error too
    let o = run(&["design", "--pattern", ">xxxxx", "--corpus", corpus, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    // data errors: missing file, bad residue
    let o = run(&["design", "--pattern", ">x1xxx", "--corpus", "/no/such/file", "--out", out]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["align", "AAXA", "AA"]);
    assert_eq!(o.status.code(), Some(3));
    // unknown flag
    assert_eq!(run(&["design", "--bogus"]).status.code(), Some(2));
}

#[test]
fn profiling_and_encoding_commands() {
    let dir = tempfile::tempdir().unwrap();
    let seqs = dir.path().join("s.txt");
    std::fs::write(&seqs, "VVVV\nKLWKW\n").unwrap();
    let s = seqs.to_str().unwrap();

    let o = run(&["physchem", "--input", s]);
    assert!(o.status.success());
    let t = stdout(&o);
    let header: Vec<&str> = t.lines().next().unwrap().split('\t').collect();
    let col = header.iter().position(|c| *c == "aliphatic_index").unwrap();
    let vvvv: Vec<&str> = t.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(vvvv[0], "VVVV");
    assert!((vvvv[col].parse::<f64>().unwrap() - 290.0).abs() < 1e-9);

    let o = run(&["encode", "--input", s, "--descriptors", "aac,gaac"]);
    assert!(o.status.success());
    let t = stdout(&o);
    assert_eq!(t.lines().next().unwrap().split('\t').count(), 1 + 20 + 5);
    assert_eq!(t.lines().count(), 3);
    assert_eq!(run(&["encode", "--input", s, "--descriptors", "nope"]).status.code(), Some(2));

    let o = run(&["cluster", "--input", s]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3);

    let c = data("toy_taste.tsv");
    let o = run(&["census", "--corpus", c.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"records\": 122"));
}

#[test]
fn toxtrain_then_toxpredict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tox");
    let o = run(&[
        "toxtrain",
        "--toxic",
        data("toy_toxic.fasta").to_str().unwrap(),
        "--non-toxic",
        data("toy_nontoxic.fasta").to_str().unwrap(),
        "--descriptors",
        "AAC,CTDC",
        "--preset-weights",
        "--folds",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&[
        "toxpredict",
        "--model",
        out.join("model.json").to_str().unwrap(),
        "--input",
        data("toy_toxic.fasta").to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let t = stdout(&o);
    assert_eq!(t.lines().next().unwrap(), "sequence\tprobability\tcall");
    assert_eq!(t.lines().count(), 61);
    let toxic = t.lines().skip(1).filter(|l| l.ends_with("\ttoxic")).count();
    assert!(toxic >= 50, "{toxic} of 60 toxic sequences called toxic");
}
