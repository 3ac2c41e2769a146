use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tastepep::align::{normalized_similarity, nw_align, AlignParams, Clustering};
use tastepep::corpus::{taste_census, Corpus};
use tastepep::descriptors::{
    column_names, encode_rows, features_tsv, parse_descriptor_list, DescriptorConfig, Normalizer,
};
use tastepep::latent::{DistanceSpace, DEFAULT_ALPHA, DEFAULT_K, DEFAULT_KEEP_FRACTION};
use tastepep::physchem::{profile_with, profiles_tsv, MassKind, PhyschemConfig};
use tastepep::pipeline::{
    run_design, run_toxbench, run_toxpredict, run_toxtrain, write_toxtrain, DesignRun,
    ToxTrainConfig, WeightPolicy, DEFAULT_CLUSTER_THRESHOLD,
};
use tastepep::seq::{parse_pattern, parse_sequences, parse_taste_corpus, PatternMode};
use tastepep::tox::select::DEFAULT_WEIGHT_STEP;
use tastepep::vae::{GenerationMode, VaeConfig};
use tastepep::{ErrorKind, Peptide};

#[derive(Parser)]
#[command(name = "tastepep", version, about = "Taste peptide design and screening")]
struct Cli {
    /// Worker threads (0 = all cores); never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, screen, cluster and profile candidates for a taste pattern.
    Design(DesignArgs),
    /// Train and evaluate the toxicity ensemble.
    Toxtrain(ToxTrainArgs),
    /// Score sequences with a trained toxicity model.
    Toxpredict {
        #[arg(long)]
        model: PathBuf,
        /// FASTA or one sequence per line.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train on a synthetic, linearly separable corpus.
    Toxbench {
        #[arg(long, default_value_t = 200)]
        per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Physicochemical profile of each sequence.
    Physchem {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mass::Average)]
        mass: Mass,
        /// Report the largest hydrophobic moment over windows of this size.
        #[arg(long)]
        moment_window: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Descriptor feature matrix.
    Encode {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated descriptor names, e.g. AAC,CTDD.
        #[arg(long, default_value = "AAC")]
        descriptors: String,
        /// Z-score every column over the input set.
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Global alignment of two sequences.
    Align { a: String, b: String },
    /// Similarity clustering with representatives.
    Cluster {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLUSTER_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Taste statistics of a labelled corpus.
    Census {
        #[arg(long)]
        corpus: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Single,
    Multiple,
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Projected,
    Latent,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mass {
    Average,
    Monoisotopic,
}

#[derive(Args)]
struct DesignArgs {
    /// Five-slot code such as ">x1x00" (sour, sweet, bitter, salty, umami).
    #[arg(long, allow_hyphen_values = true)]
    pattern: String,
    #[arg(long, value_enum, default_value_t = Mode::Single)]
    mode: Mode,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    latent_dim: Option<usize>,
    #[arg(long)]
    extension_epochs: Option<usize>,
    /// Number of sequences to generate before filtering.
    #[arg(long, default_value_t = 100)]
    candidates: usize,
    /// Generate by jittering encoded training peptides instead of sampling the prior.
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_KEEP_FRACTION)]
    keep_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Space::Projected)]
    distance_space: Space,
    #[arg(long, default_value_t = DEFAULT_CLUSTER_THRESHOLD)]
    cluster_threshold: f64,
    #[arg(long)]
    tox_model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ToxTrainArgs {
    #[arg(long)]
    toxic: PathBuf,
    #[arg(long)]
    non_toxic: PathBuf,
    /// Descriptors considered by forward selection (default: all).
    #[arg(long)]
    universe: Option<String>,
    /// Skip selection and use exactly these descriptors.
    #[arg(long, conflicts_with = "universe")]
    descriptors: Option<String>,
    /// Comma-separated member presets.
    #[arg(long)]
    members: Option<String>,
    /// Use the fixed preset weights instead of a grid search.
    #[arg(long)]
    preset_weights: bool,
    #[arg(long, default_value_t = DEFAULT_WEIGHT_STEP)]
    weight_step: f64,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_sequences(path: &Path) -> Result<Vec<Peptide>> {
    parse_sequences(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn design(a: DesignArgs) -> Result<()> {
    let mode = match a.mode {
        Mode::Single => PatternMode::Single,
        Mode::Multiple => PatternMode::Multiple,
    };
    let mut run = DesignRun::new(parse_pattern(&a.pattern)?, mode, a.corpus, a.out);
    let d = VaeConfig::default();
    run.vae = VaeConfig {
        epochs: a.epochs.unwrap_or(d.epochs),
        latent_dim: a.latent_dim.unwrap_or(d.latent_dim),
        extension_epochs: a.extension_epochs,
        generation_count: a.candidates,
        generation: a.jitter.map_or(GenerationMode::Prior, |tau| GenerationMode::PosteriorJitter { tau }),
        ..d
    };
    run.keep_fraction = a.keep_fraction;
    run.k = a.k;
    run.alpha = a.alpha;
    run.distance_space = match a.distance_space {
        Space::Projected => DistanceSpace::Projected,
        Space::Latent => DistanceSpace::Latent,
    };
    run.cluster_threshold = a.cluster_threshold;
    run.tox_model = a.tox_model;
    run.seed = a.seed;
    let out = run_design(&run)?;
    let c = &out.manifest.counts;
    eprintln!(
        "{} positives, {} negatives; generated {} ({} unique), kept {}, reported {} cluster representatives in {}",
        c.positives_after_dedup,
        c.negatives_after_dedup,
        c.generated,
        c.unique_candidates,
        c.filtered,
        c.reported,
        run.out.display()
    );
    Ok(())
}

fn toxtrain(a: ToxTrainArgs) -> Result<()> {
    let mut cfg = ToxTrainConfig {
        folds: a.folds,
        seed: a.seed,
        weights: WeightPolicy::Search { step: a.weight_step },
        ..ToxTrainConfig::default()
    };
    if let Some(u) = &a.universe {
        cfg.universe = parse_descriptor_list(u)?;
    }
    if let Some(d) = &a.descriptors {
        cfg.fixed_descriptors = Some(parse_descriptor_list(d)?);
    }
    if a.preset_weights {
        cfg = cfg.with_preset_weights();
    }
    if let Some(m) = &a.members {
        if a.preset_weights {
            anyhow::bail!(tastepep::Error::Config("--members and --preset-weights are exclusive".into()));
        }
        cfg.members = m.split(',').map(|s| s.trim().to_string()).collect();
    }
    let out = run_toxtrain(read_sequences(&a.toxic)?, read_sequences(&a.non_toxic)?, &cfg)?;
    write_toxtrain(&out, &a.out)?;
    let r = &out.report;
    eprintln!(
        "descriptors {:?}, weights {:?}; CV MCC {:.4}, test MCC {:.4}",
        r.descriptors.iter().map(|d| d.name()).collect::<Vec<_>>(),
        r.weights,
        r.ensemble_cv.mcc,
        r.test_metrics.mcc
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Design(a) => design(a),
        Command::Toxtrain(a) => toxtrain(a),
        Command::Toxpredict { model, input, out } => {
            emit(out.as_deref(), &run_toxpredict(&model, &read_sequences(&input)?)?)
        }
        Command::Toxbench { per_class, seed, out } => {
            let cfg = ToxTrainConfig {
                seed,
                ..ToxTrainConfig::default()
            };
            let res = run_toxbench(per_class, seed, &cfg)?;
            if let Some(dir) = &out {
                write_toxtrain(&res, dir)?;
            }
            print!("{}", res.report.test_metrics.to_tsv());
            Ok(())
        }
        Command::Physchem {
            input,
            mass,
            moment_window,
            out,
        } => {
            let cfg = PhyschemConfig {
                mass: match mass {
                    Mass::Average => MassKind::Average,
                    Mass::Monoisotopic => MassKind::Monoisotopic,
                },
                moment_window,
            };
            let rows: Vec<_> = read_sequences(&input)?
                .into_iter()
                .map(|p| {
                    let prof = profile_with(&p, &cfg);
                    (p, prof)
                })
                .collect();
            emit(out.as_deref(), &profiles_tsv(&rows))
        }
        Command::Encode {
            input,
            descriptors,
            normalize,
            out,
        } => {
            let ids = parse_descriptor_list(&descriptors)?;
            let cfg = DescriptorConfig::default();
            let peps = read_sequences(&input)?;
            let mut rows = encode_rows(&ids, &peps, &cfg)?;
            if normalize {
                rows = Normalizer::fit(&rows)?.transform_all(&rows);
            }
            let cols: Vec<String> = ids.iter().flat_map(|&id| column_names(id, &cfg)).collect();
            emit(out.as_deref(), &features_tsv(&cols, &peps, &rows))
        }
        Command::Align { a, b } => {
            let (a, b) = (Peptide::new(&a)?, Peptide::new(&b)?);
            let params = AlignParams::default();
            let al = nw_align(a.residues(), b.residues(), &params);
            println!("{}\n{}", al.top, al.bottom);
            println!("score\t{}", al.score);
            println!("similarity\t{}", normalized_similarity(a.residues(), b.residues(), &params));
            Ok(())
        }
        Command::Cluster { input, threshold, out } => {
            let peps = read_sequences(&input)?;
            let c = Clustering::run(&peps, &AlignParams::default(), threshold)?;
            emit(out.as_deref(), &c.to_tsv(&peps))
        }
        Command::Census { corpus } => {
            let recs = parse_taste_corpus(&read(&corpus)?)?;
            let c = Corpus::ingest_taste(recs, "corpus");
            println!("{}", serde_json::to_string_pretty(&taste_census(&c))?);
            Ok(())
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<tastepep::Error>() {
            return match err.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Data => 3,
                ErrorKind::Numeric => 4,
            };
        }
    }
    3
}

/// Context chain down to the first library error, whose message already
/// carries its own sources.
fn describe(e: &anyhow::Error) -> String {
    let mut parts = Vec::new();
    for cause in e.chain() {
        parts.push(cause.to_string());
        if cause.downcast_ref::<tastepep::Error>().is_some() {
            break;
        }
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if cli.workers > 0 {
        pool = pool.num_threads(cli.workers);
    }
    if let Err(e) = pool.build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
