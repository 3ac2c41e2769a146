//! Toxicity model lifecycle: corpus preparation, descriptor selection,
//! weight search, final fit and held-out evaluation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::align::AlignParams;
use crate::corpus::{
    balance_and_split, dedup_greedy, length_filter, Corpus, SplitSpec, ToxLabel, DEDUP_IDENTITY, TOX_MAX_LEN,
};
use crate::descriptors::{check, encode, DescriptorConfig, DescriptorId, Normalizer};
use crate::rng::{child_seed, stage_seed};
use crate::seq::Peptide;
use crate::tox::cv::{pool, stratified_folds, DEFAULT_FOLDS};
use crate::tox::metrics::{Confusion, MetricReport};
use crate::tox::select::{blend, FeatureSelection, DEFAULT_EPSILON, DEFAULT_WEIGHT_STEP};
use crate::tox::{
    fit, forward_select, oof_predictions, weight_grid_search, ClassifierSpec, EnsembleModel, Matrix, Member,
    WeightSearch, DEFAULT_MEMBERS, DEFAULT_MEMBER_WEIGHTS,
};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum WeightPolicy {
    /// Grid search over the simplex at `step`.
    Search { step: f64 },
    Fixed { weights: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToxTrainConfig {
    pub descriptor_config: DescriptorConfig,
    pub universe: Vec<DescriptorId>,
    /// Skip forward selection and use these descriptors.
    pub fixed_descriptors: Option<Vec<DescriptorId>>,
    /// Classifier preset scored during forward selection.
    pub selection_classifier: String,
    pub members: Vec<String>,
    pub weights: WeightPolicy,
    pub folds: usize,
    pub epsilon: f64,
    pub train_fraction: f64,
    pub max_len: usize,
    pub dedup_identity: f64,
    pub seed: u64,
}

impl Default for ToxTrainConfig {
    fn default() -> Self {
        ToxTrainConfig {
            descriptor_config: DescriptorConfig::default(),
            universe: DescriptorId::ALL.to_vec(),
            fixed_descriptors: None,
            selection_classifier: "knn".into(),
            members: DEFAULT_MEMBERS.iter().map(|s| s.to_string()).collect(),
            weights: WeightPolicy::Search {
                step: DEFAULT_WEIGHT_STEP,
            },
            folds: DEFAULT_FOLDS,
            epsilon: DEFAULT_EPSILON,
            train_fraction: 0.9,
            max_len: TOX_MAX_LEN,
            dedup_identity: DEDUP_IDENTITY,
            seed: 0,
        }
    }
}

impl ToxTrainConfig {
    /// The fixed five-member preset weights instead of a grid search.
    pub fn with_preset_weights(mut self) -> Self {
        self.members = DEFAULT_MEMBERS.iter().map(|s| s.to_string()).collect();
        self.weights = WeightPolicy::Fixed {
            weights: DEFAULT_MEMBER_WEIGHTS.to_vec(),
        };
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub toxic: usize,
    pub non_toxic: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToxTrainReport {
    pub input: ClassCounts,
    pub after_length_filter: ClassCounts,
    pub after_dedup: ClassCounts,
    pub train: ClassCounts,
    pub test: ClassCounts,
    pub excluded_descriptors: Vec<(DescriptorId, String)>,
    pub selection: Option<FeatureSelection>,
    pub descriptors: Vec<DescriptorId>,
    pub weight_search: Option<WeightSearch>,
    pub weights: Vec<f64>,
    pub member_cv: Vec<(String, MetricReport)>,
    pub ensemble_cv: MetricReport,
    pub test_metrics: MetricReport,
    /// Test peptides the model could not encode.
    pub test_unscored: usize,
}

#[derive(Clone, Debug)]
pub struct ToxTrainOutput {
    pub model: EnsembleModel,
    pub report: ToxTrainReport,
    pub train: Vec<(Peptide, bool)>,
    pub train_probabilities: Vec<f64>,
    pub test: Vec<(Peptide, bool)>,
    pub test_probabilities: Vec<Option<f64>>,
}

fn counts(pos: usize, neg: usize) -> ClassCounts {
    ClassCounts {
        toxic: pos,
        non_toxic: neg,
    }
}

/// Per-descriptor normalized blocks over the training peptides, so any
/// descriptor subset can be assembled without re-encoding.
struct BlockCache {
    blocks: HashMap<DescriptorId, (Matrix, Normalizer)>,
}

impl BlockCache {
    fn build(ids: &[DescriptorId], peptides: &[Peptide], c: &DescriptorConfig) -> Result<BlockCache> {
        use rayon::prelude::*;
        let blocks = ids
            .par_iter()
            .map(|&id| {
                let raw: Vec<Vec<f64>> = peptides.iter().map(|p| encode(id, p, c)).collect::<Result<_>>()?;
                let norm = Normalizer::fit(&raw)?;
                Ok((id, (Matrix::from_rows(&norm.transform_all(&raw))?, norm)))
            })
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(BlockCache { blocks })
    }

    fn matrix(&self, set: &[DescriptorId]) -> Result<Matrix> {
        let parts: Vec<&Matrix> = set.iter().map(|d| &self.blocks[d].0).collect();
        Matrix::hstack(&parts)
    }

    fn normalizer(&self, set: &[DescriptorId]) -> Normalizer {
        let mut n = Normalizer {
            mean: Vec::new(),
            scale: Vec::new(),
        };
        for d in set {
            let b = &self.blocks[d].1;
            n.mean.extend(&b.mean);
            n.scale.extend(&b.scale);
        }
        n
    }
}

/// Run the full training lifecycle on raw toxic / non-toxic sequences.
pub fn run_toxtrain(toxic: Vec<Peptide>, non_toxic: Vec<Peptide>, cfg: &ToxTrainConfig) -> Result<ToxTrainOutput> {
    cfg.descriptor_config.validate()?;
    if cfg.universe.is_empty() && cfg.fixed_descriptors.is_none() {
        return Err(Error::Config("descriptor universe is empty".into()));
    }
    let pos = Corpus::from_peptides(toxic, ToxLabel::Toxic, "toxic");
    let neg = Corpus::from_peptides(non_toxic, ToxLabel::NonToxic, "non-toxic");
    let input = counts(pos.len(), neg.len());

    let pos = length_filter(&pos, cfg.max_len).map_err(|e| e.in_stage("length filter"))?.corpus;
    let neg = length_filter(&neg, cfg.max_len).map_err(|e| e.in_stage("length filter"))?.corpus;
    let after_length_filter = counts(pos.len(), neg.len());

    let params = AlignParams::default();
    let pos = dedup_greedy(&pos, cfg.dedup_identity, &params)
        .map_err(|e| e.in_stage("dedup"))?
        .corpus;
    let neg = dedup_greedy(&neg, cfg.dedup_identity, &params)
        .map_err(|e| e.in_stage("dedup"))?
        .corpus;
    let after_dedup = counts(pos.len(), neg.len());

    let split = balance_and_split(
        &pos,
        &neg,
        &SplitSpec {
            train_fraction: cfg.train_fraction,
            seed: stage_seed(cfg.seed, "split"),
            balanced: true,
        },
    )
    .map_err(|e| e.in_stage("split"))?;
    let train: Vec<(Peptide, bool)> = split
        .train_pos
        .peptides()
        .into_iter()
        .map(|p| (p, true))
        .chain(split.train_neg.peptides().into_iter().map(|p| (p, false)))
        .collect();
    let test: Vec<(Peptide, bool)> = split
        .test_pos
        .peptides()
        .into_iter()
        .map(|p| (p, true))
        .chain(split.test_neg.peptides().into_iter().map(|p| (p, false)))
        .collect();
    let train_peps: Vec<Peptide> = train.iter().map(|t| t.0.clone()).collect();
    let y: Vec<bool> = train.iter().map(|t| t.1).collect();

    // descriptors that cannot encode every training peptide are dropped
    let wanted: Vec<DescriptorId> = cfg.fixed_descriptors.clone().unwrap_or_else(|| cfg.universe.clone());
    let mut usable = Vec::new();
    let mut excluded = Vec::new();
    for id in wanted {
        match train_peps.iter().find_map(|p| check(id, p.len(), &cfg.descriptor_config).err()) {
            None => usable.push(id),
            Some(e) => {
                log::warn!("excluding {id}: {e}");
                excluded.push((id, e.to_string()));
            }
        }
    }
    if usable.is_empty() {
        return Err(Error::Data("no descriptor can encode every training peptide".into()).in_stage("descriptors"));
    }
    let cache = BlockCache::build(&usable, &train_peps, &cfg.descriptor_config).map_err(|e| e.in_stage("descriptors"))?;
    let folds = stratified_folds(&y, cfg.folds, stage_seed(cfg.seed, "folds")).map_err(|e| e.in_stage("folds"))?;

    let (selection, descriptors) = if cfg.fixed_descriptors.is_some() {
        (None, usable.clone())
    } else {
        let spec = ClassifierSpec::preset(&cfg.selection_classifier, stage_seed(cfg.seed, "select"))?;
        let sel = forward_select(&usable, &spec, |s| cache.matrix(s), &y, &folds, cfg.folds, cfg.epsilon)
            .map_err(|e| e.in_stage("forward selection"))?;
        let chosen = sel.selected.clone();
        (Some(sel), chosen)
    };
    let x = cache.matrix(&descriptors)?;
    let normalizer = cache.normalizer(&descriptors);

    let member_seed = stage_seed(cfg.seed, "members");
    let specs: Vec<ClassifierSpec> = cfg
        .members
        .iter()
        .enumerate()
        .map(|(i, name)| ClassifierSpec::preset(name, child_seed(member_seed, i as u64)))
        .collect::<Result<_>>()?;
    if specs.is_empty() {
        return Err(Error::Config("ensemble needs at least one member".into()));
    }
    let oof: Vec<Vec<f64>> = specs
        .iter()
        .map(|s| oof_predictions(s, &x, &y, &folds, cfg.folds))
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("member cross-validation"))?;
    let member_cv = specs
        .iter()
        .zip(&oof)
        .map(|(s, p)| (s.name.clone(), pool(p, &y, &folds, cfg.folds).1))
        .collect();

    let (weight_search, weights) = match &cfg.weights {
        WeightPolicy::Fixed { weights } => {
            if weights.len() != specs.len() {
                return Err(Error::Config(format!(
                    "{} fixed weights for {} members",
                    weights.len(),
                    specs.len()
                )));
            }
            (None, weights.clone())
        }
        WeightPolicy::Search { .. } if specs.len() == 1 => (None, vec![1.0]),
        WeightPolicy::Search { step } => {
            let ws = weight_grid_search(&oof, &y, *step).map_err(|e| e.in_stage("weight search"))?;
            let w = ws.weights.clone();
            (Some(ws), w)
        }
    };
    let ensemble_cv = pool(&blend(&oof, &weights), &y, &folds, cfg.folds).1;

    use rayon::prelude::*;
    let members: Vec<Member> = specs
        .into_par_iter()
        .map(|spec| Ok(Member { model: fit(&spec, &x, &y)?, spec }))
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("final fit"))?;
    let mut model = EnsembleModel::new(descriptors.clone(), cfg.descriptor_config, normalizer, members, weights.clone())?;

    let test_peps: Vec<Peptide> = test.iter().map(|t| t.0.clone()).collect();
    let test_probabilities: Vec<Option<f64>> = model
        .predict(&test_peps)
        .into_iter()
        .map(|r| r.ok().map(|p| p.probability))
        .collect();
    let mut conf = Confusion::default();
    for (p, (_, label)) in test_probabilities.iter().zip(&test) {
        if let Some(p) = p {
            conf.add(crate::tox::call(*p), *label);
        }
    }
    let test_unscored = test_probabilities.iter().filter(|p| p.is_none()).count();
    let test_metrics = conf.report();
    model.cv_report = Some(ensemble_cv);
    model.test_report = Some(test_metrics);

    let train_probabilities = model
        .predict(&train_peps)
        .into_iter()
        .map(|r| r.map(|p| p.probability))
        .collect::<Result<_>>()?;

    Ok(ToxTrainOutput {
        report: ToxTrainReport {
            input,
            after_length_filter,
            after_dedup,
            train: counts(split.train_pos.len(), split.train_neg.len()),
            test: counts(split.test_pos.len(), split.test_neg.len()),
            excluded_descriptors: excluded,
            selection,
            descriptors,
            weight_search,
            weights,
            member_cv,
            ensemble_cv,
            test_metrics,
            test_unscored,
        },
        model,
        train,
        train_probabilities,
        test,
        test_probabilities,
    })
}

/// `sequence, label, probability` rows.
pub fn labelled_predictions_tsv(rows: &[(Peptide, bool)], probs: &[Option<f64>]) -> String {
    let mut s = String::from("sequence\tlabel\tprobability\n");
    for ((p, label), prob) in rows.iter().zip(probs) {
        let label = if *label { "toxic" } else { "non-toxic" };
        let prob = prob.map_or_else(|| "NA".to_string(), |v| v.to_string());
        s.push_str(&format!("{p}\t{label}\t{prob}\n"));
    }
    s
}
