//! Correct, tokenize, translate: training and inference over the three
//! stages.

use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::path::Path;
use std::thread;

use chemnorm_core::bpe::{apply_bpe, detokenize, symbol_vocab, train_bpe, MergeTable};
use chemnorm_core::corpus::{normalize_name, split_corpus, CorpusSplit, DataPair};
use chemnorm_core::eval::{accuracy_by_length, distance_histogram, EvalReport, LengthBucket};
use chemnorm_core::fuzzy::{build_vocabulary, correct_name, BkTree, Lexicon};
use chemnorm_core::neural::{beam_search, train_with, EpochLog, Example, ModelParams, Vocab};

use crate::artifacts::save_artifacts;
use crate::config::PipelineConfig;
use crate::error::{Error, Result, StageExt};
use crate::formats::{load_pairs, save_split};
use crate::report::write_train_log;

/// Everything inference needs: the correction vocabulary and its BK-tree,
/// the BPE merges and the translation model.
#[derive(Debug, Clone)]
pub struct PipelineArtifacts {
    pub lexicon: Lexicon,
    pub tree: BkTree,
    pub merges: MergeTable,
    pub params: ModelParams,
}

impl PartialEq for PipelineArtifacts {
    // The tree is a function of the lexicon.
    fn eq(&self, other: &Self) -> bool {
        self.lexicon == other.lexicon && self.merges == other.merges && self.params == other.params
    }
}

impl PipelineArtifacts {
    pub fn new(lexicon: Lexicon, merges: MergeTable, params: ModelParams) -> Self {
        let tree = BkTree::from_lexicon(&lexicon);
        Self {
            lexicon,
            tree,
            merges,
            params,
        }
    }

    pub fn vocab(&self) -> &Vocab {
        &self.params.config.vocab
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub train_pairs: usize,
    pub dev_pairs: usize,
    pub vocabulary_words: usize,
    /// Training names changed by spelling correction.
    pub corrected_names: usize,
    pub merges: usize,
    pub model_vocab: usize,
    pub parameters: usize,
    pub epochs: Vec<EpochLog>,
}

/// Spell-corrects every non-systematic name; systematic names are gold and
/// stay as they are.
pub fn correct_pairs(pairs: &[DataPair], tree: &BkTree, threshold: usize) -> Vec<DataPair> {
    pairs
        .iter()
        .map(|p| DataPair {
            non_systematic: correct_name(&p.non_systematic, tree, threshold).corrected,
            systematic: p.systematic.clone(),
        })
        .collect()
}

pub fn encode_name(name: &str, merges: &MergeTable, vocab: &Vocab) -> Vec<u32> {
    vocab.encode(&apply_bpe(name, merges).tokens)
}

/// Builds all artifacts from a training split: vocabulary and BK-tree,
/// correction of the training (and dev) inputs, BPE over both sides of the
/// corrected training pairs, then seq2seq training. `on_epoch` sees every
/// epoch and may stop training early.
pub fn build_artifacts<F>(
    train: &[DataPair],
    dev: &[DataPair],
    cfg: &PipelineConfig,
    mut on_epoch: F,
) -> Result<(PipelineArtifacts, TrainSummary)>
where
    F: FnMut(&EpochLog, &ModelParams) -> ControlFlow<()>,
{
    cfg.validate().map_err(Error::Usage)?;
    if train.is_empty() {
        return Err(Error::Stage {
            stage: "vocabulary",
            source: chemnorm_core::Error::InvalidInput("empty training set".into()),
        });
    }
    let systematic: Vec<&str> = train.iter().map(|p| p.systematic.as_str()).collect();
    let non_systematic: Vec<&str> = train.iter().map(|p| p.non_systematic.as_str()).collect();
    let vocabulary = build_vocabulary(&systematic, &non_systematic, cfg.min_count).stage("vocabulary")?;
    let lexicon = vocabulary.lexicon();
    let tree = BkTree::from_lexicon(&lexicon);

    let train_corrected = correct_pairs(train, &tree, cfg.threshold);
    let dev_corrected = correct_pairs(dev, &tree, cfg.threshold);
    let corrected_names = train
        .iter()
        .zip(&train_corrected)
        .filter(|(a, b)| a.non_systematic != b.non_systematic)
        .count();

    let bpe_corpus: Vec<&str> = train_corrected
        .iter()
        .flat_map(|p| [p.non_systematic.as_str(), p.systematic.as_str()])
        .collect();
    let merges = train_bpe(&bpe_corpus, cfg.num_merges).stage("bpe")?;
    let vocab = Vocab::from_symbols(symbol_vocab(&merges)).stage("bpe")?;

    let to_examples = |pairs: &[DataPair]| -> Vec<Example> {
        pairs
            .iter()
            .map(|p| {
                Example::new(
                    encode_name(&p.non_systematic, &merges, &vocab),
                    encode_name(&p.systematic, &merges, &vocab),
                )
            })
            .collect()
    };
    let train_examples = to_examples(&train_corrected);
    let dev_examples = to_examples(&dev_corrected);

    let train_cfg = cfg.train.to_config();
    let model_cfg = cfg.model.to_config(vocab.clone());
    let params = ModelParams::init(&model_cfg, &train_cfg).stage("model")?;
    let outcome = train_with(params, &train_examples, &train_cfg, &dev_examples, &mut on_epoch).stage("model")?;

    let summary = TrainSummary {
        train_pairs: train.len(),
        dev_pairs: dev.len(),
        vocabulary_words: lexicon.len(),
        corrected_names,
        merges: merges.merges().len(),
        model_vocab: vocab.len(),
        parameters: outcome.params.num_parameters(),
        epochs: outcome.log,
    };
    Ok((
        PipelineArtifacts {
            lexicon,
            tree,
            merges,
            params: outcome.params,
        },
        summary,
    ))
}

/// Loads and splits a corpus, trains all stages, and writes the split
/// (under `split/`), the artifacts with their manifest, and `train_log.csv`
/// into `out_dir`.
pub fn pipeline_train<F>(
    corpus: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
    on_epoch: F,
) -> Result<(PipelineArtifacts, CorpusSplit, TrainSummary)>
where
    F: FnMut(&EpochLog, &ModelParams) -> ControlFlow<()>,
{
    cfg.validate().map_err(Error::Usage)?;
    let pairs = load_pairs(corpus)?;
    let split = split_corpus(&pairs, cfg.split.ratios(), cfg.split.seed).stage("split")?;
    let (artifacts, summary) = build_artifacts(&split.train, &split.dev, cfg, on_epoch)?;
    save_split(&out_dir.join("split"), &split, cfg.split.ratios())?;
    save_artifacts(&artifacts, cfg, out_dir)?;
    write_train_log(&out_dir.join("train_log.csv"), &summary.epochs)?;
    Ok((artifacts, split, summary))
}

/// correct → BPE → beam search → detokenize.
pub fn standardize(name: &str, artifacts: &PipelineArtifacts, cfg: &PipelineConfig) -> Result<String> {
    let name = normalize_name(name);
    if name.is_empty() {
        return Err(Error::Core(chemnorm_core::Error::InvalidInput("empty name".into())));
    }
    let corrected = correct_name(&name, &artifacts.tree, cfg.threshold).corrected;
    let source = encode_name(&corrected, &artifacts.merges, artifacts.vocab());
    let output = beam_search(&artifacts.params, &source, cfg.beam_size, cfg.train.max_decode_len).stage("decode")?;
    Ok(detokenize(&artifacts.vocab().decode(&output)))
}

/// [`standardize`] over many names, fanned out over `cfg.worker_threads()`
/// threads. Output order follows input order.
pub fn standardize_batch<S: AsRef<str> + Sync>(
    names: &[S],
    artifacts: &PipelineArtifacts,
    cfg: &PipelineConfig,
) -> Result<Vec<String>> {
    let workers = cfg.worker_threads().clamp(1, names.len().max(1));
    if workers == 1 {
        return names.iter().map(|n| standardize(n.as_ref(), artifacts, cfg)).collect();
    }
    let chunk = names.len().div_ceil(workers);
    thread::scope(|s| {
        let handles: Vec<_> = names
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|n| standardize(n.as_ref(), artifacts, cfg))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(names.len());
        for h in handles {
            out.extend(h.join().expect("standardize worker panicked")?);
        }
        Ok(out)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleRow {
    pub input: String,
    pub prediction: String,
    pub reference: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvalReport,
    pub rows: Vec<ExampleRow>,
    /// Edit distance from input to reference.
    pub input_distances: BTreeMap<usize, usize>,
    /// Edit distance from prediction to reference.
    pub output_distances: BTreeMap<usize, usize>,
    pub bucket_width: usize,
    pub by_length: Vec<LengthBucket>,
}

/// Scores fixed predictions.
pub fn evaluate_predictions(
    inputs: &[String],
    predictions: &[String],
    references: &[String],
    bucket_width: usize,
) -> Result<Evaluation> {
    if inputs.len() != references.len() {
        return Err(Error::Core(chemnorm_core::Error::LengthMismatch {
            left: inputs.len(),
            right: references.len(),
        }));
    }
    let report = EvalReport::compute(predictions, references).stage("evaluate")?;
    let by_length = accuracy_by_length(predictions, references, bucket_width).stage("evaluate")?;
    let rows = inputs
        .iter()
        .zip(predictions)
        .zip(references)
        .map(|((i, p), r)| ExampleRow {
            input: i.clone(),
            prediction: p.clone(),
            reference: r.clone(),
            correct: p == r,
        })
        .collect();
    Ok(Evaluation {
        report,
        rows,
        input_distances: distance_histogram(inputs.iter().map(String::as_str).zip(references.iter().map(String::as_str))),
        output_distances: distance_histogram(
            predictions.iter().map(String::as_str).zip(references.iter().map(String::as_str)),
        ),
        bucket_width,
        by_length,
    })
}

/// Standardizes every non-systematic test name and scores the results.
pub fn pipeline_evaluate(test: &[DataPair], artifacts: &PipelineArtifacts, cfg: &PipelineConfig) -> Result<Evaluation> {
    let inputs: Vec<String> = test.iter().map(|p| p.non_systematic.clone()).collect();
    let references: Vec<String> = test.iter().map(|p| p.systematic.clone()).collect();
    let predictions = standardize_batch(&inputs, artifacts, cfg)?;
    evaluate_predictions(&inputs, &predictions, &references, cfg.bucket_width)
}
