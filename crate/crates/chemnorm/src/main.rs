use std::io::{self, BufRead, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chemnorm::error::{Error, Result};
use chemnorm::formats::{self, Dtype};
use chemnorm::pipeline::{encode_name, pipeline_evaluate, pipeline_train, standardize, standardize_batch};
use chemnorm::{load_artifacts, report, PipelineConfig};
use chemnorm_core::bpe::{apply_bpe, detokenize, train_bpe, TokenizedName};
use chemnorm_core::corpus::{augment_pairs, synthetic, AugmentationConfig};
use chemnorm_core::eval::distance_histogram;
use chemnorm_core::fuzzy::{build_vocabulary, correct_name, BkTree};
use chemnorm_core::neural::attention_matrix;
use clap::{Args, Parser, Subcommand};

/// Chemical name standardization: spelling correction, BPE and an
/// attentional seq2seq model.
#[derive(Parser)]
#[command(name = "chemnorm", version)]
struct Cli {
    /// TOML pipeline configuration; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the elemental-word vocabulary from a pair corpus.
    BuildVocab {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        min_count: Option<usize>,
    },
    /// Learn BPE merges from both sides of a pair corpus or a name list.
    TrainBpe {
        #[arg(long, required_unless_present = "names")]
        corpus: Option<PathBuf>,
        #[arg(long, conflicts_with = "corpus")]
        names: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        num_merges: Option<usize>,
    },
    /// Tokenize names (one per line) with a merges file, or detokenize.
    ApplyBpe {
        #[arg(long)]
        merges: PathBuf,
        /// Input file; standard input when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        detokenize: bool,
    },
    /// Spell-correct names against a vocabulary file.
    Correct {
        #[arg(long)]
        vocab: PathBuf,
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        input: Option<PathBuf>,
        #[arg(long)]
        threshold: Option<usize>,
    },
    /// Train the full pipeline and write artifacts into a directory.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Standardize one name or a file of names (one per line).
    Standardize {
        #[arg(long)]
        artifacts: PathBuf,
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        input: Option<PathBuf>,
        /// Write the attention matrix of a single name as CSV.
        #[arg(long, requires = "name")]
        attention: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Standardize a test corpus and write accuracy/BLEU reports.
    Evaluate {
        #[arg(long)]
        artifacts: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Inject character-level noise into the non-systematic side of a corpus.
    Augment {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0.025)]
        p_error: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a seeded synthetic pair corpus.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Identical names on both sides.
        #[arg(long)]
        copy: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Histogram of edit distances between the two sides of a corpus.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        /// Write the histogram as CSV instead of printing it.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    threshold: Option<usize>,
    #[arg(long)]
    min_count: Option<usize>,
    #[arg(long)]
    num_merges: Option<usize>,
    #[arg(long)]
    beam_size: Option<usize>,
    #[arg(long)]
    bucket_width: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    checkpoint_dtype: Option<Dtype>,
    #[arg(long)]
    split_seed: Option<u64>,
    #[arg(long)]
    embed_dim: Option<usize>,
    #[arg(long)]
    hidden_dim: Option<usize>,
    #[arg(long)]
    num_layers: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    decay_start_epoch: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_decode_len: Option<usize>,
}

impl Overrides {
    fn apply(&self, c: &mut PipelineConfig) {
        fn set<T: Clone>(dst: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *dst = v.clone();
            }
        }
        set(&mut c.threshold, &self.threshold);
        set(&mut c.min_count, &self.min_count);
        set(&mut c.num_merges, &self.num_merges);
        set(&mut c.beam_size, &self.beam_size);
        set(&mut c.bucket_width, &self.bucket_width);
        set(&mut c.threads, &self.threads);
        set(&mut c.checkpoint_dtype, &self.checkpoint_dtype);
        set(&mut c.split.seed, &self.split_seed);
        set(&mut c.model.embed_dim, &self.embed_dim);
        set(&mut c.model.hidden_dim, &self.hidden_dim);
        set(&mut c.model.num_layers, &self.num_layers);
        set(&mut c.model.dropout, &self.dropout);
        set(&mut c.train.batch_size, &self.batch_size);
        set(&mut c.train.initial_lr, &self.lr);
        set(&mut c.train.epochs, &self.epochs);
        set(&mut c.train.decay_start_epoch, &self.decay_start_epoch);
        set(&mut c.train.seed, &self.seed);
        set(&mut c.train.max_decode_len, &self.max_decode_len);
    }
}

fn base_config(path: &Option<PathBuf>) -> Result<PipelineConfig> {
    path.as_deref().map_or_else(|| Ok(PipelineConfig::default()), PipelineConfig::load)
}

fn finish(mut cfg: PipelineConfig, overrides: &Overrides) -> Result<PipelineConfig> {
    overrides.apply(&mut cfg);
    cfg.validate().map_err(Error::Usage)?;
    Ok(cfg)
}

fn read_input_names(input: &Option<PathBuf>) -> Result<Vec<String>> {
    match input {
        Some(p) => formats::load_names(p),
        None => io::stdin()
            .lock()
            .lines()
            .map(|l| l.map_err(|e| Error::io("<stdin>", e)))
            .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
            .collect(),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn print_lines<I: IntoIterator<Item = String>>(lines: I) -> Result<()> {
    let mut out = io::stdout().lock();
    for l in lines {
        writeln!(out, "{l}").map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

fn load_lexicon(path: &Path) -> Result<chemnorm_core::fuzzy::Lexicon> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    formats::parse_lexicon(&text).map_err(|m| Error::data(path, m))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildVocab { corpus, output, min_count } => {
            let mut cfg = base_config(&cli.config)?;
            if let Some(m) = min_count {
                cfg.min_count = m;
            }
            let pairs = formats::load_pairs(&corpus)?;
            let sys: Vec<&str> = pairs.iter().map(|p| p.systematic.as_str()).collect();
            let non: Vec<&str> = pairs.iter().map(|p| p.non_systematic.as_str()).collect();
            let vocab = build_vocabulary(&sys, &non, cfg.min_count)?;
            write_file(&output, &formats::format_lexicon(&vocab.lexicon()))?;
            eprintln!(
                "{} systematic + {} non-systematic words",
                vocab.systematic_words.len(),
                vocab.nonsystematic_words.len()
            );
        }
        Command::TrainBpe { corpus, names, output, num_merges } => {
            let cfg = base_config(&cli.config)?;
            let lines: Vec<String> = match (corpus, names) {
                (Some(c), _) => formats::load_pairs(&c)?
                    .into_iter()
                    .flat_map(|p| [p.non_systematic, p.systematic])
                    .collect(),
                (None, Some(n)) => formats::load_names(&n)?,
                (None, None) => return Err(Error::Usage("one of --corpus or --names is required".into())),
            };
            let table = train_bpe(&lines, num_merges.unwrap_or(cfg.num_merges))?;
            write_file(&output, &formats::format_merges(&table))?;
            eprintln!("{} merges", table.merges().len());
        }
        Command::ApplyBpe { merges, input, detokenize: detok } => {
            let text = std::fs::read_to_string(&merges).map_err(|e| Error::io(&merges, e))?;
            let table = formats::parse_merges(&text).map_err(|m| Error::data(&merges, m))?;
            let names = read_input_names(&input)?;
            print_lines(names.iter().map(|n| {
                if detok {
                    detokenize(&TokenizedName::from_line(n).tokens)
                } else {
                    apply_bpe(n, &table).to_line()
                }
            }))?;
        }
        Command::Correct { vocab, name, input, threshold } => {
            let cfg = base_config(&cli.config)?;
            let tree = BkTree::from_lexicon(&load_lexicon(&vocab)?);
            let threshold = threshold.unwrap_or(cfg.threshold);
            let names = match name {
                Some(n) => vec![n],
                None => read_input_names(&input)?,
            };
            print_lines(names.iter().map(|n| correct_name(n, &tree, threshold).corrected))?;
        }
        Command::Train { corpus, out, overrides } => {
            let cfg = finish(base_config(&cli.config)?, &overrides)?;
            let (_, split, summary) = pipeline_train(&corpus, &out, &cfg, |e, _| {
                let dev = e.dev_perplexity.map(|p| format!("{p:.3}")).unwrap_or_else(|| "-".into());
                eprintln!(
                    "epoch {:>3}  lr {:<8}  train ppl {:.3}  dev ppl {dev}",
                    e.epoch, e.lr, e.train_perplexity
                );
                ControlFlow::Continue(())
            })?;
            eprintln!(
                "split {}/{}/{}; {} vocabulary words; {} training names corrected; {} merges; {} model tokens; {} parameters",
                split.train.len(),
                split.test.len(),
                split.dev.len(),
                summary.vocabulary_words,
                summary.corrected_names,
                summary.merges,
                summary.model_vocab,
                summary.parameters
            );
        }
        Command::Standardize { artifacts, name, input, attention, overrides } => {
            let (art, stored) = load_artifacts(&artifacts)?;
            let cfg = finish(if cli.config.is_some() { base_config(&cli.config)? } else { stored }, &overrides)?;
            match name {
                Some(n) => {
                    let out = standardize(&n, &art, &cfg)?;
                    if let Some(path) = attention {
                        let corrected = correct_name(&n, &art.tree, cfg.threshold).corrected;
                        let src_tokens = apply_bpe(&corrected, &art.merges).tokens;
                        let src = encode_name(&corrected, &art.merges, art.vocab());
                        let mut tgt_tokens = apply_bpe(&out, &art.merges).tokens;
                        let mut tgt = art.vocab().encode(&tgt_tokens);
                        tgt.push(chemnorm_core::neural::EOS);
                        tgt_tokens.push("</s>".into());
                        let alpha = attention_matrix(&art.params, &src, &tgt)?;
                        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                        formats::write_attention_csv(file, &src_tokens, &tgt_tokens, &alpha)
                            .map_err(|e| Error::io(&path, io::Error::other(e)))?;
                    }
                    print_lines([out])?;
                }
                None => {
                    let names = read_input_names(&input)?;
                    print_lines(standardize_batch(&names, &art, &cfg)?)?;
                }
            }
        }
        Command::Evaluate { artifacts, test, out, overrides } => {
            let (art, stored) = load_artifacts(&artifacts)?;
            let cfg = finish(if cli.config.is_some() { base_config(&cli.config)? } else { stored }, &overrides)?;
            let pairs = formats::load_pairs(&test)?;
            let eval = pipeline_evaluate(&pairs, &art, &cfg)?;
            report::save_report(&out, &eval)?;
            print!("{}", report::render_text(&eval));
        }
        Command::Augment { corpus, output, p_error, seed } => {
            let pairs = formats::load_pairs(&corpus)?;
            let augmented = augment_pairs(&pairs, &AugmentationConfig { p_error, seed })?;
            formats::save_pairs(&output, &augmented)?;
        }
        Command::Synth { n, seed, copy, output } => {
            let pairs = if copy {
                synthetic::generate_copy(n, seed)
            } else {
                synthetic::generate(n, &synthetic::SyntheticConfig { seed, ..Default::default() })
            };
            formats::save_pairs(&output, &pairs)?;
        }
        Command::Stats { corpus, output } => {
            let pairs = formats::load_pairs(&corpus)?;
            let hist =
                distance_histogram(pairs.iter().map(|p| (p.non_systematic.as_str(), p.systematic.as_str())));
            match output {
                Some(path) => write_file(&path, &report::histogram_csv(&hist))?,
                None => print_lines(hist.iter().map(|(d, n)| format!("{d}\t{n}")))?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
