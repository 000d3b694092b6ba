//! Command-line entry point for the transcript repair toolkit.
//!
//! Machine-readable output is TSV on stdout; diagnostics go to stderr.
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or format errors.

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use asrfix::corpus::{format_corpus, read_corpus_file, read_reference_lines};
use asrfix::evo::{repair, EmbeddingTable, FitnessConfig};
use asrfix::harness::{
    evaluate_evo, evaluate_ml, format_report, generate_corpus, noise_vocabulary, repair_record,
    ChannelConfig, EvalReport, EvoSetup,
};
use asrfix::ml::{
    apply_repair, cross_validate, examples_from_rows, majority_baseline, parse_training_rows,
    train, FeatureId, NaiveBayesModel,
};
use asrfix::ontology::Ontology;
use asrfix::phonetic::{double_metaphone, metaphone, soundex, syllable_count};
use asrfix::rules::{default_rules, rules_from_file, GrammarRule};
use asrfix::tagger::TagLexicon;
use asrfix::text::{accuracy, align, tokenize, AlignOp};

#[derive(Parser)]
#[command(
    name = "asrfix",
    about = "Repair erroneous speech-recognizer transcripts for a domain",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the normalized tokens of a text, one per line
    Tokenize {
        /// Text to tokenize
        #[arg(long)]
        text: String,
    },
    /// Word-align a hypothesis against a reference and print the trace
    Align {
        /// Reference transcription
        #[arg(long = "ref")]
        reference: String,
        /// Recognizer hypothesis
        #[arg(long)]
        hyp: String,
    },
    /// Print the accuracy of a hypothesis against a reference
    Score {
        /// Reference transcription
        #[arg(long = "ref")]
        reference: String,
        /// Recognizer hypothesis
        #[arg(long)]
        hyp: String,
    },
    /// Print phonetic codes and syllable count of a word
    Encode {
        /// Word to encode
        word: String,
    },
    /// Ontology inspection
    Ontology {
        #[command(subcommand)]
        command: OntologyCommand,
    },
    /// Repair transcripts
    Repair {
        #[command(subcommand)]
        command: RepairCommand,
    },
    /// Generate a synthetic noisy corpus from reference sentences
    Gen {
        /// Reference sentences, one per line
        #[arg(long)]
        refs: String,
        /// Channel configuration file (key = value)
        #[arg(long)]
        channel: String,
        /// Output corpus TSV
        #[arg(long)]
        out: String,
        /// Ontology whose term words join the noise vocabulary
        #[arg(long)]
        ontology: Option<String>,
        /// Tag lexicon whose words join the noise vocabulary
        #[arg(long)]
        lexicon: Option<String>,
        /// Channel seed, overriding the configuration file
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate repair methods over a corpus
    Eval {
        /// Corpus TSV (id, reference, hypothesis)
        #[arg(long)]
        corpus: String,
        /// Which repair to run: evo, ml, or both
        #[arg(long)]
        method: String,
        /// Report TSV to write
        #[arg(long)]
        report: String,
        #[command(flatten)]
        evo: EvoArgs,
        /// Trained model JSON (ml and both)
        #[arg(long)]
        model: Option<String>,
    },
}

#[derive(Subcommand)]
enum OntologyCommand {
    /// Print triple and distinct-term counts
    Stats {
        /// Ontology TSV path
        path: String,
    },
}

#[derive(Args)]
struct EvoArgs {
    /// Domain ontology TSV
    #[arg(long)]
    ontology: Option<String>,
    /// Fitness configuration file (key = value)
    #[arg(long)]
    config: Option<String>,
    /// Linguistic rule file
    #[arg(long)]
    rules: Option<String>,
    /// Word-embedding table
    #[arg(long)]
    embeddings: Option<String>,
    /// Tag lexicon TSV
    #[arg(long)]
    lexicon: Option<String>,
}

#[derive(Subcommand)]
enum RepairCommand {
    /// Ontology-driven two-stage repair
    Evo {
        #[command(flatten)]
        evo: EvoArgs,
        /// Repair one sentence and print it
        #[arg(long, conflicts_with_all = ["input", "out"])]
        sentence: Option<String>,
        /// Corpus TSV to repair
        #[arg(long = "in")]
        input: Option<String>,
        /// Output TSV (id, repaired hypothesis)
        #[arg(long, requires = "input")]
        out: Option<String>,
    },
    /// Naive Bayes span repair
    Ml {
        #[command(subcommand)]
        command: MlCommand,
    },
}

#[derive(Subcommand)]
enum MlCommand {
    /// Train a model from sentence/span/correction rows
    Train {
        /// Training TSV: sentence, span_start, span_len, correction
        #[arg(long = "in")]
        input: String,
        /// Model JSON to write
        #[arg(long)]
        out: String,
        /// Laplace smoothing constant
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Active features, comma-separated among f1..f6
        #[arg(long)]
        features: Option<String>,
    },
    /// Repair marked spans of sentences with a trained model
    Apply {
        /// Model JSON
        #[arg(long)]
        model: String,
        /// Marked TSV: id, sentence, spans as start:len[;start:len...]
        #[arg(long = "in")]
        input: String,
    },
    /// K-fold cross-validation over a training file
    Cv {
        /// Training TSV: sentence, span_start, span_len, correction
        #[arg(long = "in")]
        input: String,
        /// Fold count
        #[arg(long)]
        k: usize,
        /// Shuffle seed
        #[arg(long)]
        seed: u64,
        /// Laplace smoothing constant
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Active features, comma-separated among f1..f6
        #[arg(long)]
        features: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version land here with non-error kinds.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_features(arg: &Option<String>) -> anyhow::Result<Vec<FeatureId>> {
    match arg {
        None => Ok(FeatureId::default_active()),
        Some(s) => {
            let mut out = Vec::new();
            for part in s.split(',') {
                out.push(FeatureId::parse(part)?);
            }
            Ok(out)
        }
    }
}

struct EvoPieces {
    ontology: Ontology,
    config: FitnessConfig,
    rules: Vec<GrammarRule>,
    embeddings: Option<EmbeddingTable>,
    lexicon: TagLexicon,
}

fn load_evo(args: &EvoArgs) -> anyhow::Result<EvoPieces> {
    let ontology = match &args.ontology {
        Some(path) => Ontology::from_file(path)?,
        None => anyhow::bail!("--ontology is required for evo repair"),
    };
    let config = match &args.config {
        Some(path) => FitnessConfig::from_file(path)?,
        None => FitnessConfig::default(),
    };
    let rules = match &args.rules {
        Some(path) => rules_from_file(path)?,
        None => default_rules(),
    };
    let embeddings = match &args.embeddings {
        Some(path) => Some(EmbeddingTable::from_file(path)?),
        None => None,
    };
    let lexicon = match &args.lexicon {
        Some(path) => TagLexicon::from_file(path)?,
        None => TagLexicon::builtin(),
    };
    Ok(EvoPieces { ontology, config, rules, embeddings, lexicon })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Tokenize { text } => {
            for token in tokenize(&text).iter() {
                println!("{token}");
            }
        }
        Command::Align { reference, hyp } => {
            let rf = tokenize(&reference);
            let hy = tokenize(&hyp);
            let trace = align(&hy, &rf);
            println!("# cost\t{}", trace.cost);
            for op in &trace.ops {
                let (name, h, r) = match *op {
                    AlignOp::Match { hyp, rf } => ("match", Some(hyp), Some(rf)),
                    AlignOp::Substitute { hyp, rf } => ("substitute", Some(hyp), Some(rf)),
                    AlignOp::Insert { hyp } => ("insert", Some(hyp), None),
                    AlignOp::Delete { rf } => ("delete", None, Some(rf)),
                };
                let htok = h.map(|i| hy.tokens()[i].as_str()).unwrap_or("");
                let rtok = r.map(|i| rf.tokens()[i].as_str()).unwrap_or("");
                let hidx = h.map(|i| i.to_string()).unwrap_or_default();
                let ridx = r.map(|i| i.to_string()).unwrap_or_default();
                println!("{name}\t{hidx}\t{ridx}\t{htok}\t{rtok}");
            }
        }
        Command::Score { reference, hyp } => {
            let acc = accuracy(&tokenize(&hyp), &tokenize(&reference))?;
            println!("{acc:.1}");
        }
        Command::Encode { word } => {
            let (primary, alternate) = double_metaphone(&word)?;
            println!("soundex\t{}", soundex(&word)?);
            println!("metaphone\t{}", metaphone(&word)?);
            println!("dmeta_primary\t{primary}");
            println!("dmeta_alternate\t{alternate}");
            println!("syllables\t{}", syllable_count(&word));
        }
        Command::Ontology { command } => match command {
            OntologyCommand::Stats { path } => {
                let ont = Ontology::from_file(&path)?;
                println!("triples\t{}", ont.triple_count());
                println!("terms\t{}", ont.term_count());
            }
        },
        Command::Repair { command } => run_repair(command)?,
        Command::Gen { refs, channel, out, ontology, lexicon, seed } => {
            let references = read_reference_lines(&refs)?;
            let mut cfg = ChannelConfig::from_file(&channel)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let ont = match &ontology {
                Some(path) => Some(Ontology::from_file(path)?),
                None => None,
            };
            let lex = match &lexicon {
                Some(path) => Some(TagLexicon::from_file(path)?),
                None => None,
            };
            let vocab = noise_vocabulary(&references, ont.as_ref(), lex.as_ref());
            let corpus = generate_corpus(&references, &cfg, &vocab)?;
            std::fs::write(&out, format_corpus(&corpus))?;
            eprintln!("wrote {} in-band pairs to {}", corpus.len(), out);
        }
        Command::Eval { corpus, method, report, evo, model } => {
            let records = read_corpus_file(&corpus)?;
            let mut reports: Vec<EvalReport> = Vec::new();
            if method == "evo" || method == "both" {
                let pieces = load_evo(&evo)?;
                let setup = EvoSetup {
                    ontology: &pieces.ontology,
                    config: &pieces.config,
                    rules: &pieces.rules,
                    embeddings: pieces.embeddings.as_ref(),
                    lexicon: &pieces.lexicon,
                };
                reports.push(evaluate_evo(&records, &setup)?);
            }
            if method == "ml" || method == "both" {
                let path = model
                    .as_ref()
                    .ok_or_else(|| anyhow::anyhow!("--model is required for ml evaluation"))?;
                let model = NaiveBayesModel::load(path)?;
                reports.push(evaluate_ml(&records, &model)?);
            }
            if reports.is_empty() {
                anyhow::bail!("unknown method {method:?}, expected evo, ml, or both");
            }
            let refs: Vec<&EvalReport> = reports.iter().collect();
            std::fs::write(&report, format_report(&refs))?;
            for r in &reports {
                eprintln!(
                    "{}: mean {:.2} -> {:.2} ({} improved, {} unchanged, {} degraded)",
                    r.method, r.mean_before, r.mean_after, r.improved, r.unchanged, r.degraded
                );
            }
        }
    }
    Ok(())
}

fn run_repair(command: RepairCommand) -> anyhow::Result<()> {
    match command {
        RepairCommand::Evo { evo, sentence, input, out } => {
            let pieces = load_evo(&evo)?;
            if let Some(sentence) = sentence {
                let result = repair(
                    &sentence,
                    &pieces.ontology,
                    &pieces.config,
                    &pieces.rules,
                    pieces.embeddings.as_ref(),
                    &pieces.lexicon,
                );
                println!("{}", result.output.detokenize());
                return Ok(());
            }
            let input = input.ok_or_else(|| {
                anyhow::anyhow!("either --sentence or --in/--out is required")
            })?;
            let out = out.ok_or_else(|| anyhow::anyhow!("--out is required with --in"))?;
            let records = read_corpus_file(&input)?;
            let setup = EvoSetup {
                ontology: &pieces.ontology,
                config: &pieces.config,
                rules: &pieces.rules,
                embeddings: pieces.embeddings.as_ref(),
                lexicon: &pieces.lexicon,
            };
            let mut lines = String::new();
            for record in &records {
                let result = repair_record(record, &setup);
                lines.push_str(&format!("{}\t{}\n", record.id, result.output.detokenize()));
            }
            std::fs::write(&out, lines)?;
            eprintln!("repaired {} sentences into {}", records.len(), out);
        }
        RepairCommand::Ml { command } => match command {
            MlCommand::Train { input, out, alpha, features } => {
                let text = std::fs::read_to_string(&input)?;
                let rows = parse_training_rows(&text, &input)?;
                let examples = examples_from_rows(&rows)?;
                let active = parse_features(&features)?;
                let model = train(&examples, alpha, &active)?;
                model.save(&out)?;
                eprintln!(
                    "trained on {} examples, {} labels, into {}",
                    examples.len(),
                    model.labels().count(),
                    out
                );
            }
            MlCommand::Apply { model, input } => {
                let model = NaiveBayesModel::load(&model)?;
                let text = std::fs::read_to_string(&input)?;
                for (lineno, line) in text.lines().enumerate() {
                    let line = line.trim_end();
                    if line.trim().is_empty() || line.trim_start().starts_with('#') {
                        continue;
                    }
                    let fields: Vec<&str> = line.split('\t').collect();
                    if fields.len() != 3 {
                        anyhow::bail!(
                            "{input}:{}: expected id<TAB>sentence<TAB>spans",
                            lineno + 1
                        );
                    }
                    let sentence = tokenize(fields[1]);
                    let mut spans = Vec::new();
                    for part in fields[2].split(';').filter(|p| !p.trim().is_empty()) {
                        let (s, l) = part
                            .split_once(':')
                            .ok_or_else(|| anyhow::anyhow!("bad span {part:?}"))?;
                        spans.push((s.trim().parse::<usize>()?, l.trim().parse::<usize>()?));
                    }
                    let repaired = apply_repair(&model, &sentence, &spans)?;
                    println!("{}\t{}", fields[0], repaired.detokenize());
                }
            }
            MlCommand::Cv { input, k, seed, alpha, features } => {
                let text = std::fs::read_to_string(&input)?;
                let rows = parse_training_rows(&text, &input)?;
                let examples = examples_from_rows(&rows)?;
                let active = parse_features(&features)?;
                let report = cross_validate(&examples, k, alpha, &active, seed)?;
                for (i, acc) in report.fold_accuracy.iter().enumerate() {
                    println!("fold\t{}\t{:.4}", i + 1, acc);
                }
                println!("mean\t{:.4}", report.mean_accuracy);
                println!("majority_baseline\t{:.4}", majority_baseline(&examples));
            }
        },
    }
    Ok(())
}
