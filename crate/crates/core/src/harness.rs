//! Synthetic noisy-channel corpus generation and end-to-end evaluation.
//!
//! The channel stands in for a real recognizer: seeded substitutions
//! (optionally drawn from same-soundex-class words), deletions, and
//! insertions over reference sentences. Emitted pairs are filtered to the
//! usable accuracy band, at least 70% but below 100%, where adaptation has
//! both room and hope.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::CorpusRecord;
use crate::error::{Error, Result};
use crate::evo::{repair, repair_tagged, EmbeddingTable, FitnessConfig, RepairResult};
use crate::ml::{apply_repair, NaiveBayesModel};
use crate::ontology::Ontology;
use crate::phonetic::soundex;
use crate::rules::GrammarRule;
use crate::tagger::{TagLexicon, TaggedSentence};
use crate::text::{accuracy, align, extract_mispairs, tokenize};

/// Lower edge of the usable accuracy band.
pub const BAND_FLOOR: f64 = 70.0;

/// Noise parameters of the synthetic channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub substitution_rate: f64,
    pub deletion_rate: f64,
    pub insertion_rate: f64,
    /// Substitutions draw from words sharing the victim's soundex class.
    pub phonetic_confusion: bool,
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            substitution_rate: 0.1,
            deletion_rate: 0.02,
            insertion_rate: 0.02,
            phonetic_confusion: true,
            seed: 17,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("substitution_rate", self.substitution_rate),
            ("deletion_rate", self.deletion_rate),
            ("insertion_rate", self.insertion_rate),
        ];
        for (key, rate) in rates {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config {
                    key: key.to_string(),
                    msg: "must lie in [0, 1]".to_string(),
                });
            }
        }
        let sum = self.substitution_rate + self.deletion_rate + self.insertion_rate;
        if sum > 1.0 + 1e-9 {
            return Err(Error::Config {
                key: "substitution_rate".to_string(),
                msg: "rates must sum to at most 1".to_string(),
            });
        }
        Ok(())
    }

    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ChannelConfig::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                key: line.to_string(),
                msg: "expected key = value".to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |msg: &str| Error::Config { key: key.to_string(), msg: msg.to_string() };
            match key {
                "substitution_rate" => {
                    cfg.substitution_rate = value.parse().map_err(|_| bad("not a number"))?
                }
                "deletion_rate" => {
                    cfg.deletion_rate = value.parse().map_err(|_| bad("not a number"))?
                }
                "insertion_rate" => {
                    cfg.insertion_rate = value.parse().map_err(|_| bad("not a number"))?
                }
                "phonetic_confusion" => {
                    cfg.phonetic_confusion = value.parse().map_err(|_| bad("not a boolean"))?
                }
                "seed" => cfg.seed = value.parse().map_err(|_| bad("not an integer"))?,
                _ => return Err(bad("unknown key")),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Deduplicated, sorted noise vocabulary: ontology term words, lexicon
/// words, and every reference word.
pub fn noise_vocabulary(
    references: &[String],
    ontology: Option<&Ontology>,
    lexicon: Option<&TagLexicon>,
) -> Vec<String> {
    let mut words: Vec<String> = Vec::new();
    if let Some(ont) = ontology {
        for term in ont.terms() {
            words.extend(term.split_whitespace().map(str::to_string));
        }
    }
    if let Some(lex) = lexicon {
        words.extend(lex.words());
    }
    for r in references {
        words.extend(tokenize(r).tokens().iter().cloned());
    }
    words.sort();
    words.dedup();
    words
}

/// Runs the channel over the references and keeps the pairs whose accuracy
/// lands in `[70, 100)`. Identical seeds give byte-identical output.
pub fn generate_corpus(
    references: &[String],
    cfg: &ChannelConfig,
    vocab: &[String],
) -> Result<Vec<CorpusRecord>> {
    if references.is_empty() {
        return Err(Error::EmptyReferenceList);
    }
    cfg.validate()?;

    // Same-soundex classes over the vocabulary.
    let mut classes: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for w in vocab {
        if let Ok(code) = soundex(w) {
            classes.entry(code).or_default().push(w.clone());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::new();
    for (idx, reference) in references.iter().enumerate() {
        let ref_tokens = tokenize(reference);
        let mut hyp: Vec<String> = Vec::with_capacity(ref_tokens.len());
        for tok in ref_tokens.iter() {
            let roll: f64 = rng.gen();
            if roll < cfg.substitution_rate {
                if let Some(sub) = pick_substitute(tok, cfg, &classes, vocab, &mut rng) {
                    hyp.push(sub);
                } else {
                    hyp.push(tok.clone());
                }
            } else if roll < cfg.substitution_rate + cfg.deletion_rate {
                // dropped word
            } else {
                hyp.push(tok.clone());
            }
            if rng.gen::<f64>() < cfg.insertion_rate {
                if let Some(extra) = vocab.choose(&mut rng) {
                    hyp.push(extra.clone());
                }
            }
        }
        let hyp_text = hyp.join(" ");
        let acc = accuracy(&tokenize(&hyp_text), &ref_tokens)?;
        if (BAND_FLOOR..100.0).contains(&acc) {
            records.push(CorpusRecord {
                id: (idx + 1).to_string(),
                reference: reference.clone(),
                hypothesis: hyp_text,
                tagged: None,
            });
        }
    }
    Ok(records)
}

fn pick_substitute(
    word: &str,
    cfg: &ChannelConfig,
    classes: &BTreeMap<String, Vec<String>>,
    vocab: &[String],
    rng: &mut ChaCha8Rng,
) -> Option<String> {
    if cfg.phonetic_confusion {
        if let Ok(code) = soundex(word) {
            let others: Vec<&String> = classes
                .get(&code)
                .map(|c| c.iter().filter(|w| *w != word).collect())
                .unwrap_or_default();
            if let Some(choice) = others.choose(rng) {
                return Some((*choice).clone());
            }
        }
    }
    let others: Vec<&String> = vocab.iter().filter(|w| *w != word).collect();
    others.choose(rng).map(|w| (*w).clone())
}

/// Per-sentence accuracies of one repair method.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub id: String,
    pub before: f64,
    pub after: f64,
    pub delta: f64,
}

/// Counts of accuracies below 70, in [70, 100), and at 100.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BandHistogram {
    pub below_band: usize,
    pub in_band: usize,
    pub full: usize,
}

impl BandHistogram {
    fn tally(values: impl Iterator<Item = f64>) -> Self {
        let mut h = BandHistogram::default();
        for v in values {
            if v >= 100.0 {
                h.full += 1;
            } else if v >= BAND_FLOOR {
                h.in_band += 1;
            } else {
                h.below_band += 1;
            }
        }
        h
    }
}

/// Evaluation of one method over one corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: String,
    pub rows: Vec<EvalRow>,
    pub mean_before: f64,
    pub mean_after: f64,
    pub improved: usize,
    pub unchanged: usize,
    pub degraded: usize,
    pub band_before: BandHistogram,
    pub band_after: BandHistogram,
}

impl EvalReport {
    fn from_rows(method: &str, rows: Vec<EvalRow>) -> Self {
        let n = rows.len().max(1) as f64;
        let mean_before = rows.iter().map(|r| r.before).sum::<f64>() / n;
        let mean_after = rows.iter().map(|r| r.after).sum::<f64>() / n;
        let improved = rows.iter().filter(|r| r.delta > 0.0).count();
        let degraded = rows.iter().filter(|r| r.delta < 0.0).count();
        let unchanged = rows.len() - improved - degraded;
        let band_before = BandHistogram::tally(rows.iter().map(|r| r.before));
        let band_after = BandHistogram::tally(rows.iter().map(|r| r.after));
        EvalReport {
            method: method.to_string(),
            rows,
            mean_before,
            mean_after,
            improved,
            unchanged,
            degraded,
            band_before,
            band_after,
        }
    }

    pub fn mean_delta(&self) -> f64 {
        self.mean_after - self.mean_before
    }
}

/// Everything the gene-and-rules repair needs at evaluation time.
pub struct EvoSetup<'a> {
    pub ontology: &'a Ontology,
    pub config: &'a FitnessConfig,
    pub rules: &'a [GrammarRule],
    pub embeddings: Option<&'a EmbeddingTable>,
    pub lexicon: &'a TagLexicon,
}

/// Runs the two-stage repair on one corpus record, honouring a pre-tagged
/// hypothesis column when the corpus carries one.
pub fn repair_record(record: &CorpusRecord, setup: &EvoSetup) -> RepairResult {
    match &record.tagged {
        Some(items) => repair_tagged(
            &TaggedSentence { items: items.clone() },
            setup.ontology,
            setup.config,
            setup.rules,
            setup.embeddings,
            setup.lexicon,
        ),
        None => repair(
            &record.hypothesis,
            setup.ontology,
            setup.config,
            setup.rules,
            setup.embeddings,
            setup.lexicon,
        ),
    }
}

/// Accuracy before and after the two-stage repair, per sentence.
pub fn evaluate_evo(corpus: &[CorpusRecord], setup: &EvoSetup) -> Result<EvalReport> {
    let mut rows = Vec::with_capacity(corpus.len());
    for record in corpus {
        let rf = tokenize(&record.reference);
        let hyp = tokenize(&record.hypothesis);
        let before = accuracy(&hyp, &rf)?;
        let result = repair_record(record, setup);
        let after = accuracy(&result.output, &rf)?;
        rows.push(EvalRow {
            id: record.id.clone(),
            before,
            after,
            delta: after - before,
        });
    }
    Ok(EvalReport::from_rows("evo", rows))
}

/// Accuracy before and after Naive Bayes repair. Erroneous spans come from
/// aligning each hypothesis against its reference, standing in for the
/// human oracle that marks them.
pub fn evaluate_ml(corpus: &[CorpusRecord], model: &NaiveBayesModel) -> Result<EvalReport> {
    let mut rows = Vec::with_capacity(corpus.len());
    for record in corpus {
        let rf = tokenize(&record.reference);
        let hyp = tokenize(&record.hypothesis);
        let before = accuracy(&hyp, &rf)?;
        let spans: Vec<(usize, usize)> = extract_mispairs(&align(&hyp, &rf), &hyp, &rf)
            .iter()
            .map(|m| (m.start, m.len))
            .collect();
        let repaired = apply_repair(model, &hyp, &spans)?;
        let after = accuracy(&repaired, &rf)?;
        rows.push(EvalRow {
            id: record.id.clone(),
            before,
            after,
            delta: after - before,
        });
    }
    Ok(EvalReport::from_rows("ml", rows))
}

/// Report TSV: header comments state that deltas are absolute accuracy
/// points, then one row per sentence, then aggregate and band comment rows
/// that recompute exactly from the per-sentence rows.
pub fn format_report(reports: &[&EvalReport]) -> String {
    let mut out = String::new();
    out.push_str("# transcript repair evaluation\n");
    out.push_str("# deltas are absolute accuracy points (after - before)\n");
    out.push_str("# method\tid\tbefore\tafter\tdelta\n");
    for report in reports {
        for row in &report.rows {
            out.push_str(&format!(
                "{}\t{}\t{:.1}\t{:.1}\t{:.1}\n",
                report.method, row.id, row.before, row.after, row.delta
            ));
        }
    }
    for report in reports {
        out.push_str(&format!(
            "# aggregate\t{}\tmean_before={:.2}\tmean_after={:.2}\timproved={}\tunchanged={}\tdegraded={}\n",
            report.method,
            report.mean_before,
            report.mean_after,
            report.improved,
            report.unchanged,
            report.degraded
        ));
        out.push_str(&format!(
            "# bands\t{}\tbefore=<70:{}|70-100:{}|100:{}\tafter=<70:{}|70-100:{}|100:{}\n",
            report.method,
            report.band_before.below_band,
            report.band_before.in_band,
            report.band_before.full,
            report.band_after.below_band,
            report.band_after.in_band,
            report.band_after.full
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::default_rules;

    fn refs() -> Vec<String> {
        vec![
            "which industry has the peak sales in nineteen ninety seven".to_string(),
            "which business has more sales in 2013 car dealers or optical goods".to_string(),
            "did sales remain the same in retail between two thousand thirteen and two thousand fourteen"
                .to_string(),
        ]
    }

    fn retail() -> Ontology {
        Ontology::parse(include_str!("../fixtures/retail.tsv"), "retail").unwrap()
    }

    #[test]
    fn zero_rates_emit_nothing() {
        let cfg = ChannelConfig {
            substitution_rate: 0.0,
            deletion_rate: 0.0,
            insertion_rate: 0.0,
            phonetic_confusion: false,
            seed: 1,
        };
        let vocab = noise_vocabulary(&refs(), None, None);
        assert!(generate_corpus(&refs(), &cfg, &vocab).unwrap().is_empty());
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let cfg = ChannelConfig::default();
        let vocab = noise_vocabulary(&refs(), Some(&retail()), Some(&TagLexicon::builtin()));
        let a = crate::corpus::format_corpus(&generate_corpus(&refs(), &cfg, &vocab).unwrap());
        let b = crate::corpus::format_corpus(&generate_corpus(&refs(), &cfg, &vocab).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn emitted_pairs_sit_in_the_band() {
        let many: Vec<String> = refs().into_iter().cycle().take(50).collect();
        let cfg = ChannelConfig { substitution_rate: 0.1, ..ChannelConfig::default() };
        let vocab = noise_vocabulary(&many, Some(&retail()), Some(&TagLexicon::builtin()));
        let corpus = generate_corpus(&many, &cfg, &vocab).unwrap();
        assert!(!corpus.is_empty());
        let mut sum = 0.0;
        for r in &corpus {
            let acc = accuracy(&tokenize(&r.hypothesis), &tokenize(&r.reference)).unwrap();
            assert!((BAND_FLOOR..100.0).contains(&acc));
            sum += acc;
        }
        let mean = sum / corpus.len() as f64;
        assert!((BAND_FLOOR..100.0).contains(&mean));
    }

    #[test]
    fn empty_reference_list_errors() {
        let cfg = ChannelConfig::default();
        assert!(matches!(
            generate_corpus(&[], &cfg, &[]),
            Err(Error::EmptyReferenceList)
        ));
    }

    #[test]
    fn correct_corpus_evaluates_to_zero_delta() {
        let corpus: Vec<CorpusRecord> = refs()
            .iter()
            .enumerate()
            .map(|(i, r)| CorpusRecord {
                id: (i + 1).to_string(),
                reference: r.clone(),
                hypothesis: r.clone(),
                tagged: None,
            })
            .collect();
        let lex = TagLexicon::builtin();
        let cfg = FitnessConfig::default();
        let rules = default_rules();
        let ont = retail();
        let setup = EvoSetup {
            ontology: &ont,
            config: &cfg,
            rules: &rules,
            embeddings: None,
            lexicon: &lex,
        };
        let report = evaluate_evo(&corpus, &setup).unwrap();
        assert!(report.rows.iter().all(|r| r.delta == 0.0));
        assert_eq!(report.unchanged, corpus.len());
    }

    #[test]
    fn aggregates_recompute_from_rows() {
        let rows = vec![
            EvalRow { id: "1".into(), before: 80.0, after: 100.0, delta: 20.0 },
            EvalRow { id: "2".into(), before: 90.0, after: 90.0, delta: 0.0 },
            EvalRow { id: "3".into(), before: 60.0, after: 50.0, delta: -10.0 },
        ];
        let report = EvalReport::from_rows("evo", rows.clone());
        assert_eq!(report.improved, 1);
        assert_eq!(report.unchanged, 1);
        assert_eq!(report.degraded, 1);
        let mean_before: f64 = rows.iter().map(|r| r.before).sum::<f64>() / 3.0;
        assert!((report.mean_before - mean_before).abs() < 1e-12);
        assert_eq!(report.band_before.below_band, 1);
        assert_eq!(report.band_before.in_band, 2);
        assert_eq!(report.band_after.full, 1);
    }

    #[test]
    fn pretagged_column_bypasses_the_tagger() {
        let lex = TagLexicon::builtin();
        let cfg = FitnessConfig::default();
        let rules = default_rules();
        let ont = retail();
        let setup = EvoSetup {
            ontology: &ont,
            config: &cfg,
            rules: &rules,
            embeddings: None,
            lexicon: &lex,
        };
        let hyp = "which industry has the pixel in nineteen ninety seven";
        // Tagging "pixel" as a cardinal keeps it out of every content
        // window, so the supplied tags demonstrably drive the repair.
        let tags = ["WDT", "NN", "VBZ", "DT", "CD", "IN", "CD", "CD", "CD"];
        let tagged: Vec<(String, String)> = hyp
            .split_whitespace()
            .zip(tags)
            .map(|(w, t)| (w.to_string(), t.to_string()))
            .collect();
        let record = CorpusRecord {
            id: "1".to_string(),
            reference: "which industry has the peak sales in nineteen ninety seven".to_string(),
            hypothesis: hyp.to_string(),
            tagged: Some(tagged),
        };
        let bypassed = repair_record(&record, &setup);
        assert_eq!(bypassed.output.detokenize(), hyp);

        let untagged = CorpusRecord { tagged: None, ..record };
        let repaired = repair_record(&untagged, &setup);
        assert_eq!(
            repaired.output.detokenize(),
            "which industry has the peak sales in nineteen ninety seven"
        );
    }

    #[test]
    fn channel_config_validation() {
        assert!(ChannelConfig::parse("substitution_rate = 1.5").is_err());
        assert!(ChannelConfig::parse(
            "substitution_rate = 0.6\ndeletion_rate = 0.3\ninsertion_rate = 0.3"
        )
        .is_err());
        let cfg = ChannelConfig::parse("seed = 42\nphonetic_confusion = false").unwrap();
        assert_eq!(cfg.seed, 42);
        assert!(!cfg.phonetic_confusion);
    }
}
