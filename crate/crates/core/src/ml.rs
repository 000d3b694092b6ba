//! Naive Bayes span correction: six features over an oracle-marked
//! erroneous span, Laplace-smoothed training, log-space classification,
//! repair by top-ranked label, and k-fold evaluation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TokenSequence;

/// Sentinel left context at sentence start.
pub const LEFT_SENTINEL: &str = "^";
/// Sentinel right context at sentence end.
pub const RIGHT_SENTINEL: &str = "$";

const MODEL_FORMAT_VERSION: u32 = 1;

/// The six features of one marked span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// f1: word to the left of the span, `^` at sentence start.
    pub left_context: String,
    /// f2: number of errors in the whole sentence (the span included).
    pub errors_in_sentence: u32,
    /// f3: number of words in the span.
    pub words_in_span: u32,
    /// f4: word to the right of the span, `$` at sentence end.
    pub right_context: String,
    /// f5: multiset of the span's vowel characters.
    pub bag_of_vowels: BTreeMap<char, u32>,
    /// f6: multiset of the span's consonant characters.
    pub bag_of_consonants: BTreeMap<char, u32>,
}

/// Feature identifiers, `f1` through `f6`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Hash,
)]
pub enum FeatureId {
    LeftContext,
    ErrorsInSentence,
    WordsInSpan,
    RightContext,
    BagOfVowels,
    BagOfConsonants,
}

impl FeatureId {
    pub const ALL: [FeatureId; 6] = [
        FeatureId::LeftContext,
        FeatureId::ErrorsInSentence,
        FeatureId::WordsInSpan,
        FeatureId::RightContext,
        FeatureId::BagOfVowels,
        FeatureId::BagOfConsonants,
    ];

    /// The default active set: every feature except the whole-sentence
    /// error count, the combination that evaluates best.
    pub fn default_active() -> Vec<FeatureId> {
        vec![
            FeatureId::BagOfConsonants,
            FeatureId::BagOfVowels,
            FeatureId::LeftContext,
            FeatureId::WordsInSpan,
            FeatureId::RightContext,
        ]
    }

    pub fn parse(s: &str) -> Result<FeatureId> {
        match s.trim() {
            "f1" => Ok(FeatureId::LeftContext),
            "f2" => Ok(FeatureId::ErrorsInSentence),
            "f3" => Ok(FeatureId::WordsInSpan),
            "f4" => Ok(FeatureId::RightContext),
            "f5" => Ok(FeatureId::BagOfVowels),
            "f6" => Ok(FeatureId::BagOfConsonants),
            other => Err(Error::Config {
                key: other.to_string(),
                msg: "expected one of f1..f6".to_string(),
            }),
        }
    }
}

impl std::fmt::Display for FeatureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FeatureId::LeftContext => "f1",
            FeatureId::ErrorsInSentence => "f2",
            FeatureId::WordsInSpan => "f3",
            FeatureId::RightContext => "f4",
            FeatureId::BagOfVowels => "f5",
            FeatureId::BagOfConsonants => "f6",
        };
        f.write_str(s)
    }
}

fn char_bags(span: &str) -> (BTreeMap<char, u32>, BTreeMap<char, u32>) {
    let mut vowels = BTreeMap::new();
    let mut consonants = BTreeMap::new();
    for c in span.chars().filter(|c| c.is_alphabetic()) {
        let c = c.to_lowercase().next().unwrap();
        let bag = if matches!(c, 'a' | 'e' | 'i' | 'o' | 'u') {
            &mut vowels
        } else {
            &mut consonants
        };
        *bag.entry(c).or_insert(0) += 1;
    }
    (vowels, consonants)
}

/// Features of the span `[start, start+len)` of `sentence`.
/// `total_errors` counts every marked span of the sentence.
pub fn extract_features(
    sentence: &TokenSequence,
    start: usize,
    len: usize,
    total_errors: u32,
) -> Result<FeatureVector> {
    if len == 0 || start + len > sentence.len() {
        return Err(Error::SpanOutOfBounds { start, len, sentence_len: sentence.len() });
    }
    let tokens = sentence.tokens();
    let span = tokens[start..start + len].join(" ");
    let (bag_of_vowels, bag_of_consonants) = char_bags(&span);
    Ok(FeatureVector {
        left_context: if start == 0 {
            LEFT_SENTINEL.to_string()
        } else {
            tokens[start - 1].clone()
        },
        errors_in_sentence: total_errors.max(1),
        words_in_span: len as u32,
        right_context: if start + len == sentence.len() {
            RIGHT_SENTINEL.to_string()
        } else {
            tokens[start + len].clone()
        },
        bag_of_vowels,
        bag_of_consonants,
    })
}

/// One features-to-correction pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub features: FeatureVector,
    pub label: String,
}

type ValueCounts = BTreeMap<String, u64>;
type CharCounts = BTreeMap<char, u64>;

/// Trained classifier state: priors plus per-feature conditional counts.
/// Counts (not probabilities) are stored so the model serializes exactly;
/// smoothed probabilities are derived on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub version: u32,
    pub alpha: f64,
    pub active: Vec<FeatureId>,
    /// label → training-example count.
    pub label_counts: BTreeMap<String, u64>,
    /// categorical feature → label → value → count.
    pub categorical: BTreeMap<FeatureId, BTreeMap<String, ValueCounts>>,
    /// bag feature → label → character → total count.
    pub bags: BTreeMap<FeatureId, BTreeMap<String, CharCounts>>,
}

fn categorical_value(features: &FeatureVector, f: FeatureId) -> String {
    match f {
        FeatureId::LeftContext => features.left_context.clone(),
        FeatureId::ErrorsInSentence => features.errors_in_sentence.to_string(),
        FeatureId::WordsInSpan => features.words_in_span.to_string(),
        FeatureId::RightContext => features.right_context.clone(),
        _ => unreachable!("bag features have no categorical value"),
    }
}

fn bag_value(features: &FeatureVector, f: FeatureId) -> &BTreeMap<char, u32> {
    match f {
        FeatureId::BagOfVowels => &features.bag_of_vowels,
        FeatureId::BagOfConsonants => &features.bag_of_consonants,
        _ => unreachable!("categorical features have no bag value"),
    }
}

/// Trains on the examples with Laplace smoothing `alpha` over the given
/// active feature set. Priors are plain label frequencies.
pub fn train(
    examples: &[TrainingExample],
    alpha: f64,
    active: &[FeatureId],
) -> Result<NaiveBayesModel> {
    if examples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if alpha <= 0.0 {
        return Err(Error::Config {
            key: "alpha".to_string(),
            msg: "must be positive".to_string(),
        });
    }
    let mut model = NaiveBayesModel {
        version: MODEL_FORMAT_VERSION,
        alpha,
        active: active.to_vec(),
        label_counts: BTreeMap::new(),
        categorical: BTreeMap::new(),
        bags: BTreeMap::new(),
    };
    for ex in examples {
        *model.label_counts.entry(ex.label.clone()).or_insert(0) += 1;
        for &f in active {
            match f {
                FeatureId::BagOfVowels | FeatureId::BagOfConsonants => {
                    let per_label = model
                        .bags
                        .entry(f)
                        .or_default()
                        .entry(ex.label.clone())
                        .or_default();
                    for (&c, &count) in bag_value(&ex.features, f) {
                        *per_label.entry(c).or_insert(0) += u64::from(count);
                    }
                }
                _ => {
                    let value = categorical_value(&ex.features, f);
                    *model
                        .categorical
                        .entry(f)
                        .or_default()
                        .entry(ex.label.clone())
                        .or_default()
                        .entry(value)
                        .or_insert(0) += 1;
                }
            }
        }
    }
    Ok(model)
}

impl NaiveBayesModel {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.label_counts.keys().map(String::as_str)
    }

    fn total_examples(&self) -> u64 {
        self.label_counts.values().sum()
    }

    pub fn prior(&self, label: &str) -> f64 {
        let total = self.total_examples();
        if total == 0 {
            return 0.0;
        }
        self.label_counts.get(label).copied().unwrap_or(0) as f64 / total as f64
    }

    /// Distinct observed values of a categorical feature across all labels.
    fn value_space(&self, f: FeatureId) -> usize {
        self.categorical
            .get(&f)
            .map(|per_label| {
                let mut values = std::collections::BTreeSet::new();
                for counts in per_label.values() {
                    values.extend(counts.keys().cloned());
                }
                values.len()
            })
            .unwrap_or(0)
    }

    /// Distinct observed characters of a bag feature across all labels.
    fn char_space(&self, f: FeatureId) -> usize {
        self.bags
            .get(&f)
            .map(|per_label| {
                let mut chars = std::collections::BTreeSet::new();
                for counts in per_label.values() {
                    chars.extend(counts.keys().copied());
                }
                chars.len()
            })
            .unwrap_or(0)
    }

    /// Smoothed P(value | label) for a categorical feature; one extra slot
    /// in the denominator reserves mass for unseen values.
    pub fn categorical_prob(&self, f: FeatureId, value: &str, label: &str) -> f64 {
        let count = self
            .categorical
            .get(&f)
            .and_then(|m| m.get(label))
            .and_then(|m| m.get(value))
            .copied()
            .unwrap_or(0) as f64;
        let label_total = self.label_counts.get(label).copied().unwrap_or(0) as f64;
        let space = self.value_space(f) as f64 + 1.0;
        (count + self.alpha) / (label_total + self.alpha * space)
    }

    /// Smoothed P(character | label) for a bag feature.
    pub fn char_prob(&self, f: FeatureId, c: char, label: &str) -> f64 {
        let per_label = self.bags.get(&f).and_then(|m| m.get(label));
        let count = per_label.and_then(|m| m.get(&c)).copied().unwrap_or(0) as f64;
        let total: u64 = per_label.map(|m| m.values().sum()).unwrap_or(0);
        let space = self.char_space(f) as f64 + 1.0;
        (count + self.alpha) / (total as f64 + self.alpha * space)
    }

    /// Log of the posterior numerator `P(label) * prod P(f | label)`; the
    /// evidence term is constant across labels and omitted.
    pub fn log_posterior(&self, features: &FeatureVector, label: &str) -> f64 {
        let mut lp = self.prior(label).ln();
        for &f in &self.active {
            match f {
                FeatureId::BagOfVowels | FeatureId::BagOfConsonants => {
                    for (&c, &count) in bag_value(features, f) {
                        lp += f64::from(count) * self.char_prob(f, c, label).ln();
                    }
                }
                _ => {
                    let value = categorical_value(features, f);
                    lp += self.categorical_prob(f, &value, label).ln();
                }
            }
        }
        lp
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: NaiveBayesModel =
            serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported model version {}",
                model.version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &str) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &str) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// All labels ranked by log-posterior, ties broken lexicographically.
pub fn classify(model: &NaiveBayesModel, features: &FeatureVector) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = model
        .labels()
        .map(|label| (label.to_string(), model.log_posterior(features, label)))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranked
}

/// Replaces each marked span by its top-ranked correction. Spans must not
/// overlap; replacement runs right to left so earlier offsets stay valid.
pub fn apply_repair(
    model: &NaiveBayesModel,
    sentence: &TokenSequence,
    spans: &[(usize, usize)],
) -> Result<TokenSequence> {
    let mut sorted: Vec<(usize, usize)> = spans.to_vec();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[0].0 + w[0].1 > w[1].0 {
            return Err(Error::OverlappingSpans(w[1].0));
        }
    }
    if let Some(&(start, len)) = sorted.last() {
        if start + len > sentence.len() || len == 0 {
            return Err(Error::SpanOutOfBounds { start, len, sentence_len: sentence.len() });
        }
    }
    let total = spans.len() as u32;
    let mut tokens = sentence.tokens().to_vec();
    for &(start, len) in sorted.iter().rev() {
        let features = extract_features(sentence, start, len, total)?;
        let ranked = classify(model, &features);
        let top = ranked
            .first()
            .ok_or_else(|| Error::Model("model has no labels".to_string()))?;
        let replacement: Vec<String> = top.0.split_whitespace().map(str::to_string).collect();
        tokens.splice(start..start + len, replacement);
    }
    Ok(TokenSequence::from_tokens(tokens))
}

/// Per-fold and mean classification accuracy of k-fold cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    pub fold_sizes: Vec<(usize, usize)>,
}

/// Seeded shuffle, contiguous folds, top-1 accuracy per fold.
pub fn cross_validate(
    examples: &[TrainingExample],
    k: usize,
    alpha: f64,
    active: &[FeatureId],
    seed: u64,
) -> Result<CvReport> {
    if k < 2 || k > examples.len() {
        return Err(Error::InvalidFolds { k, examples: examples.len() });
    }
    let mut indices: Vec<usize> = (0..examples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);

    let n = examples.len();
    let mut fold_accuracy = Vec::with_capacity(k);
    let mut fold_sizes = Vec::with_capacity(k);
    for fold in 0..k {
        let lo = fold * n / k;
        let hi = (fold + 1) * n / k;
        let test: Vec<usize> = indices[lo..hi].to_vec();
        let train_set: Vec<TrainingExample> = indices[..lo]
            .iter()
            .chain(&indices[hi..])
            .map(|&i| examples[i].clone())
            .collect();
        let model = train(&train_set, alpha, active)?;
        let correct = test
            .iter()
            .filter(|&&i| {
                classify(&model, &examples[i].features)
                    .first()
                    .map(|(label, _)| *label == examples[i].label)
                    .unwrap_or(false)
            })
            .count();
        fold_accuracy.push(correct as f64 / test.len() as f64);
        fold_sizes.push((train_set.len(), test.len()));
    }
    let mean_accuracy = fold_accuracy.iter().sum::<f64>() / k as f64;
    Ok(CvReport { fold_accuracy, mean_accuracy, fold_sizes })
}

/// Fraction of examples carrying the most common label: the baseline any
/// useful classifier must beat.
pub fn majority_baseline(examples: &[TrainingExample]) -> f64 {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for ex in examples {
        *counts.entry(ex.label.as_str()).or_insert(0) += 1;
    }
    counts
        .values()
        .copied()
        .max()
        .map(|m| m as f64 / examples.len() as f64)
        .unwrap_or(0.0)
}

/// Rows of a training file: `sentence<TAB>span_start<TAB>span_len<TAB>correction`.
pub fn parse_training_rows(text: &str, origin: &str) -> Result<Vec<(String, usize, usize, String)>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let bad = |msg: String| Error::FileFormat {
            path: origin.to_string(),
            line: lineno + 1,
            msg,
        };
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {}", fields.len())));
        }
        let start: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| bad("bad span_start".to_string()))?;
        let len: usize = fields[2]
            .trim()
            .parse()
            .map_err(|_| bad("bad span_len".to_string()))?;
        if fields[3].trim().is_empty() {
            return Err(bad("empty correction".to_string()));
        }
        rows.push((fields[0].to_string(), start, len, fields[3].trim().to_string()));
    }
    Ok(rows)
}

/// Builds training examples from file rows. Rows sharing one sentence text
/// are one sentence with several errors, which fixes the f2 count.
pub fn examples_from_rows(rows: &[(String, usize, usize, String)]) -> Result<Vec<TrainingExample>> {
    let mut per_sentence: BTreeMap<&str, u32> = BTreeMap::new();
    for (sentence, _, _, _) in rows {
        *per_sentence.entry(sentence.as_str()).or_insert(0) += 1;
    }
    let mut examples = Vec::with_capacity(rows.len());
    for (sentence, start, len, correction) in rows {
        let tokens = crate::text::tokenize(sentence);
        let features =
            extract_features(&tokens, *start, *len, per_sentence[sentence.as_str()])?;
        examples.push(TrainingExample {
            features,
            label: crate::text::tokenize(correction).detokenize(),
        });
    }
    Ok(examples)
}
