//! Property suites over the crate's invariants. Each suite runs at least
//! 1000 generated cases.

use std::sync::OnceLock;

use proptest::prelude::*;

use asrfix::corpus::format_corpus;
use asrfix::evo::{repair, FitnessConfig};
use asrfix::harness::{generate_corpus, noise_vocabulary, ChannelConfig};
use asrfix::ml::{
    classify, examples_from_rows, train, FeatureId, NaiveBayesModel, TrainingExample,
};
use asrfix::ontology::{candidate_genes, Ontology};
use asrfix::phonetic::{phonetic_similarity, syllable_count};
use asrfix::rules::{default_rules, GrammarRule};
use asrfix::tagger::TagLexicon;
use asrfix::text::{accuracy, align, extract_mispairs, tokenize, TokenSequence};

fn lexicon() -> &'static TagLexicon {
    static LEX: OnceLock<TagLexicon> = OnceLock::new();
    LEX.get_or_init(TagLexicon::builtin)
}

fn retail() -> &'static Ontology {
    static ONT: OnceLock<Ontology> = OnceLock::new();
    ONT.get_or_init(|| {
        Ontology::parse(include_str!("../fixtures/retail.tsv"), "retail").unwrap()
    })
}

fn rules() -> &'static Vec<GrammarRule> {
    static RULES: OnceLock<Vec<GrammarRule>> = OnceLock::new();
    RULES.get_or_init(default_rules)
}

// Plain recursive minimal-edit oracle, independent of the DP in `align`.
fn brute_force_cost(a: &[String], b: &[String]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let sub = brute_force_cost(&a[1..], &b[1..]) + usize::from(a[0] != b[0]);
    let del = brute_force_cost(a, &b[1..]) + 1;
    let ins = brute_force_cost(&a[1..], b) + 1;
    sub.min(del).min(ins)
}

fn word_seq(max_len: usize) -> impl Strategy<Value = TokenSequence> {
    prop::collection::vec(prop::sample::select(vec!["alpha", "beta", "gamma"]), 0..=max_len)
        .prop_map(|words| {
            TokenSequence::from_tokens(words.into_iter().map(str::to_string).collect())
        })
}

fn noisy_sentence() -> impl Strategy<Value = String> {
    let vocab = vec![
        "which", "industry", "has", "the", "pixel", "pixels", "in", "sales", "cells", "more",
        "business", "car", "dealers", "for", "optical", "quotes", "goods", "year", "did",
        "beverages", "stores", "than", "twenty", "wine", "same", "retail", "2013", "muscles",
        "peak", "and",
    ];
    prop::collection::vec(prop::sample::select(vocab), 1..=10).prop_map(|words| words.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, .. ProptestConfig::default() })]

    #[test]
    fn alignment_cost_matches_brute_force(hyp in word_seq(6), rf in word_seq(6)) {
        let trace = align(&hyp, &rf);
        prop_assert_eq!(trace.cost, brute_force_cost(hyp.tokens(), rf.tokens()));
    }

    #[test]
    fn alignment_cost_is_symmetric(a in word_seq(6), b in word_seq(6)) {
        prop_assert_eq!(align(&a, &b).cost, align(&b, &a).cost);
    }

    #[test]
    fn identity_accuracy_is_hundred(x in word_seq(6)) {
        prop_assume!(!x.is_empty());
        prop_assert_eq!(accuracy(&x, &x).unwrap(), 100.0);
    }

    #[test]
    fn alignment_consumes_every_token_once(hyp in word_seq(6), rf in word_seq(6)) {
        let trace = align(&hyp, &rf);
        let hyp_seen: Vec<usize> = trace.ops.iter().filter_map(|op| op.hyp_index()).collect();
        let ref_seen: Vec<usize> = trace.ops.iter().filter_map(|op| op.ref_index()).collect();
        prop_assert_eq!(hyp_seen, (0..hyp.len()).collect::<Vec<_>>());
        prop_assert_eq!(ref_seen, (0..rf.len()).collect::<Vec<_>>());
    }

    #[test]
    fn reapplied_mispairs_rebuild_the_reference(hyp in word_seq(6), rf in word_seq(6)) {
        prop_assume!(!hyp.is_empty());
        let pairs = extract_mispairs(&align(&hyp, &rf), &hyp, &rf);
        let mut tokens = hyp.tokens().to_vec();
        let mut sorted = pairs;
        sorted.sort_by_key(|p| std::cmp::Reverse(p.start));
        for p in &sorted {
            tokens.splice(p.start..p.start + p.len, p.correction.iter().cloned());
        }
        prop_assert_eq!(tokens, rf.tokens().to_vec());
    }

    #[test]
    fn tokenize_detokenize_round_trips(x in word_seq(8)) {
        prop_assert_eq!(tokenize(&x.detokenize()), x);
    }

    #[test]
    fn impossible_threshold_is_identity(sentence in noisy_sentence()) {
        let cfg = FitnessConfig { threshold: 1.01, ..FitnessConfig::default() };
        let result = repair(&sentence, retail(), &cfg, rules(), None, lexicon());
        prop_assert_eq!(result.output, tokenize(&sentence));
        prop_assert!(result.replacements.is_empty());
    }

    #[test]
    fn replacements_never_overlap_and_clear_threshold(sentence in noisy_sentence()) {
        let cfg = FitnessConfig::default();
        let result = repair(&sentence, retail(), &cfg, rules(), None, lexicon());
        let mut seen = vec![false; result.input.len()];
        for r in &result.replacements {
            prop_assert!(r.score >= cfg.threshold);
            for flag in seen.iter_mut().skip(r.start).take(r.len) {
                prop_assert!(!*flag);
                *flag = true;
            }
        }
    }

    #[test]
    fn repair_is_deterministic(sentence in noisy_sentence()) {
        let cfg = FitnessConfig::default();
        let a = repair(&sentence, retail(), &cfg, rules(), None, lexicon());
        let b = repair(&sentence, retail(), &cfg, rules(), None, lexicon());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn phonetic_similarity_lands_on_the_grid(a in "[a-z]{1,8}", b in "[a-z]{1,8}") {
        let s = phonetic_similarity(&a, &b);
        let grid = [0.0, 1.0 / 6.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 5.0 / 6.0, 1.0];
        prop_assert!(grid.iter().any(|g| (s - g).abs() < 1e-12), "off-grid score {}", s);
    }

    #[test]
    fn syllables_add_over_concatenation(a in "[a-z]{1,8}", b in "[a-z]{1,8}") {
        prop_assert_eq!(
            syllable_count(&format!("{a} {b}")),
            syllable_count(&a) + syllable_count(&b)
        );
    }

    #[test]
    fn retrieval_floor_is_monotone(span in "[a-z]{1,8}", lo in 0.0f64..0.5, hi in 0.5f64..1.0) {
        let low = candidate_genes(&span, retail(), lo).len();
        let high = candidate_genes(&span, retail(), hi).len();
        prop_assert!(high <= low);
    }
}

// Random training sets for the model suites.
fn training_rows() -> impl Strategy<Value = Vec<(String, usize, usize, String)>> {
    let word = prop::sample::select(vec![
        "sales", "wine", "dear", "beer", "than", "twenty", "jewelry", "same", "retail", "year",
        "stores", "liquor", "cells", "remain",
    ]);
    let label = prop::sample::select(vec!["beer", "has", "jewelry", "remain the", "peak sales"]);
    prop::collection::vec(
        (prop::collection::vec(word, 3..7), 0usize..6, 1usize..3, label),
        1..30,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .map(|(words, start, len, label)| {
                let n = words.len();
                let start = start % n;
                let len = len.min(n - start);
                (words.join(" "), start, len.max(1), label.to_string())
            })
            .collect()
    })
}

fn models_agree_on(probe: &[TrainingExample], a: &NaiveBayesModel, b: &NaiveBayesModel) -> bool {
    probe.iter().all(|ex| classify(a, &ex.features) == classify(b, &ex.features))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, .. ProptestConfig::default() })]

    #[test]
    fn model_probabilities_normalize(rows in training_rows(), alpha in 0.2f64..3.0) {
        let examples = examples_from_rows(&rows).unwrap();
        let model = train(&examples, alpha, &FeatureId::ALL).unwrap();

        let prior_sum: f64 = model.labels().map(|l| model.prior(l)).sum();
        prop_assert!((prior_sum - 1.0).abs() < 1e-9);

        for label in model.labels() {
            for f in [
                FeatureId::LeftContext,
                FeatureId::ErrorsInSentence,
                FeatureId::WordsInSpan,
                FeatureId::RightContext,
            ] {
                let mut values = std::collections::BTreeSet::new();
                if let Some(per_label) = model.categorical.get(&f) {
                    for counts in per_label.values() {
                        values.extend(counts.keys().cloned());
                    }
                }
                let seen: f64 = values
                    .iter()
                    .map(|v| model.categorical_prob(f, v, label))
                    .sum();
                let unseen = model.categorical_prob(f, "\u{0}never-observed\u{0}", label);
                prop_assert!((seen + unseen - 1.0).abs() < 1e-9);
            }
            for f in [FeatureId::BagOfVowels, FeatureId::BagOfConsonants] {
                let mut chars = std::collections::BTreeSet::new();
                if let Some(per_label) = model.bags.get(&f) {
                    for counts in per_label.values() {
                        chars.extend(counts.keys().copied());
                    }
                }
                let seen: f64 = chars.iter().map(|&c| model.char_prob(f, c, label)).sum();
                let unseen = model.char_prob(f, '\u{1}', label);
                prop_assert!((seen + unseen - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn model_serialization_round_trips(rows in training_rows(), alpha in 0.2f64..3.0) {
        let examples = examples_from_rows(&rows).unwrap();
        let model = train(&examples, alpha, &FeatureId::default_active()).unwrap();
        let restored = NaiveBayesModel::from_json(&model.to_json()).unwrap();
        prop_assert!(models_agree_on(&examples, &model, &restored));
    }

    #[test]
    fn corpus_generation_is_seed_deterministic(
        seed in 0u64..10_000,
        sub in 0.0f64..0.3,
        del in 0.0f64..0.2,
        ins in 0.0f64..0.2,
        confusion in any::<bool>(),
    ) {
        let refs: Vec<String> = vec![
            "which industry has the peak sales in nineteen ninety seven".to_string(),
            "did sales remain the same in retail this year".to_string(),
            "which business has more sales in 2013 car dealers or optical goods".to_string(),
        ];
        let cfg = ChannelConfig {
            substitution_rate: sub,
            deletion_rate: del,
            insertion_rate: ins,
            phonetic_confusion: confusion,
            seed,
        };
        let vocab = noise_vocabulary(&refs, Some(retail()), Some(lexicon()));
        let a = format_corpus(&generate_corpus(&refs, &cfg, &vocab).unwrap());
        let b = format_corpus(&generate_corpus(&refs, &cfg, &vocab).unwrap());
        prop_assert_eq!(a, b);
    }
}

/// Exhaustive alignment check over every pair of sequences up to length 3
/// on a three-word alphabet; the random suite above extends this to
/// length 6.
#[test]
fn alignment_matches_brute_force_exhaustively_to_length_three() {
    let alphabet = ["alpha".to_string(), "beta".to_string(), "gamma".to_string()];
    let mut seqs: Vec<Vec<String>> = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..3 {
        let mut next = Vec::new();
        for s in &frontier {
            for w in &alphabet {
                let mut t = s.clone();
                t.push(w.clone());
                next.push(t);
            }
        }
        seqs.extend(next.iter().cloned());
        frontier = next;
    }
    assert_eq!(seqs.len(), 40);
    for a in &seqs {
        for b in &seqs {
            let hyp = TokenSequence::from_tokens(a.clone());
            let rf = TokenSequence::from_tokens(b.clone());
            assert_eq!(
                align(&hyp, &rf).cost,
                brute_force_cost(a, b),
                "mismatch for {a:?} vs {b:?}"
            );
        }
    }
}
