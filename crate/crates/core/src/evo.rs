//! Two-stage transcript repair: gene-level replacement of transcript spans
//! by domain-ontology terms under a fitness score, then rule-based
//! linguistic repair of what remains.
//!
//! Spans that exactly match a domain term are genes already present in the
//! sentence: they claim their tokens first and are never rewritten. Fuzzy
//! windows over the remaining tokens are scored against retrieved candidate
//! terms and the winners are applied greedily, highest score first, without
//! overlap.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ontology::{candidate_genes, Ontology};
use crate::phonetic::{phonetic_similarity, span_code_equalities, syllable_count};
use crate::rules::{apply_rules, GrammarRule, RuleFiring};
use crate::tagger::{content_words, pos_tag, TagLexicon, TaggedSentence};
use crate::text::{
    normalized_edit_distance, raw_edit_distance, strip_whitespace_lower, tokenize, TokenSequence,
};

/// Tunable constants of the repair.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessConfig {
    /// Weight of the phonetic component of the fitness score.
    pub w_phon: f64,
    /// Weight of the edit-distance component; `w_phon + w_edit = 1`.
    pub w_edit: f64,
    /// A replacement fires only when its fitness reaches this value.
    /// Values above 1 switch replacement off entirely.
    pub threshold: f64,
    /// Cost-function weights, summing to 1.
    pub b: [f64; 5],
    /// Longest fuzzy window, 1 to 5 words.
    pub max_window: usize,
    /// Candidate retrieval floor in [0, 1].
    pub retrieval_floor: f64,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        FitnessConfig {
            w_phon: 0.8,
            w_edit: 0.2,
            threshold: 0.55,
            b: [0.2, 0.2, 0.3, 0.2, 0.1],
            max_window: 3,
            retrieval_floor: 0.5,
        }
    }
}

impl FitnessConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, key: &str, msg: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config { key: key.to_string(), msg: msg.to_string() })
            }
        };
        check(
            (self.w_phon + self.w_edit - 1.0).abs() <= 1e-9,
            "w_phon",
            "w_phon + w_edit must equal 1",
        )?;
        check(
            (self.b.iter().sum::<f64>() - 1.0).abs() <= 1e-9,
            "b1",
            "b1..b5 must sum to 1",
        )?;
        check(
            (1..=5).contains(&self.max_window),
            "max_window",
            "must lie in 1..=5",
        )?;
        check(
            (0.0..=1.0).contains(&self.retrieval_floor),
            "retrieval_floor",
            "must lie in [0, 1]",
        )?;
        Ok(())
    }

    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses `key = value` lines over the default configuration.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = FitnessConfig::default();
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
            let num = || value.parse::<f64>().map_err(|_| bad("not a number"));
            match key {
                "w_phon" => cfg.w_phon = num()?,
                "w_edit" => cfg.w_edit = num()?,
                "threshold" => cfg.threshold = num()?,
                "b1" => cfg.b[0] = num()?,
                "b2" => cfg.b[1] = num()?,
                "b3" => cfg.b[2] = num()?,
                "b4" => cfg.b[3] = num()?,
                "b5" => cfg.b[4] = num()?,
                "max_window" => {
                    cfg.max_window = value.parse().map_err(|_| bad("not a positive integer"))?
                }
                "retrieval_floor" => cfg.retrieval_floor = num()?,
                _ => return Err(bad("unknown key")),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Word vectors of uniform dimension, keyed by word.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    /// Parses `word v1 v2 ... vd` lines; every row must share one `d`.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut table = EmbeddingTable::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap().to_lowercase();
            let values: std::result::Result<Vec<f64>, _> =
                parts.map(str::parse::<f64>).collect();
            let values = values.map_err(|_| Error::FileFormat {
                path: origin.to_string(),
                line: lineno + 1,
                msg: "bad vector component".to_string(),
            })?;
            if values.is_empty() {
                return Err(Error::FileFormat {
                    path: origin.to_string(),
                    line: lineno + 1,
                    msg: "vector has no components".to_string(),
                });
            }
            if table.dim == 0 {
                table.dim = values.len();
            } else if values.len() != table.dim {
                return Err(Error::FileFormat {
                    path: origin.to_string(),
                    line: lineno + 1,
                    msg: format!("dimension {} != {}", values.len(), table.dim),
                });
            }
            table.vectors.insert(word, values);
        }
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Mean vector over the span's known words; None when no word is known.
    pub fn mean_vector(&self, span: &str) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dim];
        let mut count = 0usize;
        for word in span.split_whitespace() {
            if let Some(v) = self.vectors.get(&word.to_lowercase()) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                count += 1;
            }
        }
        if count == 0 {
            return None;
        }
        for s in &mut sum {
            *s /= count as f64;
        }
        Some(sum)
    }
}

/// The fitness of replacing `span` by `term`:
/// `w_phon * phonetic_similarity + w_edit * (1 - normalized_edit_distance)`,
/// always in [0, 1].
pub fn final_score(span: &str, term: &str, cfg: &FitnessConfig) -> f64 {
    cfg.w_phon * phonetic_similarity(span, term)
        + cfg.w_edit * (1.0 - normalized_edit_distance(span, term))
}

/// Five-component similarity used as the secondary ranking key: soundex
/// equality, metaphone equality, edit similarity, syllable-count closeness,
/// and word-embedding closeness (zero without embeddings).
pub fn cost_score(
    span: &str,
    term: &str,
    cfg: &FitnessConfig,
    emb: Option<&EmbeddingTable>,
) -> f64 {
    let (sx, mp, _) = span_code_equalities(span, term);
    let edit = 1.0 - normalized_edit_distance(span, term);
    let sa = syllable_count(span) as f64;
    let sb = syllable_count(term) as f64;
    let syll = 1.0 - (sa - sb).abs() / sa.max(sb).max(1.0);
    let embedding = emb
        .and_then(|t| {
            let va = t.mean_vector(span)?;
            let vb = t.mean_vector(term)?;
            let d2: f64 = va.iter().zip(&vb).map(|(a, b)| (a - b) * (a - b)).sum();
            Some(1.0 - (d2 / t.dim() as f64).min(1.0))
        })
        .unwrap_or(0.0);
    cfg.b[0] * sx + cfg.b[1] * mp + cfg.b[2] * edit + cfg.b[3] * syll + cfg.b[4] * embedding
}

/// One applied gene replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct Replacement {
    /// Token offset of the replaced span in the input sentence.
    pub start: usize,
    /// Token length of the replaced span.
    pub len: usize,
    /// The replaced span text.
    pub erroneous: String,
    /// The normalized term written in its place.
    pub term: String,
    /// The fitness score that licensed the replacement.
    pub score: f64,
}

/// Everything the two repair stages did to one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairResult {
    pub input: TokenSequence,
    pub after_gene_repair: TokenSequence,
    pub output: TokenSequence,
    pub replacements: Vec<Replacement>,
    pub rule_firings: Vec<RuleFiring>,
}

// A fuzzy window with its best term.
struct WindowPick {
    start: usize,
    len: usize,
    term: String,
    score: f64,
    raw_edit: usize,
}

// Spans whose whitespace-stripped lengths differ by more than 2x cannot be
// utterances of one another; prefix truncation of the codes would otherwise
// let a short window "match" an arbitrarily long term.
fn length_compatible(span: &str, term: &str) -> bool {
    let a = strip_whitespace_lower(span).chars().count();
    let b = strip_whitespace_lower(term).chars().count();
    a.max(b) <= 2 * a.min(b)
}

/// Gene-level repair: exact term occurrences claim their tokens, then
/// sliding windows of up to `max_window` words around content words are
/// scored against candidate terms; winners at or above the threshold apply
/// greedily in descending score order without overlap. The result's
/// `output` equals `after_gene_repair`; linguistic repair fills in the rest.
pub fn ontology_based_repair(
    tagged: &TaggedSentence,
    ont: &Ontology,
    cfg: &FitnessConfig,
    emb: Option<&EmbeddingTable>,
) -> RepairResult {
    let tokens: Vec<String> = tagged.tokens();
    let n = tokens.len();
    let mut claimed = vec![false; n];

    // Stage 1a: exact occurrences of domain terms, longest first.
    let max_exact = ont.max_term_words().min(n);
    for l in (1..=max_exact).rev() {
        for start in 0..=n.saturating_sub(l) {
            if n == 0 {
                break;
            }
            if claimed[start..start + l].iter().any(|&c| c) {
                continue;
            }
            let text = tokens[start..start + l].join(" ");
            if !ont.entries_for_term(&text).is_empty() {
                claimed[start..start + l].iter_mut().for_each(|c| *c = true);
            }
        }
    }

    // Stage 1b: fuzzy windows over unclaimed tokens containing a noun or
    // verb.
    let content: BTreeSet<usize> = content_words(tagged).into_iter().map(|(i, _)| i).collect();
    let mut picks: Vec<WindowPick> = Vec::new();
    for l in 1..=cfg.max_window.min(n) {
        for start in 0..=n - l {
            let range = start..start + l;
            if claimed[range.clone()].iter().any(|&c| c) {
                continue;
            }
            if !range.clone().any(|i| content.contains(&i)) {
                continue;
            }
            let span = tokens[range].join(" ");
            let mut seen = BTreeSet::new();
            let mut best: Option<(f64, f64, usize, String)> = None;
            for cand in candidate_genes(&span, ont, cfg.retrieval_floor) {
                if !seen.insert(cand.matched_term.clone()) {
                    continue;
                }
                let term = cand.matched_term;
                if term == span || !length_compatible(&span, &term) {
                    continue;
                }
                let fs = final_score(&span, &term, cfg);
                if fs < cfg.threshold {
                    continue;
                }
                let cost = cost_score(&span, &term, cfg, emb);
                let re = raw_edit_distance(&span, &term);
                let better = match &best {
                    None => true,
                    Some((bfs, bcost, bre, bterm)) => (fs, cost)
                        .partial_cmp(&(*bfs, *bcost))
                        .unwrap()
                        .then(bre.cmp(&re))
                        .then(bterm.len().cmp(&term.len()))
                        .then(bterm.cmp(&term).reverse())
                        .is_gt(),
                };
                if better {
                    best = Some((fs, cost, re, term));
                }
            }
            if let Some((fs, _, re, term)) = best {
                picks.push(WindowPick { start, len: l, term, score: fs, raw_edit: re });
            }
        }
    }

    // Highest fitness wins; ties prefer the smaller edit, the shorter
    // window, then the earlier position.
    picks.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then(a.raw_edit.cmp(&b.raw_edit))
            .then(a.len.cmp(&b.len))
            .then(a.start.cmp(&b.start))
    });
    let mut applied: Vec<WindowPick> = Vec::new();
    for pick in picks {
        let range = pick.start..pick.start + pick.len;
        if claimed[range.clone()].iter().any(|&c| c) {
            continue;
        }
        claimed[range].iter_mut().for_each(|c| *c = true);
        applied.push(pick);
    }
    applied.sort_by_key(|p| p.start);

    let mut out: Vec<String> = Vec::with_capacity(n);
    let mut replacements = Vec::with_capacity(applied.len());
    let mut next = applied.iter().peekable();
    let mut i = 0;
    while i < n {
        if let Some(pick) = next.peek() {
            if pick.start == i {
                out.extend(pick.term.split_whitespace().map(str::to_string));
                replacements.push(Replacement {
                    start: pick.start,
                    len: pick.len,
                    erroneous: tokens[pick.start..pick.start + pick.len].join(" "),
                    term: pick.term.clone(),
                    score: pick.score,
                });
                i += pick.len;
                next.next();
                continue;
            }
        }
        out.push(tokens[i].clone());
        i += 1;
    }

    let after = TokenSequence::from_tokens(out);
    RepairResult {
        input: tagged.to_sequence(),
        after_gene_repair: after.clone(),
        output: after,
        replacements,
        rule_firings: Vec::new(),
    }
}

/// Second stage: linguistic rules over the gene-repaired sentence.
pub fn linguistic_repair(
    partial: RepairResult,
    rules: &[GrammarRule],
    ont: &Ontology,
    lexicon: &TagLexicon,
) -> RepairResult {
    let (output, rule_firings) = apply_rules(&partial.after_gene_repair, rules, ont, lexicon);
    RepairResult { output, rule_firings, ..partial }
}

/// Both repair stages over an already-tagged sentence, bypassing the
/// tagger. A threshold above 1 is the off-switch: neither stage touches
/// the sentence.
pub fn repair_tagged(
    tagged: &TaggedSentence,
    ont: &Ontology,
    cfg: &FitnessConfig,
    rules: &[GrammarRule],
    emb: Option<&EmbeddingTable>,
    lexicon: &TagLexicon,
) -> RepairResult {
    let partial = ontology_based_repair(tagged, ont, cfg, emb);
    if cfg.threshold > 1.0 {
        return partial;
    }
    linguistic_repair(partial, rules, ont, lexicon)
}

/// The whole pipeline: tokenize, tag, gene repair, linguistic repair.
pub fn repair(
    sentence: &str,
    ont: &Ontology,
    cfg: &FitnessConfig,
    rules: &[GrammarRule],
    emb: Option<&EmbeddingTable>,
    lexicon: &TagLexicon,
) -> RepairResult {
    let tokens = tokenize(sentence);
    let tagged = pos_tag(&tokens, lexicon);
    repair_tagged(&tagged, ont, cfg, rules, emb, lexicon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::Ontology;
    use crate::rules::default_rules;

    fn retail() -> Ontology {
        Ontology::parse(include_str!("../fixtures/retail.tsv"), "retail").unwrap()
    }

    fn retail_min() -> Ontology {
        Ontology::parse(include_str!("../fixtures/retail_min.tsv"), "retail_min").unwrap()
    }

    #[test]
    fn default_config_validates() {
        FitnessConfig::default().validate().unwrap();
    }

    #[test]
    fn config_parse_rejects_unknown_and_invalid_keys() {
        let err = FitnessConfig::parse("w_phonn = 0.5").unwrap_err();
        assert!(err.to_string().contains("w_phonn"));
        let err = FitnessConfig::parse("max_window = 9").unwrap_err();
        assert!(err.to_string().contains("max_window"));
        let err = FitnessConfig::parse("w_phon = 0.9").unwrap_err();
        assert!(err.to_string().contains("w_phon"));
    }

    #[test]
    fn final_score_identity_is_one() {
        let cfg = FitnessConfig::default();
        for x in ["pixel", "peak sales", "business"] {
            assert!((final_score(x, x, &cfg) - 1.0).abs() < 1e-12);
        }
        let other = FitnessConfig { w_phon: 0.3, w_edit: 0.7, ..FitnessConfig::default() };
        assert!((final_score("goods", "goods", &other) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn final_score_separates_the_intended_gene() {
        let cfg = FitnessConfig::default();
        assert!(final_score("pixel", "peak sales", &cfg) >= cfg.threshold);
        assert!(final_score("pixel", "car dealers", &cfg) < cfg.threshold);
    }

    #[test]
    fn final_score_orders_quotes_repair() {
        let cfg = FitnessConfig::default();
        assert!(final_score("quotes", "goods", &cfg) > final_score("quotes", "business", &cfg));
    }

    #[test]
    fn cost_score_identity_is_one_without_embedding_weight() {
        let cfg = FitnessConfig { b: [0.25, 0.25, 0.25, 0.25, 0.0], ..FitnessConfig::default() };
        assert!((cost_score("pixel", "pixel", &cfg, None) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cost_score_with_only_soundex_weight_tracks_soundex() {
        let cfg = FitnessConfig { b: [1.0, 0.0, 0.0, 0.0, 0.0], ..FitnessConfig::default() };
        let same = crate::phonetic::soundex("pixel").unwrap()
            == crate::phonetic::soundex("peaksales").unwrap();
        let got = cost_score("pixel", "peak sales", &cfg, None);
        assert_eq!(got == 1.0, same);
    }

    #[test]
    fn cost_score_argmax_lands_on_peak_sales() {
        let cfg = FitnessConfig::default();
        let ont = retail();
        let best = ont
            .terms()
            .max_by(|a, b| {
                cost_score("pixel", a, &cfg, None)
                    .partial_cmp(&cost_score("pixel", b, &cfg, None))
                    .unwrap()
            })
            .unwrap();
        assert_eq!(best, "peak sales");
    }

    #[test]
    fn gene_repair_fixes_pixel_sentence() {
        let lex = TagLexicon::builtin();
        let cfg = FitnessConfig::default();
        let tagged = pos_tag(
            &tokenize("which industry has the pixel in nineteen ninety seven"),
            &lex,
        );
        let result = ontology_based_repair(&tagged, &retail(), &cfg, None);
        assert_eq!(
            result.after_gene_repair.detokenize(),
            "which industry has the peak sales in nineteen ninety seven"
        );
        assert_eq!(result.replacements.len(), 1);
        assert_eq!(result.replacements[0].erroneous, "pixel");
        assert_eq!(result.replacements[0].term, "peak sales");
    }

    #[test]
    fn impossible_threshold_means_identity() {
        let lex = TagLexicon::builtin();
        let cfg = FitnessConfig { threshold: 1.01, ..FitnessConfig::default() };
        let input = "which business has more sales in 2013 car dealers for optical quotes";
        let result = repair(input, &retail(), &cfg, &default_rules(), None, &lex);
        assert_eq!(result.output.detokenize(), input);
        assert!(result.replacements.is_empty());
        assert!(result.rule_firings.is_empty());
    }

    #[test]
    fn full_repair_of_worked_example() {
        let lex = TagLexicon::builtin();
        let cfg = FitnessConfig::default();
        for ont in [retail_min(), retail()] {
            let result = repair(
                "which business has more sales in 2013 car dealers for optical quotes",
                &ont,
                &cfg,
                &default_rules(),
                None,
                &lex,
            );
            assert_eq!(
                result.output.detokenize(),
                "which business has more sales in 2013 car dealers or optical goods"
            );
            assert_eq!(result.replacements.len(), 1);
            assert_eq!(result.rule_firings.len(), 1);

            // The rule stage substitutes tokens in place, so the output may
            // differ from the gene-repaired sentence only where rules fired.
            let fired: Vec<usize> =
                result.rule_firings.iter().map(|f| f.position).collect();
            for (i, (a, b)) in result
                .after_gene_repair
                .iter()
                .zip(result.output.iter())
                .enumerate()
            {
                if a != b {
                    assert!(fired.contains(&i), "unexplained change at token {i}");
                }
            }
        }
    }

    #[test]
    fn correct_sentence_passes_through() {
        let lex = TagLexicon::builtin();
        let cfg = FitnessConfig::default();
        let input = "which business has more sales in 2013 car dealers or optical goods";
        let result = repair(input, &retail(), &cfg, &default_rules(), None, &lex);
        assert_eq!(result.output.detokenize(), input);
        assert!(result.replacements.is_empty());
    }

    #[test]
    fn repair_is_deterministic() {
        let lex = TagLexicon::builtin();
        let cfg = FitnessConfig::default();
        let input = "which industry has the pixel in nineteen ninety seven";
        let a = repair(input, &retail(), &cfg, &default_rules(), None, &lex);
        let b = repair(input, &retail(), &cfg, &default_rules(), None, &lex);
        assert_eq!(a, b);
    }

    #[test]
    fn replacements_never_overlap() {
        let lex = TagLexicon::builtin();
        let cfg = FitnessConfig::default();
        let result = repair(
            "which industry has the pixel and the optical quotes",
            &retail(),
            &cfg,
            &default_rules(),
            None,
            &lex,
        );
        let mut seen = vec![false; result.input.len()];
        for r in &result.replacements {
            for (i, flag) in seen.iter_mut().enumerate().skip(r.start).take(r.len) {
                assert!(!*flag, "overlap at token {i}");
                *flag = true;
            }
        }
    }

    #[test]
    fn every_replacement_clears_threshold() {
        let lex = TagLexicon::builtin();
        let cfg = FitnessConfig::default();
        let result = repair(
            "which industry has the pixel in nineteen ninety seven",
            &retail(),
            &cfg,
            &default_rules(),
            None,
            &lex,
        );
        assert!(!result.replacements.is_empty());
        for r in &result.replacements {
            assert!(r.score >= cfg.threshold);
        }
    }

    #[test]
    fn embeddings_parse_and_reject_ragged_rows() {
        let t = EmbeddingTable::parse("a 1 2\nb 3 4\n", "e").unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.len(), 2);
        assert!(EmbeddingTable::parse("a 1 2\nb 3\n", "e").is_err());
    }

    #[test]
    fn embedding_term_raises_cost_of_known_words() {
        let table = EmbeddingTable::parse("pixel 1 0\npeak 1 0\nsales 1 0\n", "e").unwrap();
        let cfg = FitnessConfig { b: [0.0, 0.0, 0.0, 0.0, 1.0], ..FitnessConfig::default() };
        let with = cost_score("pixel", "peak sales", &cfg, Some(&table));
        let without = cost_score("pixel", "peak sales", &cfg, None);
        assert!(with > without);
        assert!((with - 1.0).abs() < 1e-12);
    }
}
