//! Declarative linguistic repair rules.
//!
//! A rule file holds one rule per line, `id | pattern | action |
//! description`, applied in file order with the sentence re-tagged after
//! every firing. Patterns and actions are small parameterized forms:
//!
//! ```text
//! conj-unrelated-terms | prep_between_unrelated_terms tag=IN | substitute_best candidates=and,or | ...
//! wdt-for-wp | tag_without_companion present=WP missing=WDT | substitute_best candidates=which,that min_similarity=0.5 | ...
//! ```

use crate::error::{Error, Result};
use crate::ontology::Ontology;
use crate::phonetic::phonetic_similarity;
use crate::tagger::{pos_tag, TagLexicon};
use crate::text::{normalized_edit_distance, TokenSequence};

const DEFAULT_RULES: &str = include_str!("../fixtures/default.rules");

#[derive(Debug, Clone, PartialEq)]
pub enum RulePattern {
    /// A token with the given tag whose immediate neighbourhood ends a
    /// domain-term occurrence on the left and starts one on the right,
    /// while no single triple links the two terms.
    PrepBetweenUnrelatedTerms { tag: String },
    /// Some token carries `present` while no token carries `missing`;
    /// the repair target is the sentence word closest to a candidate.
    TagWithoutCompanion { present: String, missing: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleAction {
    /// Replace the offending token with the closest candidate, ranked by
    /// phonetic similarity and then edit distance. `min_similarity`, when
    /// set, gates the firing on the winning candidate's phonetic score.
    SubstituteBest {
        candidates: Vec<String>,
        min_similarity: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrammarRule {
    pub id: String,
    pub pattern: RulePattern,
    pub action: RuleAction,
    pub description: String,
}

/// One rule application: which rule fired and at which token position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleFiring {
    pub rule_id: String,
    pub position: usize,
}

/// The rules shipped with the crate.
pub fn default_rules() -> Vec<GrammarRule> {
    parse_rules(DEFAULT_RULES, "<builtin>").expect("builtin rules are well-formed")
}

pub fn rules_from_file(path: &str) -> Result<Vec<GrammarRule>> {
    let text = std::fs::read_to_string(path)?;
    parse_rules(&text, path)
}

pub fn parse_rules(text: &str, origin: &str) -> Result<Vec<GrammarRule>> {
    let mut rules = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::FileFormat {
                path: origin.to_string(),
                line: lineno + 1,
                msg: "expected id | pattern | action | description".to_string(),
            });
        }
        let pattern = parse_pattern(fields[1]).map_err(|msg| Error::FileFormat {
            path: origin.to_string(),
            line: lineno + 1,
            msg,
        })?;
        let action = parse_action(fields[2]).map_err(|msg| Error::FileFormat {
            path: origin.to_string(),
            line: lineno + 1,
            msg,
        })?;
        rules.push(GrammarRule {
            id: fields[0].to_string(),
            pattern,
            action,
            description: fields[3].to_string(),
        });
    }
    Ok(rules)
}

fn kv_args(expr: &str) -> std::result::Result<(String, Vec<(String, String)>), String> {
    let mut parts = expr.split_whitespace();
    let name = parts.next().ok_or("empty expression")?.to_string();
    let mut args = Vec::new();
    for p in parts {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| format!("bad argument {p:?}, expected key=value"))?;
        args.push((k.to_string(), v.to_string()));
    }
    Ok((name, args))
}

fn parse_pattern(expr: &str) -> std::result::Result<RulePattern, String> {
    let (name, args) = kv_args(expr)?;
    let get = |key: &str| args.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
    match name.as_str() {
        "prep_between_unrelated_terms" => Ok(RulePattern::PrepBetweenUnrelatedTerms {
            tag: get("tag").ok_or("missing tag=")?,
        }),
        "tag_without_companion" => Ok(RulePattern::TagWithoutCompanion {
            present: get("present").ok_or("missing present=")?,
            missing: get("missing").ok_or("missing missing=")?,
        }),
        other => Err(format!("unknown pattern {other:?}")),
    }
}

fn parse_action(expr: &str) -> std::result::Result<RuleAction, String> {
    let (name, args) = kv_args(expr)?;
    let get = |key: &str| args.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
    match name.as_str() {
        "substitute_best" => {
            let candidates: Vec<String> = get("candidates")
                .ok_or("missing candidates=")?
                .split(',')
                .map(str::to_string)
                .filter(|s| !s.is_empty())
                .collect();
            if candidates.is_empty() {
                return Err("candidates= must list at least one word".to_string());
            }
            let min_similarity = match get("min_similarity") {
                Some(v) => Some(v.parse::<f64>().map_err(|_| "bad min_similarity")?),
                None => None,
            };
            Ok(RuleAction::SubstituteBest { candidates, min_similarity })
        }
        other => Err(format!("unknown action {other:?}")),
    }
}

/// Closest candidate to `token`: highest phonetic similarity, ties broken
/// by edit distance, then lexicographically.
fn best_candidate(token: &str, candidates: &[String]) -> (String, f64) {
    let mut ranked: Vec<(&String, f64, f64)> = candidates
        .iter()
        .map(|c| {
            (
                c,
                phonetic_similarity(token, c),
                normalized_edit_distance(token, c),
            )
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then(a.2.partial_cmp(&b.2).unwrap())
            .then(a.0.cmp(b.0))
    });
    (ranked[0].0.clone(), ranked[0].1)
}

/// Longest term occurrence ending exactly at `end` (exclusive), as
/// (start, normalized term).
fn term_ending_at(tokens: &[String], end: usize, ont: &Ontology) -> Option<(usize, String)> {
    let max = ont.max_term_words().min(end);
    for l in (1..=max).rev() {
        let text = tokens[end - l..end].join(" ");
        if !ont.entries_for_term(&text).is_empty() {
            return Some((end - l, text));
        }
    }
    None
}

/// Longest term occurrence starting at `start`, as (normalized term, end).
fn term_starting_at(tokens: &[String], start: usize, ont: &Ontology) -> Option<(String, usize)> {
    let max = ont.max_term_words().min(tokens.len() - start);
    for l in (1..=max).rev() {
        let text = tokens[start..start + l].join(" ");
        if !ont.entries_for_term(&text).is_empty() {
            return Some((text, start + l));
        }
    }
    None
}

/// Applies the rules in order, each at most once per position, re-tagging
/// after every firing.
pub fn apply_rules(
    sentence: &TokenSequence,
    rules: &[GrammarRule],
    ont: &Ontology,
    lexicon: &TagLexicon,
) -> (TokenSequence, Vec<RuleFiring>) {
    let mut tokens: Vec<String> = sentence.tokens().to_vec();
    let mut firings = Vec::new();

    for rule in rules {
        match (&rule.pattern, &rule.action) {
            (
                RulePattern::PrepBetweenUnrelatedTerms { tag },
                RuleAction::SubstituteBest { candidates, min_similarity },
            ) => {
                for pos in 0..tokens.len() {
                    let seq = TokenSequence::from_tokens(tokens.clone());
                    let tagged = pos_tag(&seq, lexicon);
                    if tagged.items[pos].1 != *tag {
                        continue;
                    }
                    let left = term_ending_at(&tokens, pos, ont);
                    let right = term_starting_at(&tokens, pos + 1, ont);
                    let (Some((_, left_term)), Some((right_term, _))) = (left, right) else {
                        continue;
                    };
                    if ont.related(&left_term, &right_term) {
                        continue;
                    }
                    let (winner, sim) = best_candidate(&tokens[pos], candidates);
                    if let Some(bar) = min_similarity {
                        if sim < *bar {
                            continue;
                        }
                    }
                    if winner != tokens[pos] {
                        tokens[pos] = winner;
                        firings.push(RuleFiring { rule_id: rule.id.clone(), position: pos });
                    }
                }
            }
            (
                RulePattern::TagWithoutCompanion { present, missing },
                RuleAction::SubstituteBest { candidates, min_similarity },
            ) => {
                let seq = TokenSequence::from_tokens(tokens.clone());
                let tagged = pos_tag(&seq, lexicon);
                let has_present = tagged.items.iter().any(|(_, t)| t == present);
                let has_missing = tagged.items.iter().any(|(_, t)| t == missing);
                if !has_present || has_missing {
                    continue;
                }
                // The mis-heard word is whichever token sounds most like a
                // candidate; the trigger token itself is left alone.
                let mut best: Option<(usize, String, f64)> = None;
                for (idx, (tok, tag)) in tagged.items.iter().enumerate() {
                    if tag == present {
                        continue;
                    }
                    let (cand, sim) = best_candidate(tok, candidates);
                    if cand == *tok {
                        continue;
                    }
                    let better = match &best {
                        None => true,
                        Some((_, _, s)) => sim > *s,
                    };
                    if better {
                        best = Some((idx, cand, sim));
                    }
                }
                if let Some((idx, cand, sim)) = best {
                    if sim >= min_similarity.unwrap_or(0.5) {
                        tokens[idx] = cand;
                        firings.push(RuleFiring { rule_id: rule.id.clone(), position: idx });
                    }
                }
            }
        }
    }

    (TokenSequence::from_tokens(tokens), firings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn retail_min() -> Ontology {
        Ontology::parse(include_str!("../fixtures/retail_min.tsv"), "retail_min").unwrap()
    }

    #[test]
    fn default_rules_parse() {
        let rules = default_rules();
        assert_eq!(rules.len(), 2);
        assert_eq!(rules[0].id, "conj-unrelated-terms");
    }

    #[test]
    fn conjunction_rule_replaces_preposition() {
        let lex = TagLexicon::builtin();
        let (out, firings) = apply_rules(
            &tokenize("which business has more sales in 2013 car dealers for optical goods"),
            &default_rules(),
            &retail_min(),
            &lex,
        );
        assert_eq!(
            out.detokenize(),
            "which business has more sales in 2013 car dealers or optical goods"
        );
        assert_eq!(firings.len(), 1);
        assert_eq!(firings[0].rule_id, "conj-unrelated-terms");
        assert_eq!(firings[0].position, 9);
    }

    #[test]
    fn unmatched_sentence_is_left_alone() {
        let lex = TagLexicon::builtin();
        let s = tokenize("which industry has the peak sales");
        let (out, firings) = apply_rules(&s, &default_rules(), &retail_min(), &lex);
        assert_eq!(out, s);
        assert!(firings.is_empty());
    }

    #[test]
    fn companion_rule_restores_determiner() {
        let lex = TagLexicon::builtin();
        let (out, firings) = apply_rules(
            &tokenize("what happened to wich industry"),
            &default_rules(),
            &retail_min(),
            &lex,
        );
        assert_eq!(out.detokenize(), "what happened to which industry");
        assert_eq!(firings.len(), 1);
        assert_eq!(firings[0].rule_id, "wdt-for-wp");
    }

    #[test]
    fn rules_fire_in_file_order() {
        let lex = TagLexicon::builtin();
        let (out, firings) = apply_rules(
            &tokenize("what wich car dealers for optical goods"),
            &default_rules(),
            &retail_min(),
            &lex,
        );
        assert_eq!(out.detokenize(), "what which car dealers or optical goods");
        let ids: Vec<&str> = firings.iter().map(|f| f.rule_id.as_str()).collect();
        assert_eq!(ids, ["conj-unrelated-terms", "wdt-for-wp"]);
    }

    #[test]
    fn related_terms_keep_their_preposition() {
        // "industry business car dealers": BUSINESS links INDUSTRY and
        // CAR_DEALERS in one triple, but "business" here is a term, not a
        // preposition, so craft an IN between related terms instead.
        let ont = Ontology::parse("CAR_DEALERS\tfor\tOPTICAL_GOODS", "t").unwrap();
        let lex = TagLexicon::builtin();
        let (out, firings) = apply_rules(
            &tokenize("car dealers for optical goods"),
            &default_rules(),
            &ont,
            &lex,
        );
        assert_eq!(out.detokenize(), "car dealers for optical goods");
        assert!(firings.is_empty());
    }

    #[test]
    fn malformed_rule_line_errors() {
        assert!(parse_rules("id | just-three-fields | x", "f").is_err());
        assert!(parse_rules("id | bogus_pattern tag=IN | substitute_best candidates=a | d", "f").is_err());
    }
}
