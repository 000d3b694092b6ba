//! Domain knowledge as subject-predicate-object triples with a normalized
//! term index, plus fuzzy retrieval of candidate entries for a transcript
//! span.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::phonetic::phonetic_similarity;
use crate::text::normalized_edit_distance;

/// One domain fact. Stored terms keep their source spelling; matching runs
/// on the normalized form (lowercase, underscores read as spaces).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slot {
    Subject,
    Predicate,
    Object,
}

impl std::fmt::Display for Slot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Slot::Subject => "subject",
            Slot::Predicate => "predicate",
            Slot::Object => "object",
        })
    }
}

/// "PEAK_SALES" and "peak sales" index identically.
pub fn normalize_term(term: &str) -> String {
    term.replace('_', " ")
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Loaded triples plus an index from every distinct normalized term to the
/// triples and slots it appears in. Immutable after load.
#[derive(Debug, Clone, Default)]
pub struct Ontology {
    triples: Vec<Triple>,
    term_index: BTreeMap<String, Vec<(usize, Slot)>>,
}

impl Ontology {
    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    /// Parses TSV rows `subject<TAB>predicate<TAB>object`. `#` lines are
    /// comments; duplicate rows collapse to one.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut triples: Vec<Triple> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 || fields.iter().any(|f| f.trim().is_empty()) {
                return Err(Error::FileFormat {
                    path: origin.to_string(),
                    line: lineno + 1,
                    msg: format!("expected 3 non-empty fields, got {}", fields.len()),
                });
            }
            let t = Triple {
                subject: fields[0].trim().to_string(),
                predicate: fields[1].trim().to_string(),
                object: fields[2].trim().to_string(),
            };
            if !triples.contains(&t) {
                triples.push(t);
            }
        }
        Ok(Self::from_triples(triples))
    }

    pub fn from_triples(triples: Vec<Triple>) -> Self {
        let mut term_index: BTreeMap<String, Vec<(usize, Slot)>> = BTreeMap::new();
        for (id, t) in triples.iter().enumerate() {
            for (slot, term) in [
                (Slot::Subject, &t.subject),
                (Slot::Predicate, &t.predicate),
                (Slot::Object, &t.object),
            ] {
                term_index
                    .entry(normalize_term(term))
                    .or_default()
                    .push((id, slot));
            }
        }
        Ontology { triples, term_index }
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn term_count(&self) -> usize {
        self.term_index.len()
    }

    /// Normalized terms in sorted order.
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.term_index.keys().map(String::as_str)
    }

    pub fn entries_for_term(&self, normalized: &str) -> &[(usize, Slot)] {
        self.term_index
            .get(normalized)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Word count of the longest indexed term.
    pub fn max_term_words(&self) -> usize {
        self.term_index
            .keys()
            .map(|t| t.split_whitespace().count())
            .max()
            .unwrap_or(0)
    }

    /// True when some triple mentions both terms (in any two slots).
    pub fn related(&self, term_a: &str, term_b: &str) -> bool {
        let a = normalize_term(term_a);
        let b = normalize_term(term_b);
        self.triples.iter().any(|t| {
            let slots = [
                normalize_term(&t.subject),
                normalize_term(&t.predicate),
                normalize_term(&t.object),
            ];
            slots.contains(&a) && slots.contains(&b)
        })
    }
}

/// A fuzzily retrieved domain entry for one transcript span.
#[derive(Debug, Clone)]
pub struct CandidateGene {
    pub triple: Triple,
    pub slot: Slot,
    /// The normalized slot term that matched.
    pub matched_term: String,
    /// The transcript span it matched.
    pub span: String,
    pub match_score: f64,
}

/// Every indexed term whose similarity to the span reaches `floor`,
/// expanded to its triples. Similarity is the better of the phonetic score
/// and `1 - normalized edit distance`; results sort by similarity
/// descending, then term, so retrieval is deterministic.
pub fn candidate_genes(span: &str, ontology: &Ontology, floor: f64) -> Vec<CandidateGene> {
    let mut scored: Vec<(f64, &str)> = ontology
        .terms()
        .map(|term| {
            let sim = phonetic_similarity(span, term)
                .max(1.0 - normalized_edit_distance(span, term));
            (sim, term)
        })
        .filter(|(sim, _)| *sim >= floor)
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(b.1)));

    let mut out = Vec::new();
    for (sim, term) in scored {
        for &(id, slot) in ontology.entries_for_term(term) {
            out.push(CandidateGene {
                triple: ontology.triples[id].clone(),
                slot,
                matched_term: term.to_string(),
                span: span.to_string(),
                match_score: sim,
            });
        }
    }
    out
}
