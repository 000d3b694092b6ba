//! Penn-tagset part-of-speech tagging, just deep enough for gene
//! identification (nouns and verbs) and the linguistic repair patterns.
//! A shipped lexicon does most of the work; unknown words fall to a few
//! suffix rules.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::text::TokenSequence;

const BUILTIN_LEXICON: &str = include_str!("../fixtures/lexicon.tsv");

/// word → Penn tag lookup table, immutable after load.
#[derive(Debug, Clone)]
pub struct TagLexicon {
    map: HashMap<String, String>,
}

impl TagLexicon {
    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LEXICON, "<builtin>").expect("builtin lexicon is well-formed")
    }

    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    /// Parses `word<TAB>TAG` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(word), Some(tag), None) if !word.is_empty() && !tag.is_empty() => {
                    map.insert(word.to_lowercase(), tag.to_string());
                }
                _ => {
                    return Err(Error::FileFormat {
                        path: origin.to_string(),
                        line: lineno + 1,
                        msg: "expected word<TAB>TAG".to_string(),
                    })
                }
            }
        }
        Ok(TagLexicon { map })
    }

    pub fn lookup(&self, word: &str) -> Option<&str> {
        self.map.get(word).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// All lexicon words, sorted.
    pub fn words(&self) -> Vec<String> {
        let mut v: Vec<String> = self.map.keys().cloned().collect();
        v.sort();
        v
    }
}

/// Tokens with one Penn tag each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub items: Vec<(String, String)>,
}

impl TaggedSentence {
    pub fn tokens(&self) -> Vec<String> {
        self.items.iter().map(|(w, _)| w.clone()).collect()
    }

    pub fn to_sequence(&self) -> TokenSequence {
        TokenSequence::from_tokens(self.tokens())
    }
}

/// Lexicon lookup first, then suffix rules: digit strings are CD, `-ing`
/// words VBG, `-s` words NNS, everything else NN.
pub fn pos_tag(tokens: &TokenSequence, lexicon: &TagLexicon) -> TaggedSentence {
    let items = tokens
        .iter()
        .map(|w| (w.clone(), tag_word(w, lexicon)))
        .collect();
    TaggedSentence { items }
}

fn tag_word(word: &str, lexicon: &TagLexicon) -> String {
    if let Some(tag) = lexicon.lookup(word) {
        return tag.to_string();
    }
    if word.chars().all(|c| c.is_ascii_digit()) {
        return "CD".to_string();
    }
    if word.len() > 4 && word.ends_with("ing") {
        return "VBG".to_string();
    }
    if word.len() > 2 && word.ends_with('s') && !word.ends_with("ss") {
        return "NNS".to_string();
    }
    "NN".to_string()
}

/// Indices and tokens of every noun or verb (tag starting NN or VB).
pub fn content_words(tagged: &TaggedSentence) -> Vec<(usize, String)> {
    tagged
        .items
        .iter()
        .enumerate()
        .filter(|(_, (_, tag))| tag.starts_with("NN") || tag.starts_with("VB"))
        .map(|(i, (w, _))| (i, w.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    #[test]
    fn tags_the_worked_sentence() {
        let lex = TagLexicon::builtin();
        let t = pos_tag(
            &tokenize("which business has more sales in 2013 car dealers for optical quotes"),
            &lex,
        );
        let tags: Vec<&str> = t.items.iter().map(|(_, tag)| tag.as_str()).collect();
        assert_eq!(
            tags,
            ["WDT", "NN", "VBZ", "JJR", "NNS", "IN", "CD", "NN", "NNS", "IN", "JJ", "NNS"]
        );
    }

    #[test]
    fn empty_input_gives_empty_sentence() {
        let lex = TagLexicon::builtin();
        assert!(pos_tag(&tokenize(""), &lex).items.is_empty());
    }

    #[test]
    fn unknown_plural_falls_to_nns() {
        let lex = TagLexicon::builtin();
        let t = pos_tag(&tokenize("blorkets"), &lex);
        assert_eq!(t.items[0].1, "NNS");
    }

    #[test]
    fn content_words_of_worked_sentence() {
        let lex = TagLexicon::builtin();
        let t = pos_tag(
            &tokenize("which business has more sales in 2013 car dealers for optical quotes"),
            &lex,
        );
        let words: Vec<String> = content_words(&t).into_iter().map(|(_, w)| w).collect();
        assert_eq!(words, ["business", "has", "sales", "car", "dealers", "quotes"]);
    }

    #[test]
    fn all_function_word_sentence_has_no_content() {
        let lex = TagLexicon::builtin();
        let t = pos_tag(&tokenize("in for of"), &lex);
        assert!(content_words(&t).is_empty());
    }

    #[test]
    fn content_word_indices_increase() {
        let lex = TagLexicon::builtin();
        let t = pos_tag(&tokenize("industry pixel"), &lex);
        let cw = content_words(&t);
        assert_eq!(cw.len(), 2);
        assert!(cw.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn lexicon_rejects_malformed_rows() {
        assert!(TagLexicon::parse("word\t", "x").is_err());
        assert!(TagLexicon::parse("word NN", "x").is_err());
    }
}
