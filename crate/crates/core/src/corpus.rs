//! Corpus file I/O. A corpus is UTF-8 TSV, one record per line:
//! `id<TAB>reference<TAB>hypothesis`, with an optional fourth column of
//! pre-tagged hypothesis tokens (`token/TAG token/TAG ...`). Lines starting
//! with `#` are comments.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    pub id: String,
    pub reference: String,
    pub hypothesis: String,
    /// Pre-tagged hypothesis tokens, when the corpus supplies them.
    pub tagged: Option<Vec<(String, String)>>,
}

pub fn read_corpus_file(path: &str) -> Result<Vec<CorpusRecord>> {
    let text = std::fs::read_to_string(path)?;
    parse_corpus(&text, path)
}

pub fn parse_corpus(text: &str, origin: &str) -> Result<Vec<CorpusRecord>> {
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let bad = |msg: String| Error::FileFormat {
            path: origin.to_string(),
            line: lineno + 1,
            msg,
        };
        if fields.len() < 3 || fields.len() > 4 {
            return Err(bad(format!("expected 3 or 4 fields, got {}", fields.len())));
        }
        if fields[0].trim().is_empty() {
            return Err(bad("empty id".to_string()));
        }
        let tagged = if fields.len() == 4 && !fields[3].trim().is_empty() {
            let mut items = Vec::new();
            for part in fields[3].split_whitespace() {
                let (word, tag) = part
                    .rsplit_once('/')
                    .ok_or_else(|| bad(format!("bad token/TAG item {part:?}")))?;
                items.push((word.to_lowercase(), tag.to_string()));
            }
            Some(items)
        } else {
            None
        };
        records.push(CorpusRecord {
            id: fields[0].trim().to_string(),
            reference: fields[1].to_string(),
            hypothesis: fields[2].to_string(),
            tagged,
        });
    }
    Ok(records)
}

pub fn format_corpus(records: &[CorpusRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.id);
        out.push('\t');
        out.push_str(&r.reference);
        out.push('\t');
        out.push_str(&r.hypothesis);
        if let Some(tagged) = &r.tagged {
            out.push('\t');
            let items: Vec<String> =
                tagged.iter().map(|(w, t)| format!("{w}/{t}")).collect();
            out.push_str(&items.join(" "));
        }
        out.push('\n');
    }
    out
}

/// One reference sentence per line; `#` lines are comments.
pub fn read_reference_lines(path: &str) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_reference_lines(&text))
}

pub fn parse_reference_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_records_and_comments() {
        let text = "# header\n1\tref text\thyp text\n2\tr\th\tword/NN other/VBZ\n";
        let records = parse_corpus(text, "t").unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].id, "1");
        assert!(records[0].tagged.is_none());
        let tagged = records[1].tagged.as_ref().unwrap();
        assert_eq!(tagged[0], ("word".to_string(), "NN".to_string()));
    }

    #[test]
    fn rejects_short_rows() {
        let err = parse_corpus("1\tonly-two", "t").unwrap_err();
        assert!(err.to_string().contains("t:1"));
    }

    #[test]
    fn round_trips() {
        let text = "1\tref\thyp\n";
        let records = parse_corpus(text, "t").unwrap();
        assert_eq!(format_corpus(&records), text);
    }
}
