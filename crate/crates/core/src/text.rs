//! Tokenization, word-level alignment, the accuracy metric, and mispair
//! extraction. Everything else in the crate consumes these primitives.

use crate::error::{Error, Result};

/// Normalized words of a transcript: lowercase, no edge punctuation, no
/// whitespace inside a token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenSequence {
    tokens: Vec<String>,
}

impl TokenSequence {
    /// Builds a sequence from tokens that are already normalized.
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        TokenSequence { tokens }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.tokens.iter()
    }

    /// Joins the tokens back into a single text line.
    pub fn detokenize(&self) -> String {
        self.tokens.join(" ")
    }

    /// Text of a contiguous token span.
    pub fn span_text(&self, start: usize, len: usize) -> String {
        self.tokens[start..start + len].join(" ")
    }
}

impl std::fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.detokenize())
    }
}

/// Lowercases, strips punctuation from token edges (internal hyphens and
/// apostrophes survive), and splits on whitespace. Digit strings are kept
/// verbatim. Tokens that are pure punctuation vanish.
pub fn tokenize(raw: &str) -> TokenSequence {
    let tokens = raw
        .split_whitespace()
        .filter_map(|w| {
            let trimmed = w.trim_matches(|c: char| !c.is_alphanumeric());
            if trimmed.is_empty() {
                None
            } else {
                Some(trimmed.to_lowercase())
            }
        })
        .collect();
    TokenSequence { tokens }
}

/// One step of a word-level alignment. `hyp` indexes hypothesis tokens,
/// `rf` reference tokens: an `Insert` is a hypothesis token with no
/// reference counterpart, a `Delete` a reference token the hypothesis lost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignOp {
    Match { hyp: usize, rf: usize },
    Substitute { hyp: usize, rf: usize },
    Insert { hyp: usize },
    Delete { rf: usize },
}

impl AlignOp {
    pub fn is_match(&self) -> bool {
        matches!(self, AlignOp::Match { .. })
    }

    pub fn hyp_index(&self) -> Option<usize> {
        match *self {
            AlignOp::Match { hyp, .. } | AlignOp::Substitute { hyp, .. } | AlignOp::Insert { hyp } => {
                Some(hyp)
            }
            AlignOp::Delete { .. } => None,
        }
    }

    pub fn ref_index(&self) -> Option<usize> {
        match *self {
            AlignOp::Match { rf, .. } | AlignOp::Substitute { rf, .. } | AlignOp::Delete { rf } => {
                Some(rf)
            }
            AlignOp::Insert { .. } => None,
        }
    }
}

/// Word-level edit-distance alignment between a hypothesis and a reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentTrace {
    pub ops: Vec<AlignOp>,
    /// Count of non-Match ops; equals the minimal word Levenshtein distance.
    pub cost: usize,
}

/// Minimal-cost alignment with a deterministic backtrace. Equal-cost traces
/// are resolved by preferring Match > Substitute > Delete > Insert at each
/// cell so downstream mispair extraction is reproducible.
pub fn align(hyp: &TokenSequence, rf: &TokenSequence) -> AlignmentTrace {
    let h = hyp.tokens();
    let r = rf.tokens();
    let m = h.len();
    let n = r.len();

    let mut dp = vec![vec![0usize; n + 1]; m + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in dp[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=m {
        for j in 1..=n {
            let diag = dp[i - 1][j - 1] + usize::from(h[i - 1] != r[j - 1]);
            dp[i][j] = diag.min(dp[i][j - 1] + 1).min(dp[i - 1][j] + 1);
        }
    }

    let mut ops = Vec::with_capacity(m.max(n));
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 && h[i - 1] == r[j - 1] && dp[i][j] == dp[i - 1][j - 1] {
            ops.push(AlignOp::Match { hyp: i - 1, rf: j - 1 });
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + 1 {
            ops.push(AlignOp::Substitute { hyp: i - 1, rf: j - 1 });
            i -= 1;
            j -= 1;
        } else if j > 0 && dp[i][j] == dp[i][j - 1] + 1 {
            ops.push(AlignOp::Delete { rf: j - 1 });
            j -= 1;
        } else {
            ops.push(AlignOp::Insert { hyp: i - 1 });
            i -= 1;
        }
    }
    ops.reverse();

    AlignmentTrace { ops, cost: dp[m][n] }
}

/// Transcript accuracy: `100 * (|ref| - edit_distance) / |ref|`, floored at
/// zero and reported to one decimal (half-up).
pub fn accuracy(hyp: &TokenSequence, rf: &TokenSequence) -> Result<f64> {
    if rf.is_empty() {
        return Err(Error::EmptyReference);
    }
    let cost = align(hyp, rf).cost as f64;
    let n = rf.len() as f64;
    let raw = (100.0 * (n - cost) / n).max(0.0);
    Ok((raw * 10.0).round() / 10.0)
}

/// An erroneous hypothesis span paired with the reference span that corrects
/// it, plus the sentence it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mispair {
    /// Hypothesis tokens judged erroneous (at least one).
    pub erroneous: Vec<String>,
    /// Reference tokens that replace them (possibly empty).
    pub correction: Vec<String>,
    /// Start of the erroneous span in the hypothesis.
    pub start: usize,
    /// Length of the erroneous span.
    pub len: usize,
    /// The full hypothesis the span was cut from.
    pub sentence: TokenSequence,
}

/// Groups maximal runs of non-Match ops into mispairs. A run made purely of
/// deletions has no hypothesis token to anchor on, so it absorbs the
/// adjacent matched token (the following one, or the preceding one at the
/// end of the trace); runs that collide on the same matched token merge.
/// This keeps every erroneous span non-empty while re-applying all
/// corrections still reproduces the reference exactly.
pub fn extract_mispairs(
    trace: &AlignmentTrace,
    hyp: &TokenSequence,
    rf: &TokenSequence,
) -> Vec<Mispair> {
    // Raw runs: (hyp indices, ref indices) per maximal non-Match stretch,
    // plus the index in `trace.ops` of the op following the run.
    struct Run {
        hyp_idx: Vec<usize>,
        ref_idx: Vec<usize>,
        next_op: Option<usize>,
        prev_op: Option<usize>,
    }

    let mut runs: Vec<Run> = Vec::new();
    let mut current: Option<Run> = None;
    for (k, op) in trace.ops.iter().enumerate() {
        if op.is_match() {
            if let Some(mut run) = current.take() {
                run.next_op = Some(k);
                runs.push(run);
            }
        } else {
            let run = current.get_or_insert(Run {
                hyp_idx: Vec::new(),
                ref_idx: Vec::new(),
                next_op: None,
                prev_op: if k > 0 { Some(k - 1) } else { None },
            });
            if let Some(h) = op.hyp_index() {
                run.hyp_idx.push(h);
            }
            if let Some(r) = op.ref_index() {
                run.ref_idx.push(r);
            }
        }
    }
    if let Some(run) = current.take() {
        runs.push(run);
    }

    // Resolve anchorless (pure-deletion) runs by absorbing a neighbouring
    // matched token; merge runs that end up sharing it.
    #[derive(Debug)]
    struct Span {
        start: usize,
        len: usize,
        correction: Vec<String>,
    }

    let match_at = |op_idx: usize| -> (usize, usize) {
        match trace.ops[op_idx] {
            AlignOp::Match { hyp, rf } => (hyp, rf),
            _ => unreachable!("run boundary must be a Match op"),
        }
    };

    let mut spans: Vec<Span> = Vec::new();
    for run in &runs {
        let correction: Vec<String> = run.ref_idx.iter().map(|&r| rf.tokens()[r].clone()).collect();
        if !run.hyp_idx.is_empty() {
            spans.push(Span {
                start: run.hyp_idx[0],
                len: run.hyp_idx.len(),
                correction,
            });
        } else if let Some(next) = run.next_op {
            let (h, r) = match_at(next);
            let mut corr = correction;
            corr.push(rf.tokens()[r].clone());
            spans.push(Span { start: h, len: 1, correction: corr });
        } else if let Some(prev) = run.prev_op {
            let (h, r) = match_at(prev);
            let mut corr = vec![rf.tokens()[r].clone()];
            corr.extend(correction);
            spans.push(Span { start: h, len: 1, correction: corr });
        }
        // A trace with no Match op at all and no hypothesis token (empty
        // hypothesis) yields nothing to extract.
    }

    spans.sort_by_key(|s| s.start);
    let mut merged: Vec<Span> = Vec::new();
    for span in spans {
        match merged.last_mut() {
            Some(last) if span.start < last.start + last.len => {
                // Two absorptions landed on the same matched token: splice
                // the corrections around the shared anchor word.
                let mut corr = last.correction.clone();
                corr.extend(span.correction.into_iter().skip(1));
                last.correction = corr;
            }
            _ => merged.push(span),
        }
    }

    merged
        .into_iter()
        .map(|s| Mispair {
            erroneous: hyp.tokens()[s.start..s.start + s.len].to_vec(),
            correction: s.correction,
            start: s.start,
            len: s.len,
            sentence: hyp.clone(),
        })
        .collect()
}

/// Character-level Levenshtein distance.
pub fn levenshtein_chars(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        curr[0] = i;
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            curr[j] = (prev[j] + 1).min(curr[j - 1] + 1).min(prev[j - 1] + cost);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Levenshtein over whitespace-stripped, lowercased strings, normalized by
/// the longer length so the result lands in [0, 1].
pub fn normalized_edit_distance(a: &str, b: &str) -> f64 {
    let a = strip_whitespace_lower(a);
    let b = strip_whitespace_lower(b);
    let max = a.chars().count().max(b.chars().count());
    if max == 0 {
        return 0.0;
    }
    levenshtein_chars(&a, &b) as f64 / max as f64
}

/// Raw Levenshtein on whitespace-stripped, lowercased strings.
pub fn raw_edit_distance(a: &str, b: &str) -> usize {
    levenshtein_chars(&strip_whitespace_lower(a), &strip_whitespace_lower(b))
}

pub(crate) fn strip_whitespace_lower(s: &str) -> String {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(|c| c.to_lowercase())
        .collect()
}
