//! Phonetic encoders and the aggregated span-similarity score.
//!
//! Three encoders are provided: classic four-character Soundex, Metaphone,
//! and Double Metaphone (the latter two truncated at the customary four
//! code characters). Multi-word spans are encoded after whitespace removal,
//! so a one-word transcript error can still be compared against a
//! multi-word domain term.

use crate::error::{Error, Result};

const SOUNDEX_LEN: usize = 4;
const METAPHONE_MAX: usize = 4;
const DMETA_MAX: usize = 4;

/// All codes of one word or span, computed once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneticCodes {
    pub soundex: String,
    pub metaphone: String,
    pub dmeta_primary: String,
    pub dmeta_alternate: String,
}

/// Uppercased letters of a word with digits and apostrophes stripped.
/// Any other non-alphabetic character makes the word unencodable.
fn sanitize(word: &str) -> Result<Vec<char>> {
    let mut letters = Vec::new();
    for c in word.chars() {
        if c.is_numeric() || c == '\'' || c == '\u{2019}' {
            continue;
        }
        if !c.is_alphabetic() {
            return Err(Error::Unencodable(word.to_string()));
        }
        letters.extend(c.to_uppercase());
    }
    if letters.is_empty() {
        return Err(Error::Unencodable(word.to_string()));
    }
    Ok(letters)
}

/// Classic American Soundex: keep the first letter, map the rest to digit
/// classes (B F P V → 1, C G J K Q S X Z → 2, D T → 3, L → 4, M N → 5,
/// R → 6), drop A E I O U Y H W, collapse adjacent equal digits, pad or
/// truncate to three digits.
pub fn soundex(word: &str) -> Result<String> {
    let letters = sanitize(word)?;
    fn digit(c: char) -> u8 {
        match c {
            'B' | 'F' | 'P' | 'V' => b'1',
            'C' | 'G' | 'J' | 'K' | 'Q' | 'S' | 'X' | 'Z' => b'2',
            'D' | 'T' => b'3',
            'L' => b'4',
            'M' | 'N' => b'5',
            'R' => b'6',
            _ => b'0',
        }
    }

    let mut code = String::with_capacity(SOUNDEX_LEN);
    code.push(letters[0]);
    let mut prev = digit(letters[0]);
    for &c in &letters[1..] {
        if code.len() >= SOUNDEX_LEN {
            break;
        }
        let d = digit(c);
        if d == b'0' {
            // Dropped letters are invisible: they neither emit a digit nor
            // break a run of equal digits.
            continue;
        }
        if d != prev {
            code.push(d as char);
        }
        prev = d;
    }
    while code.len() < SOUNDEX_LEN {
        code.push('0');
    }
    Ok(code)
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'A' | 'E' | 'I' | 'O' | 'U')
}

/// Classic Metaphone, truncated to four code characters. `0` stands for the
/// th sound.
pub fn metaphone(word: &str) -> Result<String> {
    let raw = sanitize(word)?;

    // Duplicate adjacent letters collapse, except C.
    let mut chars: Vec<char> = Vec::with_capacity(raw.len());
    for &c in &raw {
        if chars.last() == Some(&c) && c != 'C' {
            continue;
        }
        chars.push(c);
    }

    let len = chars.len();
    let mut out = String::with_capacity(METAPHONE_MAX);
    let mut i = 0;

    if len >= 2 {
        match (chars[0], chars[1]) {
            ('A', 'E') | ('G', 'N') | ('K', 'N') | ('P', 'N') | ('W', 'R') => i = 1,
            ('W', 'H') => {
                out.push('W');
                i = 2;
            }
            _ => {}
        }
    }
    if i == 0 && chars[0] == 'X' {
        out.push('S');
        i = 1;
    }

    while i < len && out.len() < METAPHONE_MAX {
        let c = chars[i];
        let prev = if i > 0 { Some(chars[i - 1]) } else { None };
        let next = chars.get(i + 1).copied();
        let next2 = chars.get(i + 2).copied();

        match c {
            'A' | 'E' | 'I' | 'O' | 'U' => {
                if i == 0 {
                    out.push(c);
                }
            }
            'B' => {
                if !(prev == Some('M') && i == len - 1) {
                    out.push('B');
                }
            }
            'C' => {
                if next == Some('I') && next2 == Some('A') {
                    out.push('X');
                    i += 2;
                } else if next == Some('H') {
                    out.push(if prev == Some('S') { 'K' } else { 'X' });
                    i += 1;
                } else if matches!(next, Some('I') | Some('E') | Some('Y')) {
                    if prev != Some('S') {
                        out.push('S');
                    }
                } else {
                    out.push('K');
                }
            }
            'D' => {
                if next == Some('G') && matches!(next2, Some('E') | Some('I') | Some('Y')) {
                    out.push('J');
                    i += 2;
                } else {
                    out.push('T');
                }
            }
            'F' => out.push('F'),
            'G' => {
                if next == Some('H') {
                    if i + 2 < len && !is_vowel(chars[i + 2]) {
                        i += 1; // silent before a consonant
                    } else if i == 0 {
                        out.push(if next2 == Some('I') { 'J' } else { 'K' });
                        i += 1;
                    }
                } else if next == Some('N') {
                    // silent in GN / GNED endings
                    if !(i + 2 >= len || (chars.get(i + 2) == Some(&'E') && chars.get(i + 3) == Some(&'D'))) {
                        out.push('K');
                    }
                } else if matches!(next, Some('I') | Some('E') | Some('Y')) {
                    out.push('J');
                } else {
                    out.push('K');
                }
            }
            'H' => {
                if (i == 0 || !prev.is_some_and(is_vowel)) && next.is_some_and(is_vowel) {
                    out.push('H');
                }
            }
            'J' => out.push('J'),
            'K' => {
                if prev != Some('C') {
                    out.push('K');
                }
            }
            'L' => out.push('L'),
            'M' => out.push('M'),
            'N' => out.push('N'),
            'P' => {
                if next == Some('H') {
                    out.push('F');
                    i += 1;
                } else {
                    out.push('P');
                }
            }
            'Q' => out.push('K'),
            'R' => out.push('R'),
            'S' => {
                if next == Some('H') {
                    out.push('X');
                    i += 1;
                } else if next == Some('I') && matches!(next2, Some('O') | Some('A')) {
                    out.push('X');
                } else {
                    out.push('S');
                }
            }
            'T' => {
                if next == Some('I') && matches!(next2, Some('O') | Some('A')) {
                    out.push('X');
                } else if next == Some('H') {
                    out.push('0');
                    i += 1;
                } else if !(next == Some('C') && next2 == Some('H')) {
                    out.push('T');
                }
            }
            'V' => out.push('F'),
            'W' | 'Y' => {
                if next.is_some_and(is_vowel) {
                    out.push(c);
                }
            }
            'X' => {
                out.push('K');
                if out.len() < METAPHONE_MAX {
                    out.push('S');
                }
            }
            'Z' => out.push('S'),
            _ => {}
        }
        i += 1;
    }

    Ok(out)
}

/// Double Metaphone, primary and alternate codes truncated to four
/// characters. The alternate equals the primary when no alternate
/// pronunciation applies.
pub fn double_metaphone(word: &str) -> Result<(String, String)> {
    let chars = sanitize(word)?;
    Ok(dmeta_impl(&chars))
}

struct DmetaState {
    primary: String,
    alternate: String,
}

impl DmetaState {
    fn add(&mut self, p: &str, a: &str) {
        for c in p.chars() {
            if self.primary.len() < DMETA_MAX {
                self.primary.push(c);
            }
        }
        for c in a.chars() {
            if self.alternate.len() < DMETA_MAX {
                self.alternate.push(c);
            }
        }
    }

    fn add_both(&mut self, s: &str) {
        self.add(s, s);
    }

    fn done(&self) -> bool {
        self.primary.len() >= DMETA_MAX && self.alternate.len() >= DMETA_MAX
    }
}

// Branches follow the algorithm's case table, so some arms repeat the
// same emission under different conditions.
#[allow(clippy::if_same_then_else)]
fn dmeta_impl(chars: &[char]) -> (String, String) {
    let len = chars.len();
    let last = len - 1;
    let dm_vowel = |c: char| matches!(c, 'A' | 'E' | 'I' | 'O' | 'U' | 'Y');
    let at = |pos: isize| -> Option<char> {
        if pos < 0 {
            None
        } else {
            chars.get(pos as usize).copied()
        }
    };
    let vowel_at = |pos: isize| at(pos).is_some_and(dm_vowel);
    let string_at = |pos: isize, patterns: &[&str]| -> bool {
        if pos < 0 {
            return false;
        }
        let pos = pos as usize;
        patterns.iter().any(|p| {
            p.chars()
                .enumerate()
                .all(|(k, pc)| chars.get(pos + k) == Some(&pc))
        })
    };

    let slavo_germanic = {
        let s: String = chars.iter().collect();
        s.contains('W') || s.contains('K') || s.contains("CZ") || s.contains("WITZ")
    };

    let mut st = DmetaState {
        primary: String::new(),
        alternate: String::new(),
    };
    let mut cur: usize = 0;

    if string_at(0, &["GN", "KN", "PN", "WR", "PS"]) {
        cur = 1;
    }
    if chars[0] == 'X' {
        st.add_both("S");
        cur = 1;
    }

    while cur < len && !st.done() {
        let c = chars[cur];
        let i = cur as isize;
        match c {
            'A' | 'E' | 'I' | 'O' | 'U' | 'Y' => {
                if cur == 0 {
                    st.add_both("A");
                }
                cur += 1;
            }
            'B' => {
                st.add_both("P");
                cur += if at(i + 1) == Some('B') { 2 } else { 1 };
            }
            'C' => {
                if cur > 1
                    && !vowel_at(i - 2)
                    && string_at(i - 1, &["ACH"])
                    && at(i + 2) != Some('I')
                    && (at(i + 2) != Some('E') || string_at(i - 2, &["BACHER", "MACHER"]))
                {
                    st.add_both("K");
                    cur += 2;
                } else if cur == 0 && string_at(i, &["CAESAR"]) {
                    st.add_both("S");
                    cur += 2;
                } else if string_at(i, &["CHIA"]) {
                    st.add_both("K");
                    cur += 2;
                } else if string_at(i, &["CH"]) {
                    if cur > 0 && string_at(i, &["CHAE"]) {
                        st.add("K", "X");
                    } else if cur == 0
                        && (string_at(i + 1, &["HARAC", "HARIS"])
                            || string_at(i + 1, &["HOR", "HYM", "HIA", "HEM"]))
                        && !string_at(0, &["CHORE"])
                    {
                        st.add_both("K");
                    } else if string_at(0, &["SCH"])
                        || string_at(i - 2, &["ORCHES", "ARCHIT", "ORCHID"])
                        || string_at(i + 2, &["T", "S"])
                        || ((string_at(i - 1, &["A", "O", "U", "E"]) || cur == 0)
                            && string_at(i + 2, &["L", "R", "N", "M", "B", "H", "F", "V", "W"]))
                    {
                        st.add_both("K");
                    } else if cur > 0 {
                        if string_at(0, &["MC"]) {
                            st.add_both("K");
                        } else {
                            st.add("X", "K");
                        }
                    } else {
                        st.add_both("X");
                    }
                    cur += 2;
                } else if string_at(i, &["CZ"]) && !string_at(i - 2, &["WICZ"]) {
                    st.add("S", "X");
                    cur += 2;
                } else if string_at(i + 1, &["CIA"]) {
                    st.add_both("X");
                    cur += 3;
                } else if string_at(i, &["CC"]) && !(cur == 1 && chars[0] == 'M') {
                    if string_at(i + 2, &["I", "E", "H"]) && !string_at(i + 2, &["HU"]) {
                        if (cur == 1 && at(i - 1) == Some('A'))
                            || string_at(i - 1, &["UCCEE", "UCCES"])
                        {
                            st.add_both("KS");
                        } else {
                            st.add_both("X");
                        }
                        cur += 3;
                    } else {
                        st.add_both("K");
                        cur += 2;
                    }
                } else if string_at(i, &["CK", "CG", "CQ"]) {
                    st.add_both("K");
                    cur += 2;
                } else if string_at(i, &["CI", "CE", "CY"]) {
                    if string_at(i, &["CIO", "CIE", "CIA"]) {
                        st.add("S", "X");
                    } else {
                        st.add_both("S");
                    }
                    cur += 2;
                } else {
                    st.add_both("K");
                    cur += if string_at(i + 1, &["C", "K", "Q"])
                        && !string_at(i + 1, &["CE", "CI"])
                    {
                        2
                    } else {
                        1
                    };
                }
            }
            'D' => {
                if string_at(i, &["DG"]) {
                    if string_at(i + 2, &["I", "E", "Y"]) {
                        st.add_both("J");
                        cur += 3;
                    } else {
                        st.add_both("TK");
                        cur += 2;
                    }
                } else if string_at(i, &["DT", "DD"]) {
                    st.add_both("T");
                    cur += 2;
                } else {
                    st.add_both("T");
                    cur += 1;
                }
            }
            'F' => {
                st.add_both("F");
                cur += if at(i + 1) == Some('F') { 2 } else { 1 };
            }
            'G' => {
                if at(i + 1) == Some('H') {
                    if cur > 0 && !vowel_at(i - 1) {
                        st.add_both("K");
                    } else if cur == 0 {
                        if at(i + 2) == Some('I') {
                            st.add_both("J");
                        } else {
                            st.add_both("K");
                        }
                    } else if (cur > 1 && string_at(i - 2, &["B", "H", "D"]))
                        || (cur > 2 && string_at(i - 3, &["B", "H", "D"]))
                        || (cur > 3 && string_at(i - 4, &["B", "H"]))
                    {
                        // silent
                    } else if cur > 2
                        && at(i - 1) == Some('U')
                        && string_at(i - 3, &["C", "G", "L", "R", "T"])
                    {
                        st.add_both("F");
                    } else if cur > 0 && at(i - 1) != Some('I') {
                        st.add_both("K");
                    }
                    cur += 2;
                } else if at(i + 1) == Some('N') {
                    if cur == 1 && dm_vowel(chars[0]) && !slavo_germanic {
                        st.add("KN", "N");
                    } else if !string_at(i + 2, &["EY"]) && at(i + 1) != Some('Y') && !slavo_germanic
                    {
                        st.add("N", "KN");
                    } else {
                        st.add_both("KN");
                    }
                    cur += 2;
                } else if string_at(i + 1, &["LI"]) && !slavo_germanic {
                    st.add("KL", "L");
                    cur += 2;
                } else if cur == 0
                    && (at(i + 1) == Some('Y')
                        || string_at(
                            i + 1,
                            &["ES", "EP", "EB", "EL", "EY", "IB", "IL", "IN", "IE", "EI", "ER"],
                        ))
                {
                    st.add("K", "J");
                    cur += 2;
                } else if (string_at(i + 1, &["ER"]) || at(i + 1) == Some('Y'))
                    && !string_at(0, &["DANGER", "RANGER", "MANGER"])
                    && !string_at(i - 1, &["E", "I"])
                    && !string_at(i - 1, &["RGY", "OGY"])
                {
                    st.add("K", "J");
                    cur += 2;
                } else if string_at(i + 1, &["E", "I", "Y"]) || string_at(i - 1, &["AGGI", "OGGI"]) {
                    if string_at(0, &["SCH"]) || string_at(i + 1, &["ET"]) {
                        st.add_both("K");
                    } else if string_at(i + 1, &["IER"]) {
                        st.add_both("J");
                    } else {
                        st.add("J", "K");
                    }
                    cur += 2;
                } else {
                    st.add_both("K");
                    cur += if at(i + 1) == Some('G') { 2 } else { 1 };
                }
            }
            'H' => {
                if (cur == 0 || vowel_at(i - 1)) && vowel_at(i + 1) {
                    st.add_both("H");
                    cur += 2;
                } else {
                    cur += 1;
                }
            }
            'J' => {
                if string_at(i, &["JOSE"]) {
                    if cur == 0 && at(i + 4).is_none() {
                        st.add_both("H");
                    } else {
                        st.add("J", "H");
                    }
                } else if cur == 0 {
                    st.add("J", "A");
                } else if vowel_at(i - 1)
                    && !slavo_germanic
                    && matches!(at(i + 1), Some('A') | Some('O'))
                {
                    st.add("J", "H");
                } else if cur == last {
                    st.add("J", "");
                } else if !string_at(i + 1, &["L", "T", "K", "S", "N", "M", "B", "Z"])
                    && !string_at(i - 1, &["S", "K", "L"])
                {
                    st.add_both("J");
                }
                cur += if at(i + 1) == Some('J') { 2 } else { 1 };
            }
            'K' => {
                st.add_both("K");
                cur += if at(i + 1) == Some('K') { 2 } else { 1 };
            }
            'L' => {
                if at(i + 1) == Some('L') {
                    if (cur == len.saturating_sub(3)
                        && string_at(i - 1, &["ILLO", "ILLA", "ALLE"]))
                        || ((string_at(last as isize - 1, &["AS", "OS"])
                            || string_at(last as isize, &["A", "O"]))
                            && string_at(i - 1, &["ALLE"]))
                    {
                        st.add("L", "");
                    } else {
                        st.add_both("L");
                    }
                    cur += 2;
                } else {
                    st.add_both("L");
                    cur += 1;
                }
            }
            'M' => {
                st.add_both("M");
                cur += if (string_at(i - 1, &["UMB"])
                    && (cur + 1 == last || string_at(i + 2, &["ER"])))
                    || at(i + 1) == Some('M')
                {
                    2
                } else {
                    1
                };
            }
            'N' => {
                st.add_both("N");
                cur += if at(i + 1) == Some('N') { 2 } else { 1 };
            }
            'P' => {
                if at(i + 1) == Some('H') {
                    st.add_both("F");
                    cur += 2;
                } else {
                    st.add_both("P");
                    cur += if string_at(i + 1, &["P", "B"]) { 2 } else { 1 };
                }
            }
            'Q' => {
                st.add_both("K");
                cur += if at(i + 1) == Some('Q') { 2 } else { 1 };
            }
            'R' => {
                if cur == last
                    && !slavo_germanic
                    && string_at(i - 2, &["IE"])
                    && !string_at(i - 4, &["ME", "MA"])
                {
                    st.add("", "R");
                } else {
                    st.add_both("R");
                }
                cur += if at(i + 1) == Some('R') { 2 } else { 1 };
            }
            'S' => {
                if string_at(i - 1, &["ISL", "YSL"]) {
                    cur += 1;
                } else if cur == 0 && string_at(i, &["SUGAR"]) {
                    st.add("X", "S");
                    cur += 1;
                } else if string_at(i, &["SH"]) {
                    if string_at(i + 1, &["HEIM", "HOEK", "HOLM", "HOLZ"]) {
                        st.add_both("S");
                    } else {
                        st.add_both("X");
                    }
                    cur += 2;
                } else if string_at(i, &["SIO", "SIA"]) || string_at(i, &["SIAN"]) {
                    if slavo_germanic {
                        st.add_both("S");
                    } else {
                        st.add("S", "X");
                    }
                    cur += 3;
                } else if (cur == 0 && string_at(i + 1, &["M", "N", "L", "W"]))
                    || string_at(i + 1, &["Z"])
                {
                    st.add("S", "X");
                    cur += if string_at(i + 1, &["Z"]) { 2 } else { 1 };
                } else if string_at(i, &["SC"]) {
                    if at(i + 2) == Some('H') {
                        if string_at(i + 3, &["OO", "ER", "EN", "UY", "ED", "EM"]) {
                            if string_at(i + 3, &["ER", "EN"]) {
                                st.add("X", "SK");
                            } else {
                                st.add_both("SK");
                            }
                        } else if cur == 0 && !vowel_at(3) && at(3) != Some('W') {
                            st.add("X", "S");
                        } else {
                            st.add_both("X");
                        }
                        cur += 3;
                    } else if string_at(i + 2, &["I", "E", "Y"]) {
                        st.add_both("S");
                        cur += 3;
                    } else {
                        st.add_both("SK");
                        cur += 3;
                    }
                } else {
                    if cur == last && string_at(i - 2, &["AI", "OI"]) {
                        st.add("", "S");
                    } else {
                        st.add_both("S");
                    }
                    cur += if string_at(i + 1, &["S", "Z"]) { 2 } else { 1 };
                }
            }
            'T' => {
                if string_at(i, &["TION"]) {
                    st.add_both("X");
                    cur += 3;
                } else if string_at(i, &["TIA", "TCH"]) {
                    st.add_both("X");
                    cur += 3;
                } else if string_at(i, &["TH"]) || string_at(i, &["TTH"]) {
                    if string_at(i + 2, &["OM", "AM"]) || string_at(0, &["SCH"]) {
                        st.add_both("T");
                    } else {
                        st.add("0", "T");
                    }
                    cur += 2;
                } else {
                    st.add_both("T");
                    cur += if string_at(i + 1, &["T", "D"]) { 2 } else { 1 };
                }
            }
            'V' => {
                st.add_both("F");
                cur += if at(i + 1) == Some('V') { 2 } else { 1 };
            }
            'W' => {
                if string_at(i, &["WR"]) {
                    st.add_both("R");
                    cur += 2;
                } else {
                    if cur == 0 && (vowel_at(i + 1) || string_at(i, &["WH"])) {
                        if vowel_at(i + 1) {
                            st.add("A", "F");
                        } else {
                            st.add_both("A");
                        }
                    }
                    if (cur == last && vowel_at(i - 1))
                        || string_at(i - 1, &["EWSKI", "EWSKY", "OWSKI", "OWSKY"])
                        || string_at(0, &["SCH"])
                    {
                        st.add("", "F");
                        cur += 1;
                    } else if string_at(i, &["WICZ", "WITZ"]) {
                        st.add("TS", "FX");
                        cur += 4;
                    } else {
                        cur += 1;
                    }
                }
            }
            'X' => {
                if !(cur == last
                    && (string_at(i - 3, &["IAU", "EAU"]) || string_at(i - 2, &["AU", "OU"])))
                {
                    st.add_both("KS");
                }
                cur += if string_at(i + 1, &["C", "X"]) { 2 } else { 1 };
            }
            'Z' => {
                if at(i + 1) == Some('H') {
                    st.add_both("J");
                    cur += 2;
                } else {
                    if string_at(i + 1, &["ZO", "ZI", "ZA"])
                        || (slavo_germanic && cur > 0 && at(i - 1) != Some('T'))
                    {
                        st.add("S", "TS");
                    } else {
                        st.add_both("S");
                    }
                    cur += if at(i + 1) == Some('Z') { 2 } else { 1 };
                }
            }
            _ => cur += 1,
        }
    }

    st.primary.truncate(DMETA_MAX);
    st.alternate.truncate(DMETA_MAX);
    (st.primary, st.alternate)
}

/// Every code of one word or whitespace-stripped span.
pub fn encode_codes(word: &str) -> Result<PhoneticCodes> {
    let (primary, alternate) = double_metaphone(word)?;
    Ok(PhoneticCodes {
        soundex: soundex(word)?,
        metaphone: metaphone(word)?,
        dmeta_primary: primary,
        dmeta_alternate: alternate,
    })
}

/// Heuristic syllable count: per word, the number of maximal vowel groups
/// (a e i o u y) with a silent trailing `e` discounted (unless `-le`) and a
/// minimum of one. Empty input counts zero. Additive over words.
pub fn syllable_count(phrase: &str) -> u32 {
    phrase.split_whitespace().map(word_syllables).sum()
}

fn word_syllables(word: &str) -> u32 {
    let lower: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(|c| c.to_lowercase())
        .collect();
    if lower.is_empty() {
        // Non-alphabetic words (digit strings) still get spoken.
        return if word.is_empty() { 0 } else { 1 };
    }
    let vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0u32;
    let mut in_group = false;
    for &c in &lower {
        if vowel(c) {
            if !in_group {
                groups += 1;
            }
            in_group = true;
        } else {
            in_group = false;
        }
    }
    let n = lower.len();
    if groups > 1
        && lower[n - 1] == 'e'
        && !(n >= 2 && lower[n - 2] == 'l')
        && !vowel(lower[n - 2])
    {
        groups -= 1;
    }
    groups.max(1)
}

fn span_digits(span: &str) -> String {
    span.chars().filter(|c| c.is_numeric()).collect()
}

fn span_codes(span: &str) -> Option<PhoneticCodes> {
    let stripped = crate::text::strip_whitespace_lower(span);
    encode_codes(&stripped).ok()
}

/// Per-encoder span equalities `(soundex, metaphone, double metaphone)`
/// where the double-metaphone component is 1 for matching primaries and
/// 0.5 when only an alternate matches. Spans are whitespace-stripped
/// before encoding. Spans whose digit content differs are never
/// phonetically equal (digits are pronounced), and an unencodable span
/// contributes zero to every component.
pub fn span_code_equalities(a: &str, b: &str) -> (f64, f64, f64) {
    if span_digits(a) != span_digits(b) {
        return (0.0, 0.0, 0.0);
    }
    let (ca, cb) = match (span_codes(a), span_codes(b)) {
        (Some(ca), Some(cb)) => (ca, cb),
        _ => return (0.0, 0.0, 0.0),
    };
    let sx = f64::from(ca.soundex == cb.soundex);
    let mp = f64::from(ca.metaphone == cb.metaphone);
    let dm = if ca.dmeta_primary == cb.dmeta_primary {
        1.0
    } else if (!ca.dmeta_alternate.is_empty()
        && (ca.dmeta_alternate == cb.dmeta_primary || ca.dmeta_alternate == cb.dmeta_alternate))
        || (!cb.dmeta_alternate.is_empty() && cb.dmeta_alternate == ca.dmeta_primary)
    {
        0.5
    } else {
        0.0
    };
    (sx, mp, dm)
}

/// Aggregated phonetic similarity of two spans, in [0, 1]: the mean of the
/// three encoder equalities from [`span_code_equalities`].
pub fn phonetic_similarity(a: &str, b: &str) -> f64 {
    let (sx, mp, dm) = span_code_equalities(a, b);
    (sx + mp + dm) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soundex_goldens() {
        assert_eq!(soundex("robert").unwrap(), "R163");
        assert_eq!(soundex("a").unwrap(), "A000");
        assert_eq!(soundex("goods").unwrap(), "G320");
        assert_eq!(soundex("robert's").unwrap(), "R163");
    }

    #[test]
    fn soundex_rejects_unencodable() {
        assert!(soundex("").is_err());
        assert!(soundex("2013").is_err());
        assert!(soundex("a-b").is_err());
    }

    #[test]
    fn metaphone_phrase_confusion_shares_prefix() {
        let a = metaphone("pixel").unwrap();
        let b = metaphone("picksell").unwrap();
        assert!(a.starts_with("PK") && b.starts_with("PK"));
    }

    #[test]
    fn metaphone_is_uppercase_and_deterministic() {
        let a = metaphone("quotes").unwrap();
        assert_eq!(a, metaphone("quotes").unwrap());
        assert!(a.chars().all(|c| c.is_ascii_uppercase() || c == '0'));
        // Consonant skeletons of "quotes" and "goods" coincide; only the
        // soundex initial distinguishes them.
        assert_eq!(a, "KTS");
        assert_eq!(metaphone("goods").unwrap(), "KTS");
        assert_ne!(soundex("quotes").unwrap(), soundex("goods").unwrap());
    }

    #[test]
    fn double_metaphone_repeat_calls_agree() {
        let (p1, a1) = double_metaphone("x").unwrap();
        let (p2, a2) = double_metaphone("x").unwrap();
        assert_eq!(p1, p2);
        assert_eq!(a1, a2);
        assert_eq!(p1, "S");
    }

    #[test]
    fn double_metaphone_smoke() {
        let (p, _) = double_metaphone("smith").unwrap();
        assert_eq!(p, "SM0");
        let (p, a) = double_metaphone("schmidt").unwrap();
        assert_eq!(p, "XMT");
        assert_eq!(a, "SMT");
    }

    #[test]
    fn syllables_match_hand_counts() {
        assert_eq!(syllable_count("than twenty"), 3);
        assert_eq!(syllable_count(""), 0);
        assert_eq!(syllable_count("jewelry"), 3);
        assert_eq!(syllable_count("sales state"), 3);
    }

    #[test]
    fn syllables_are_additive() {
        let a = "peak";
        let b = "sales";
        assert_eq!(
            syllable_count(&format!("{a} {b}")),
            syllable_count(a) + syllable_count(b)
        );
    }

    #[test]
    fn similarity_identity_is_one() {
        assert_eq!(phonetic_similarity("pixel", "pixel"), 1.0);
        assert_eq!(phonetic_similarity("peak sales", "peak sales"), 1.0);
    }

    #[test]
    fn similarity_orders_confusions() {
        assert!(phonetic_similarity("for", "or") >= phonetic_similarity("for", "and"));
        assert!(
            phonetic_similarity("pixel", "peak sales")
                > phonetic_similarity("pixel", "car dealers")
        );
    }

    #[test]
    fn similarity_gates_on_digits() {
        assert_eq!(phonetic_similarity("sales", "sales 2013"), 0.0);
        assert!(phonetic_similarity("sales 2013", "sales 2013") > 0.99);
    }

    #[test]
    fn similarity_of_unencodable_span_is_zero() {
        assert_eq!(phonetic_similarity("2013", "2013"), 0.0);
    }

    #[test]
    fn similarity_values_stay_in_unit_interval() {
        for (a, b) in [
            ("pixel", "peak sales"),
            ("quotes", "goods"),
            ("cells", "sales"),
            ("wine", "remain the"),
        ] {
            let s = phonetic_similarity(a, b);
            assert!((0.0..=1.0).contains(&s), "{a} vs {b} gave {s}");
        }
    }
}
