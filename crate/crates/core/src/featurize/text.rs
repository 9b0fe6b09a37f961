//! Deterministic word tokenizer used before building unigram distributions.
//!
//! A token is a maximal run of letters, combining marks and decimal digits
//! (any script). Inside a run of digits the connectors `:` `,` `.` are kept
//! when a digit follows them, and a `+`/`-` directly before a digit at the
//! start of a token is kept as a sign. Everything else (whitespace,
//! punctuation, symbols) separates tokens and is dropped.
//!
//! Each token is then classified:
//!
//! * time, `<TIME>`: `D+(:D+)+` optionally followed by `am`/`pm`, or `D+` followed
//!   by `am`/`pm` (`12:30`, `9:05:10pm`, `3pm`);
//! * number, `<NUMBER>`: `[+-]?D{1,3}(,DDD)+(.D+)?` or `[+-]?D+(.D+)?`
//!   (`3`, `25,000`, `-0.75`).
//!
//! `D` is any Unicode decimal digit. Latin-script letters are lowercased;
//! other scripts keep their case. Stopwords are removed last, so a stopword
//! list may contain the placeholders themselves. The literal placeholders
//! `<TIME>` and `<NUMBER>` in the input pass through unchanged, which makes
//! the tokenizer idempotent on its own output.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use unicode_general_category::{get_general_category, GeneralCategory as Gc};

pub const TIME_TOKEN: &str = "<TIME>";
pub const NUMBER_TOKEN: &str = "<NUMBER>";

fn is_digit(c: char) -> bool {
    get_general_category(c) == Gc::DecimalNumber
}

fn is_word_char(c: char) -> bool {
    matches!(
        get_general_category(c),
        Gc::UppercaseLetter
            | Gc::LowercaseLetter
            | Gc::TitlecaseLetter
            | Gc::ModifierLetter
            | Gc::OtherLetter
            | Gc::NonspacingMark
            | Gc::SpacingMark
            | Gc::EnclosingMark
            | Gc::DecimalNumber
            | Gc::LetterNumber
            | Gc::OtherNumber
    )
}

fn is_latin(c: char) -> bool {
    matches!(c as u32,
        0x41..=0x5A
        | 0x61..=0x7A
        | 0xC0..=0xD6
        | 0xD8..=0xF6
        | 0xF8..=0x24F
        | 0x1E00..=0x1EFF
        | 0x2C60..=0x2C7F
        | 0xA720..=0xA7FF
        | 0xAB30..=0xAB6F
        | 0xFF21..=0xFF3A
        | 0xFF41..=0xFF5A)
}

fn fold_latin(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    for c in token.chars() {
        if is_latin(c) {
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

fn digits(s: &[char]) -> usize {
    s.iter().take_while(|&&c| is_digit(c)).count()
}

fn is_time(t: &[char]) -> bool {
    let t = match t {
        [rest @ .., 'a' | 'p', 'm'] => rest,
        _ => {
            return is_clock(t);
        }
    };
    is_clock(t) || (!t.is_empty() && digits(t) == t.len())
}

fn is_clock(t: &[char]) -> bool {
    let mut i = digits(t);
    if i == 0 {
        return false;
    }
    let mut groups = 0;
    while i < t.len() {
        if t[i] != ':' {
            return false;
        }
        let n = digits(&t[i + 1..]);
        if n == 0 {
            return false;
        }
        i += 1 + n;
        groups += 1;
    }
    groups >= 1
}

fn is_number(t: &[char]) -> bool {
    let t = match t.first() {
        Some('+') | Some('-') => &t[1..],
        _ => t,
    };
    let lead = digits(t);
    if lead == 0 {
        return false;
    }
    let mut i = lead;
    // optional digit grouping: only valid with a 1-3 digit lead
    if i < t.len() && t[i] == ',' {
        if lead > 3 {
            return false;
        }
        while i < t.len() && t[i] == ',' {
            if digits(&t[i + 1..]) != 3 {
                return false;
            }
            i += 4;
        }
    }
    if i < t.len() && t[i] == '.' {
        let n = digits(&t[i + 1..]);
        if n == 0 {
            return false;
        }
        i += 1 + n;
    }
    i == t.len()
}

fn classify(raw: &[char]) -> String {
    if raw.first() == Some(&'<') {
        return raw.iter().collect();
    }
    let folded: String = fold_latin(&raw.iter().collect::<String>());
    let chars: Vec<char> = folded.chars().collect();
    if is_time(&chars) {
        TIME_TOKEN.to_string()
    } else if is_number(&chars) {
        NUMBER_TOKEN.to_string()
    } else {
        folded
    }
}

fn split_words(text: &str) -> Vec<Vec<char>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut cur: Vec<char> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        if cur.is_empty() && c == '<' {
            if let Some(ph) = [TIME_TOKEN, NUMBER_TOKEN]
                .iter()
                .find(|ph| chars[i..].iter().take(ph.len()).copied().eq(ph.chars()))
            {
                out.push(ph.chars().collect());
                i += ph.len();
                continue;
            }
        }
        let separator = matches!(c, ':' | ',' | '.')
            && cur.last().is_some_and(|&p| is_digit(p))
            && next.is_some_and(is_digit);
        let sign = matches!(c, '+' | '-')
            && cur.is_empty()
            && next.is_some_and(is_digit)
            && !(i > 0 && is_word_char(chars[i - 1]));
        if is_word_char(c) || separator || sign {
            cur.push(c);
        } else if !cur.is_empty() {
            out.push(core::mem::take(&mut cur));
        }
        i += 1;
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Tokenizes `text`, replaces times and numbers by placeholders and removes
/// stopwords.
pub fn tokenize_and_normalize(text: &str, stopwords: &BTreeSet<String>) -> Vec<String> {
    split_words(text)
        .iter()
        .map(|w| classify(w))
        .filter(|t| !stopwords.contains(t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn stop(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn time_and_stopwords() {
        let toks = tokenize_and_normalize("the cat sat at 12:30", &stop(&["the", "at"]));
        assert_eq!(toks, vec!["cat", "sat", TIME_TOKEN]);
    }

    #[test]
    fn numbers_and_case() {
        let toks = tokenize_and_normalize("Verse 3 of 25,000 scrolls", &BTreeSet::new());
        assert_eq!(toks, vec!["verse", NUMBER_TOKEN, "of", NUMBER_TOKEN, "scrolls"]);
    }

    #[test]
    fn empty_text() {
        assert!(tokenize_and_normalize("", &BTreeSet::new()).is_empty());
        assert!(tokenize_and_normalize(" ,.;! ", &BTreeSet::new()).is_empty());
    }

    #[test]
    fn time_shapes() {
        let toks = tokenize_and_normalize("3pm 9:05:10PM 12:30 am 7am", &BTreeSet::new());
        assert_eq!(toks, vec![TIME_TOKEN, TIME_TOKEN, TIME_TOKEN, "am", TIME_TOKEN]);
    }

    #[test]
    fn number_shapes() {
        let toks = tokenize_and_normalize(
            "-0.75 +12 1,234,567.5 3.14. 1234,567 v2 1.2.3",
            &BTreeSet::new(),
        );
        assert_eq!(
            toks,
            vec![
                NUMBER_TOKEN,
                NUMBER_TOKEN,
                NUMBER_TOKEN,
                NUMBER_TOKEN,
                "1234,567",
                "v2",
                "1.2.3"
            ]
        );
    }

    #[test]
    fn punctuation_dropped_and_hyphen_splits() {
        let toks = tokenize_and_normalize("well-known, (quoted) \"text\"!", &BTreeSet::new());
        assert_eq!(toks, vec!["well", "known", "quoted", "text"]);
    }

    #[test]
    fn indic_script_keeps_marks_and_case() {
        // Devanagari with vowel signs and danda; Sinhala; Greek keeps case.
        let toks = tokenize_and_normalize("नमस्ते दुनिया। ආයුබෝවන් Ωmega", &BTreeSet::new());
        assert_eq!(toks, vec!["नमस्ते", "दुनिया", "ආයුබෝවන්", "Ωmega"]);
    }

    #[test]
    fn non_ascii_digits_are_numbers() {
        let toks = tokenize_and_normalize("२०२३ ௧௨", &BTreeSet::new());
        assert_eq!(toks, vec![NUMBER_TOKEN, NUMBER_TOKEN]);
    }

    #[test]
    fn placeholders_survive_retokenization() {
        let once = tokenize_and_normalize("At 10:45 we read 3 verses.", &BTreeSet::new());
        let joined = once.join(" ");
        assert_eq!(tokenize_and_normalize(&joined, &BTreeSet::new()), once);
    }

    #[test]
    fn placeholder_stopwords() {
        let toks = tokenize_and_normalize("page 4", &stop(&[NUMBER_TOKEN]));
        assert_eq!(toks, vec!["page"]);
    }
}
