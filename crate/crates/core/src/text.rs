//! Small text helpers shared by the mock providers and the judge rules.

/// Lowercases `text` and splits it on every non-alphanumeric character.
pub fn tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Token sequence re-joined with single spaces, padded on both sides so that
/// substring checks only match whole words.
pub fn normalized_padded(text: &str) -> String {
    let toks = tokens(text);
    if toks.is_empty() {
        return String::new();
    }
    format!(" {} ", toks.join(" "))
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over the UTF-8 bytes of `s`.
pub fn fnv1a64(s: &str) -> u64 {
    s.as_bytes()
        .iter()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been",
    "but", "by", "can", "could", "did", "do", "does", "for", "from", "had", "has", "have", "how",
    "i", "if", "in", "into", "is", "it", "its", "may", "more", "most", "no", "not", "of", "on",
    "or", "other", "our", "over", "per", "such", "than", "that", "the", "their", "them", "there",
    "these", "they", "this", "those", "to", "under", "up", "was", "we", "were", "what", "when",
    "where", "which", "while", "who", "why", "will", "with", "within", "would", "you", "your",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Distinct non-stopword tokens, sorted.
pub fn content_words(text: &str) -> std::collections::BTreeSet<String> {
    tokens(text).into_iter().filter(|t| !is_stopword(t)).collect()
}

/// Splits on `.`, `!` or `?` when followed by whitespace or end of input.
/// Terminators stay attached to their sentence; a trailing unterminated
/// fragment is kept as its own sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if matches!(c, '.' | '!' | '?') && chars.peek().is_none_or(|n| n.is_whitespace()) {
            let s = current.trim();
            if !s.is_empty() {
                out.push(s.to_owned());
            }
            current.clear();
        }
    }
    let s = current.trim();
    if !s.is_empty() {
        out.push(s.to_owned());
    }
    out
}
