//! Sentence tokenization and `contains/2` facts.

use crate::term::{Atom, Clause, Term};

use super::BkError;

/// English stop-words dropped by [`tokenize`] (127 words).
pub const STOP_WORDS: [&str; 127] = [
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
    "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself",
    "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
    "who", "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be",
    "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an",
    "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by", "for",
    "with", "about", "against", "between", "into", "through", "during", "before", "after",
    "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over", "under",
    "again", "further", "then", "once", "here", "there", "when", "where", "why", "how", "all",
    "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
    "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don",
    "should", "now",
];

pub fn is_stop_word(word: &str) -> bool {
    STOP_WORDS.contains(&word)
}

/// Turns a lowercase alphanumeric token into a constant symbol. Tokens that
/// start with a digit get an `n` prefix (`2024` becomes `n2024`).
pub fn normalize_symbol(token: &str) -> String {
    if token.starts_with(|c: char| c.is_ascii_digit()) {
        format!("n{token}")
    } else {
        token.to_string()
    }
}

/// Lowercases, splits on anything that is not an ASCII letter or digit, and
/// drops stop-words. Order and duplicates are kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_ascii_lowercase)
        .filter(|t| !is_stop_word(t))
        .map(|t| normalize_symbol(&t))
        .collect()
}

/// One `contains(Sentence, Word)` fact per distinct word, in first-occurrence order.
pub fn contains_facts(words: &[String]) -> Result<Vec<Clause>, BkError> {
    if words.is_empty() {
        return Err(BkError::EmptySentence);
    }
    let sentence = Term::WordList(words.to_vec());
    let mut out: Vec<Clause> = Vec::new();
    for (i, w) in words.iter().enumerate() {
        if words[..i].contains(w) {
            continue;
        }
        out.push(Clause::fact(Atom::binary("contains", sentence.clone(), Term::constant(w.clone()))));
    }
    Ok(out)
}
