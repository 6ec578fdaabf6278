//! Small text utilities shared by alignment, answer mapping and lenient scoring.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::span::Span;

const DETACHED_PUNCT: &[char] = &[
    '.', ',', '!', '?', ';', ':', '"', '\'', '(', ')', '[', ']', '\u{201c}', '\u{201d}',
];

/// Whitespace tokenization with leading/trailing punctuation split off,
/// roughly matching the pre-tokenized corpora ("Clinton." -> "Clinton", ".").
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut lead = Vec::new();
        let mut rest = word;
        while let Some(c) = rest.chars().next() {
            if DETACHED_PUNCT.contains(&c) && rest.len() > c.len_utf8() {
                lead.push(c.to_string());
                rest = &rest[c.len_utf8()..];
            } else {
                break;
            }
        }
        let mut trail = Vec::new();
        while let Some(c) = rest.chars().next_back() {
            if DETACHED_PUNCT.contains(&c) && rest.len() > c.len_utf8() {
                trail.push(c.to_string());
                rest = &rest[..rest.len() - c.len_utf8()];
            } else {
                break;
            }
        }
        out.extend(lead);
        out.push(rest.to_string());
        out.extend(trail.into_iter().rev());
    }
    out
}

/// Splits a token stream into sentences after `.`, `!` or `?` tokens.
/// Returns half-open ranges covering every token.
pub fn split_sentences(tokens: &[String]) -> Vec<core::ops::Range<usize>> {
    let mut ranges = Vec::new();
    let mut start = 0;
    for (i, token) in tokens.iter().enumerate() {
        if matches!(token.as_str(), "." | "!" | "?") {
            ranges.push(start..i + 1);
            start = i + 1;
        }
    }
    if start < tokens.len() {
        ranges.push(start..tokens.len());
    }
    ranges
}

/// Collapse whitespace runs and casefold.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, word) in text.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&word.to_lowercase());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    Exact,
    CaseInsensitive,
}

/// Every start position where `needle` occurs as a contiguous token subsequence.
pub fn find_all(haystack: &[String], needle: &[String], mode: MatchMode) -> Vec<Span> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return Vec::new();
    }
    (0..=haystack.len() - needle.len())
        .filter(|&i| {
            haystack[i..i + needle.len()]
                .iter()
                .zip(needle)
                .all(|(h, n)| tokens_equal(h, n, mode))
        })
        .map(|i| Span::new(i, i + needle.len() - 1))
        .collect()
}

/// Exact matches when any exist, otherwise case-insensitive matches.
pub fn find_with_fallback(haystack: &[String], needle: &[String]) -> (Vec<Span>, MatchMode) {
    let exact = find_all(haystack, needle, MatchMode::Exact);
    if !exact.is_empty() {
        return (exact, MatchMode::Exact);
    }
    (
        find_all(haystack, needle, MatchMode::CaseInsensitive),
        MatchMode::CaseInsensitive,
    )
}

fn tokens_equal(a: &str, b: &str, mode: MatchMode) -> bool {
    match mode {
        MatchMode::Exact => a == b,
        MatchMode::CaseInsensitive => {
            a.chars().flat_map(char::to_lowercase).eq(b.chars().flat_map(char::to_lowercase))
        }
    }
}

pub fn join(tokens: &[String]) -> String {
    tokens.join(" ")
}

/// Character offsets (start inclusive, end exclusive) of a token span inside
/// the single-space join of `tokens`. Offsets count Unicode scalar values.
pub fn char_offsets(tokens: &[String], span: Span) -> (usize, usize) {
    let mut pos = 0;
    let mut start = 0;
    for (i, token) in tokens.iter().enumerate().take(span.end + 1) {
        if i == span.start {
            start = pos;
        }
        pos += token.chars().count();
        if i < span.end {
            pos += 1;
        }
    }
    (start, pos)
}
