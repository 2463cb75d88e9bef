use crate::llm_client::CompletionTrace;

/// Fragments shorter than this (in characters, after trimming) are dropped.
pub const DEFAULT_MIN_FRAGMENT_CHARS: usize = 8;

const ANSWER_PREFIXES: &[&str] = &["answer:", "final answer:", "tentative answer:"];

/// Strips a leading list marker (`1.`, `2)`, `(3)`, `-`, `*`, `•`, `a.`) and
/// returns the remainder, or `None` if the line is not a list item.
fn strip_marker(line: &str) -> Option<&str> {
    let t = line.trim_start();
    for bullet in ['-', '*', '•', '+'] {
        if let Some(rest) = t.strip_prefix(bullet) {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                return Some(rest);
            }
        }
    }
    if let Some(rest) = t.strip_prefix('(') {
        let digits = rest.chars().take_while(char::is_ascii_digit).count();
        if digits > 0 {
            if let Some(after) = rest[digits..].strip_prefix(')') {
                return Some(after);
            }
        }
    }
    let digits = t.chars().take_while(char::is_ascii_digit).count();
    let head = if digits > 0 {
        digits
    } else if t.chars().next().is_some_and(|c| c.is_ascii_lowercase()) {
        1
    } else {
        0
    };
    if head > 0 {
        let rest = &t[head..];
        for sep in ['.', ')'] {
            if let Some(after) = rest.strip_prefix(sep) {
                if after.is_empty() || after.starts_with(char::is_whitespace) {
                    return Some(after);
                }
            }
        }
    }
    None
}

fn is_answer_line(line: &str) -> bool {
    let lower = line.trim().to_lowercase();
    ANSWER_PREFIXES.iter().any(|p| lower.starts_with(p))
}

/// Splits prose into sentences at `.`, `!` or `?` followed by whitespace or end of text.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if matches!(c, '.' | '!' | '?') && chars.peek().is_none_or(|n| n.is_whitespace()) {
            out.push(std::mem::take(&mut current));
        }
    }
    out.push(current);
    out.into_iter()
        .map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|s| !s.is_empty())
        .collect()
}

/// Breaks a completion into ordered reasoning fragments.
///
/// List items become fragments (continuation lines are folded into the
/// preceding item); text without list markers is split into sentences.
/// Answer lines are never fragments.
pub fn extract_fragments_with(text: &str, min_chars: usize) -> Vec<String> {
    let lines: Vec<&str> = text.lines().filter(|l| !is_answer_line(l)).collect();
    let has_list = lines.iter().any(|l| strip_marker(l).is_some());
    let raw: Vec<String> = if has_list {
        let mut items: Vec<String> = Vec::new();
        let mut open = false;
        for line in &lines {
            if let Some(rest) = strip_marker(line) {
                items.push(rest.trim().to_string());
                open = true;
            } else if line.trim().is_empty() {
                open = false;
            } else if open {
                let last = items.last_mut().expect("open implies an item");
                last.push(' ');
                last.push_str(line.trim());
            } else {
                items.extend(split_sentences(line));
            }
        }
        items
    } else {
        split_sentences(&lines.join("\n"))
    };
    raw.into_iter()
        .map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|s| s.chars().count() >= min_chars.max(1))
        .collect()
}

pub fn extract_fragments(trace: &CompletionTrace) -> Vec<String> {
    extract_fragments_with(&trace.raw_text, DEFAULT_MIN_FRAGMENT_CHARS)
}
