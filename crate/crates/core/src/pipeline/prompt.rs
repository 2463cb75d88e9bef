use serde::{Deserialize, Serialize};

use super::Question;
use crate::error::{Error, Result};

/// Which fixed layout `build_final_prompt` renders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PromptTemplate {
    /// Numbered stable reasons, then the question.
    #[default]
    Evidence,
    /// Question only; used when no reasons survive.
    Bare,
}

/// A reason chosen for the final prompt with its inclusion frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct StableReason {
    pub id: usize,
    pub text: String,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalPrompt {
    pub template: PromptTemplate,
    pub question: String,
    /// Canonical texts in the order they are numbered in `rendered`.
    pub stable_reasons: Vec<String>,
    pub rendered: String,
}

const EVIDENCE_HEADER: &str = "The statements below were kept because they recur consistently \
across many independent attempts at this question. Treat them as evidence.";

fn render_question(out: &mut String, question: &Question) {
    out.push_str("Question: ");
    out.push_str(&question.text);
    out.push('\n');
    if !question.options.is_empty() {
        out.push_str("Options:\n");
        for opt in &question.options {
            if opt.text.trim().is_empty() {
                out.push_str(&format!("({})\n", opt.label));
            } else {
                out.push_str(&format!("({}) {}\n", opt.label, opt.text));
            }
        }
    }
}

fn label_list(question: &Question) -> String {
    question
        .options
        .iter()
        .map(|o| o.label.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Zero-shot chain-of-thought prompt asking for a numbered list of short,
/// self-contained reasons followed by a tentative answer.
pub fn sampling_prompt(question: &Question) -> String {
    let mut out = String::new();
    render_question(&mut out, question);
    out.push('\n');
    out.push_str(
        "Think step by step. Write your reasoning as a numbered list of short statements, \
one per line, each understandable on its own without the others.\n",
    );
    out.push_str(&format!(
        "After the list, write a final line `Tentative answer: <label>` using one of the labels {}.\n",
        label_list(question)
    ));
    out
}

/// Renders the final prompt. Reasons are numbered by descending frequency,
/// ties broken by ascending id.
pub fn build_final_prompt(
    question: &Question,
    stable_reasons: &[StableReason],
    template: PromptTemplate,
) -> FinalPrompt {
    let mut ordered: Vec<&StableReason> = stable_reasons.iter().collect();
    ordered.sort_by(|a, b| {
        b.frequency
            .total_cmp(&a.frequency)
            .then_with(|| a.id.cmp(&b.id))
    });
    let use_evidence = template == PromptTemplate::Evidence && !ordered.is_empty();

    let mut out = String::new();
    if use_evidence {
        out.push_str(EVIDENCE_HEADER);
        out.push_str("\n\nEvidence:\n");
        for (n, r) in ordered.iter().enumerate() {
            out.push_str(&format!("{}. {}\n", n + 1, r.text));
        }
        out.push('\n');
    }
    render_question(&mut out, question);
    out.push('\n');
    out.push_str(&format!(
        "Reason briefly, then end with a line `Answer: <label>` where <label> is one of: {}.\n",
        label_list(question)
    ));

    FinalPrompt {
        template: if use_evidence {
            PromptTemplate::Evidence
        } else {
            PromptTemplate::Bare
        },
        question: question.text.clone(),
        stable_reasons: if use_evidence {
            ordered.iter().map(|r| r.text.clone()).collect()
        } else {
            Vec::new()
        },
        rendered: out,
    }
}

fn span_label<'a>(span: &str, allowed: &'a [String]) -> Option<&'a String> {
    let rest = span.trim_start_matches(|c: char| {
        c.is_whitespace() || matches!(c, '*' | '_' | '`' | '"' | '\'' | '(' | '[' | '<')
    });
    let token: String = rest.chars().take_while(|c| c.is_alphanumeric()).collect();
    if token.is_empty() {
        return None;
    }
    allowed.iter().find(|l| l.eq_ignore_ascii_case(&token))
}

/// Extracts the label from the last `Answer: <label>` span whose label is
/// allowed. Matching is case-insensitive; the canonical label is returned.
pub fn parse_answer(completion: &str, allowed: &[String]) -> Result<String> {
    let unparsed = || Error::UnparsedAnswer {
        allowed: allowed.join(", "),
    };
    if allowed.is_empty() {
        return Err(Error::Input("allowed label list is empty".into()));
    }
    let lower = completion.to_ascii_lowercase();
    let mut spans = Vec::new();
    let mut from = 0;
    while let Some(pos) = lower[from..].find("answer") {
        let after = from + pos + "answer".len();
        let tail = &completion[after..];
        let trimmed = tail.trim_start_matches([' ', '\t', '*']);
        if let Some(value) = trimmed.strip_prefix(':') {
            let line_end = value.find('\n').unwrap_or(value.len());
            let value = value[..line_end].trim_start_matches('*');
            spans.push(value);
        }
        from = after;
    }
    spans
        .iter()
        .rev()
        .find_map(|span| span_label(span, allowed))
        .cloned()
        .ok_or_else(unparsed)
}
