use super::{ChatProvider, ChatRequest, ChatResponse, EmbeddingProvider};
use crate::error::Result;

pub const STUB_EMBEDDING_DIM: usize = 64;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, b| (h ^ *b as u64).wrapping_mul(FNV_PRIME))
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Offline embedder: signed hashing of character trigrams into 64 dimensions,
/// normalized to unit length. A pure function of (text, seed).
#[derive(Debug, Clone, Copy)]
pub struct StubEmbedder {
    seed: u64,
}

impl StubEmbedder {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let normalized: String = text
            .to_lowercase()
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { ' ' })
            .collect::<String>()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        let chars: Vec<char> = format!(" {normalized} ").chars().collect();
        let mut v = vec![0.0; STUB_EMBEDDING_DIM];
        for gram in chars.windows(3) {
            let s: String = gram.iter().collect();
            let h = splitmix(fnv1a(s.as_bytes()) ^ self.seed);
            let idx = (h % STUB_EMBEDDING_DIM as u64) as usize;
            v[idx] += if h >> 63 == 0 { 1.0 } else { -1.0 };
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            let h = splitmix(fnv1a(text.as_bytes()) ^ self.seed);
            v[(h % STUB_EMBEDDING_DIM as u64) as usize] = 1.0;
            return v;
        }
        v.iter().map(|x| x / norm).collect()
    }
}

impl EmbeddingProvider for StubEmbedder {
    fn embed_batch(&self, _model: &str, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }

    fn is_local(&self) -> bool {
        true
    }
}

/// Offline chat model.
///
/// When the prompt carries an answer-format instruction (`... is one of: A, B, C.`)
/// it replies `Answer: <label>`, choosing the label mentioned most often in the
/// rest of the prompt and breaking ties with a seeded hash of the prompt.
/// Otherwise it returns a short numbered list derived from the prompt.
#[derive(Debug, Clone, Copy)]
pub struct StubChat {
    seed: u64,
}

pub(crate) const LABEL_LIST_MARKER: &str = "is one of:";

impl StubChat {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn labels(prompt: &str) -> Option<(usize, Vec<String>)> {
        prompt.lines().enumerate().find_map(|(n, line)| {
            let start = line.find(LABEL_LIST_MARKER)? + LABEL_LIST_MARKER.len();
            let labels: Vec<String> = line[start..]
                .trim()
                .trim_end_matches('.')
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            (!labels.is_empty()).then_some((n, labels))
        })
    }

    fn answer(&self, prompt: &str) -> Option<String> {
        let (instr_line, labels) = Self::labels(prompt)?;
        let body: Vec<&str> = prompt
            .lines()
            .enumerate()
            .filter(|(n, _)| *n != instr_line)
            .map(|(_, l)| l)
            .collect();
        let words: Vec<&str> = body
            .iter()
            .flat_map(|l| l.split(|c: char| !c.is_alphanumeric()))
            .filter(|w| !w.is_empty())
            .collect();
        let counts: Vec<usize> = labels
            .iter()
            .map(|l| words.iter().filter(|w| **w == l.as_str()).count())
            .collect();
        let best = *counts.iter().max()?;
        let tied: Vec<&String> = labels
            .iter()
            .zip(&counts)
            .filter(|(_, c)| **c == best)
            .map(|(l, _)| l)
            .collect();
        let pick = splitmix(fnv1a(prompt.as_bytes()) ^ self.seed) as usize % tied.len();
        Some(format!("Answer: {}", tied[pick]))
    }
}

impl ChatProvider for StubChat {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse> {
        let prompt = request.prompt_text();
        let text = self.answer(&prompt).unwrap_or_else(|| {
            let sentences: Vec<&str> = prompt
                .split(['.', '?', '\n'])
                .map(str::trim)
                .filter(|s| s.len() >= 8)
                .take(3)
                .collect();
            let mut out = String::new();
            for (i, s) in sentences.iter().enumerate() {
                out.push_str(&format!("{}. The question states: {s}.\n", i + 1));
            }
            out.push_str("Tentative answer: undetermined");
            out
        });
        Ok(ChatResponse { text, usage: None })
    }

    fn is_local(&self) -> bool {
        true
    }
}
