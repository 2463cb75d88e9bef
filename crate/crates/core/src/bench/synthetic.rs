//! Synthetic benchmark fixtures: questions with a designed number of distinct
//! reasons, rendered as numbered-list completions and written to cassettes so
//! the pipeline can replay them offline.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::BenchRecord;
use crate::error::{Error, Result};
use crate::llm_client::{
    estimate_tokens, CassetteStore, ChatRequest, ChatResponse, DecodingParams, ModelSpec, Usage,
};
use crate::pipeline::{sampling_prompt, AnswerOption};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n_questions: usize,
    pub reasons_min: usize,
    pub reasons_max: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_questions: 20,
            reasons_min: 5,
            reasons_max: 63,
            n_samples: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticQuestion {
    pub record: BenchRecord,
    /// Distinct reasons written into the completions, counting the key reason.
    pub designed_reasons: usize,
    pub completions: Vec<String>,
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

fn word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.gen_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push(CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char);
        w.push(VOWELS[rng.gen_range(0..VOWELS.len())] as char);
    }
    w
}

fn fresh_words(rng: &mut ChaCha8Rng, used: &mut BTreeSet<String>, n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = word(rng);
        if used.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn sentence(words: &[String]) -> String {
    let mut s = words.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    s.push('.');
    s
}

/// Surface variation that the stub embedder maps to the same vector.
fn paraphrase(text: &str, rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..4) {
        0 => text.to_lowercase(),
        1 => text.trim_end_matches('.').to_string(),
        _ => text.to_string(),
    }
}

/// Reason counts spread evenly from `reasons_min` to `reasons_max`.
pub fn designed_counts(spec: &SyntheticSpec) -> Vec<usize> {
    let n = spec.n_questions;
    if n == 1 {
        return vec![spec.reasons_min];
    }
    let span = (spec.reasons_max - spec.reasons_min) as f64;
    (0..n)
        .map(|q| spec.reasons_min + (span * q as f64 / (n - 1) as f64).round() as usize)
        .collect()
}

pub fn generate(spec: &SyntheticSpec) -> Result<Vec<SyntheticQuestion>> {
    if spec.n_questions == 0 || spec.n_samples == 0 {
        return Err(Error::Input(
            "synthetic spec needs questions and samples".into(),
        ));
    }
    if spec.reasons_min < 2 || spec.reasons_max < spec.reasons_min {
        return Err(Error::Input(format!(
            "reason range {}..={} is invalid",
            spec.reasons_min, spec.reasons_max
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let counts = designed_counts(spec);
    let mut out = Vec::with_capacity(spec.n_questions);
    for (q, &r) in counts.iter().enumerate() {
        let mut used = BTreeSet::new();
        let labels: Vec<&str> = if q % 2 == 0 {
            vec!["Yes", "No", "Ambiguous"]
        } else {
            vec!["A", "B", "C", "D", "E"]
        };
        let target = labels[rng.gen_range(0..labels.len())].to_string();
        let topic = fresh_words(&mut rng, &mut used, 3);
        let question = format!(
            "Synthetic case {q}: does the {} account for the {} observed near the {}?",
            topic[0], topic[1], topic[2]
        );
        let options = labels
            .iter()
            .map(|l| AnswerOption {
                label: l.to_string(),
                text: if l.len() == 1 {
                    sentence(&fresh_words(&mut rng, &mut used, 3))
                } else {
                    String::new()
                },
            })
            .collect();

        // Reason 0 is the key clue naming the target; the rest are filler.
        let mut reasons = vec![format!("The decisive clue favours option {target}.")];
        for _ in 1..r {
            reasons.push(sentence(&fresh_words(&mut rng, &mut used, 5)));
        }
        let hi = (10.0 / r as f64).min(0.9);
        let mut popularity = vec![0.9];
        popularity.extend((1..r).map(|_| rng.gen_range(hi / 3.0..=hi)));

        let n = spec.n_samples;
        let mut member = vec![vec![false; r]; n];
        for (i, &p) in popularity.iter().enumerate() {
            for row in member.iter_mut() {
                row[i] = rng.gen_bool(p);
            }
            if member.iter().all(|row| !row[i]) {
                member[rng.gen_range(0..n)][i] = true;
            }
        }

        let completions = member
            .iter()
            .map(|row| {
                let mut present: Vec<usize> = (0..r).filter(|&i| row[i]).collect();
                present.shuffle(&mut rng);
                let mut text = String::new();
                for (k, &i) in present.iter().enumerate() {
                    text.push_str(&format!(
                        "{}. {}\n",
                        k + 1,
                        paraphrase(&reasons[i], &mut rng)
                    ));
                }
                let guess = labels[rng.gen_range(0..labels.len())];
                text.push_str(&format!("Tentative answer: {guess}\n"));
                text
            })
            .collect();

        out.push(SyntheticQuestion {
            record: BenchRecord {
                id: format!("synth-{q:02}"),
                question,
                options,
                target,
                line: 0,
            },
            designed_reasons: r,
            completions,
        });
    }
    Ok(out)
}

/// Writes each question's completions under the keys a pipeline sampling
/// `model` would request, so a replay-strict client serves them.
pub fn write_cassettes(
    questions: &[SyntheticQuestion],
    dir: &Path,
    model: &ModelSpec,
    decoding: &DecodingParams,
) -> Result<()> {
    let store = CassetteStore::open(dir)?;
    for q in questions {
        let prompt = sampling_prompt(&q.record.to_question());
        let request = ChatRequest::user(model, &prompt, decoding);
        for (i, text) in q.completions.iter().enumerate() {
            let response = ChatResponse {
                text: text.clone(),
                usage: Some(Usage {
                    prompt_tokens: estimate_tokens(&prompt),
                    completion_tokens: estimate_tokens(text),
                }),
            };
            store.put_completion(
                &q.record.id,
                &format!("{}#{i}", model.model_name),
                &request,
                &response,
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_cover_the_range() {
        let c = designed_counts(&SyntheticSpec::default());
        assert_eq!(c.len(), 20);
        assert_eq!((c[0], c[19]), (5, 63));
        assert!(c.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn generation_is_deterministic_and_valid() {
        let spec = SyntheticSpec {
            n_questions: 4,
            ..SyntheticSpec::default()
        };
        let a = generate(&spec).unwrap();
        assert_eq!(a, generate(&spec).unwrap());
        for q in &a {
            q.record.validate().unwrap();
            assert_eq!(q.completions.len(), 20);
        }
    }
}
