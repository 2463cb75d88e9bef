//! Benchmark harness: dataset loading, batch runs, scoring, and energy accounting.

mod report;
pub mod synthetic;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{emit_report, frequency_svg, ReportFiles};

use crate::error::{Error, Result};
use crate::pipeline::{AnswerOption, Pipeline, Question, QuestionResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum OptionDoc {
    Full {
        label: String,
        #[serde(default)]
        text: String,
    },
    Pair(String, String),
    Label(String),
}

impl From<OptionDoc> for AnswerOption {
    fn from(o: OptionDoc) -> Self {
        match o {
            OptionDoc::Full { label, text } | OptionDoc::Pair(label, text) => {
                AnswerOption { label, text }
            }
            OptionDoc::Label(label) => AnswerOption {
                label,
                text: String::new(),
            },
        }
    }
}

#[derive(Deserialize)]
struct RecordDoc {
    id: String,
    question: String,
    options: Vec<OptionDoc>,
    target: String,
}

/// One multiple-choice item. Options keep their dataset order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub id: String,
    pub question: String,
    pub options: Vec<AnswerOption>,
    pub target: String,
    /// 1-based line in the source file, 0 when built in memory.
    #[serde(skip)]
    pub line: usize,
}

impl BenchRecord {
    pub fn to_question(&self) -> Question {
        Question {
            id: self.id.clone(),
            text: self.question.clone(),
            options: self.options.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let at = if self.line > 0 {
            format!(" (line {})", self.line)
        } else {
            String::new()
        };
        self.to_question()
            .validate()
            .map_err(|e| Error::Input(format!("record `{}`{at}: {e}", self.id)))?;
        if !self.options.iter().any(|o| o.label == self.target) {
            return Err(Error::Input(format!(
                "record `{}`{at}: target `{}` is not one of the option labels",
                self.id, self.target
            )));
        }
        Ok(())
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Parses JSON-lines text. Blank lines are skipped; errors carry the line number.
pub fn parse_dataset(text: &str) -> Result<Vec<BenchRecord>> {
    let mut out: Vec<BenchRecord> = Vec::new();
    let mut seen = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let doc: RecordDoc =
            serde_json::from_str(line).map_err(|e| Error::Input(format!("line {line_no}: {e}")))?;
        let record = BenchRecord {
            id: doc.id,
            question: doc.question,
            options: doc.options.into_iter().map(Into::into).collect(),
            target: doc.target,
            line: line_no,
        };
        record.validate()?;
        if let Some(first) = seen.insert(record.id.clone(), line_no) {
            return Err(Error::Input(format!(
                "duplicate id `{}` on lines {first} and {line_no}",
                record.id
            )));
        }
        out.push(record);
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<Vec<BenchRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text).map_err(|e| match e {
        Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_dataset(path: &Path, records: &[BenchRecord]) -> Result<()> {
    let mut s = String::new();
    for r in records {
        s.push_str(&r.to_json_line()?);
        s.push('\n');
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Wh-per-token constants keyed by model name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnergyTable(BTreeMap<String, f64>);

impl Default for EnergyTable {
    fn default() -> Self {
        Self(
            [
                ("gpt-4o", 3.0e-4),
                ("o3-high", 3.3e-2),
                ("llama-3.1", 8.6e-4),
                // Midpoint of the published 1.0e-3 to 2.0e-3 range.
                ("deepseek-v1", 1.5e-3),
                ("deepseek-r1", 4.5e-3),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        )
    }
}

impl EnergyTable {
    pub fn new(entries: BTreeMap<String, f64>) -> Result<Self> {
        let t = Self(entries);
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in &self.0 {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "energy per token for `{k}` must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let t: Self = serde_json::from_str(&raw)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        t.validate()?;
        Ok(t)
    }

    pub fn get(&self, model: &str) -> Option<f64> {
        self.0.get(model).copied()
    }

    /// Adds or replaces one entry.
    pub fn set(&mut self, model: &str, wh_per_token: f64) -> Result<()> {
        if !(wh_per_token > 0.0 && wh_per_token.is_finite()) {
            return Err(Error::Config(format!(
                "energy per token for `{model}` must be positive, got {wh_per_token}"
            )));
        }
        self.0.insert(model.to_string(), wh_per_token);
        Ok(())
    }

    pub fn models(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

/// Sum over models of tokens times the model's Wh-per-token.
pub fn estimate_energy(tokens: &BTreeMap<String, u64>, table: &EnergyTable) -> Result<f64> {
    let mut wh = 0.0;
    for (model, &n) in tokens {
        let rate = table.get(model).ok_or_else(|| {
            Error::Config(format!(
                "no energy entry for model `{model}` (known: {})",
                table.models().collect::<Vec<_>>().join(", ")
            ))
        })?;
        wh += n as f64 * rate;
    }
    Ok(wh)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountStats {
    pub mean: f64,
    pub median: f64,
    pub min: usize,
    pub max: usize,
}

impl CountStats {
    /// `None` for an empty slice. The median of an even count averages the middle pair.
    pub fn of(values: &[usize]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_unstable();
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2] as f64
        } else {
            (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
        };
        Some(Self {
            mean: v.iter().sum::<usize>() as f64 / n as f64,
            median,
            min: v[0],
            max: v[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionScore {
    pub id: String,
    pub target: String,
    pub answer: Option<String>,
    pub correct: bool,
    pub degraded: bool,
    pub num_reasons: usize,
    pub num_selected: usize,
    pub tokens_in: u64,
    pub tokens_out: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub accuracy: f64,
    pub n_total: usize,
    pub n_correct: usize,
    pub n_incorrect: usize,
    pub n_unparsed: usize,
    pub n_degraded: usize,
    pub reasons: Option<CountStats>,
    pub mean_selected: Option<f64>,
    pub tokens_in: u64,
    pub tokens_out: u64,
    /// Input plus output tokens per model.
    pub tokens_by_model: BTreeMap<String, u64>,
    /// `None` when some model has no energy entry.
    pub estimated_wh: Option<f64>,
    /// Sorted by id.
    pub questions: Vec<QuestionScore>,
}

/// Scores results against records. Both must cover the same ids; order is irrelevant.
pub fn score(
    results: &[QuestionResult],
    records: &[BenchRecord],
    table: &EnergyTable,
) -> Result<RunSummary> {
    let by_id: BTreeMap<&str, &BenchRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut sorted: Vec<&QuestionResult> = results.iter().collect();
    sorted.sort_by(|a, b| a.question_id.cmp(&b.question_id));
    let result_ids: BTreeSet<&str> = sorted.iter().map(|r| r.question_id.as_str()).collect();
    if result_ids.len() != sorted.len() {
        return Err(Error::Input(
            "results contain a duplicate question id".into(),
        ));
    }
    if let Some(missing) = by_id.keys().find(|id| !result_ids.contains(*id)) {
        return Err(Error::Input(format!("no result for record `{missing}`")));
    }
    if let Some(extra) = result_ids.iter().find(|id| !by_id.contains_key(*id)) {
        return Err(Error::Input(format!(
            "result `{extra}` has no matching record"
        )));
    }

    let mut questions = Vec::with_capacity(sorted.len());
    let mut tokens_by_model: BTreeMap<String, u64> = BTreeMap::new();
    let (mut tokens_in, mut tokens_out) = (0, 0);
    for r in &sorted {
        let record = by_id[r.question_id.as_str()];
        let correct = r.answer.as_deref() == Some(record.target.as_str());
        questions.push(QuestionScore {
            id: r.question_id.clone(),
            target: record.target.clone(),
            answer: r.answer.clone(),
            correct,
            degraded: r.degraded,
            num_reasons: r.num_reasons,
            num_selected: r.selected_reasons.len(),
            tokens_in: r.tokens.input,
            tokens_out: r.tokens.output,
        });
        tokens_in += r.tokens.input;
        tokens_out += r.tokens.output;
        for (m, t) in &r.tokens.by_model {
            *tokens_by_model.entry(m.clone()).or_default() += t.input + t.output;
        }
    }

    let n_total = questions.len();
    let n_correct = questions.iter().filter(|q| q.correct).count();
    let n_unparsed = questions.iter().filter(|q| q.answer.is_none()).count();
    let reason_counts: Vec<usize> = questions.iter().map(|q| q.num_reasons).collect();
    let selected: Vec<usize> = questions.iter().map(|q| q.num_selected).collect();
    Ok(RunSummary {
        accuracy: if n_total == 0 {
            0.0
        } else {
            n_correct as f64 / n_total as f64
        },
        n_total,
        n_correct,
        n_incorrect: n_total - n_correct - n_unparsed,
        n_unparsed,
        n_degraded: questions.iter().filter(|q| q.degraded).count(),
        reasons: CountStats::of(&reason_counts),
        mean_selected: CountStats::of(&selected).map(|s| s.mean),
        tokens_in,
        tokens_out,
        estimated_wh: estimate_energy(&tokens_by_model, table).ok(),
        tokens_by_model,
        questions,
    })
}

/// Runs every record with up to `workers` questions in flight. Results come
/// back in record order; the first failure (in record order) is returned.
pub fn run_batch(
    pipeline: &Pipeline<'_>,
    records: &[BenchRecord],
    run_root: Option<&Path>,
    workers: usize,
) -> Result<Vec<QuestionResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Result<QuestionResult>> = pool.install(|| {
        records
            .par_iter()
            .map(|r| pipeline.run_question(&r.to_question(), run_root))
            .collect()
    });
    outcomes.into_iter().collect()
}
