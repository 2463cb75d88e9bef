//! Numbered stage files under a per-question run directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::QuestionResult;
use crate::ensemble::StabilityReport;
use crate::error::{Error, Result};
use crate::hubo::HuboModel;
use crate::llm_client::CompletionTrace;
use crate::reason_pool::ReasonPool;
use crate::solvers::SampleSet;

pub const STAGE_SCHEMA_VERSION: u32 = 1;

pub const TRACES_FILE: &str = "01_traces.json";
pub const POOL_FILE: &str = "02_pool.json";
pub const HUBO_FILE: &str = "03_hubo.json";
pub const SAMPLES_FILE: &str = "04_samples.json";
pub const STABILITY_FILE: &str = "05_stability.json";
pub const RESULT_FILE: &str = "06_result.json";

#[derive(Serialize, Deserialize)]
struct TracesDoc {
    schema_version: u32,
    question_id: String,
    traces: Vec<CompletionTrace>,
}

#[derive(Serialize, Deserialize)]
struct SamplesDoc {
    schema_version: u32,
    question_id: String,
    sample_set: SampleSet,
}

#[derive(Serialize, Deserialize)]
struct StabilityDoc {
    schema_version: u32,
    question_id: String,
    report: StabilityReport,
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// `root/<question_id>-<first 12 hex digits of the config hash>`.
pub fn stage_dir(root: &Path, question_id: &str, config_hash: &str) -> PathBuf {
    let prefix = &config_hash[..config_hash.len().min(12)];
    root.join(format!("{}-{prefix}", sanitize(question_id)))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_text(path, &s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_doc<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn check_version(path: &Path, v: u32) -> Result<()> {
    if v != STAGE_SCHEMA_VERSION {
        return Err(Error::Input(format!(
            "{}: unsupported schema_version {v}",
            path.display()
        )));
    }
    Ok(())
}

pub fn read_traces(path: &Path) -> Result<Vec<CompletionTrace>> {
    let doc: TracesDoc = read_doc(path)?;
    check_version(path, doc.schema_version)?;
    Ok(doc.traces)
}

pub fn read_pool(path: &Path) -> Result<ReasonPool> {
    ReasonPool::from_json(&read_text(path)?)
}

pub fn read_samples(path: &Path) -> Result<SampleSet> {
    let doc: SamplesDoc = read_doc(path)?;
    check_version(path, doc.schema_version)?;
    Ok(doc.sample_set)
}

pub fn read_stability(path: &Path) -> Result<StabilityReport> {
    let doc: StabilityDoc = read_doc(path)?;
    check_version(path, doc.schema_version)?;
    Ok(doc.report)
}

/// Paths of one question's stage files.
#[derive(Debug, Clone)]
pub struct RunFiles {
    dir: PathBuf,
}

impl RunFiles {
    pub fn create(root: &Path, question_id: &str, config_hash: &str) -> Result<Self> {
        let dir = stage_dir(root, question_id, config_hash);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self { dir })
    }

    /// Refers to an existing directory without creating it.
    pub fn open(root: &Path, question_id: &str, config_hash: &str) -> Self {
        Self {
            dir: stage_dir(root, question_id, config_hash),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn traces(&self) -> PathBuf {
        self.dir.join(TRACES_FILE)
    }

    pub fn pool(&self) -> PathBuf {
        self.dir.join(POOL_FILE)
    }

    pub fn hubo(&self) -> PathBuf {
        self.dir.join(HUBO_FILE)
    }

    pub fn samples(&self) -> PathBuf {
        self.dir.join(SAMPLES_FILE)
    }

    pub fn stability(&self) -> PathBuf {
        self.dir.join(STABILITY_FILE)
    }

    pub fn result(&self) -> PathBuf {
        self.dir.join(RESULT_FILE)
    }

    pub fn write_traces(&self, question_id: &str, traces: &[CompletionTrace]) -> Result<()> {
        write_json(
            &self.traces(),
            &TracesDoc {
                schema_version: STAGE_SCHEMA_VERSION,
                question_id: question_id.to_string(),
                traces: traces.to_vec(),
            },
        )
    }

    pub fn write_pool(&self, pool: &ReasonPool) -> Result<()> {
        write_text(&self.pool(), &pool.to_json()?)
    }

    pub fn write_model(&self, model: &HuboModel) -> Result<()> {
        write_text(&self.hubo(), &model.to_json()?)
    }

    pub fn write_samples(&self, question_id: &str, samples: &SampleSet) -> Result<()> {
        write_json(
            &self.samples(),
            &SamplesDoc {
                schema_version: STAGE_SCHEMA_VERSION,
                question_id: question_id.to_string(),
                sample_set: samples.clone(),
            },
        )
    }

    pub fn write_stability(&self, question_id: &str, report: &StabilityReport) -> Result<()> {
        write_json(
            &self.stability(),
            &StabilityDoc {
                schema_version: STAGE_SCHEMA_VERSION,
                question_id: question_id.to_string(),
                report: report.clone(),
            },
        )
    }

    pub fn write_result(&self, result: &QuestionResult) -> Result<()> {
        write_text(&self.result(), &result.to_json()?)
    }

    pub fn read_model(&self) -> Result<HuboModel> {
        HuboModel::from_json(&read_text(&self.hubo())?)
    }

    pub fn read_result(&self) -> Result<QuestionResult> {
        QuestionResult::from_json(&read_text(&self.result())?)
    }
}
