//! End-to-end orchestration for one question: sample, extract, build, solve,
//! rank, assemble the final prompt, and ask for the answer.

mod prompt;
mod stages;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use prompt::{
    build_final_prompt, parse_answer, sampling_prompt, FinalPrompt, PromptTemplate, StableReason,
};
pub use stages::{
    read_pool, read_samples, read_stability, read_traces, stage_dir, write_json, RunFiles,
    STAGE_SCHEMA_VERSION,
};

use crate::ensemble::{analyze, StabilityParams, StabilityReport};
use crate::error::{Error, Result};
use crate::hubo::{build_hubo, HuboModel, HuboParams};
use crate::llm_client::{
    estimate_tokens, ChatRequest, CompletionTrace, DecodingParams, LlmClient, ModelSpec,
};
use crate::reason_pool::{build_pool, similarity_matrix, PoolOptions, ReasonPool};
use crate::solvers::{
    brute_force, external_solve, solve_native, solve_reduced, AnnealSchedule, BruteForceOptions,
    CassetteAdapter, ExternalSolver, HttpAdapter, SampleSet, Spectrum,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerOption {
    pub label: String,
    #[serde(default)]
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub options: Vec<AnswerOption>,
}

impl Question {
    pub fn labels(&self) -> Vec<String> {
        self.options.iter().map(|o| o.label.clone()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::Input("question id is empty".into()));
        }
        if self.text.trim().is_empty() {
            return Err(Error::Input(format!("question `{}` has no text", self.id)));
        }
        if self.options.is_empty() {
            return Err(Error::Input(format!(
                "question `{}` has no options",
                self.id
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for o in &self.options {
            let label = o.label.trim();
            if label.is_empty() || !label.chars().all(char::is_alphanumeric) {
                return Err(Error::Input(format!(
                    "question `{}` has invalid option label `{}`",
                    self.id, o.label
                )));
            }
            if !seen.insert(label.to_ascii_lowercase()) {
                return Err(Error::Input(format!(
                    "question `{}` repeats option label `{}`",
                    self.id, o.label
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    #[default]
    SaHubo,
    SaQubo,
    BruteForce,
    External,
}

impl SolverChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverChoice::SaHubo => "sa-hubo",
            SolverChoice::SaQubo => "sa-qubo",
            SolverChoice::BruteForce => "brute-force",
            SolverChoice::External => "external",
        }
    }
}

impl std::fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sa-hubo" => Ok(SolverChoice::SaHubo),
            "sa-qubo" => Ok(SolverChoice::SaQubo),
            "brute-force" => Ok(SolverChoice::BruteForce),
            "external" => Ok(SolverChoice::External),
            other => Err(Error::Config(format!(
                "unknown solver `{other}` (expected sa-hubo, sa-qubo, brute-force, or external)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub model: ModelSpec,
    pub count: usize,
}

/// Settings for the external-solver adapter. With only `cassette` set the
/// adapter replays; with both `endpoint` and `cassette` it records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalSettings {
    pub adapter_id: String,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub cassette: Option<PathBuf>,
    pub shots: u64,
}

fn default_answer_decoding() -> DecodingParams {
    DecodingParams {
        temperature: 0.0,
        ..DecodingParams::default()
    }
}

fn default_brute_force() -> BruteForceOptions {
    BruteForceOptions {
        spectrum: Spectrum::Lowest(64),
        ..BruteForceOptions::default()
    }
}

fn default_schema_version() -> u32 {
    STAGE_SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub n_samples: usize,
    pub sampling_plan: Vec<PlanEntry>,
    pub answer_model: ModelSpec,
    pub embedding_model: ModelSpec,
    #[serde(default)]
    pub decoding: DecodingParams,
    #[serde(default = "default_answer_decoding")]
    pub answer_decoding: DecodingParams,
    #[serde(default)]
    pub pool: PoolOptions,
    #[serde(default)]
    pub hubo_params: HuboParams,
    #[serde(default)]
    pub stability: StabilityParams,
    #[serde(default)]
    pub solver_choice: SolverChoice,
    #[serde(default)]
    pub schedule: AnnealSchedule,
    #[serde(default = "default_brute_force")]
    pub brute_force: BruteForceOptions,
    #[serde(default)]
    pub external: Option<ExternalSettings>,
    /// Seeds the annealer; overrides `schedule.seed`.
    #[serde(default)]
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            schema_version: STAGE_SCHEMA_VERSION,
            n_samples: 20,
            sampling_plan: vec![PlanEntry {
                model: ModelSpec::stub("stub-cot"),
                count: 20,
            }],
            answer_model: ModelSpec::stub("stub-answer"),
            embedding_model: ModelSpec::stub("stub-embed"),
            decoding: DecodingParams::default(),
            answer_decoding: default_answer_decoding(),
            pool: PoolOptions::default(),
            hubo_params: HuboParams::default(),
            stability: StabilityParams::default(),
            solver_choice: SolverChoice::SaHubo,
            schedule: AnnealSchedule::default(),
            brute_force: default_brute_force(),
            external: None,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("cannot parse pipeline config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&raw)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != STAGE_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported config schema_version {}",
                self.schema_version
            )));
        }
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        let planned: usize = self.sampling_plan.iter().map(|p| p.count).sum();
        if planned != self.n_samples {
            return Err(Error::Config(format!(
                "sampling_plan counts sum to {planned} but n_samples is {}",
                self.n_samples
            )));
        }
        for p in &self.sampling_plan {
            p.model.validate()?;
        }
        self.answer_model.validate()?;
        self.embedding_model.validate()?;
        self.decoding.validate()?;
        self.answer_decoding.validate()?;
        self.hubo_params.validate()?;
        self.stability.validate()?;
        self.schedule.validate()?;
        if !(self.pool.merge_threshold > 0.0 && self.pool.merge_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "merge_threshold must be in (0, 1], got {}",
                self.pool.merge_threshold
            )));
        }
        if self.solver_choice == SolverChoice::External {
            let ext = self.external.as_ref().ok_or_else(|| {
                Error::Config("solver `external` requires an `external` section".into())
            })?;
            if ext.endpoint.is_none() && ext.cassette.is_none() {
                return Err(Error::Config(
                    "external solver needs an endpoint, a cassette, or both".into(),
                ));
            }
            if ext.shots == 0 {
                return Err(Error::Config("external shots must be positive".into()));
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the serialized config.
    pub fn content_hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(
            serde_json::to_string(self)?.as_bytes(),
        )))
    }

    pub fn effective_schedule(&self) -> AnnealSchedule {
        self.schedule.with_seed(self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ModelTokens {
    pub calls: u64,
    pub input: u64,
    pub output: u64,
    /// Some counts were estimated because the provider reported no usage.
    pub estimated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TokenTotals {
    pub input: u64,
    pub output: u64,
    pub by_model: BTreeMap<String, ModelTokens>,
}

impl TokenTotals {
    pub fn record(&mut self, model: &str, input: u64, output: u64, estimated: bool) {
        self.input += input;
        self.output += output;
        let m = self.by_model.entry(model.to_string()).or_default();
        m.calls += 1;
        m.input += input;
        m.output += output;
        m.estimated |= estimated;
    }

    pub fn total(&self) -> u64 {
        self.input + self.output
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub solver_id: String,
    pub distinct_samples: usize,
    pub total_weight: u64,
    pub min_energy: f64,
    pub reduced: bool,
}

impl SampleSummary {
    fn of(samples: &SampleSet) -> Self {
        Self {
            solver_id: samples.solver_id.clone(),
            distinct_samples: samples.len(),
            total_weight: samples.total_weight(),
            min_energy: samples.min_energy().unwrap_or(f64::NAN),
            reduced: samples.metadata.reduced,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub schema_version: u32,
    pub question_id: String,
    pub config_hash: String,
    /// Parsed label, or `None` when the response had no allowed label.
    pub answer: Option<String>,
    pub answer_text: String,
    /// The model was asked the bare question because no reasons survived.
    pub degraded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degraded_reason: Option<String>,
    pub num_reasons: usize,
    /// Ids of the reasons placed in the final prompt.
    pub selected_reasons: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityReport>,
    pub final_prompt: FinalPrompt,
    pub tokens: TokenTotals,
}

impl QuestionResult {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        if r.schema_version != STAGE_SCHEMA_VERSION {
            return Err(Error::Input(format!(
                "unsupported result schema_version {}",
                r.schema_version
            )));
        }
        Ok(r)
    }

    pub fn is_unparsed(&self) -> bool {
        self.answer.is_none()
    }
}

/// Downstream artifacts of the optimization stages, absent in degraded mode.
#[derive(Debug, Clone)]
pub struct Solved {
    pub model: HuboModel,
    pub samples: SampleSet,
    pub report: StabilityReport,
}

/// A configured pipeline bound to a client. Cheap to share across threads.
pub struct Pipeline<'a> {
    config: PipelineConfig,
    config_hash: String,
    client: &'a LlmClient,
    adapter: Option<Box<dyn ExternalSolver>>,
}

impl<'a> Pipeline<'a> {
    pub fn new(config: PipelineConfig, client: &'a LlmClient) -> Result<Self> {
        config.validate()?;
        let adapter: Option<Box<dyn ExternalSolver>> =
            match (&config.solver_choice, &config.external) {
                (SolverChoice::External, Some(ext)) => Some(match (&ext.endpoint, &ext.cassette) {
                    (Some(url), Some(path)) => Box::new(CassetteAdapter::record(
                        path.clone(),
                        Box::new(HttpAdapter::new(ext.adapter_id.clone(), url)?),
                    )),
                    (Some(url), None) => Box::new(HttpAdapter::new(ext.adapter_id.clone(), url)?),
                    (None, Some(path)) => Box::new(CassetteAdapter::replay(path.clone())?),
                    (None, None) => unreachable!("validated above"),
                }),
                _ => None,
            };
        Ok(Self::assemble(config, client, adapter))
    }

    /// Uses `adapter` for the external solver choice instead of the configured one.
    pub fn with_adapter(
        config: PipelineConfig,
        client: &'a LlmClient,
        adapter: Box<dyn ExternalSolver>,
    ) -> Result<Self> {
        let mut config = config;
        config.solver_choice = SolverChoice::External;
        if config.external.is_none() {
            config.external = Some(ExternalSettings {
                adapter_id: adapter.adapter_id().to_string(),
                endpoint: None,
                cassette: None,
                shots: 64,
            });
        }
        let ext = config.external.as_ref().expect("set above");
        if ext.shots == 0 {
            return Err(Error::Config("external shots must be positive".into()));
        }
        Ok(Self::assemble(config, client, Some(adapter)))
    }

    fn assemble(
        config: PipelineConfig,
        client: &'a LlmClient,
        adapter: Option<Box<dyn ExternalSolver>>,
    ) -> Self {
        let config_hash = config.content_hash().expect("config serializes");
        Self {
            config,
            config_hash,
            client,
            adapter,
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    /// Draws `n_samples` completions following the sampling plan. Sample
    /// indices are global across the plan so each cassette key is unique.
    pub fn sample(&self, question: &Question) -> Result<Vec<CompletionTrace>> {
        question.validate().map_err(|e| e.in_stage("sample"))?;
        let prompt = sampling_prompt(question);
        let mut traces = Vec::with_capacity(self.config.n_samples);
        let mut start = 0;
        for entry in &self.config.sampling_plan {
            if entry.count == 0 {
                continue;
            }
            let batch = self
                .client
                .sample_range(
                    &question.id,
                    &prompt,
                    &entry.model,
                    start..start + entry.count,
                    &self.config.decoding,
                )
                .map_err(|e| e.in_stage("sample"))?;
            traces.extend(batch);
            start += entry.count;
        }
        Ok(traces)
    }

    pub fn build_pool(&self, traces: &[CompletionTrace]) -> Result<ReasonPool> {
        build_pool(
            traces,
            self.client,
            &self.config.embedding_model,
            &self.config.pool,
        )
        .map_err(|e| e.in_stage("pool"))
    }

    pub fn build_model(&self, pool: &ReasonPool) -> Result<HuboModel> {
        let sim = similarity_matrix(pool).map_err(|e| e.in_stage("hubo"))?;
        build_hubo(pool, &sim, &self.config.hubo_params).map_err(|e| e.in_stage("hubo"))
    }

    pub fn solve(&self, model: &HuboModel) -> Result<SampleSet> {
        let schedule = self.config.effective_schedule();
        let out = match self.config.solver_choice {
            SolverChoice::SaHubo => solve_native(model, &schedule),
            SolverChoice::SaQubo => solve_reduced(model, &schedule),
            SolverChoice::BruteForce => brute_force(model, &self.config.brute_force),
            SolverChoice::External => {
                let adapter = self.adapter.as_deref().ok_or_else(|| {
                    Error::Config("external solver selected but no adapter is configured".into())
                })?;
                let shots = self.config.external.as_ref().map(|e| e.shots).unwrap_or(64);
                external_solve(adapter, model, shots)
            }
        };
        out.map_err(|e| e.in_stage("solve"))
    }

    pub fn rank(&self, samples: &SampleSet) -> Result<StabilityReport> {
        analyze(samples, &self.config.stability).map_err(|e| e.in_stage("rank"))
    }

    /// Runs the optimization stages on a pool; `None` for an empty pool.
    pub fn optimize(&self, pool: &ReasonPool) -> Result<Option<Solved>> {
        if pool.is_empty() {
            return Ok(None);
        }
        let model = self.build_model(pool)?;
        let samples = self.solve(&model)?;
        let report = self.rank(&samples)?;
        Ok(Some(Solved {
            model,
            samples,
            report,
        }))
    }

    /// Builds the final prompt from the ranked pool, queries the answer model,
    /// and assembles the result. Token totals cover `traces` plus the answer call.
    pub fn answer(
        &self,
        question: &Question,
        traces: &[CompletionTrace],
        pool: &ReasonPool,
        solved: Option<&Solved>,
    ) -> Result<QuestionResult> {
        let wrap = |e: Error| e.in_stage("answer");
        let stable: Vec<StableReason> = match solved {
            Some(s) => s
                .report
                .selected
                .iter()
                .map(|&id| StableReason {
                    id,
                    text: pool.reasons()[id].canonical_text.clone(),
                    frequency: s.report.frequencies[id],
                })
                .collect(),
            None => Vec::new(),
        };
        let degraded_reason = if pool.is_empty() {
            Some("no reasons extracted from any sample".to_string())
        } else if stable.is_empty() {
            Some("no reason passed the stability selection".to_string())
        } else {
            None
        };
        if let Some(why) = &degraded_reason {
            warn!("question `{}`: degraded mode, {why}", question.id);
        }
        let template = if degraded_reason.is_some() {
            PromptTemplate::Bare
        } else {
            PromptTemplate::Evidence
        };
        let final_prompt = build_final_prompt(question, &stable, template);

        let request = ChatRequest::user(
            &self.config.answer_model,
            &final_prompt.rendered,
            &self.config.answer_decoding,
        );
        let response = self
            .client
            .chat_keyed(&question.id, &self.config.answer_model, "answer", &request)
            .map_err(wrap)?;

        let mut tokens = TokenTotals::default();
        for t in traces {
            tokens.record(
                &t.model_name,
                t.token_count_in,
                t.token_count_out,
                t.tokens_estimated,
            );
        }
        match response.usage {
            Some(u) => tokens.record(
                &self.config.answer_model.model_name,
                u.prompt_tokens,
                u.completion_tokens,
                false,
            ),
            None => tokens.record(
                &self.config.answer_model.model_name,
                estimate_tokens(&final_prompt.rendered),
                estimate_tokens(&response.text),
                true,
            ),
        }

        let answer = match parse_answer(&response.text, &question.labels()) {
            Ok(label) => Some(label),
            Err(Error::UnparsedAnswer { .. }) => {
                warn!("question `{}`: answer could not be parsed", question.id);
                None
            }
            Err(e) => return Err(wrap(e)),
        };

        let mut selected_reasons: Vec<usize> = stable.iter().map(|r| r.id).collect();
        selected_reasons.sort_unstable();
        Ok(QuestionResult {
            schema_version: STAGE_SCHEMA_VERSION,
            question_id: question.id.clone(),
            config_hash: self.config_hash.clone(),
            answer,
            answer_text: response.text,
            degraded: degraded_reason.is_some(),
            degraded_reason,
            num_reasons: pool.len(),
            selected_reasons,
            pool_hash: Some(pool.content_hash().map_err(wrap)?),
            model_hash: solved
                .map(|s| s.model.content_hash())
                .transpose()
                .map_err(wrap)?,
            samples: solved.map(|s| SampleSummary::of(&s.samples)),
            stability: solved.map(|s| s.report.clone()),
            final_prompt,
            tokens,
        })
    }

    /// Continues from persisted traces and pool, skipping sampling and extraction.
    pub fn run_from_pool(
        &self,
        question: &Question,
        traces: &[CompletionTrace],
        pool: &ReasonPool,
        files: Option<&RunFiles>,
    ) -> Result<QuestionResult> {
        let solved = self.optimize(pool)?;
        if let (Some(files), Some(s)) = (files, &solved) {
            files.write_model(&s.model)?;
            files.write_samples(&question.id, &s.samples)?;
            files.write_stability(&question.id, &s.report)?;
        }
        let result = self.answer(question, traces, pool, solved.as_ref())?;
        if let Some(files) = files {
            files.write_result(&result)?;
        }
        Ok(result)
    }

    /// Executes every stage in order. With `run_root` set, each artifact is
    /// written under `run_root/<question_id>-<config hash prefix>/`.
    pub fn run_question(
        &self,
        question: &Question,
        run_root: Option<&Path>,
    ) -> Result<QuestionResult> {
        let files = run_root
            .map(|root| RunFiles::create(root, &question.id, &self.config_hash))
            .transpose()?;
        info!(
            "question `{}`: sampling {} completions",
            question.id, self.config.n_samples
        );
        let traces = self.sample(question)?;
        if let Some(f) = &files {
            f.write_traces(&question.id, &traces)?;
        }
        let pool = self.build_pool(&traces)?;
        info!("question `{}`: {} reasons", question.id, pool.len());
        if let Some(f) = &files {
            f.write_pool(&pool)?;
        }
        self.run_from_pool(question, &traces, &pool, files.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn question() -> Question {
        Question {
            id: "q1".into(),
            text: "Did the storm cause the outage?".into(),
            options: ["Yes", "No", "Ambiguous"]
                .iter()
                .map(|l| AnswerOption {
                    label: l.to_string(),
                    text: String::new(),
                })
                .collect(),
        }
    }

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let c = PipelineConfig::default();
        c.validate().unwrap();
        let back = PipelineConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.content_hash().unwrap(), c.content_hash().unwrap());
    }

    #[test]
    fn plan_must_sum_to_n() {
        let mut c = PipelineConfig {
            n_samples: 21,
            ..PipelineConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.n_samples = 0;
        c.sampling_plan.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn combined_plan_validates() {
        let c = PipelineConfig {
            sampling_plan: vec![
                PlanEntry {
                    model: ModelSpec::stub("a"),
                    count: 7,
                },
                PlanEntry {
                    model: ModelSpec::stub("b"),
                    count: 7,
                },
                PlanEntry {
                    model: ModelSpec::stub("c"),
                    count: 6,
                },
            ],
            ..PipelineConfig::default()
        };
        c.validate().unwrap();
    }

    #[test]
    fn external_requires_settings() {
        let c = PipelineConfig {
            solver_choice: SolverChoice::External,
            ..PipelineConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn solver_choice_parses() {
        for s in ["sa-hubo", "sa-qubo", "brute-force", "external"] {
            assert_eq!(s.parse::<SolverChoice>().unwrap().as_str(), s);
        }
        assert!("anneal".parse::<SolverChoice>().is_err());
    }

    #[test]
    fn question_validation() {
        question().validate().unwrap();
        let mut q = question();
        q.options[1].label = "yes".into();
        assert!(q.validate().is_err());
        let mut q = question();
        q.options.clear();
        assert!(q.validate().is_err());
    }

    #[test]
    fn offline_run_produces_a_parsed_answer() {
        let client = LlmClient::offline();
        let mut config = PipelineConfig::default();
        config.schedule.restarts = 4;
        config.schedule.sweeps = 50;
        let p = Pipeline::new(config, &client).unwrap();
        let r = p.run_question(&question(), None).unwrap();
        assert!(r.answer.is_some());
        assert_eq!(r.tokens.by_model["stub-cot"].calls, 20);
        assert_eq!(r.tokens.by_model["stub-answer"].calls, 1);
        let sum: u64 = r.tokens.by_model.values().map(|m| m.input).sum();
        assert_eq!(sum, r.tokens.input);
    }

    #[test]
    fn empty_pool_degrades() {
        let client = LlmClient::offline();
        let p = Pipeline::new(PipelineConfig::default(), &client).unwrap();
        let pool = ReasonPool::new(Vec::new(), vec![Vec::new(); 3]).unwrap();
        let r = p.run_from_pool(&question(), &[], &pool, None).unwrap();
        assert!(r.degraded);
        assert_eq!(r.final_prompt.template, PromptTemplate::Bare);
        assert!(r.stability.is_none());
        assert!(r.answer.is_some());
    }
}
