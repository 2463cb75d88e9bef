//! Chat-completion and embedding access with a record/replay layer.
//!
//! Every call made through [`LlmClient`] can be served from, or written to, a
//! per-question cassette file so that the whole pipeline runs offline and
//! deterministically once a cassette exists.

mod cassette;
mod openai;
mod stub;

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use url::Url;

use crate::error::{Error, Result};

pub use cassette::{CassetteStore, CompletionEntry, EmbeddingEntry, CASSETTE_SCHEMA_VERSION};
pub use openai::OpenAiCompatible;
pub use stub::{StubChat, StubEmbedder, STUB_EMBEDDING_DIM};

/// Provider id that selects the bundled offline providers.
pub const STUB_PROVIDER: &str = "stub";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub provider_id: String,
    pub model_name: String,
    pub endpoint: Url,
    /// Name of the environment variable holding the API key.
    pub credential_ref: String,
}

impl ModelSpec {
    pub fn new(
        provider_id: impl Into<String>,
        model_name: impl Into<String>,
        endpoint: &str,
        credential_ref: impl Into<String>,
    ) -> Result<Self> {
        let endpoint = Url::parse(endpoint)
            .map_err(|e| Error::Config(format!("invalid endpoint `{endpoint}`: {e}")))?;
        let spec = Self {
            provider_id: provider_id.into(),
            model_name: model_name.into(),
            endpoint,
            credential_ref: credential_ref.into(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// An offline model served by the bundled stub providers.
    pub fn stub(model_name: &str) -> Self {
        Self::new(STUB_PROVIDER, model_name, "stub://local", "").expect("stub spec is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_name.trim().is_empty() {
            return Err(Error::Config("model_name must be nonempty".into()));
        }
        if self.endpoint.cannot_be_a_base() {
            return Err(Error::Config(format!(
                "endpoint `{}` is not an absolute base URL",
                self.endpoint
            )));
        }
        Ok(())
    }

    pub fn is_stub(&self) -> bool {
        self.provider_id == STUB_PROVIDER
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
}

impl Default for DecodingParams {
    fn default() -> Self {
        Self {
            temperature: 0.7,
            top_p: 1.0,
            max_tokens: 512,
        }
    }
}

impl DecodingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::Config(format!(
                "top_p must be in (0, 1], got {}",
                self.top_p
            )));
        }
        if self.max_tokens == 0 {
            return Err(Error::Config("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionTrace {
    pub question_id: String,
    pub sample_index: usize,
    pub model_name: String,
    pub raw_text: String,
    pub token_count_in: u64,
    pub token_count_out: u64,
    /// True when the counts come from whitespace splitting instead of provider usage.
    pub tokens_estimated: bool,
    pub decoding: DecodingParams,
}

/// A nonzero embedding with its cached Euclidean norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
    norm: f64,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Input(
                "embedding vector has zero or non-finite norm".into(),
            ));
        }
        Ok(Self { values, norm })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        let dot: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        (dot / (self.norm * other.norm)).clamp(-1.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

/// Request body in the OpenAI-compatible chat-completions shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    pub fn user(model: &ModelSpec, prompt: &str, decoding: &DecodingParams) -> Self {
        Self {
            model: model.model_name.clone(),
            messages: vec![ChatMessage {
                role: "user".into(),
                content: prompt.to_string(),
            }],
            temperature: decoding.temperature,
            top_p: decoding.top_p,
            max_tokens: decoding.max_tokens,
        }
    }

    pub fn prompt_text(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
}

pub trait ChatProvider: Send + Sync {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse>;

    /// Local providers are pure functions of their input and bypass cassettes.
    fn is_local(&self) -> bool {
        false
    }
}

pub trait EmbeddingProvider: Send + Sync {
    fn embed_batch(&self, model: &str, texts: &[String]) -> Result<Vec<Vec<f64>>>;

    fn is_local(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ReplayMode {
    /// Always call the provider; cassettes untouched.
    #[default]
    Live,
    /// Call the provider and persist every response.
    Record,
    /// Serve from cassettes only; a miss is a fixture error.
    ReplayStrict,
    /// Serve from cassettes, falling back to a live call that is then appended.
    ReplayFallback,
}

impl std::str::FromStr for ReplayMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "live" => Ok(Self::Live),
            "record" => Ok(Self::Record),
            "replay-strict" | "replay" => Ok(Self::ReplayStrict),
            "replay-fallback" => Ok(Self::ReplayFallback),
            other => Err(Error::Config(format!("unknown replay mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    /// Runs `op` until it succeeds, fails with a non-retryable error, or the
    /// attempt budget is spent. Backoff doubles after each failure.
    pub fn run<T>(&self, mut op: impl FnMut() -> Result<T>) -> Result<T> {
        let mut backoff = self.initial_backoff;
        let mut attempt = 1;
        loop {
            match op() {
                Ok(v) => return Ok(v),
                Err(e) if e.is_retryable() && attempt < self.attempts => {
                    log::warn!("attempt {attempt} failed ({e}); retrying in {backoff:?}");
                    thread::sleep(backoff);
                    backoff *= 2;
                    attempt += 1;
                }
                Err(Error::Transport { message, .. }) => {
                    return Err(Error::Transport {
                        attempts: attempt,
                        message,
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Whitespace token estimate used when a provider reports no usage.
pub fn estimate_tokens(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

/// Shared client: resolves providers per model, applies retries, and routes
/// calls through the cassette store according to the replay mode.
pub struct LlmClient {
    mode: ReplayMode,
    cassettes: Option<CassetteStore>,
    retry: RetryPolicy,
    max_concurrency: usize,
    chat_overrides: BTreeMap<String, Arc<dyn ChatProvider>>,
    embed_overrides: BTreeMap<String, Arc<dyn EmbeddingProvider>>,
    stub_seed: u64,
    resolved_chat: Mutex<BTreeMap<String, Arc<dyn ChatProvider>>>,
}

impl LlmClient {
    /// Configures the client. Record and replay modes require a cassette directory.
    pub fn new(mode: ReplayMode, cassette_dir: Option<PathBuf>) -> Result<Self> {
        let cassettes = match (mode, cassette_dir) {
            (ReplayMode::Live, None) => None,
            (ReplayMode::Live, Some(dir)) => Some(CassetteStore::open(dir)?),
            (_, Some(dir)) => Some(CassetteStore::open(dir)?),
            (m, None) => {
                return Err(Error::Config(format!(
                    "replay mode {m:?} requires a cassette directory"
                )))
            }
        };
        if mode == ReplayMode::Record {
            if let Some(store) = &cassettes {
                store.ensure_writable()?;
            }
        }
        Ok(Self {
            mode,
            cassettes,
            retry: RetryPolicy::default(),
            max_concurrency: 8,
            chat_overrides: BTreeMap::new(),
            embed_overrides: BTreeMap::new(),
            stub_seed: 0,
            resolved_chat: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn offline() -> Self {
        Self::new(ReplayMode::Live, None).expect("live mode without cassettes is valid")
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_max_concurrency(mut self, n: usize) -> Self {
        self.max_concurrency = n.max(1);
        self
    }

    pub fn with_stub_seed(mut self, seed: u64) -> Self {
        self.stub_seed = seed;
        self
    }

    /// Routes every request for `model_name` to `provider` instead of the default.
    pub fn with_chat_provider(mut self, model_name: &str, provider: Arc<dyn ChatProvider>) -> Self {
        self.chat_overrides.insert(model_name.to_string(), provider);
        self
    }

    pub fn with_embedding_provider(
        mut self,
        model_name: &str,
        provider: Arc<dyn EmbeddingProvider>,
    ) -> Self {
        self.embed_overrides
            .insert(model_name.to_string(), provider);
        self
    }

    pub fn mode(&self) -> ReplayMode {
        self.mode
    }

    pub fn cassettes(&self) -> Option<&CassetteStore> {
        self.cassettes.as_ref()
    }

    fn chat_provider(&self, model: &ModelSpec) -> Result<Arc<dyn ChatProvider>> {
        if let Some(p) = self.chat_overrides.get(&model.model_name) {
            return Ok(p.clone());
        }
        let mut cache = self.resolved_chat.lock().expect("provider cache poisoned");
        if let Some(p) = cache.get(&model.model_name) {
            return Ok(p.clone());
        }
        let provider: Arc<dyn ChatProvider> = if model.is_stub() {
            Arc::new(StubChat::new(self.stub_seed))
        } else {
            Arc::new(OpenAiCompatible::from_spec(model)?)
        };
        cache.insert(model.model_name.clone(), provider.clone());
        Ok(provider)
    }

    fn embedding_provider(&self, model: &ModelSpec) -> Result<Arc<dyn EmbeddingProvider>> {
        if let Some(p) = self.embed_overrides.get(&model.model_name) {
            return Ok(p.clone());
        }
        if model.is_stub() {
            Ok(Arc::new(StubEmbedder::new(self.stub_seed)))
        } else {
            Ok(Arc::new(OpenAiCompatible::from_spec(model)?))
        }
    }

    /// Draws `n` completions with sample indices `0..n`.
    pub fn sample_completions(
        &self,
        question_id: &str,
        prompt: &str,
        model: &ModelSpec,
        n: usize,
        decoding: &DecodingParams,
    ) -> Result<Vec<CompletionTrace>> {
        if n == 0 {
            return Err(Error::Input("n must be at least 1".into()));
        }
        self.sample_range(question_id, prompt, model, 0..n, decoding)
    }

    /// Draws one completion per sample index in `indices`. Calls may run
    /// concurrently; the result is ordered by sample index.
    pub fn sample_range(
        &self,
        question_id: &str,
        prompt: &str,
        model: &ModelSpec,
        indices: Range<usize>,
        decoding: &DecodingParams,
    ) -> Result<Vec<CompletionTrace>> {
        model.validate()?;
        decoding.validate()?;
        let request = ChatRequest::user(model, prompt, decoding);
        let indices: Vec<usize> = indices.collect();
        let mut results: Vec<Option<Result<CompletionTrace>>> = Vec::new();
        results.resize_with(indices.len(), || None);

        for chunk_start in (0..indices.len()).step_by(self.max_concurrency) {
            let chunk_end = (chunk_start + self.max_concurrency).min(indices.len());
            thread::scope(|scope| {
                let handles: Vec<_> = (chunk_start..chunk_end)
                    .map(|pos| {
                        let request = &request;
                        let idx = indices[pos];
                        scope.spawn(move || {
                            self.complete_one(question_id, model, idx, request, decoding)
                        })
                    })
                    .collect();
                for (pos, h) in (chunk_start..chunk_end).zip(handles) {
                    results[pos] = Some(h.join().expect("sampling worker panicked"));
                }
            });
        }
        results
            .into_iter()
            .map(|r| r.expect("every index sampled"))
            .collect()
    }

    fn complete_one(
        &self,
        question_id: &str,
        model: &ModelSpec,
        sample_index: usize,
        request: &ChatRequest,
        decoding: &DecodingParams,
    ) -> Result<CompletionTrace> {
        let response = self.chat_keyed(question_id, model, &sample_index.to_string(), request)?;
        Ok(trace_from_response(
            question_id,
            sample_index,
            model,
            request,
            response,
            decoding,
        ))
    }

    /// Single chat call routed through the cassette under `key`.
    pub fn chat_keyed(
        &self,
        question_id: &str,
        model: &ModelSpec,
        key: &str,
        request: &ChatRequest,
    ) -> Result<ChatResponse> {
        let provider = self.chat_provider(model);
        let local = provider.as_ref().map(|p| p.is_local()).unwrap_or(false);
        let cassette_key = format!("{}#{}", model.model_name, key);
        let live = || -> Result<ChatResponse> {
            let provider = provider.as_ref().map_err(clone_config_error)?;
            self.retry.run(|| provider.chat(request))
        };
        if local {
            return live();
        }
        match (self.mode, &self.cassettes) {
            (ReplayMode::Live, _) | (_, None) => live(),
            (ReplayMode::Record, Some(store)) => {
                let response = live()?;
                store.put_completion(question_id, &cassette_key, request, &response)?;
                Ok(response)
            }
            (ReplayMode::ReplayStrict, Some(store)) => {
                store.get_completion(question_id, &cassette_key)?.ok_or_else(|| {
                    Error::Fixture(format!(
                        "no cassette entry for question `{question_id}` key `{cassette_key}` (sample index {key})"
                    ))
                })
            }
            (ReplayMode::ReplayFallback, Some(store)) => {
                if let Some(hit) = store.get_completion(question_id, &cassette_key)? {
                    return Ok(hit);
                }
                let response = live()?;
                store.put_completion(question_id, &cassette_key, request, &response)?;
                Ok(response)
            }
        }
    }

    /// Embeds `texts` in order. Cassette entries are keyed by a hash of each text.
    pub fn embed(
        &self,
        question_id: &str,
        texts: &[String],
        model: &ModelSpec,
    ) -> Result<Vec<EmbeddingVector>> {
        if texts.is_empty() {
            return Err(Error::Input("embed requires at least one text".into()));
        }
        if let Some(pos) = texts.iter().position(|t| t.trim().is_empty()) {
            return Err(Error::Input(format!("text at position {pos} is empty")));
        }
        let provider = self.embedding_provider(model);
        let local = provider.as_ref().map(|p| p.is_local()).unwrap_or(false);
        let keys: Vec<String> = texts
            .iter()
            .map(|t| format!("{}#{}", model.model_name, cassette::text_hash(t)))
            .collect();

        let mut out: Vec<Option<Vec<f64>>> = vec![None; texts.len()];
        let use_cassette = !local && self.mode != ReplayMode::Live && self.cassettes.is_some();
        if use_cassette && self.mode != ReplayMode::Record {
            let store = self.cassettes.as_ref().expect("checked above");
            for (slot, key) in out.iter_mut().zip(&keys) {
                *slot = store.get_embedding(question_id, key)?;
            }
        }
        let missing: Vec<usize> = (0..texts.len()).filter(|&i| out[i].is_none()).collect();
        if !missing.is_empty() {
            if use_cassette && self.mode == ReplayMode::ReplayStrict {
                return Err(Error::Fixture(format!(
                    "no cassette embedding for question `{question_id}` key `{}`",
                    keys[missing[0]]
                )));
            }
            let provider = provider.map_err(|e| clone_config_error(&e))?;
            let batch: Vec<String> = missing.iter().map(|&i| texts[i].clone()).collect();
            let vectors = self
                .retry
                .run(|| provider.embed_batch(&model.model_name, &batch))?;
            if vectors.len() != batch.len() {
                return Err(Error::Provider(format!(
                    "embedding provider returned {} vectors for {} inputs",
                    vectors.len(),
                    batch.len()
                )));
            }
            for (&i, v) in missing.iter().zip(vectors) {
                if use_cassette {
                    let store = self.cassettes.as_ref().expect("checked above");
                    store.put_embedding(question_id, &keys[i], &texts[i], &v)?;
                }
                out[i] = Some(v);
            }
        }

        let vectors = out
            .into_iter()
            .map(|v| EmbeddingVector::new(v.expect("filled")))
            .collect::<Result<Vec<_>>>()?;
        let dim = vectors[0].dim();
        if let Some(bad) = vectors.iter().position(|v| v.dim() != dim) {
            return Err(Error::Provider(format!(
                "embedding dimension mismatch: vector {bad} has {} entries, expected {dim}",
                vectors[bad].dim()
            )));
        }
        Ok(vectors)
    }
}

fn clone_config_error(e: &Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(m.clone()),
        other => Error::Provider(other.to_string()),
    }
}

fn trace_from_response(
    question_id: &str,
    sample_index: usize,
    model: &ModelSpec,
    request: &ChatRequest,
    response: ChatResponse,
    decoding: &DecodingParams,
) -> CompletionTrace {
    let (token_count_in, token_count_out, tokens_estimated) = match response.usage {
        Some(u) => (u.prompt_tokens, u.completion_tokens, false),
        None => (
            estimate_tokens(&request.prompt_text()),
            estimate_tokens(&response.text),
            true,
        ),
    };
    CompletionTrace {
        question_id: question_id.to_string(),
        sample_index,
        model_name: model.model_name.clone(),
        raw_text: response.text,
        token_count_in,
        token_count_out,
        tokens_estimated,
        decoding: *decoding,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    struct Scripted {
        text: String,
        calls: AtomicU32,
        fail_first: u32,
    }

    impl ChatProvider for Scripted {
        fn chat(&self, request: &ChatRequest) -> Result<ChatResponse> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if n < self.fail_first {
                return Err(Error::Transport {
                    attempts: 1,
                    message: "503".into(),
                });
            }
            Ok(ChatResponse {
                text: format!("{} [{}]", self.text, request.messages[0].content.len()),
                usage: None,
            })
        }
    }

    fn spec(name: &str) -> ModelSpec {
        ModelSpec::new(
            "openai",
            name,
            "https://example.invalid/v1",
            "NO_SUCH_KEY_VAR",
        )
        .unwrap()
    }

    fn fast_retry() -> RetryPolicy {
        RetryPolicy {
            attempts: 3,
            initial_backoff: Duration::from_millis(1),
        }
    }

    #[test]
    fn model_spec_validation() {
        assert!(ModelSpec::new("openai", "", "https://x.y", "K").is_err());
        assert!(ModelSpec::new("openai", "m", "not a url", "K").is_err());
        assert!(ModelSpec::new("openai", "m", "mailto:a@b.c", "K").is_err());
        assert!(ModelSpec::stub("s").is_stub());
    }

    #[test]
    fn decoding_validation() {
        assert!(DecodingParams::default().validate().is_ok());
        let mut d = DecodingParams {
            top_p: 0.0,
            ..DecodingParams::default()
        };
        assert!(d.validate().is_err());
        d.top_p = 1.0;
        d.temperature = -0.1;
        assert!(d.validate().is_err());
    }

    #[test]
    fn embedding_norm_is_cached() {
        let v = EmbeddingVector::new(vec![3.0, 4.0]).unwrap();
        assert!((v.norm() - 5.0).abs() < 1e-12);
        assert!(EmbeddingVector::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn transport_errors_are_retried_then_reported_with_attempts() {
        let flaky = Arc::new(Scripted {
            text: "ok".into(),
            calls: AtomicU32::new(0),
            fail_first: 2,
        });
        let client = LlmClient::offline()
            .with_retry(fast_retry())
            .with_chat_provider("m", flaky.clone());
        let traces = client
            .sample_completions("q", "hi", &spec("m"), 1, &DecodingParams::default())
            .unwrap();
        assert_eq!(traces[0].raw_text, "ok [2]");
        assert_eq!(flaky.calls.load(Ordering::SeqCst), 3);

        let dead = Arc::new(Scripted {
            text: "never".into(),
            calls: AtomicU32::new(0),
            fail_first: 100,
        });
        let client = LlmClient::offline()
            .with_retry(fast_retry())
            .with_chat_provider("m", dead);
        let err = client
            .sample_completions("q", "hi", &spec("m"), 1, &DecodingParams::default())
            .unwrap_err();
        assert!(matches!(err, Error::Transport { attempts: 3, .. }), "{err}");
    }

    #[test]
    fn missing_credential_is_a_configuration_error() {
        std::env::remove_var("NO_SUCH_KEY_VAR");
        let client = LlmClient::offline().with_retry(fast_retry());
        let err = client
            .sample_completions("q", "hi", &spec("m"), 1, &DecodingParams::default())
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn traces_are_indexed_and_estimated_without_usage() {
        let p = Arc::new(Scripted {
            text: "one two three".into(),
            calls: AtomicU32::new(0),
            fail_first: 0,
        });
        let client = LlmClient::offline()
            .with_max_concurrency(3)
            .with_chat_provider("m", p);
        let traces = client
            .sample_completions("q", "a b", &spec("m"), 20, &DecodingParams::default())
            .unwrap();
        let idx: Vec<usize> = traces.iter().map(|t| t.sample_index).collect();
        assert_eq!(idx, (0..20).collect::<Vec<_>>());
        assert!(traces.iter().all(|t| t.tokens_estimated));
        assert_eq!(traces[0].token_count_in, 2);
        assert_eq!(traces[0].token_count_out, 4);
    }

    #[test]
    fn zero_samples_rejected() {
        let client = LlmClient::offline();
        assert!(client
            .sample_completions(
                "q",
                "x",
                &ModelSpec::stub("s"),
                0,
                &DecodingParams::default()
            )
            .is_err());
    }

    #[test]
    fn embed_rejects_empty_text_and_keeps_order() {
        let client = LlmClient::offline();
        let m = ModelSpec::stub("emb");
        assert!(client.embed("q", &["ok".into(), "  ".into()], &m).is_err());
        assert!(client.embed("q", &[], &m).is_err());

        let texts: Vec<String> = ["alpha beta", "gamma delta", "epsilon"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let fwd = client.embed("q", &texts, &m).unwrap();
        let rev_texts: Vec<String> = texts.iter().rev().cloned().collect();
        let rev = client.embed("q", &rev_texts, &m).unwrap();
        for (i, v) in fwd.iter().enumerate() {
            assert_eq!(v, &rev[texts.len() - 1 - i]);
        }
    }

    #[test]
    fn identical_strings_embed_identically() {
        let client = LlmClient::offline();
        let m = ModelSpec::stub("emb");
        let v = client
            .embed("q", &["same text".into(), "same text".into()], &m)
            .unwrap();
        assert_eq!(v[0], v[1]);
        assert!((v[0].cosine(&v[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stub_batch_shape() {
        let client = LlmClient::offline();
        let texts: Vec<String> = (0..33).map(|i| format!("fragment number {i}")).collect();
        let v = client.embed("q", &texts, &ModelSpec::stub("emb")).unwrap();
        assert_eq!(v.len(), 33);
        assert!(v.iter().all(|e| e.dim() == STUB_EMBEDDING_DIM));
    }

    struct Ragged;
    impl EmbeddingProvider for Ragged {
        fn embed_batch(&self, _: &str, texts: &[String]) -> Result<Vec<Vec<f64>>> {
            Ok(texts.iter().map(|t| vec![1.0; t.len()]).collect())
        }
    }

    #[test]
    fn dimension_mismatch_is_a_provider_error() {
        let client = LlmClient::offline().with_embedding_provider("r", Arc::new(Ragged));
        let err = client
            .embed("q", &["ab".into(), "abc".into()], &spec("r"))
            .unwrap_err();
        assert!(matches!(err, Error::Provider(_)), "{err}");
    }

    #[test]
    fn replay_modes_need_a_cassette_dir() {
        assert!(LlmClient::new(ReplayMode::ReplayStrict, None).is_err());
        assert!("replay-fallback".parse::<ReplayMode>().is_ok());
        assert!("bogus".parse::<ReplayMode>().is_err());
    }
}
