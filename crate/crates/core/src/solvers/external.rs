//! Boundary to external samplers (e.g. quantum backends) that consume a spin
//! model and return measured bitstrings with shot counts.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::sampleset::{bitstring, Sample, SampleSet, SolverMetadata};
use super::spin::{binary_to_spin, SpinModel};
use crate::error::{Error, Result};
use crate::hubo::HuboModel;

pub const ADAPTER_CASSETTE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireTerm {
    pub vars: Vec<usize>,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterRequest {
    pub num_vars: usize,
    pub terms: Vec<WireTerm>,
    pub shots: u64,
}

impl AdapterRequest {
    pub fn from_spin(model: &SpinModel, shots: u64) -> Self {
        Self {
            num_vars: model.num_vars(),
            terms: model
                .terms()
                .iter()
                .map(|(vars, &coeff)| WireTerm {
                    vars: vars.clone(),
                    coeff,
                })
                .collect(),
            shots,
        }
    }

    fn fingerprint(&self) -> Result<String> {
        let json = serde_json::to_string(self)?;
        Ok(hex::encode(&Sha256::digest(json.as_bytes())[..16]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotResult {
    pub bitstring: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterResponse {
    pub results: Vec<ShotResult>,
}

pub trait ExternalSolver: Send + Sync {
    fn adapter_id(&self) -> &str;
    fn submit(&self, request: &AdapterRequest) -> Result<AdapterResponse>;
}

/// Posts the request JSON to an HTTP endpoint and reads the response JSON.
pub struct HttpAdapter {
    id: String,
    endpoint: url::Url,
    http: reqwest::blocking::Client,
}

impl HttpAdapter {
    pub fn new(id: impl Into<String>, endpoint: &str) -> Result<Self> {
        let endpoint = url::Url::parse(endpoint)
            .map_err(|e| Error::Config(format!("invalid adapter endpoint `{endpoint}`: {e}")))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(600))
            .build()
            .map_err(|e| Error::Config(format!("http client: {e}")))?;
        Ok(Self {
            id: id.into(),
            endpoint,
            http,
        })
    }
}

impl ExternalSolver for HttpAdapter {
    fn adapter_id(&self) -> &str {
        &self.id
    }

    fn submit(&self, request: &AdapterRequest) -> Result<AdapterResponse> {
        let resp = self
            .http
            .post(self.endpoint.clone())
            .json(request)
            .send()
            .map_err(|e| Error::Transport {
                attempts: 1,
                message: e.to_string(),
            })?;
        let status = resp.status();
        let body = resp.text().map_err(|e| Error::Transport {
            attempts: 1,
            message: e.to_string(),
        })?;
        if !status.is_success() {
            return Err(Error::Adapter(format!("HTTP {status}: {body}")));
        }
        serde_json::from_str(&body).map_err(|e| Error::Adapter(format!("malformed response: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AdapterEntry {
    request: AdapterRequest,
    response: AdapterResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AdapterCassette {
    schema_version: u32,
    adapter_id: String,
    entries: BTreeMap<String, AdapterEntry>,
}

/// Record/replay wrapper. Entries are keyed `<request hash>#<n>` where `n`
/// counts identical submissions, so repeated iterations replay in order.
pub struct CassetteAdapter {
    id: String,
    path: PathBuf,
    inner: Option<Box<dyn ExternalSolver>>,
    state: Mutex<(AdapterCassette, HashMap<String, usize>)>,
}

impl CassetteAdapter {
    /// Replays from `path`; a missing entry is a fixture error.
    pub fn replay(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let raw = fs::read_to_string(&path)
            .map_err(|e| Error::Fixture(format!("adapter cassette {}: {e}", path.display())))?;
        let cassette: AdapterCassette = serde_json::from_str(&raw).map_err(|e| {
            Error::Fixture(format!("corrupt adapter cassette {}: {e}", path.display()))
        })?;
        if cassette.schema_version != ADAPTER_CASSETTE_SCHEMA_VERSION {
            return Err(Error::Fixture(format!(
                "unsupported adapter cassette schema_version {}",
                cassette.schema_version
            )));
        }
        Ok(Self {
            id: cassette.adapter_id.clone(),
            path,
            inner: None,
            state: Mutex::new((cassette, HashMap::new())),
        })
    }

    /// Forwards to `inner` and appends every exchange to `path`.
    pub fn record(path: impl Into<PathBuf>, inner: Box<dyn ExternalSolver>) -> Self {
        let id = inner.adapter_id().to_string();
        Self {
            path: path.into(),
            state: Mutex::new((
                AdapterCassette {
                    schema_version: ADAPTER_CASSETTE_SCHEMA_VERSION,
                    adapter_id: id.clone(),
                    entries: BTreeMap::new(),
                },
                HashMap::new(),
            )),
            id,
            inner: Some(inner),
        }
    }

    fn flush(&self, cassette: &AdapterCassette) -> Result<()> {
        if let Some(dir) = self.path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut text = serde_json::to_string_pretty(cassette)?;
        text.push('\n');
        fs::write(&self.path, text).map_err(|e| Error::io(&self.path, e))
    }
}

impl ExternalSolver for CassetteAdapter {
    fn adapter_id(&self) -> &str {
        &self.id
    }

    fn submit(&self, request: &AdapterRequest) -> Result<AdapterResponse> {
        let hash = request.fingerprint()?;
        let mut guard = self.state.lock().expect("adapter cassette lock poisoned");
        let (cassette, seen) = &mut *guard;
        let n = seen.entry(hash.clone()).or_insert(0);
        let key = format!("{hash}#{n}");
        *n += 1;
        match &self.inner {
            None => cassette
                .entries
                .get(&key)
                .map(|e| e.response.clone())
                .ok_or_else(|| Error::Fixture(format!("no adapter cassette entry `{key}`"))),
            Some(inner) => {
                let response = inner.submit(request)?;
                cassette.entries.insert(
                    key,
                    AdapterEntry {
                        request: request.clone(),
                        response: response.clone(),
                    },
                );
                self.flush(cassette)?;
                Ok(response)
            }
        }
    }
}

/// Submits the spin form of `model` and re-scores every returned bitstring
/// locally; multiplicities are the shot counts.
pub fn external_solve(
    adapter: &dyn ExternalSolver,
    model: &HuboModel,
    shots: u64,
) -> Result<SampleSet> {
    let request = AdapterRequest::from_spin(&binary_to_spin(model), shots);
    let response = adapter.submit(&request)?;
    if response.results.is_empty() {
        return Err(Error::Adapter("adapter returned no results".into()));
    }
    let samples = response
        .results
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let bits = bitstring::parse(&r.bitstring)
                .map_err(|e| Error::Adapter(format!("result {i}: {e}")))?;
            if bits.len() != model.num_vars() {
                return Err(Error::Adapter(format!(
                    "result {i} has {} bits, expected {}",
                    bits.len(),
                    model.num_vars()
                )));
            }
            if r.count == 0 {
                return Err(Error::Adapter(format!("result {i} has a zero shot count")));
            }
            Ok(Sample {
                energy: model.evaluate_unchecked(&bits),
                bits,
                multiplicity: r.count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = SampleSet::new(adapter.adapter_id(), samples);
    set.metadata = SolverMetadata {
        adapter_id: Some(adapter.adapter_id().to_string()),
        shots: Some(shots),
        ..Default::default()
    };
    Ok(set)
}
