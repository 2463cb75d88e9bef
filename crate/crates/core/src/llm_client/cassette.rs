use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ChatRequest, ChatResponse};
use crate::error::{Error, Result};

pub const CASSETTE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionEntry {
    pub request: ChatRequest,
    pub response: ChatResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingEntry {
    pub text: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CassetteDoc {
    schema_version: u32,
    question_id: String,
    completions: BTreeMap<String, CompletionEntry>,
    embeddings: BTreeMap<String, EmbeddingEntry>,
}

impl CassetteDoc {
    fn empty(question_id: &str) -> Self {
        Self {
            schema_version: CASSETTE_SCHEMA_VERSION,
            question_id: question_id.to_string(),
            completions: BTreeMap::new(),
            embeddings: BTreeMap::new(),
        }
    }
}

pub(crate) fn text_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(&digest[..16])
}

fn file_stem(question_id: &str) -> String {
    question_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Directory of per-question cassette documents. Writes are serialized by an
/// internal lock and flushed to disk on every insert.
#[derive(Debug)]
pub struct CassetteStore {
    dir: PathBuf,
    docs: Mutex<BTreeMap<String, CassetteDoc>>,
}

impl CassetteStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        Ok(Self {
            dir: dir.into(),
            docs: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, question_id: &str) -> PathBuf {
        self.dir.join(format!("{}.json", file_stem(question_id)))
    }

    pub(crate) fn ensure_writable(&self) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))
    }

    fn with_doc<T>(&self, question_id: &str, f: impl FnOnce(&mut CassetteDoc) -> T) -> Result<T> {
        let mut docs = self.docs.lock().expect("cassette lock poisoned");
        if !docs.contains_key(question_id) {
            let doc = self.load(question_id)?;
            docs.insert(question_id.to_string(), doc);
        }
        Ok(f(docs.get_mut(question_id).expect("inserted above")))
    }

    fn load(&self, question_id: &str) -> Result<CassetteDoc> {
        let path = self.path_for(question_id);
        if !path.exists() {
            return Ok(CassetteDoc::empty(question_id));
        }
        let raw = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        parse_doc(&raw).map_err(|msg| Error::Fixture(format!("{}: {msg}", path.display())))
    }

    fn flush(&self, doc: &CassetteDoc) -> Result<()> {
        self.ensure_writable()?;
        let path = self.path_for(&doc.question_id);
        let mut text = serde_json::to_string_pretty(doc)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn get_completion(&self, question_id: &str, key: &str) -> Result<Option<ChatResponse>> {
        self.with_doc(question_id, |doc| {
            doc.completions.get(key).map(|e| e.response.clone())
        })
    }

    pub fn put_completion(
        &self,
        question_id: &str,
        key: &str,
        request: &ChatRequest,
        response: &ChatResponse,
    ) -> Result<()> {
        let doc = self.with_doc(question_id, |doc| {
            doc.completions.insert(
                key.to_string(),
                CompletionEntry {
                    request: request.clone(),
                    response: response.clone(),
                },
            );
            doc.clone()
        })?;
        self.flush(&doc)
    }

    pub fn get_embedding(&self, question_id: &str, key: &str) -> Result<Option<Vec<f64>>> {
        self.with_doc(question_id, |doc| {
            doc.embeddings.get(key).map(|e| e.values.clone())
        })
    }

    pub fn put_embedding(
        &self,
        question_id: &str,
        key: &str,
        text: &str,
        values: &[f64],
    ) -> Result<()> {
        let doc = self.with_doc(question_id, |doc| {
            doc.embeddings.insert(
                key.to_string(),
                EmbeddingEntry {
                    text: text.to_string(),
                    values: values.to_vec(),
                },
            );
            doc.clone()
        })?;
        self.flush(&doc)
    }

    /// Completion keys stored for a question, in key order.
    pub fn completion_keys(&self, question_id: &str) -> Result<Vec<String>> {
        self.with_doc(question_id, |doc| doc.completions.keys().cloned().collect())
    }
}

/// Parses a cassette document, naming the first entry that fails to decode.
fn parse_doc(raw: &str) -> std::result::Result<CassetteDoc, String> {
    let value: serde_json::Value =
        serde_json::from_str(raw).map_err(|e| format!("not valid JSON: {e}"))?;
    let obj = value.as_object().ok_or("top level is not an object")?;
    let version = obj
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or("missing schema_version")?;
    if version != CASSETTE_SCHEMA_VERSION as u64 {
        return Err(format!("unsupported schema_version {version}"));
    }
    let question_id = obj
        .get("question_id")
        .and_then(|v| v.as_str())
        .ok_or("missing question_id")?
        .to_string();
    let mut doc = CassetteDoc::empty(&question_id);
    if let Some(map) = obj.get("completions") {
        let map = map.as_object().ok_or("completions is not an object")?;
        for (key, entry) in map {
            let entry: CompletionEntry = serde_json::from_value(entry.clone())
                .map_err(|e| format!("corrupt completion entry `{key}`: {e}"))?;
            doc.completions.insert(key.clone(), entry);
        }
    }
    if let Some(map) = obj.get("embeddings") {
        let map = map.as_object().ok_or("embeddings is not an object")?;
        for (key, entry) in map {
            let entry: EmbeddingEntry = serde_json::from_value(entry.clone())
                .map_err(|e| format!("corrupt embedding entry `{key}`: {e}"))?;
            doc.embeddings.insert(key.clone(), entry);
        }
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupt_entry_names_the_key() {
        let raw = r#"{"schema_version":1,"question_id":"q","completions":{"m#3":{"request":1}},"embeddings":{}}"#;
        let err = parse_doc(raw).unwrap_err();
        assert!(err.contains("m#3"), "{err}");
    }

    #[test]
    fn files_are_sorted_and_newline_terminated() {
        let dir = tempfile::tempdir().unwrap();
        let store = CassetteStore::open(dir.path()).unwrap();
        let req = ChatRequest {
            model: "m".into(),
            messages: vec![],
            temperature: 0.0,
            top_p: 1.0,
            max_tokens: 1,
        };
        let resp = ChatResponse {
            text: "t".into(),
            usage: None,
        };
        store.put_completion("q/1", "m#1", &req, &resp).unwrap();
        store.put_completion("q/1", "m#0", &req, &resp).unwrap();
        let text = fs::read_to_string(store.path_for("q/1")).unwrap();
        assert!(text.ends_with("}\n"));
        assert!(text.find("m#0").unwrap() < text.find("m#1").unwrap());
        assert!(store.path_for("q/1").ends_with("q_1.json"));
    }
}
