use std::time::Duration;

use serde::Deserialize;
use serde_json::json;
use url::Url;

use super::{ChatProvider, ChatRequest, ChatResponse, EmbeddingProvider, ModelSpec, Usage};
use crate::error::{Error, Result};

/// Blocking client for OpenAI-compatible `/chat/completions` and `/embeddings`.
pub struct OpenAiCompatible {
    http: reqwest::blocking::Client,
    base: Url,
    api_key: String,
    azure_header: bool,
}

#[derive(Deserialize)]
struct ChatBody {
    choices: Vec<Choice>,
    usage: Option<UsageBody>,
}

#[derive(Deserialize)]
struct Choice {
    message: MessageBody,
}

#[derive(Deserialize)]
struct MessageBody {
    content: Option<String>,
}

#[derive(Deserialize)]
struct UsageBody {
    prompt_tokens: u64,
    completion_tokens: u64,
}

#[derive(Deserialize)]
struct EmbeddingBody {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    index: usize,
    embedding: Vec<f64>,
}

impl OpenAiCompatible {
    /// Resolves the API key from the environment variable named by the spec.
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let api_key = std::env::var(&spec.credential_ref).map_err(|_| {
            Error::Config(format!(
                "credential environment variable `{}` for model `{}` is not set",
                spec.credential_ref, spec.model_name
            ))
        })?;
        Self::with_key(spec, api_key)
    }

    pub fn with_key(spec: &ModelSpec, api_key: String) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| Error::Config(format!("http client: {e}")))?;
        Ok(Self {
            http,
            base: spec.endpoint.clone(),
            api_key,
            azure_header: spec.provider_id == "azure",
        })
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.base.as_str().trim_end_matches('/'), path)
    }

    fn post(&self, path: &str, body: &serde_json::Value) -> Result<String> {
        let mut req = self.http.post(self.url(path)).json(body);
        req = if self.azure_header {
            req.header("api-key", &self.api_key)
        } else {
            req.bearer_auth(&self.api_key)
        };
        let resp = req.send().map_err(|e| Error::Transport {
            attempts: 1,
            message: e.to_string(),
        })?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Error::Transport {
            attempts: 1,
            message: e.to_string(),
        })?;
        if status.is_server_error() {
            return Err(Error::Transport {
                attempts: 1,
                message: format!("HTTP {status}: {text}"),
            });
        }
        if !status.is_success() {
            return Err(Error::Provider(format!("HTTP {status}: {text}")));
        }
        Ok(text)
    }
}

impl ChatProvider for OpenAiCompatible {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse> {
        let body = serde_json::to_value(request)?;
        let text = self.post("chat/completions", &body)?;
        let parsed: ChatBody = serde_json::from_str(&text)
            .map_err(|e| Error::Provider(format!("malformed chat response: {e}")))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| Error::Provider("chat response has no message content".into()))?;
        Ok(ChatResponse {
            text: content,
            usage: parsed.usage.map(|u| Usage {
                prompt_tokens: u.prompt_tokens,
                completion_tokens: u.completion_tokens,
            }),
        })
    }
}

impl EmbeddingProvider for OpenAiCompatible {
    fn embed_batch(&self, model: &str, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        let text = self.post("embeddings", &json!({ "model": model, "input": texts }))?;
        let mut parsed: EmbeddingBody = serde_json::from_str(&text)
            .map_err(|e| Error::Provider(format!("malformed embedding response: {e}")))?;
        parsed.data.sort_by_key(|d| d.index);
        Ok(parsed.data.into_iter().map(|d| d.embedding).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm_client::DecodingParams;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::thread;

    /// Serves one canned HTTP response and hands back the raw request.
    fn one_shot(status: &str, body: &'static str) -> (String, thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let status = status.to_string();
        let handle = thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut head = String::new();
            let mut content_length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    content_length = v.trim().parse().unwrap();
                }
                head.push_str(&line);
                if line == "\r\n" {
                    break;
                }
            }
            let mut body_buf = vec![0; content_length];
            reader.read_exact(&mut body_buf).unwrap();
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
            head + &String::from_utf8(body_buf).unwrap()
        });
        (format!("http://{addr}/v1"), handle)
    }

    #[test]
    fn chat_request_shape_and_usage() {
        let (base, server) = one_shot(
            "200 OK",
            r#"{"choices":[{"message":{"role":"assistant","content":"1. A reason"}}],"usage":{"prompt_tokens":12,"completion_tokens":4}}"#,
        );
        let spec = ModelSpec::new("openai", "gpt-4o", &base, "UNUSED").unwrap();
        let client = OpenAiCompatible::with_key(&spec, "sk-test".into()).unwrap();
        let req = ChatRequest::user(&spec, "why?", &DecodingParams::default());
        let resp = client.chat(&req).unwrap();
        assert_eq!(resp.text, "1. A reason");
        assert_eq!(resp.usage.unwrap().prompt_tokens, 12);
        let raw = server.join().unwrap();
        assert!(raw.starts_with("POST /v1/chat/completions"));
        assert!(raw
            .to_ascii_lowercase()
            .contains("authorization: bearer sk-test"));
        let body: serde_json::Value =
            serde_json::from_str(raw.split("\r\n\r\n").nth(1).unwrap()).unwrap();
        assert_eq!(
            body["messages"],
            json!([{"role": "user", "content": "why?"}])
        );
        assert_eq!(body["model"], "gpt-4o");
    }

    #[test]
    fn embeddings_are_reordered_by_index() {
        let (base, server) = one_shot(
            "200 OK",
            r#"{"data":[{"index":1,"embedding":[0.0,1.0]},{"index":0,"embedding":[1.0,0.0]}]}"#,
        );
        let spec = ModelSpec::new("openai", "emb", &base, "UNUSED").unwrap();
        let client = OpenAiCompatible::with_key(&spec, "k".into()).unwrap();
        let v = client
            .embed_batch("emb", &["a".into(), "b".into()])
            .unwrap();
        assert_eq!(v, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(server.join().unwrap().contains(r#""input":["a","b"]"#));
    }

    #[test]
    fn server_errors_are_transport_errors() {
        let (base, server) = one_shot("503 Service Unavailable", r#"{"error":"busy"}"#);
        let spec = ModelSpec::new("openai", "m", &base, "UNUSED").unwrap();
        let client = OpenAiCompatible::with_key(&spec, "k".into()).unwrap();
        let req = ChatRequest::user(&spec, "x", &DecodingParams::default());
        let err = client.chat(&req).unwrap_err();
        assert!(err.is_retryable(), "{err}");
        server.join().unwrap();
    }

    #[test]
    fn client_errors_are_not_retried() {
        let (base, server) = one_shot("401 Unauthorized", r#"{"error":"no"}"#);
        let spec = ModelSpec::new("openai", "m", &base, "UNUSED").unwrap();
        let client = OpenAiCompatible::with_key(&spec, "k".into()).unwrap();
        let req = ChatRequest::user(&spec, "x", &DecodingParams::default());
        let err = client.chat(&req).unwrap_err();
        assert!(matches!(err, Error::Provider(_)));
        server.join().unwrap();
    }
}
