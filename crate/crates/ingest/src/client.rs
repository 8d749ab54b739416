//! Text-in, text-out completion clients.

use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("transport error: {0}")]
pub struct TransportError(pub String);

pub trait TranslatorClient: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, TransportError>;
}

/// Replays stored responses in order; the last one repeats once the list
/// runs out.
#[derive(Debug)]
pub struct FixtureClient {
    responses: Vec<String>,
    next: Mutex<usize>,
}

#[derive(Deserialize)]
struct FixtureLine {
    response: String,
}

impl FixtureClient {
    pub fn new(responses: Vec<String>) -> Self {
        FixtureClient {
            responses,
            next: Mutex::new(0),
        }
    }

    /// Reads a JSONL file whose lines carry a `response` string, the same
    /// layout the store writes.
    pub fn from_jsonl(path: impl AsRef<Path>) -> Result<Self, TransportError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| TransportError(format!("{}: {e}", path.display())))?;
        let responses = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str::<FixtureLine>(l)
                    .map(|f| f.response)
                    .map_err(|e| TransportError(format!("{}:{}: {e}", path.display(), i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if responses.is_empty() {
            return Err(TransportError(format!("{}: no responses", path.display())));
        }
        Ok(Self::new(responses))
    }
}

impl TranslatorClient for FixtureClient {
    fn complete(&self, _prompt: &str) -> Result<String, TransportError> {
        let mut next = self.next.lock().unwrap_or_else(|e| e.into_inner());
        let i = (*next).min(self.responses.len().saturating_sub(1));
        *next += 1;
        self.responses
            .get(i)
            .cloned()
            .ok_or_else(|| TransportError("fixture client has no responses".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpConfig {
    pub url: String,
    pub model: String,
    pub api_key: Option<String>,
    /// Dot-separated path to the reply text; numeric segments index arrays.
    pub response_path: String,
    pub max_in_flight: usize,
    pub timeout: Duration,
}

pub const DEFAULT_RESPONSE_PATH: &str = "choices.0.message.content";

impl HttpConfig {
    pub fn new(url: impl Into<String>, model: impl Into<String>) -> Self {
        HttpConfig {
            url: url.into(),
            model: model.into(),
            api_key: None,
            response_path: DEFAULT_RESPONSE_PATH.into(),
            max_in_flight: 4,
            timeout: Duration::from_secs(120),
        }
    }
}

/// Chat-completion client: POSTs `{model, messages}` and reads the reply
/// text at the configured JSON path.
pub struct HttpClient {
    config: HttpConfig,
    agent: ureq::Agent,
    in_flight: Mutex<usize>,
    slot_freed: Condvar,
}

impl HttpClient {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        HttpClient {
            config,
            agent,
            in_flight: Mutex::new(0),
            slot_freed: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.config.max_in_flight.max(1) {
            n = self.slot_freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
    }

    fn release(&self) {
        *self.in_flight.lock().unwrap_or_else(|e| e.into_inner()) -= 1;
        self.slot_freed.notify_one();
    }

    fn post(&self, prompt: &str) -> Result<String, TransportError> {
        let body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut request = self.agent.post(&self.config.url);
        if let Some(key) = &self.config.api_key {
            request = request.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = request
            .send_json(&body)
            .map_err(|e| TransportError(format!("{}: {e}", self.config.url)))?;
        let value: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| TransportError(format!("invalid JSON response: {e}")))?;
        lookup(&value, &self.config.response_path)
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| {
                TransportError(format!(
                    "response has no string at `{}`",
                    self.config.response_path
                ))
            })
    }
}

impl TranslatorClient for HttpClient {
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        self.acquire();
        let result = self.post(prompt);
        self.release();
        result
    }
}

fn lookup<'v>(value: &'v Value, path: &str) -> Option<&'v Value> {
    path.split('.')
        .filter(|s| !s.is_empty())
        .try_fold(value, |v, seg| match seg.parse::<usize>() {
            Ok(i) if v.is_array() => v.get(i),
            _ => v.get(seg),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    #[test]
    fn fixture_replays_then_repeats_last() {
        let c = FixtureClient::new(vec!["a".into(), "b".into()]);
        let got: Vec<_> = (0..4).map(|_| c.complete("p").unwrap()).collect();
        assert_eq!(got, ["a", "b", "b", "b"]);
        assert!(FixtureClient::new(vec![]).complete("p").is_err());
    }

    #[test]
    fn fixture_from_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        std::fs::write(&path, "{\"response\":\"x.\",\"attempt\":1}\n\n{\"response\":\"y.\"}\n").unwrap();
        let c = FixtureClient::from_jsonl(&path).unwrap();
        assert_eq!(c.complete("").unwrap(), "x.");
        assert_eq!(c.complete("").unwrap(), "y.");
        std::fs::write(&path, "not json\n").unwrap();
        assert!(FixtureClient::from_jsonl(&path).unwrap_err().0.contains(":1:"));
    }

    #[test]
    fn json_path_lookup() {
        let v = json!({"choices": [{"message": {"content": "hi"}}], "out": {"text": "t"}});
        assert_eq!(lookup(&v, DEFAULT_RESPONSE_PATH), Some(&json!("hi")));
        assert_eq!(lookup(&v, "out.text"), Some(&json!("t")));
        assert_eq!(lookup(&v, "choices.3.message"), None);
    }

    /// Serves one canned HTTP response and hands back the raw request.
    fn serve_once(status: &str, body: &str) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat", listener.local_addr().unwrap());
        let reply = format!(
            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        );
        let handle = std::thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut head = String::new();
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                head.push_str(&line);
                if line == "\r\n" {
                    break;
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            reader.get_mut().write_all(reply.as_bytes()).unwrap();
            head + &String::from_utf8(body).unwrap()
        });
        (url, handle)
    }

    #[test]
    fn http_round_trip() {
        let (url, server) = serve_once(
            "200 OK",
            r#"{"choices":[{"message":{"role":"assistant","content":"symptom(a)."}}]}"#,
        );
        let mut config = HttpConfig::new(url, "test-model");
        config.api_key = Some("secret".into());
        let client = HttpClient::new(config);
        assert_eq!(client.complete("hello").unwrap(), "symptom(a).");
        let request = server.join().unwrap();
        assert!(request.starts_with("POST /v1/chat"));
        assert!(request.to_ascii_lowercase().contains("authorization: bearer secret"));
        let body: Value = serde_json::from_str(request.split("\r\n\r\n").nth(1).unwrap()).unwrap();
        assert_eq!(
            body,
            json!({"model": "test-model", "messages": [{"role": "user", "content": "hello"}]})
        );
    }

    #[test]
    fn http_errors_are_transport_errors() {
        let (url, server) = serve_once("500 Internal Server Error", "{}");
        let client = HttpClient::new(HttpConfig::new(url, "m"));
        assert!(client.complete("x").is_err());
        server.join().unwrap();

        let (url, server) = serve_once("200 OK", r#"{"choices":[]}"#);
        let err = HttpClient::new(HttpConfig::new(url, "m")).complete("x").unwrap_err();
        assert!(err.0.contains("choices.0.message.content"));
        server.join().unwrap();

        let closed = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/", closed.local_addr().unwrap());
        drop(closed);
        assert!(HttpClient::new(HttpConfig::new(url, "m")).complete("x").is_err());
    }
}
