use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::HarnessError;

/// Connection and decoding settings for a chat-completions endpoint.
///
/// The decoding defaults pin the evaluator to its most deterministic
/// configuration: greedy temperature with the nucleus/top-k caps and reply
/// budget the audits were scored under.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendConfig {
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    #[serde(default = "default_top_k")]
    pub top_k: u32,
    #[serde(default = "default_max_output_tokens")]
    pub max_output_tokens: u32,
    /// Header carrying the credential, e.g. `authorization` or `x-api-key`.
    #[serde(default = "default_auth_header")]
    pub auth_header: String,
    /// Environment variable read for the credential; never stored in config.
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub initial_backoff_ms: u64,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_temperature() -> f64 {
    0.0
}
fn default_top_p() -> f64 {
    0.95
}
fn default_top_k() -> u32 {
    40
}
fn default_max_output_tokens() -> u32 {
    256
}
fn default_auth_header() -> String {
    "authorization".into()
}
fn default_api_key_env() -> String {
    "EVALUATOR_API_KEY".into()
}
fn default_max_retries() -> u32 {
    4
}
fn default_backoff_ms() -> u64 {
    500
}
fn default_timeout_secs() -> u64 {
    120
}

impl BackendConfig {
    pub fn new(endpoint: &str, model: &str) -> Self {
        BackendConfig {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            temperature: default_temperature(),
            top_p: default_top_p(),
            top_k: default_top_k(),
            max_output_tokens: default_max_output_tokens(),
            auth_header: default_auth_header(),
            api_key_env: default_api_key_env(),
            max_retries: default_max_retries(),
            initial_backoff_ms: default_backoff_ms(),
            timeout_secs: default_timeout_secs(),
        }
    }
}

/// Blocking client for an OpenAI-style chat-completions API.
pub struct HttpChatBackend {
    config: BackendConfig,
    client: reqwest::blocking::Client,
    credential: Option<String>,
}

impl HttpChatBackend {
    pub fn new(config: BackendConfig) -> Result<Self, HarnessError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| HarnessError::Backend(format!("http client: {e}")))?;
        let credential = std::env::var(&config.api_key_env).ok();
        Ok(HttpChatBackend { config, client, credential })
    }

    pub fn model(&self) -> &str {
        &self.config.model
    }

    fn try_once(&self, prompt: &str) -> Result<String, HarnessError> {
        let body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
            "top_p": self.config.top_p,
            "top_k": self.config.top_k,
            "max_tokens": self.config.max_output_tokens,
        });
        let mut req = self.client.post(&self.config.endpoint).json(&body);
        if let Some(key) = &self.credential {
            let value = if self.config.auth_header.eq_ignore_ascii_case("authorization") {
                format!("Bearer {key}")
            } else {
                key.clone()
            };
            req = req.header(self.config.auth_header.as_str(), value);
        }
        let resp = req.send().map_err(|e| HarnessError::Backend(format!("request: {e}")))?;
        let status = resp.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(HarnessError::Backend(format!("retryable status {status}")));
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(HarnessError::Backend(format!(
                "status {status}: {}",
                text.chars().take(200).collect::<String>()
            )));
        }
        let value: serde_json::Value =
            resp.json().map_err(|e| HarnessError::Backend(format!("response body: {e}")))?;
        value
            .pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| {
                HarnessError::Backend("response has no choices[0].message.content".into())
            })
    }

    /// Sends one prompt, retrying transport errors, 429s, and 5xx with
    /// exponential backoff. 4xx responses other than 429 fail immediately.
    pub fn complete(&self, prompt: &str) -> Result<String, HarnessError> {
        let mut backoff = Duration::from_millis(self.config.initial_backoff_ms);
        let mut last_err = None;
        for attempt in 0..=self.config.max_retries {
            match self.try_once(prompt) {
                Ok(reply) => return Ok(reply),
                Err(HarnessError::Backend(msg))
                    if msg.starts_with("retryable") || msg.starts_with("request") =>
                {
                    last_err = Some(HarnessError::Backend(msg));
                    if attempt < self.config.max_retries {
                        std::thread::sleep(backoff);
                        backoff *= 2;
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Err(last_err.unwrap_or_else(|| HarnessError::Backend("no attempts made".into())))
    }
}
