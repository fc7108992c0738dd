use std::time::Duration;

use serde_json::{json, Map, Value};

use super::{ChatBackend, Completion, ProviderConfig, Request, RetryPolicy};
use crate::error::{Error, Result};

/// Chat-completions client: one user message per request, retries on 429,
/// 5xx and connection failures.
pub struct HttpChat {
    client: reqwest::blocking::Client,
    url: String,
    model: String,
    api_key: Option<String>,
    params: Map<String, Value>,
    retry: RetryPolicy,
}

impl HttpChat {
    /// Reads the API key from the configured environment variable.
    pub fn from_config(config: &ProviderConfig) -> Result<Self> {
        config.validate()?;
        let api_key = match &config.api_key_env {
            Some(var) => Some(
                std::env::var(var)
                    .ok()
                    .filter(|k| !k.is_empty())
                    .ok_or_else(|| Error::Config(format!("API key variable {var} is not set")))?,
            ),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| Error::Config(format!("building HTTP client: {e}")))?;
        Ok(HttpChat {
            client,
            url: config.endpoint_url.clone().unwrap_or_default(),
            model: config.model_name.clone(),
            api_key,
            params: config.effective_params(),
            retry: config.retry.clone(),
        })
    }

    pub fn body(&self, prompt: &str) -> Value {
        let mut body = self.params.clone();
        body.insert("model".into(), json!(self.model));
        body.insert("messages".into(), json!([{ "role": "user", "content": prompt }]));
        Value::Object(body)
    }

    fn attempt(&self, body: &Value) -> std::result::Result<String, (Option<u16>, bool, String)> {
        let mut req = self.client.post(&self.url).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| (None, true, e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| (Some(status.as_u16()), true, e.to_string()))?;
        if !status.is_success() {
            let retryable = status.as_u16() == 429 || status.is_server_error();
            return Err((Some(status.as_u16()), retryable, truncate(&text)));
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| (Some(status.as_u16()), false, format!("bad JSON body: {e}")))?;
        completion_text(&v).ok_or_else(|| (Some(status.as_u16()), false, "response has no choices[0].message.content".into()))
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(300).collect()
}

/// Message content, with any separate reasoning channel wrapped in think tags.
pub fn completion_text(v: &Value) -> Option<String> {
    let msg = v.get("choices")?.get(0)?.get("message")?;
    let content = msg.get("content").and_then(Value::as_str).unwrap_or_default();
    let reasoning = ["reasoning_content", "reasoning"]
        .iter()
        .find_map(|k| msg.get(*k).and_then(Value::as_str))
        .filter(|r| !r.is_empty());
    if msg.get("content").is_none() && reasoning.is_none() {
        return None;
    }
    Some(match reasoning {
        Some(r) => format!("<think>{r}</think>\n{content}"),
        None => content.to_string(),
    })
}

impl ChatBackend for HttpChat {
    fn model_name(&self) -> &str {
        &self.model
    }

    fn cache_params(&self) -> Value {
        Value::Object(self.params.clone())
    }

    fn call(&self, req: &Request<'_>) -> Result<Completion> {
        let body = self.body(&req.prompt.text);
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.attempt(&body) {
                Ok(text) => return Ok(Completion { text, attempt }),
                Err((status, retryable, message)) => {
                    if !retryable || attempt >= self.retry.max_attempts {
                        return Err(Error::Transport {
                            status,
                            attempts: attempt,
                            message,
                        });
                    }
                    std::thread::sleep(self.retry.delay(attempt - 1));
                }
            }
        }
    }
}
