use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Backend, Prompt};

pub const API_URL_ENV: &str = "REUSE_FORGE_API_URL";
pub const API_TOKEN_ENV: &str = "REUSE_FORGE_API_TOKEN";

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    session: &'a str,
}

#[derive(Deserialize)]
struct CompletionResponse {
    response: String,
}

/// POSTs `{"prompt", "session"}` as JSON and reads `{"response"}` back.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    url: String,
    token: Option<String>,
    attempts: u32,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(url: impl Into<String>, token: Option<String>) -> Result<Self> {
        Self::with_timeout(url, token, Duration::from_secs(120))
    }

    pub fn with_timeout(url: impl Into<String>, token: Option<String>, timeout: Duration) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Backend(e.to_string()))?;
        Ok(Self {
            url: url.into(),
            token,
            attempts: 1,
            client,
        })
    }

    /// Reads the endpoint and bearer token from the environment.
    pub fn from_env() -> Result<Self> {
        let url = std::env::var(API_URL_ENV).map_err(|_| Error::InvalidConfig(format!("{API_URL_ENV} is not set")))?;
        Self::new(url, std::env::var(API_TOKEN_ENV).ok())
    }

    /// Total tries per prompt (at least one).
    pub fn with_attempts(mut self, attempts: u32) -> Self {
        self.attempts = attempts.max(1);
        self
    }

    fn send_once(&self, prompt: &Prompt) -> Result<String> {
        let mut request = self.client.post(&self.url).json(&CompletionRequest {
            prompt: &prompt.rendered,
            session: &prompt.session_salt,
        });
        if let Some(token) = &self.token {
            request = request.bearer_auth(token);
        }
        let response = request.send().map_err(map_transport)?;
        let status = response.status();
        if !status.is_success() {
            return Err(Error::HttpStatus(status.as_u16()));
        }
        let body: CompletionResponse = response.json().map_err(map_transport)?;
        Ok(body.response)
    }
}

fn map_transport(e: reqwest::Error) -> Error {
    if e.is_timeout() {
        Error::Timeout
    } else {
        Error::Backend(e.to_string())
    }
}

impl Backend for HttpBackend {
    fn complete(&self, prompt: &Prompt) -> Result<String> {
        let mut last = None;
        for _ in 0..self.attempts {
            match self.send_once(prompt) {
                Ok(text) => return Ok(text),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }
}
