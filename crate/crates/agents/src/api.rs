//! HTTP backend for a live model service.
//!
//! Each turn is one `POST` of the [`BackendRequest`] JSON to the endpoint,
//! authorized with a bearer key. The service answers `{"records": [...]}`
//! with the records of that turn.

use std::time::Duration;

use async_trait::async_trait;
use serde::Deserialize;

use crate::backend::{Backend, BackendError, BackendRecord, BackendRequest};

pub const URL_VAR: &str = "C2U_API_URL";
pub const KEY_VAR: &str = "C2U_API_KEY";

#[derive(Debug, Clone)]
pub struct ApiBackend {
    client: reqwest::Client,
    url: String,
    key: String,
}

#[derive(Deserialize)]
struct Reply {
    records: Vec<BackendRecord>,
}

impl ApiBackend {
    pub fn new(url: impl Into<String>, key: impl Into<String>, timeout: Duration) -> Result<Self, BackendError> {
        let client = reqwest::Client::builder().timeout(timeout).build().map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(ApiBackend { client, url: url.into(), key: key.into() })
    }

    /// Reads the endpoint and key from the environment.
    pub fn from_env() -> Result<Self, BackendError> {
        ApiBackend::from_vars(std::env::var(URL_VAR).ok(), std::env::var(KEY_VAR).ok())
    }

    pub fn from_vars(url: Option<String>, key: Option<String>) -> Result<Self, BackendError> {
        let need = |v: Option<String>, name: &str| {
            v.filter(|v| !v.is_empty()).ok_or_else(|| BackendError::Config(format!("{name} is not set")))
        };
        ApiBackend::new(need(url, URL_VAR)?, need(key, KEY_VAR)?, Duration::from_secs(600))
    }
}

#[async_trait]
impl Backend for ApiBackend {
    fn name(&self) -> &str {
        "api"
    }

    fn is_live(&self) -> bool {
        true
    }

    async fn respond(&self, req: &BackendRequest) -> Result<Vec<BackendRecord>, BackendError> {
        let resp = self
            .client
            .post(&self.url)
            .bearer_auth(&self.key)
            .json(req)
            .send()
            .await
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            let body = resp.text().await.unwrap_or_default();
            return Err(BackendError::Transport(format!("{status}: {}", body.chars().take(300).collect::<String>())));
        }
        let reply: Reply = resp.json().await.map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(reply.records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_key_is_a_config_error() {
        let url = Some("http://127.0.0.1:9".to_string());
        assert!(matches!(ApiBackend::from_vars(url.clone(), None), Err(BackendError::Config(_))));
        assert!(matches!(ApiBackend::from_vars(url.clone(), Some(String::new())), Err(BackendError::Config(_))));
        assert!(ApiBackend::from_vars(url, Some("k".into())).unwrap().is_live());
    }
}
