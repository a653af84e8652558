//! Model backend wire protocol.
//!
//! A session is a sequence of turns. Each turn sends a [`BackendRequest`]
//! carrying the prompts and every tool result produced so far, and receives
//! the records the model emitted for that turn. A turn without tool calls
//! ends the session.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const PROTOCOL_VERSION: &str = "c2u-backend/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Planner,
    Analyzer,
    Diagram,
    Corrector,
    DependencyAnalyzer,
}

impl Role {
    pub const ALL: [Role; 5] = [Role::Planner, Role::Analyzer, Role::Diagram, Role::Corrector, Role::DependencyAnalyzer];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Planner => "planner",
            Role::Analyzer => "analyzer",
            Role::Diagram => "diagram",
            Role::Corrector => "corrector",
            Role::DependencyAnalyzer => "dependency_analyzer",
        }
    }

    /// The corrector works on one known file and gets no discovery tools.
    pub fn allowed_tools(self) -> &'static [Tool] {
        match self {
            Role::Corrector => &[Tool::Read, Tool::Write],
            _ => &Tool::ALL,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL.into_iter().find(|r| r.as_str() == s).ok_or_else(|| format!("unknown role `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tool {
    Read,
    Write,
    Glob,
    Grep,
}

impl Tool {
    pub const ALL: [Tool; 4] = [Tool::Read, Tool::Write, Tool::Glob, Tool::Grep];

    pub fn as_str(self) -> &'static str {
        match self {
            Tool::Read => "Read",
            Tool::Write => "Write",
            Tool::Glob => "Glob",
            Tool::Grep => "Grep",
        }
    }

    pub fn parse(name: &str) -> Option<Tool> {
        Tool::ALL.into_iter().find(|t| t.as_str() == name)
    }
}

impl fmt::Display for Tool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolResult {
    pub id: String,
    pub output: String,
    pub is_error: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendRequest {
    pub protocol: String,
    pub role: Role,
    pub system_prompt: String,
    pub task_prompt: String,
    /// Structured copy of the values injected into the task prompt.
    pub params: BTreeMap<String, String>,
    pub tools: Vec<Tool>,
    pub tool_results: Vec<ToolResult>,
    /// Zero-based turn index within the session.
    pub turn: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BackendRecord {
    Text { text: String },
    ToolCall { id: String, tool: String, input: Value },
    Done {
        #[serde(default)]
        usage: Option<Usage>,
    },
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum BackendError {
    /// The backend failed after emitting `partial`.
    #[error("backend stream failed: {message}")]
    Stream { message: String, partial: Vec<BackendRecord> },
    #[error("no scripted response for {role} (fingerprint {fingerprint})")]
    NoScript { role: Role, fingerprint: String },
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("transport: {0}")]
    Transport(String),
}

impl BackendError {
    pub fn partial(&self) -> &[BackendRecord] {
        match self {
            BackendError::Stream { partial, .. } => partial,
            _ => &[],
        }
    }
}

#[async_trait]
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    /// Whether responses come from a real model.
    fn is_live(&self) -> bool {
        false
    }

    async fn respond(&self, request: &BackendRequest) -> Result<Vec<BackendRecord>, BackendError>;
}

/// Stable short hash of a task prompt, used to key scripted responses.
pub fn fingerprint(task_prompt: &str) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(task_prompt.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allow_lists() {
        assert_eq!(Role::Corrector.allowed_tools(), &[Tool::Read, Tool::Write]);
        for role in [Role::Planner, Role::Analyzer, Role::Diagram, Role::DependencyAnalyzer] {
            assert_eq!(role.allowed_tools(), &Tool::ALL);
        }
    }

    #[test]
    fn record_wire_format() {
        let r = BackendRecord::ToolCall { id: "1".into(), tool: "Read".into(), input: serde_json::json!({"path": "a"}) };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"type":"tool_call","id":"1","tool":"Read","input":{"path":"a"}}"#);
        let d: BackendRecord = serde_json::from_str(r#"{"type":"done"}"#).unwrap();
        assert_eq!(d, BackendRecord::Done { usage: None });
    }

    #[test]
    fn fingerprint_is_stable() {
        assert_eq!(fingerprint("abc"), "ba7816bf8f01cfea");
        assert_eq!(fingerprint("abc").len(), 16);
    }
}
