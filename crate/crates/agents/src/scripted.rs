//! Scripted backend: canned turn sequences keyed by role and prompt.
//!
//! A script matches a request by role plus, optionally, the task prompt
//! fingerprint or a substring of the task prompt. Exact fingerprints win
//! over substrings, which win over role-only scripts. String fields in
//! scripted records may use `{{param}}` placeholders, filled from the
//! request parameters.
//!
//! On disk a script is one JSON file:
//!
//! ```json
//! { "role": "diagram", "contains": "scope: Checkout", "delay_ms": 20,
//!   "turns": [[{"type": "tool_call", "id": "w", "tool": "Write",
//!               "input": {"path": "{{output_path}}", "content": "@startuml\n@enduml\n"}}],
//!             [{"type": "text", "text": "done"}]] }
//! ```
//!
//! `role` and `fingerprint` default to the file name (`diagram.json`,
//! `planner.0123456789abcdef.json`).

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::backend::{fingerprint, Backend, BackendError, BackendRecord, BackendRequest, Role};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptTurn {
    Records(Vec<BackendRecord>),
    Error {
        error: String,
        #[serde(default)]
        partial: Vec<BackendRecord>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Script {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains: Option<String>,
    #[serde(default)]
    pub delay_ms: u64,
    pub turns: Vec<ScriptTurn>,
}

impl Script {
    pub fn new(role: Role, turns: Vec<ScriptTurn>) -> Self {
        Script { role: Some(role), fingerprint: None, contains: None, delay_ms: 0, turns }
    }

    pub fn matching(mut self, needle: impl Into<String>) -> Self {
        self.contains = Some(needle.into());
        self
    }

    pub fn with_fingerprint(mut self, fp: impl Into<String>) -> Self {
        self.fingerprint = Some(fp.into());
        self
    }

    pub fn with_delay(mut self, ms: u64) -> Self {
        self.delay_ms = ms;
        self
    }

    fn rank(&self, req: &BackendRequest, fp: &str) -> Option<u8> {
        if self.role != Some(req.role) {
            return None;
        }
        match (&self.fingerprint, &self.contains) {
            (Some(f), _) if f == fp => Some(0),
            (Some(_), _) => None,
            (None, Some(c)) if req.task_prompt.contains(c.as_str()) => Some(1),
            (None, Some(_)) => None,
            (None, None) => Some(2),
        }
    }
}

pub fn text(s: impl Into<String>) -> BackendRecord {
    BackendRecord::Text { text: s.into() }
}

pub fn tool_call(id: impl Into<String>, tool: &str, input: Value) -> BackendRecord {
    BackendRecord::ToolCall { id: id.into(), tool: tool.to_string(), input }
}

pub fn write_turn(path: &str, content: &str) -> ScriptTurn {
    ScriptTurn::Records(vec![tool_call("write", "Write", serde_json::json!({ "path": path, "content": content }))])
}

pub fn final_turn(s: &str) -> ScriptTurn {
    ScriptTurn::Records(vec![text(s)])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServedCall {
    pub role: Role,
    pub fingerprint: String,
    pub turn: usize,
}

#[derive(Default)]
pub struct ScriptedBackend {
    scripts: Vec<Script>,
    served: Mutex<Vec<ServedCall>>,
    fallback: Option<Arc<dyn Backend>>,
}

impl std::fmt::Debug for ScriptedBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScriptedBackend")
            .field("scripts", &self.scripts.len())
            .field("fallback", &self.fallback.as_ref().map(|b| b.name().to_string()))
            .finish()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScriptLoadError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fill(value: &mut Value, params: &BTreeMap<String, String>) {
    match value {
        Value::String(s) if s.contains("{{") => {
            for (k, v) in params {
                *s = s.replace(&format!("{{{{{k}}}}}"), v);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| fill(v, params)),
        Value::Object(map) => map.values_mut().for_each(|v| fill(v, params)),
        _ => {}
    }
}

fn fill_records(records: &[BackendRecord], params: &BTreeMap<String, String>) -> Vec<BackendRecord> {
    records
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r).expect("records serialize");
            fill(&mut v, params);
            serde_json::from_value(v).expect("filled record keeps its shape")
        })
        .collect()
}

impl ScriptedBackend {
    pub fn new(scripts: Vec<Script>) -> Self {
        ScriptedBackend { scripts, served: Mutex::new(Vec::new()), fallback: None }
    }

    /// Requests no script matches go to `backend` instead of failing.
    pub fn with_fallback(mut self, backend: Arc<dyn Backend>) -> Self {
        self.fallback = Some(backend);
        self
    }

    pub fn push(&mut self, script: Script) {
        self.scripts.push(script);
    }

    /// Loads every `*.json` file in `dir`, in file-name order.
    pub fn from_dir(dir: &Path) -> Result<Self, ScriptLoadError> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        let mut scripts = Vec::new();
        for path in paths {
            let shown = path.display().to_string();
            let bad = |message: String| ScriptLoadError::Invalid { path: shown.clone(), message };
            let text = std::fs::read_to_string(&path)?;
            let mut script: Script = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let mut parts = stem.splitn(2, '.');
            let role_part = parts.next().unwrap_or_default();
            if script.role.is_none() {
                script.role = Some(role_part.parse().map_err(bad)?);
            }
            if script.fingerprint.is_none() {
                script.fingerprint = parts.next().map(str::to_string);
            }
            scripts.push(script);
        }
        Ok(ScriptedBackend::new(scripts))
    }

    pub fn served(&self) -> Vec<ServedCall> {
        self.served.lock().expect("served log poisoned").clone()
    }
}

#[async_trait]
impl Backend for ScriptedBackend {
    fn name(&self) -> &str {
        "scripted"
    }

    async fn respond(&self, req: &BackendRequest) -> Result<Vec<BackendRecord>, BackendError> {
        let fp = fingerprint(&req.task_prompt);
        let script = self.scripts.iter().filter_map(|s| s.rank(req, &fp).map(|r| (r, s))).min_by_key(|(r, _)| *r).map(|(_, s)| s);
        let Some(script) = script else {
            return match &self.fallback {
                Some(b) => b.respond(req).await,
                None => Err(BackendError::NoScript { role: req.role, fingerprint: fp }),
            };
        };
        self.served.lock().expect("served log poisoned").push(ServedCall { role: req.role, fingerprint: fp, turn: req.turn });
        if script.delay_ms > 0 {
            tokio::time::sleep(Duration::from_millis(script.delay_ms)).await;
        }
        match script.turns.get(req.turn) {
            None => Ok(Vec::new()),
            Some(ScriptTurn::Records(records)) => Ok(fill_records(records, &req.params)),
            Some(ScriptTurn::Error { error, partial }) => {
                Err(BackendError::Stream { message: error.clone(), partial: fill_records(partial, &req.params) })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::PROTOCOL_VERSION;

    fn request(role: Role, task: &str, turn: usize) -> BackendRequest {
        BackendRequest {
            protocol: PROTOCOL_VERSION.into(),
            role,
            system_prompt: String::new(),
            task_prompt: task.into(),
            params: BTreeMap::from([("output_path".to_string(), "out/a.puml".to_string())]),
            tools: role.allowed_tools().to_vec(),
            tool_results: Vec::new(),
            turn,
        }
    }

    #[tokio::test]
    async fn specificity_and_placeholders() {
        let b = ScriptedBackend::new(vec![
            Script::new(Role::Diagram, vec![final_turn("default")]),
            Script::new(Role::Diagram, vec![write_turn("{{output_path}}", "x")]).matching("scope: A"),
            Script::new(Role::Diagram, vec![final_turn("exact")]).with_fingerprint(fingerprint("scope: A!")),
        ]);
        assert_eq!(b.respond(&request(Role::Diagram, "other", 0)).await.unwrap(), vec![text("default")]);
        let w = b.respond(&request(Role::Diagram, "scope: A", 0)).await.unwrap();
        assert_eq!(w, vec![tool_call("write", "Write", serde_json::json!({"path": "out/a.puml", "content": "x"}))]);
        assert_eq!(b.respond(&request(Role::Diagram, "scope: A!", 0)).await.unwrap(), vec![text("exact")]);
        assert!(b.respond(&request(Role::Diagram, "scope: A", 1)).await.unwrap().is_empty());
        assert!(matches!(b.respond(&request(Role::Planner, "x", 0)).await, Err(BackendError::NoScript { .. })));
        assert_eq!(b.served().len(), 4);
    }

    #[tokio::test]
    async fn scripts_load_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("corrector.json"), r#"{"turns": [[{"type": "text", "text": "ok"}]]}"#).unwrap();
        let fp = fingerprint("plan it");
        std::fs::write(
            dir.path().join(format!("planner.{fp}.json")),
            r#"{"turns": [{"error": "boom", "partial": [{"type": "text", "text": "part"}]}]}"#,
        )
        .unwrap();
        let b = ScriptedBackend::from_dir(dir.path()).unwrap();
        assert_eq!(b.respond(&request(Role::Corrector, "x", 0)).await.unwrap(), vec![text("ok")]);
        let err = b.respond(&request(Role::Planner, "plan it", 0)).await.unwrap_err();
        assert_eq!(err.partial(), &[text("part")]);
        std::fs::write(dir.path().join("nobody.json"), r#"{"turns": []}"#).unwrap();
        assert!(ScriptedBackend::from_dir(dir.path()).is_err());
    }
}
