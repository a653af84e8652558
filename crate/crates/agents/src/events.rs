//! Append-only run event log, the one synchronized sink shared by all
//! concurrent sessions of a run.

use std::io;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SessionStart,
    Message,
    ToolCall,
    SessionEnd,
    CorrectionStart,
    CorrectionEnd,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEvent {
    /// Global append position.
    pub seq: u64,
    /// Microseconds since the log was created; zero in deterministic mode.
    pub timestamp_us: u64,
    /// Session or operation the event belongs to.
    pub scope: String,
    pub kind: EventKind,
    pub payload: Value,
}

#[derive(Debug)]
struct Inner {
    events: Vec<RunEvent>,
    start: Instant,
    deterministic: bool,
}

#[derive(Debug, Clone)]
pub struct EventLog {
    inner: Arc<Mutex<Inner>>,
}

impl Default for EventLog {
    fn default() -> Self {
        EventLog::new(false)
    }
}

impl EventLog {
    /// In deterministic mode timestamps are zeroed and the serialized log
    /// is ordered by scope, so scheduling does not affect its bytes.
    pub fn new(deterministic: bool) -> Self {
        EventLog { inner: Arc::new(Mutex::new(Inner { events: Vec::new(), start: Instant::now(), deterministic })) }
    }

    pub fn is_deterministic(&self) -> bool {
        self.inner.lock().expect("event log poisoned").deterministic
    }

    pub fn emit(&self, scope: &str, kind: EventKind, payload: Value) {
        let mut inner = self.inner.lock().expect("event log poisoned");
        let timestamp_us = if inner.deterministic { 0 } else { inner.start.elapsed().as_micros() as u64 };
        let seq = inner.events.len() as u64;
        inner.events.push(RunEvent { seq, timestamp_us, scope: scope.to_string(), kind, payload });
    }

    pub fn warn(&self, scope: &str, message: impl Into<String>) {
        self.emit(scope, EventKind::Warning, serde_json::json!({ "message": message.into() }));
    }

    pub fn error(&self, scope: &str, message: impl Into<String>) {
        self.emit(scope, EventKind::Error, serde_json::json!({ "message": message.into() }));
    }

    /// Events in append order.
    pub fn events(&self) -> Vec<RunEvent> {
        self.inner.lock().expect("event log poisoned").events.clone()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.inner.lock().expect("event log poisoned").events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn has_errors(&self) -> bool {
        self.count(EventKind::Error) > 0
    }

    /// Events as serialized: append order normally, `(scope, append
    /// order)` with renumbered `seq` in deterministic mode.
    pub fn ordered(&self) -> Vec<RunEvent> {
        let inner = self.inner.lock().expect("event log poisoned");
        let mut events = inner.events.clone();
        if inner.deterministic {
            events.sort_by(|a, b| a.scope.cmp(&b.scope));
            for (i, e) in events.iter_mut().enumerate() {
                e.seq = i as u64;
            }
        }
        events
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in self.ordered() {
            out.push_str(&serde_json::to_string(&e).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, path: &Path) -> io::Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, self.to_jsonl())
    }
}
