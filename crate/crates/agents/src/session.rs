//! Agent session lifecycle: prompt submission, the tool-call loop, the
//! normalized transcript, hooks and statistics.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::backend::{Backend, BackendRecord, BackendRequest, Role, Tool, ToolResult, Usage, PROTOCOL_VERSION};
use crate::events::{EventKind, EventLog};
use crate::sandbox::Sandbox;

pub const MAX_TURNS: usize = 24;

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("tools {given:?} do not match the {role} allow-list {expected:?}")]
    ToolsMismatch { role: Role, given: Vec<Tool>, expected: Vec<Tool> },
    #[error("missing input `{0}`")]
    MissingInput(String),
    #[error("{role} session `{id}` failed: {message}")]
    SessionFailed { id: String, role: Role, message: String },
    #[error("unparseable planner output: {0}")]
    BadPlan(String),
    #[error("diagram session `{0}` wrote no .puml file")]
    NoDiagram(String),
    #[error(transparent)]
    View(#[from] c2u_core::view::ViewError),
    #[error(transparent)]
    Extract(#[from] c2u_core::extract::ExtractError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSpec {
    pub id: String,
    pub role: Role,
    pub system_prompt: String,
    pub task_prompt: String,
    pub params: BTreeMap<String, String>,
    pub tools: Vec<Tool>,
}

impl SessionSpec {
    pub fn new(id: impl Into<String>, role: Role, system_prompt: impl Into<String>, task_prompt: impl Into<String>) -> Self {
        SessionSpec {
            id: id.into(),
            role,
            system_prompt: system_prompt.into(),
            task_prompt: task_prompt.into(),
            params: BTreeMap::new(),
            tools: role.allowed_tools().to_vec(),
        }
    }

    pub fn with_params(mut self, params: BTreeMap<String, String>) -> Self {
        self.params = params;
        self
    }

    pub fn with_tools(mut self, tools: Vec<Tool>) -> Self {
        self.tools = tools;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ToolCallStatus {
    Executed,
    Rejected { reason: String },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TranscriptRecord {
    Assistant { text: String },
    ToolCall { id: String, tool: String, input: Value, outcome: ToolCallStatus },
    ToolResult { id: String, output: String, is_error: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SessionStats {
    pub duration_secs: f64,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub cost_estimate: f64,
}

/// Price per million tokens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub input_per_mtok: f64,
    pub output_per_mtok: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { input_per_mtok: 3.0, output_per_mtok: 15.0 }
    }
}

impl CostModel {
    pub fn cost(&self, input_tokens: u64, output_tokens: u64) -> f64 {
        (input_tokens as f64 * self.input_per_mtok + output_tokens as f64 * self.output_per_mtok) / 1e6
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum SessionStatus {
    Completed,
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSession {
    pub id: String,
    pub role: Role,
    pub system_prompt: String,
    pub allowed_tools: Vec<Tool>,
    pub task_prompt: String,
    pub transcript: Vec<TranscriptRecord>,
    pub stats: SessionStats,
    pub status: SessionStatus,
    /// Assistant text of the final turn.
    pub result: String,
}

impl AgentSession {
    pub fn is_completed(&self) -> bool {
        self.status == SessionStatus::Completed
    }

    pub fn executed_tools(&self) -> impl Iterator<Item = &str> {
        self.transcript.iter().filter_map(|r| match r {
            TranscriptRecord::ToolCall { tool, outcome: ToolCallStatus::Executed, .. } => Some(tool.as_str()),
            _ => None,
        })
    }

    pub fn rejected_calls(&self) -> usize {
        self.transcript
            .iter()
            .filter(|r| matches!(r, TranscriptRecord::ToolCall { outcome: ToolCallStatus::Rejected { .. }, .. }))
            .count()
    }

    /// Virtual paths written successfully, in order.
    pub fn written_paths(&self) -> Vec<String> {
        self.transcript
            .iter()
            .filter_map(|r| match r {
                TranscriptRecord::ToolCall { tool, input, outcome: ToolCallStatus::Executed, .. } if tool == "Write" => {
                    input.get("path").and_then(Value::as_str).map(str::to_string)
                }
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionInfo {
    pub id: String,
    pub role: Role,
}

/// Lifecycle callbacks registered by the orchestrator.
pub trait SessionHooks: Send + Sync {
    fn before_execution(&self, _info: &SessionInfo) {}
    fn after_message(&self, _info: &SessionInfo, _record: &TranscriptRecord) {}
    fn on_error(&self, _info: &SessionInfo, _error: &str) {}
    fn after_execution(&self, _info: &SessionInfo, _session: &AgentSession) {}
}

fn clip(s: &str, max: usize) -> String {
    if s.len() <= max {
        return s.to_string();
    }
    let mut end = max;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}...", &s[..end])
}

fn summarize_input(input: &Value) -> Value {
    match input {
        Value::Object(map) => Value::Object(
            map.iter()
                .map(|(k, v)| {
                    let v = match v {
                        Value::String(s) => Value::String(clip(s, 120)),
                        other => other.clone(),
                    };
                    (k.clone(), v)
                })
                .collect(),
        ),
        other => other.clone(),
    }
}

impl SessionHooks for EventLog {
    fn before_execution(&self, info: &SessionInfo) {
        self.emit(&info.id, EventKind::SessionStart, json!({ "role": info.role }));
    }

    fn after_message(&self, info: &SessionInfo, record: &TranscriptRecord) {
        match record {
            TranscriptRecord::Assistant { text } => {
                self.emit(&info.id, EventKind::Message, json!({ "text": clip(text, 200) }))
            }
            TranscriptRecord::ToolCall { tool, input, outcome, .. } => self.emit(
                &info.id,
                EventKind::ToolCall,
                json!({ "tool": tool, "input": summarize_input(input), "outcome": outcome }),
            ),
            TranscriptRecord::ToolResult { .. } => {}
        }
    }

    fn on_error(&self, info: &SessionInfo, error: &str) {
        self.emit(&info.id, EventKind::Error, json!({ "role": info.role, "message": error }));
    }

    fn after_execution(&self, info: &SessionInfo, session: &AgentSession) {
        let mut stats = session.stats;
        if self.is_deterministic() {
            stats.duration_secs = 0.0;
        }
        self.emit(&info.id, EventKind::SessionEnd, json!({ "role": info.role, "status": session.status, "stats": stats }));
    }
}

/// Collects per-session statistics.
#[derive(Debug, Default)]
pub struct StatsCollector {
    sessions: Mutex<Vec<(String, Role, SessionStats)>>,
}

impl StatsCollector {
    pub fn sessions(&self) -> Vec<(String, Role, SessionStats)> {
        self.sessions.lock().expect("stats poisoned").clone()
    }

    pub fn total(&self) -> SessionStats {
        self.sessions().iter().fold(SessionStats::default(), |acc, (_, _, s)| SessionStats {
            duration_secs: acc.duration_secs + s.duration_secs,
            input_tokens: acc.input_tokens + s.input_tokens,
            output_tokens: acc.output_tokens + s.output_tokens,
            cost_estimate: acc.cost_estimate + s.cost_estimate,
        })
    }
}

impl SessionHooks for StatsCollector {
    fn after_execution(&self, info: &SessionInfo, session: &AgentSession) {
        self.sessions.lock().expect("stats poisoned").push((info.id.clone(), info.role, session.stats));
    }
}

pub type Hooks = Vec<Arc<dyn SessionHooks>>;

fn estimate_tokens(chars: usize) -> u64 {
    chars.div_ceil(4) as u64
}

/// Runs one session to completion.
///
/// Tool calls outside the role's allow-list are rejected and recorded; the
/// session continues. A backend failure keeps the partial transcript and
/// marks the session failed. The only error is a tool set that does not
/// match the role.
pub async fn run_session(
    spec: SessionSpec,
    backend: &dyn Backend,
    sandbox: &Sandbox,
    hooks: &[Arc<dyn SessionHooks>],
) -> Result<AgentSession, AgentError> {
    let expected = spec.role.allowed_tools().to_vec();
    let mut given = spec.tools.clone();
    given.sort();
    given.dedup();
    if given != expected {
        return Err(AgentError::ToolsMismatch { role: spec.role, given: spec.tools, expected });
    }

    let info = SessionInfo { id: spec.id.clone(), role: spec.role };
    let started = Instant::now();
    for h in hooks {
        h.before_execution(&info);
    }

    let cost = CostModel::default();
    let mut session = AgentSession {
        id: spec.id.clone(),
        role: spec.role,
        system_prompt: spec.system_prompt.clone(),
        allowed_tools: expected.clone(),
        task_prompt: spec.task_prompt.clone(),
        transcript: Vec::new(),
        stats: SessionStats::default(),
        status: SessionStatus::Completed,
        result: String::new(),
    };
    let mut results: Vec<ToolResult> = Vec::new();
    let mut usage = Usage::default();

    let push = |session: &mut AgentSession, record: TranscriptRecord| {
        for h in hooks {
            h.after_message(&info, &record);
        }
        session.transcript.push(record);
    };

    let mut turn = 0;
    loop {
        if turn >= MAX_TURNS {
            session.status = SessionStatus::Failed { error: format!("no final answer after {MAX_TURNS} turns") };
            break;
        }
        let request = BackendRequest {
            protocol: PROTOCOL_VERSION.to_string(),
            role: spec.role,
            system_prompt: spec.system_prompt.clone(),
            task_prompt: spec.task_prompt.clone(),
            params: spec.params.clone(),
            tools: expected.clone(),
            tool_results: results.clone(),
            turn,
        };
        let input_chars = request.system_prompt.len()
            + request.task_prompt.len()
            + request.tool_results.iter().map(|r| r.output.len()).sum::<usize>();
        let (records, failure) = match backend.respond(&request).await {
            Ok(records) => (records, None),
            Err(e) => (e.partial().to_vec(), Some(e.to_string())),
        };

        let mut reported = None;
        let mut output_chars = 0;
        let mut turn_text = Vec::new();
        let mut called = false;
        for record in records {
            match record {
                BackendRecord::Text { text } => {
                    output_chars += text.len();
                    turn_text.push(text.clone());
                    push(&mut session, TranscriptRecord::Assistant { text });
                }
                BackendRecord::ToolCall { id, tool, input } => {
                    called = true;
                    output_chars += input.to_string().len();
                    let (outcome, output, is_error) = match Tool::parse(&tool) {
                        Some(t) if expected.contains(&t) => match sandbox.execute(t, &input) {
                            Ok(out) => (ToolCallStatus::Executed, out, false),
                            Err(e) => (ToolCallStatus::Failed { error: e.to_string() }, e.to_string(), true),
                        },
                        _ => {
                            let reason = format!("tool `{tool}` is not allowed for the {} role", spec.role);
                            (ToolCallStatus::Rejected { reason: reason.clone() }, reason, true)
                        }
                    };
                    push(&mut session, TranscriptRecord::ToolCall { id: id.clone(), tool, input, outcome });
                    push(&mut session, TranscriptRecord::ToolResult { id: id.clone(), output: output.clone(), is_error });
                    results.push(ToolResult { id, output, is_error });
                }
                BackendRecord::Done { usage: u } => reported = u,
            }
        }
        match reported {
            Some(u) => {
                usage.input_tokens += u.input_tokens;
                usage.output_tokens += u.output_tokens;
            }
            None => {
                usage.input_tokens += estimate_tokens(input_chars);
                usage.output_tokens += estimate_tokens(output_chars);
            }
        }
        if let Some(error) = failure {
            for h in hooks {
                h.on_error(&info, &error);
            }
            session.status = SessionStatus::Failed { error };
            break;
        }
        if !called {
            session.result = turn_text.join("\n");
            break;
        }
        turn += 1;
    }

    session.stats = SessionStats {
        duration_secs: started.elapsed().as_secs_f64(),
        input_tokens: usage.input_tokens,
        output_tokens: usage.output_tokens,
        cost_estimate: cost.cost(usage.input_tokens, usage.output_tokens),
    };
    for h in hooks {
        h.after_execution(&info, &session);
    }
    Ok(session)
}
