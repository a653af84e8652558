//! Per-scope source analysis for the DEEP path.

use std::collections::BTreeMap;

use c2u_core::DiagramType;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::backend::Role;
use crate::context::{stem, RunContext};
use crate::events::EventKind;
use crate::plan::Scope;
use crate::session::{run_session, AgentError, SessionSpec};

/// Serialized size limit for one enriched context.
pub const CONTEXT_CAP_BYTES: usize = 16 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EnrichedContext {
    #[serde(default)]
    pub scope: String,
    #[serde(default)]
    pub participants: Vec<String>,
    #[serde(default)]
    pub flows: Vec<String>,
    #[serde(default)]
    pub relationships: Vec<String>,
    #[serde(default)]
    pub files_read: Vec<String>,
    /// Set when the scope matched no repository files.
    #[serde(default)]
    pub empty: bool,
    #[serde(default)]
    pub truncated: bool,
}

impl EnrichedContext {
    pub fn encoded_len(&self) -> usize {
        serde_json::to_vec_pretty(self).expect("contexts serialize").len()
    }

    /// Drops list entries from the end of the largest list until the
    /// context fits `cap` bytes. Returns whether anything was dropped.
    pub fn cap(&mut self, cap: usize) -> bool {
        if self.encoded_len() <= cap {
            return false;
        }
        self.truncated = true;
        while self.encoded_len() > cap {
            let size = |v: &Vec<String>| v.iter().map(|s| s.len() + 8).sum::<usize>();
            let lists = [&mut self.flows, &mut self.relationships, &mut self.participants, &mut self.files_read];
            match lists.into_iter().filter(|v| !v.is_empty()).max_by_key(|v| size(v)) {
                Some(v) => {
                    v.pop();
                }
                None => {
                    let keep = self.scope.len().saturating_sub(self.encoded_len() - cap);
                    let mut end = keep.min(self.scope.len());
                    while !self.scope.is_char_boundary(end) {
                        end -= 1;
                    }
                    self.scope.truncate(end);
                    if end == 0 {
                        break;
                    }
                }
            }
        }
        true
    }
}

fn parse_context(text: &str) -> Option<EnrichedContext> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    serde_json::from_str(text.get(start..=end)?).ok()
}

/// Analyzes one scope and writes its context to
/// `<type>/contexts/NN_<slug>.json`, returning that virtual path.
///
/// A scope with no repository files yields an empty, flagged context
/// without a session.
pub async fn analyze_scope(ctx: &RunContext, dt: DiagramType, index: usize, scope: &Scope) -> Result<String, AgentError> {
    let stem = stem(index, &scope.label);
    let id = format!("{dt}/analyzer/{stem}");
    let context_path = format!("{dt}/contexts/{stem}.json");
    let host = ctx.host(&context_path);
    if let Some(parent) = host.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let _ = std::fs::remove_file(&host);
    let sandbox = ctx.sandbox(dt);

    let existing: Vec<&String> =
        scope.files.iter().filter(|f| sandbox.resolve(f).is_ok_and(|(p, _)| p.is_file())).collect();
    let mut context = if existing.is_empty() {
        ctx.events.warn(&id, format!("scope {:?} has no matching files", scope.label));
        EnrichedContext { scope: scope.label.clone(), empty: true, ..Default::default() }
    } else {
        let files = existing.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ");
        let params = BTreeMap::from([
            ("scope".to_string(), scope.label.clone()),
            ("project".to_string(), ctx.project.clone()),
            ("diagram_type".to_string(), dt.to_string()),
            ("rationale".to_string(), scope.rationale.clone()),
            ("files".to_string(), files),
            ("context_path".to_string(), context_path.clone()),
        ]);
        let spec = SessionSpec::new(&id, Role::Analyzer, ctx.prompts.system(Role::Analyzer, dt), ctx.prompts.task(Role::Analyzer, &params))
            .with_params(params);
        let session = run_session(spec, ctx.backend.as_ref(), &sandbox, &ctx.hooks()).await?;
        if let crate::session::SessionStatus::Failed { error } = &session.status {
            return Err(AgentError::SessionFailed { id, role: Role::Analyzer, message: error.clone() });
        }
        let text = std::fs::read_to_string(&host).unwrap_or_else(|_| session.result.clone());
        let Some(mut c) = parse_context(&text) else {
            let message = "analyzer produced no context JSON".to_string();
            ctx.events.error(&id, &message);
            return Err(AgentError::SessionFailed { id, role: Role::Analyzer, message });
        };
        if c.scope.is_empty() {
            c.scope = scope.label.clone();
        }
        let before = c.files_read.len();
        c.files_read.retain(|f| {
            let v = if f.starts_with("repo/") { f.clone() } else { format!("repo/{f}") };
            sandbox.resolve(&v).is_ok_and(|(p, _)| p.is_file())
        });
        if c.files_read.len() < before {
            ctx.events.warn(&id, format!("dropped {} unknown entries from files_read", before - c.files_read.len()));
        }
        c
    };

    let before = context.encoded_len();
    if context.cap(CONTEXT_CAP_BYTES) {
        ctx.events.emit(
            &id,
            EventKind::Warning,
            json!({ "message": "enriched context truncated", "bytes_before": before, "bytes_after": context.encoded_len() }),
        );
    }
    std::fs::write(&host, serde_json::to_vec_pretty(&context).expect("contexts serialize"))?;
    Ok(context_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capping_keeps_under_limit() {
        let mut c = EnrichedContext {
            scope: "s".into(),
            flows: (0..2000).map(|i| format!("flow number {i} goes somewhere")).collect(),
            participants: (0..200).map(|i| format!("P{i}")).collect(),
            ..Default::default()
        };
        assert!(c.encoded_len() > 40_000);
        assert!(c.cap(CONTEXT_CAP_BYTES));
        assert!(c.encoded_len() <= CONTEXT_CAP_BYTES);
        assert!(c.truncated);
        assert_eq!(c.flows[0], "flow number 0 goes somewhere");
        let mut small = EnrichedContext { scope: "s".into(), ..Default::default() };
        assert!(!small.cap(CONTEXT_CAP_BYTES));
    }

    #[test]
    fn parses_embedded_json() {
        let c = parse_context("Result:\n{\"participants\": [\"A\"], \"flows\": [\"A -> B\"]}").unwrap();
        assert_eq!(c.participants, ["A"]);
        assert!(parse_context("nothing").is_none());
    }
}
