//! Shared state for one project run.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use c2u_core::{DiagramType, ProjectIr};

use crate::backend::Backend;
use crate::events::EventLog;
use crate::prompts::PromptSet;
use crate::sandbox::Sandbox;
use crate::session::{Hooks, StatsCollector};

pub const DEFAULT_CONCURRENCY: usize = 4;

/// Run directory layout:
///
/// ```text
/// <run_dir>/views/view_<type>.json    compact views (read-only to agents)
/// <run_dir>/<type>/NN_<scope>.puml    diagrams
/// <run_dir>/<type>/contexts/*.json    enriched contexts
/// <run_dir>/deps/summary.md           dependency context
/// ```
pub struct RunContext {
    pub project: String,
    pub repo_root: PathBuf,
    pub run_dir: PathBuf,
    pub ir: Arc<ProjectIr>,
    pub backend: Arc<dyn Backend>,
    pub events: EventLog,
    pub stats: Arc<StatsCollector>,
    pub prompts: PromptSet,
    pub concurrency_limit: usize,
    /// Virtual path of the dependency context, when one was produced.
    pub dependency_context: Option<String>,
}

impl RunContext {
    pub fn new(project: impl Into<String>, repo_root: impl Into<PathBuf>, run_dir: impl Into<PathBuf>, ir: ProjectIr, backend: Arc<dyn Backend>) -> Self {
        RunContext {
            project: project.into(),
            repo_root: repo_root.into(),
            run_dir: run_dir.into(),
            ir: Arc::new(ir),
            backend,
            events: EventLog::default(),
            stats: Arc::new(StatsCollector::default()),
            prompts: PromptSet::default(),
            concurrency_limit: DEFAULT_CONCURRENCY,
            dependency_context: None,
        }
    }

    pub fn with_events(mut self, events: EventLog) -> Self {
        self.events = events;
        self
    }

    pub fn with_concurrency(mut self, limit: usize) -> Self {
        self.concurrency_limit = limit.max(1);
        self
    }

    pub fn views_dir(&self) -> PathBuf {
        self.run_dir.join("views")
    }

    pub fn view_path(&self, dt: DiagramType) -> String {
        format!("views/view_{dt}.json")
    }

    pub fn deps_dir(&self) -> PathBuf {
        self.run_dir.join("deps")
    }

    /// Tool view for sessions working on `dt`: the repository and views
    /// read-only, the type's output directory writable, and the dependency
    /// context read-only when present.
    pub fn sandbox(&self, dt: DiagramType) -> Sandbox {
        let mut sb = Sandbox::new()
            .mount("repo", &self.repo_root, false)
            .mount("views", self.views_dir(), false)
            .mount(dt.as_str(), self.run_dir.join(dt.as_str()), true);
        if self.deps_dir().is_dir() {
            sb = sb.mount("deps", self.deps_dir(), false);
        }
        sb
    }

    /// Host path of a virtual path rooted in the run directory or `repo/`.
    pub fn host(&self, virtual_path: &str) -> PathBuf {
        match virtual_path.strip_prefix("repo/") {
            Some(rest) => self.repo_root.join(rest),
            None => self.run_dir.join(virtual_path),
        }
    }

    pub fn hooks(&self) -> Hooks {
        vec![Arc::new(self.events.clone()), self.stats.clone()]
    }

    /// Sessions run so far whose id starts with `prefix`.
    pub fn session_count(&self, prefix: &str) -> usize {
        self.stats.sessions().iter().filter(|(id, _, _)| id.starts_with(prefix)).count()
    }

    pub fn relative<'a>(&self, host: &'a Path) -> &'a Path {
        host.strip_prefix(&self.run_dir).unwrap_or(host)
    }
}

/// File-name slug: lowercase ASCII alphanumerics and `_`, at most 40
/// characters, `scope` when nothing survives.
pub fn slug(label: &str) -> String {
    let mut out = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') && !out.is_empty() {
            out.push('_');
        }
        if out.len() >= 40 {
            break;
        }
    }
    let out = out.trim_end_matches('_').to_string();
    if out.is_empty() { "scope".to_string() } else { out }
}

/// `NN_<slug>` with a 1-based, two-digit index.
pub fn stem(index: usize, label: &str) -> String {
    format!("{index:02}_{}", slug(label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("Checkout & Payment"), "checkout_payment");
        assert_eq!(slug("src/main/java"), "src_main_java");
        assert_eq!(slug("***"), "scope");
        assert_eq!(slug(&"a".repeat(60)).len(), 40);
        assert_eq!(stem(3, "Order Flow"), "03_order_flow");
    }
}
