//! Diagram generation and correction.

use std::collections::BTreeMap;
use std::path::PathBuf;

use c2u_core::puml::{lint, lint_and_fix, parse_artifact, DiagramArtifact, LintReport, Verdict};
use c2u_core::DiagramType;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::backend::Role;
use crate::context::{stem, RunContext};
use crate::events::EventKind;
use crate::plan::Scope;
use crate::session::{run_session, AgentError, SessionSpec, SessionStatus};

/// What one generator session works on.
#[derive(Debug, Clone)]
pub struct Target {
    pub index: usize,
    pub scope: Option<Scope>,
    /// Virtual path of the scope's enriched context.
    pub context_path: Option<String>,
}

impl Target {
    pub fn single() -> Self {
        Target { index: 1, scope: None, context_path: None }
    }

    pub fn stem(&self, dt: DiagramType) -> String {
        stem(self.index, self.scope.as_ref().map_or(dt.as_str(), |s| s.label.as_str()))
    }
}

/// Runs the generator for `target` and returns the host path of the
/// diagram it wrote to `<type>/NN_<slug>.puml`.
pub async fn generate_diagram(ctx: &RunContext, dt: DiagramType, target: &Target) -> Result<PathBuf, AgentError> {
    let view_path = ctx.view_path(dt);
    for input in std::iter::once(&view_path).chain(target.context_path.as_ref()) {
        if !ctx.host(input).is_file() {
            return Err(AgentError::MissingInput(input.clone()));
        }
    }
    let stem = target.stem(dt);
    let id = format!("{dt}/diagram/{stem}");
    let output_path = format!("{dt}/{stem}.puml");
    let host = ctx.host(&output_path);
    std::fs::create_dir_all(host.parent().expect("output has a parent"))?;
    let _ = std::fs::remove_file(&host);

    let mut params = BTreeMap::from([
        ("diagram_type".to_string(), dt.to_string()),
        ("project".to_string(), ctx.project.clone()),
        ("view_path".to_string(), view_path),
        ("output_dir".to_string(), dt.to_string()),
        ("output_path".to_string(), output_path.clone()),
    ]);
    if let Some(scope) = &target.scope {
        params.insert("scope".into(), scope.label.clone());
        if !scope.files.is_empty() {
            params.insert("files".into(), scope.files.join(", "));
        }
    }
    if let Some(c) = &target.context_path {
        params.insert("context_path".into(), c.clone());
    }
    if let Some(d) = &ctx.dependency_context {
        params.insert("dependency_path".into(), d.clone());
    }

    let sandbox = ctx.sandbox(dt);
    let spec = SessionSpec::new(&id, Role::Diagram, ctx.prompts.system(Role::Diagram, dt), ctx.prompts.task(Role::Diagram, &params))
        .with_params(params);
    let session = run_session(spec, ctx.backend.as_ref(), &sandbox, &ctx.hooks()).await?;
    if let SessionStatus::Failed { error } = &session.status {
        return Err(AgentError::SessionFailed { id, role: Role::Diagram, message: error.clone() });
    }
    if host.is_file() {
        return Ok(host);
    }
    let stray: Vec<String> = session.written_paths().into_iter().filter(|p| p.ends_with(".puml")).collect();
    if let [only] = stray.as_slice() {
        let (src, _) = sandbox.resolve(only).map_err(|e| AgentError::MissingInput(e.to_string()))?;
        std::fs::rename(&src, &host)?;
        ctx.events.warn(&id, format!("moved {only} to {output_path}"));
        return Ok(host);
    }
    ctx.events.error(&id, "no .puml file written");
    Err(AgentError::NoDiagram(id))
}

/// Outcome of correcting one diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub path: PathBuf,
    /// Report on the diagram as generated; its verdict is the validity datum.
    pub report: LintReport,
    /// Report on the diagram after all correction.
    pub final_report: LintReport,
    pub artifact: DiagramArtifact,
}

/// Lints the diagram at `host`, applies deterministic fixes, then runs the
/// corrector session and re-lints. Writes `NN_<slug>.lint.json` next to
/// the diagram. A failed corrector session is logged, not propagated.
pub async fn correct(ctx: &RunContext, dt: DiagramType, host: &std::path::Path) -> Result<Correction, AgentError> {
    let stem = host.file_stem().and_then(|s| s.to_str()).unwrap_or("diagram").to_string();
    let id = format!("{dt}/corrector/{stem}");
    let virtual_path = format!("{dt}/{stem}.puml");
    ctx.events.emit(&id, EventKind::CorrectionStart, json!({ "path": virtual_path }));

    let text = std::fs::read_to_string(host)?;
    let scope = |a: DiagramArtifact| a.with_scope(stem.clone());
    let (report, fixed) = lint_and_fix(&parse_artifact(&text, dt));
    if report.verdict == Verdict::Corrected {
        std::fs::write(host, &fixed.text)?;
    }

    let issues = if report.violations.is_empty() {
        "none".to_string()
    } else {
        report.violations.iter().map(|v| format!("{} (line {}): {}", v.rule, v.line, v.excerpt)).collect::<Vec<_>>().join("; ")
    };
    let params = BTreeMap::from([
        ("diagram_type".to_string(), dt.to_string()),
        ("puml_path".to_string(), virtual_path.clone()),
        ("verdict".to_string(), report.verdict.to_string()),
        ("issues".to_string(), issues),
    ]);
    let spec = SessionSpec::new(&id, Role::Corrector, ctx.prompts.system(Role::Corrector, dt), ctx.prompts.task(Role::Corrector, &params))
        .with_params(params);
    let session = run_session(spec, ctx.backend.as_ref(), &ctx.sandbox(dt), &ctx.hooks()).await?;
    if !session.is_completed() {
        ctx.events.warn(&id, "corrector session failed; keeping the deterministically fixed diagram");
    }

    let final_text = std::fs::read_to_string(host)?;
    let artifact = scope(parse_artifact(&final_text, dt));
    let final_report = lint(&artifact);
    ctx.events.emit(
        &id,
        EventKind::CorrectionEnd,
        json!({ "path": virtual_path, "verdict": report.verdict, "final_verdict": final_report.verdict, "fixes_applied": report.fixes_applied }),
    );
    let lint_json = json!({ "initial": report, "final": final_report });
    std::fs::write(host.with_extension("lint.json"), serde_json::to_string_pretty(&lint_json).expect("reports serialize") + "\n")?;
    Ok(Correction { path: host.to_path_buf(), report, final_report, artifact })
}
