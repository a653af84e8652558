//! Stages shared by `generate` and `evaluate`.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context};
use c2u_agents::api::ApiBackend;
use c2u_agents::deps::analyze_dependencies;
use c2u_agents::{orchestrate, Backend, EventLog, Orchestration, RunContext, ScriptedBackend, SyntheticBackend};
use c2u_core::extract::{detect_languages, extract_project, ExtractionReport, ExtractorRegistry};
use c2u_core::metrics::{Observation, ScoredDiagram};
use c2u_core::normalize::normalize;
use c2u_core::view::generate_view_with;
use c2u_core::{DiagramType, Language, ProjectIr};

use crate::config::{BackendKind, RunConfig};

/// Detects languages (or uses `langs`), extracts and returns the raw IR.
pub fn extract_raw(root: &Path, langs: &[Language]) -> anyhow::Result<(ProjectIr, ExtractionReport)> {
    let detected = detect_languages(root).with_context(|| format!("cannot read {}", root.display()))?;
    let langs: BTreeSet<Language> = if langs.is_empty() { detected } else { langs.iter().copied().collect() };
    Ok(extract_project(root, &langs, &ExtractorRegistry::default())?)
}

/// Language column for reports: the IR's languages joined with `+`.
pub fn language_label(ir: &ProjectIr) -> String {
    if ir.languages.is_empty() {
        return "unknown".to_string();
    }
    ir.languages.iter().map(|l| l.as_str()).collect::<Vec<_>>().join("+")
}

pub fn make_backend(kind: BackendKind, cfg: &RunConfig, scripts: Option<&Path>) -> anyhow::Result<Arc<dyn Backend>> {
    match kind {
        BackendKind::Api => {
            if scripts.is_some() {
                bail!("--scripts only applies to the mock backend");
            }
            Ok(Arc::new(ApiBackend::from_env()?))
        }
        BackendKind::Mock => {
            let synthetic: Arc<dyn Backend> =
                Arc::new(SyntheticBackend { defect_rate: cfg.defect_rate, max_elements: cfg.max_elements });
            match scripts {
                None => Ok(synthetic),
                Some(dir) => {
                    let scripted = ScriptedBackend::from_dir(dir).with_context(|| format!("cannot load scripts from {}", dir.display()))?;
                    Ok(Arc::new(scripted.with_fallback(synthetic)))
                }
            }
        }
    }
}

pub struct ProjectSetup<'a> {
    pub name: String,
    pub repo_root: &'a Path,
    pub run_dir: &'a Path,
    pub ir: ProjectIr,
    pub deps: Option<&'a Path>,
    pub deterministic: bool,
}

/// Writes every requested view and builds the run context. A view that
/// cannot be produced is logged as an error and its type dropped.
pub async fn prepare(
    setup: ProjectSetup<'_>,
    types: &[DiagramType],
    backend: Arc<dyn Backend>,
    cfg: &RunConfig,
) -> anyhow::Result<(Arc<RunContext>, Vec<DiagramType>)> {
    let mut ctx = RunContext::new(setup.name, setup.repo_root, setup.run_dir, setup.ir, backend)
        .with_events(EventLog::new(setup.deterministic))
        .with_concurrency(cfg.concurrency);
    ctx.prompts.max_elements = cfg.max_elements;
    std::fs::create_dir_all(&ctx.run_dir).with_context(|| format!("cannot create {}", ctx.run_dir.display()))?;

    let opts = cfg.view_options();
    let mut ready = Vec::new();
    for &dt in types {
        match generate_view_with(&ctx.ir, dt, &opts) {
            Ok(view) => {
                view.write_to_dir(&ctx.views_dir())?;
                ready.push(dt);
            }
            Err(e) => ctx.events.error(&format!("{dt}/view"), e.to_string()),
        }
    }
    if let Some(deps) = setup.deps {
        ctx.dependency_context = analyze_dependencies(&ctx, Some(deps)).await?;
    }
    Ok((Arc::new(ctx), ready))
}

/// Orchestrates one diagram type; failures are logged and yield `None`.
pub async fn run_type(ctx: &Arc<RunContext>, dt: DiagramType) -> Option<Orchestration> {
    match orchestrate(ctx.clone(), dt).await {
        Ok(o) => Some(o),
        Err(e) => {
            ctx.events.error(&format!("{dt}/orchestrate"), e.to_string());
            None
        }
    }
}

pub fn observation(ir: &ProjectIr, project: &str, language: &str, dt: DiagramType, orch: Option<&Orchestration>) -> Observation {
    let diagrams = orch
        .map(|o| {
            o.diagrams
                .iter()
                .map(|d| ScoredDiagram { artifact: d.correction.artifact.clone(), report: d.correction.report.clone() })
                .collect()
        })
        .unwrap_or_default();
    Observation {
        project: project.to_string(),
        language: language.to_string(),
        diagram_type: dt,
        ir_entities: ir.element_names().map(String::from).collect(),
        diagrams,
    }
}

/// Normalizes a raw IR; a normalized one passes through unchanged.
pub fn ensure_normalized(ir: ProjectIr) -> ProjectIr {
    if ir.normalized {
        ir
    } else {
        normalize(ir)
    }
}
