//! Routing and concurrency for one (project, diagram type) pair.
//!
//! SINGLE types run one generator over the compact view, then correction.
//! DEEP types run a planner, one analyzer per scope and one generator per
//! scope. Analyzers and generators share a semaphore of
//! `concurrency_limit` permits; a generator keeps its permit through its
//! own correction, so corrections of early scopes overlap with generation
//! of later ones. A failing scope is logged and skipped.

use std::sync::Arc;

use c2u_core::{DiagramType, Route};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use crate::analyze::analyze_scope;
use crate::context::RunContext;
use crate::generate::{correct, generate_diagram, Correction, Target};
use crate::plan::{plan, DiagramPlan};
use crate::session::AgentError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedDiagram {
    pub index: usize,
    pub scope: String,
    pub correction: Correction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeFailure {
    pub index: usize,
    pub scope: String,
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orchestration {
    pub diagram_type: DiagramType,
    pub route: Route,
    pub plan: Option<DiagramPlan>,
    /// Ordered by scope index.
    pub diagrams: Vec<GeneratedDiagram>,
    pub failures: Vec<ScopeFailure>,
    pub sessions: usize,
}

async fn generate_and_correct(ctx: &RunContext, dt: DiagramType, target: &Target) -> Result<Correction, (String, AgentError)> {
    let path = generate_diagram(ctx, dt, target).await.map_err(|e| ("diagram".to_string(), e))?;
    correct(ctx, dt, &path).await.map_err(|e| ("corrector".to_string(), e))
}

fn fail(ctx: &RunContext, dt: DiagramType, index: usize, scope: &str, stage: String, error: AgentError) -> ScopeFailure {
    ctx.events.error(&format!("{dt}/{stage}/{}", crate::context::stem(index, scope)), error.to_string());
    ScopeFailure { index, scope: scope.to_string(), stage, error: error.to_string() }
}

/// Produces the diagrams of type `dt`. Only a missing view or a failed
/// plan is an error; per-scope failures are reported in the result.
pub async fn orchestrate(ctx: Arc<RunContext>, dt: DiagramType) -> Result<Orchestration, AgentError> {
    let view_path = ctx.view_path(dt);
    if !ctx.host(&view_path).is_file() {
        return Err(AgentError::MissingInput(view_path));
    }
    std::fs::create_dir_all(ctx.run_dir.join(dt.as_str()))?;
    let prefix = format!("{dt}/");
    let mut out = Orchestration {
        diagram_type: dt,
        route: dt.route(),
        plan: None,
        diagrams: Vec::new(),
        failures: Vec::new(),
        sessions: 0,
    };

    match dt.route() {
        Route::Single => {
            let target = Target::single();
            match generate_and_correct(&ctx, dt, &target).await {
                Ok(correction) => out.diagrams.push(GeneratedDiagram { index: 1, scope: dt.to_string(), correction }),
                Err((stage, e)) => out.failures.push(fail(&ctx, dt, 1, dt.as_str(), stage, e)),
            }
        }
        Route::Deep => {
            let plan = plan(&ctx, dt).await?;
            let sem = Arc::new(Semaphore::new(ctx.concurrency_limit.max(1)));

            let analyzers: Vec<_> = plan
                .scopes
                .iter()
                .enumerate()
                .map(|(i, scope)| {
                    let (ctx, sem, scope) = (ctx.clone(), sem.clone(), scope.clone());
                    tokio::spawn(async move {
                        let _permit = sem.acquire_owned().await.expect("semaphore open");
                        analyze_scope(&ctx, dt, i + 1, &scope).await
                    })
                })
                .collect();
            let mut targets = Vec::new();
            for (i, handle) in analyzers.into_iter().enumerate() {
                let scope = &plan.scopes[i];
                match handle.await.expect("analyzer task panicked") {
                    Ok(context_path) => targets.push(Target { index: i + 1, scope: Some(scope.clone()), context_path: Some(context_path) }),
                    Err(e) => out.failures.push(fail(&ctx, dt, i + 1, &scope.label, "analyzer".into(), e)),
                }
            }

            let generators: Vec<_> = targets
                .into_iter()
                .map(|target| {
                    let (ctx, sem) = (ctx.clone(), sem.clone());
                    tokio::spawn(async move {
                        let _permit = sem.acquire_owned().await.expect("semaphore open");
                        let result = generate_and_correct(&ctx, dt, &target).await;
                        (target, result)
                    })
                })
                .collect();
            for handle in generators {
                let (target, result) = handle.await.expect("generator task panicked");
                let label = target.scope.as_ref().map(|s| s.label.clone()).unwrap_or_default();
                match result {
                    Ok(correction) => out.diagrams.push(GeneratedDiagram { index: target.index, scope: label, correction }),
                    Err((stage, e)) => out.failures.push(fail(&ctx, dt, target.index, &label, stage, e)),
                }
            }
            out.failures.sort_by_key(|f| f.index);
            out.plan = Some(plan);
        }
    }
    out.sessions = ctx.session_count(&prefix);
    Ok(out)
}
