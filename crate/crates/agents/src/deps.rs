//! Dependency context from a vendored third-party tree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use c2u_core::extract::{detect_languages, extract_project, ExtractorRegistry};
use c2u_core::normalize::normalize;
use c2u_core::view::generate_view;
use c2u_core::DiagramType;

use crate::analyze::CONTEXT_CAP_BYTES;
use crate::backend::Role;
use crate::context::RunContext;
use crate::sandbox::Sandbox;
use crate::session::{run_session, AgentError, SessionSpec};

pub const SUMMARY_PATH: &str = "deps/summary.md";

fn clip_to(s: &mut String, cap: usize) -> bool {
    if s.len() <= cap {
        return false;
    }
    let marker = "\n[truncated]\n";
    let mut end = cap - marker.len();
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    s.truncate(end);
    s.push_str(marker);
    true
}

/// Library name of a dependency-relative path: its first component.
fn library(source_file: &str) -> &str {
    source_file.split('/').next().filter(|s| !s.is_empty()).unwrap_or(".")
}

/// Class listing per library for the classes a class view of the
/// dependency tree retains.
pub fn summarize(root: &Path) -> Result<String, AgentError> {
    let langs = detect_languages(root)?;
    let (raw, _) = extract_project(root, &langs, &ExtractorRegistry::default())?;
    let ir = normalize(raw);
    let view = generate_view(&ir, DiagramType::Class)?;
    let kept: BTreeSet<&str> = view.element_names().into_iter().collect();

    let mut libs: BTreeMap<&str, Vec<(&str, Vec<&str>)>> = BTreeMap::new();
    for c in ir.classes.iter().filter(|c| kept.contains(c.name.as_str())) {
        let methods = c.methods.iter().filter(|m| m.visibility == c2u_core::Visibility::Public).map(|m| m.name.as_str()).take(8).collect();
        libs.entry(library(&c.source_file)).or_default().push((c.name.as_str(), methods));
    }
    let mut out = String::from("# Dependency context\n");
    if libs.is_empty() {
        out.push_str("\nNo library classes were found.\n");
    }
    for (lib, classes) in &libs {
        let _ = writeln!(out, "\n## {lib} ({} classes)\n", classes.len());
        for (name, methods) in classes {
            if methods.is_empty() {
                let _ = writeln!(out, "- {name}");
            } else {
                let _ = writeln!(out, "- {name}: {}", methods.join(", "));
            }
        }
    }
    Ok(out)
}

/// Builds `deps/summary.md` from `deps_root` and runs the dependency
/// analyzer over it. Returns the virtual path of the summary, or `None`
/// when there is no dependency tree.
pub async fn analyze_dependencies(ctx: &RunContext, deps_root: Option<&Path>) -> Result<Option<String>, AgentError> {
    let Some(root) = deps_root.filter(|r| r.is_dir()) else {
        return Ok(None);
    };
    let id = "dependencies/analyzer";
    let mut summary = summarize(root)?;
    let dir = ctx.deps_dir();
    std::fs::create_dir_all(&dir)?;
    let host = ctx.host(SUMMARY_PATH);
    if clip_to(&mut summary, CONTEXT_CAP_BYTES) {
        ctx.events.warn(id, "dependency summary truncated");
    }
    std::fs::write(&host, &summary)?;

    let sandbox = Sandbox::new().mount("deps", &dir, false).mount("deps_src", root, false);
    let params = BTreeMap::from([
        ("project".to_string(), ctx.project.clone()),
        ("summary_path".to_string(), SUMMARY_PATH.to_string()),
    ]);
    let spec = SessionSpec::new(
        id,
        Role::DependencyAnalyzer,
        ctx.prompts.system(Role::DependencyAnalyzer, DiagramType::Class),
        ctx.prompts.task(Role::DependencyAnalyzer, &params),
    )
    .with_params(params);
    let session = run_session(spec, ctx.backend.as_ref(), &sandbox, &ctx.hooks()).await?;
    if session.is_completed() && !session.result.trim().is_empty() {
        summary.push_str("\n## Notes\n\n");
        summary.push_str(session.result.trim());
        summary.push('\n');
        if clip_to(&mut summary, CONTEXT_CAP_BYTES) {
            ctx.events.warn(id, "dependency summary truncated");
        }
        std::fs::write(&host, &summary)?;
    } else if !session.is_completed() {
        ctx.events.warn(id, "dependency analyzer failed; using the extracted summary only");
    }
    Ok(Some(SUMMARY_PATH.to_string()))
}
