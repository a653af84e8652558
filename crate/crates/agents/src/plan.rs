//! Scope planning for the DEEP path.

use std::collections::{BTreeMap, BTreeSet};

use c2u_core::{DiagramType, ProjectIr};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::backend::Role;
use crate::context::RunContext;
use crate::events::EventKind;
use crate::session::{run_session, AgentError, SessionSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scope {
    pub label: String,
    #[serde(default)]
    pub files: Vec<String>,
    #[serde(default)]
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramPlan {
    pub scopes: Vec<Scope>,
    #[serde(default)]
    pub target_diagram_count: usize,
}

/// Allowed scope count for a project with `class_count` classes.
pub fn scope_band(class_count: usize) -> (usize, usize) {
    match class_count {
        0..=19 => (1, 3),
        20..=199 => (3, 6),
        200..=999 => (6, 12),
        1000..=1999 => (10, 15),
        _ => (15, 30),
    }
}

/// Accepts bare JSON, fenced JSON, or JSON embedded in prose.
pub fn parse_plan(text: &str) -> Result<DiagramPlan, String> {
    let start = text.find('{').ok_or("no JSON object found")?;
    let end = text.rfind('}').ok_or("no JSON object found")?;
    if end < start {
        return Err("no JSON object found".into());
    }
    let plan: DiagramPlan = serde_json::from_str(&text[start..=end]).map_err(|e| e.to_string())?;
    if plan.scopes.is_empty() {
        return Err("plan has no scopes".into());
    }
    Ok(plan)
}

/// Candidate scopes from the IR: one per source directory, largest first.
pub fn fallback_scopes(ir: &ProjectIr) -> Vec<Scope> {
    let mut dirs: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let files = ir.classes.iter().map(|c| c.source_file.as_str()).chain(ir.functions.iter().map(|f| f.source_file.as_str()));
    for file in files {
        let dir = file.rsplit_once('/').map_or(".", |(d, _)| d);
        dirs.entry(dir).or_default().insert(file);
    }
    let mut scopes: Vec<(usize, Scope)> = dirs
        .into_iter()
        .map(|(dir, files)| {
            let label = if dir == "." { "root".to_string() } else { dir.to_string() };
            let scope = Scope {
                label,
                files: files.iter().map(|f| format!("repo/{f}")).collect(),
                rationale: format!("source directory {dir}"),
            };
            (files.len(), scope)
        })
        .collect();
    scopes.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.label.cmp(&b.1.label)));
    scopes.into_iter().map(|(_, s)| s).collect()
}

/// Forces the scope count into the band for `class_count`. Extra scopes
/// are dropped from the end; missing ones come from `fallback`, then from
/// splitting the scope with the most files, then as empty overview scopes.
pub fn clamp_plan(mut plan: DiagramPlan, class_count: usize, fallback: &[Scope]) -> (DiagramPlan, Option<String>) {
    let (lo, hi) = scope_band(class_count);
    let n = plan.scopes.len();
    let warning = if n > hi {
        plan.scopes.truncate(hi);
        Some(format!("plan had {n} scopes, above the {lo}-{hi} band for {class_count} classes; kept the first {hi}"))
    } else if n < lo {
        let mut fallback = fallback.iter();
        while plan.scopes.len() < lo {
            let labels: BTreeSet<String> = plan.scopes.iter().map(|s| s.label.clone()).collect();
            if let Some(s) = fallback.by_ref().find(|s| !labels.contains(&s.label)) {
                plan.scopes.push(s.clone());
                continue;
            }
            let widest = (0..plan.scopes.len()).filter(|&i| plan.scopes[i].files.len() >= 2).max_by_key(|&i| {
                (plan.scopes[i].files.len(), std::cmp::Reverse(i))
            });
            let mut k = plan.scopes.len() + 1;
            let mut fresh = |base: &str| loop {
                let label = format!("{base} (part {k})");
                k += 1;
                if !labels.contains(&label) {
                    break label;
                }
            };
            match widest {
                Some(i) => {
                    let half = plan.scopes[i].files.len() / 2;
                    let moved = plan.scopes[i].files.split_off(half);
                    let label = fresh(&plan.scopes[i].label);
                    let rationale = format!("split from {}", plan.scopes[i].label);
                    plan.scopes.push(Scope { label, files: moved, rationale });
                }
                None => {
                    let label = fresh("Overview");
                    plan.scopes.push(Scope { label, files: Vec::new(), rationale: "added to reach the minimum scope count".into() });
                }
            }
        }
        Some(format!("plan had {n} scopes, below the {lo}-{hi} band for {class_count} classes; padded to {lo}"))
    } else {
        None
    };
    plan.target_diagram_count = plan.scopes.len();
    (plan, warning)
}

/// Runs the planner (retrying once on unparseable output), keeps only
/// existing repository files, clamps the plan into its band and writes it
/// to `<type>/plan.json`.
pub async fn plan(ctx: &RunContext, dt: DiagramType) -> Result<DiagramPlan, AgentError> {
    let class_count = ctx.ir.classes.len();
    let (lo, hi) = scope_band(class_count);
    let plan_path = format!("{dt}/plan.json");
    let view_path = ctx.view_path(dt);
    if !ctx.host(&view_path).exists() {
        return Err(AgentError::MissingInput(view_path));
    }
    let params = BTreeMap::from([
        ("diagram_type".to_string(), dt.to_string()),
        ("project".to_string(), ctx.project.clone()),
        ("class_count".to_string(), class_count.to_string()),
        ("min_scopes".to_string(), lo.to_string()),
        ("max_scopes".to_string(), hi.to_string()),
        ("view_path".to_string(), view_path),
        ("plan_path".to_string(), plan_path.clone()),
    ]);
    let sandbox = ctx.sandbox(dt);
    let host_plan = ctx.host(&plan_path);

    let mut last_error = String::new();
    let mut parsed = None;
    for attempt in 0..2 {
        let _ = std::fs::remove_file(&host_plan);
        let id = if attempt == 0 { format!("{dt}/planner") } else { format!("{dt}/planner-retry") };
        let spec = SessionSpec::new(&id, Role::Planner, ctx.prompts.system(Role::Planner, dt), ctx.prompts.task(Role::Planner, &params))
            .with_params(params.clone());
        let session = run_session(spec, ctx.backend.as_ref(), &sandbox, &ctx.hooks()).await?;
        if !session.is_completed() {
            last_error = format!("{:?}", session.status);
        } else {
            let text = std::fs::read_to_string(&host_plan).unwrap_or(session.result);
            match parse_plan(&text) {
                Ok(p) => {
                    parsed = Some(p);
                    break;
                }
                Err(e) => last_error = e,
            }
        }
        ctx.events.warn(&id, format!("unusable planner output: {last_error}"));
    }
    let Some(mut raw) = parsed else {
        ctx.events.error(&format!("{dt}/planner"), format!("planning failed: {last_error}"));
        return Err(AgentError::BadPlan(last_error));
    };

    for scope in &mut raw.scopes {
        let before = scope.files.len();
        scope.files = scope
            .files
            .iter()
            .map(|f| if f.starts_with("repo/") { f.clone() } else { format!("repo/{}", f.trim_start_matches("./")) })
            .filter(|f| sandbox.resolve(f).is_ok_and(|(host, _)| host.is_file()))
            .collect();
        if scope.files.len() < before {
            ctx.events.warn(
                &format!("{dt}/planner"),
                format!("scope {:?}: dropped {} files not in the repository", scope.label, before - scope.files.len()),
            );
        }
    }
    let (plan, warning) = clamp_plan(raw, class_count, &fallback_scopes(&ctx.ir));
    if let Some(w) = warning {
        ctx.events.emit(&format!("{dt}/planner"), EventKind::Warning, json!({ "message": w, "scopes": plan.scopes.len() }));
    }
    if let Some(parent) = host_plan.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&host_plan, serde_json::to_string_pretty(&plan).expect("plans serialize") + "\n")?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan_of(n: usize) -> DiagramPlan {
        DiagramPlan {
            scopes: (0..n)
                .map(|i| Scope { label: format!("s{i}"), files: vec![format!("repo/f{i}a"), format!("repo/f{i}b")], rationale: String::new() })
                .collect(),
            target_diagram_count: n,
        }
    }

    #[test]
    fn bands() {
        assert_eq!(scope_band(0), (1, 3));
        assert_eq!(scope_band(19), (1, 3));
        assert_eq!(scope_band(20), (3, 6));
        assert_eq!(scope_band(999), (6, 12));
        assert_eq!(scope_band(1000), (10, 15));
        assert_eq!(scope_band(2000), (15, 30));
        assert_eq!(scope_band(2500), (15, 30));
    }

    #[test]
    fn in_band_plans_pass_untouched() {
        for (classes, n) in [(15, 2), (2500, 20), (50, 3), (500, 12)] {
            let p = plan_of(n);
            let (out, warning) = clamp_plan(p.clone(), classes, &[]);
            assert_eq!(out, p);
            assert!(warning.is_none());
        }
    }

    #[test]
    fn out_of_band_plans_are_clamped() {
        let (out, w) = clamp_plan(plan_of(7), 15, &[]);
        assert_eq!(out.scopes.len(), 3);
        assert_eq!(out.scopes[2].label, "s2");
        assert!(w.unwrap().contains("above"));

        let fallback = vec![Scope { label: "src/a".into(), files: vec!["repo/src/a/x.py".into()], rationale: String::new() }];
        let (out, w) = clamp_plan(plan_of(1), 50, &fallback);
        assert_eq!(out.scopes.len(), 3);
        assert_eq!(out.scopes[1].label, "src/a");
        assert_eq!(out.scopes[2].files.len(), 1);
        assert!(w.unwrap().contains("below"));
        assert_eq!(out.target_diagram_count, 3);

        let (out, _) = clamp_plan(DiagramPlan { scopes: vec![], target_diagram_count: 0 }, 2500, &[]);
        assert_eq!(out.scopes.len(), 15);
        let labels: BTreeSet<_> = out.scopes.iter().map(|s| &s.label).collect();
        assert_eq!(labels.len(), 15);
    }

    #[test]
    fn plan_parsing() {
        let p = parse_plan("Here:\n```json\n{\"scopes\": [{\"label\": \"A\"}]}\n```").unwrap();
        assert_eq!(p.scopes[0].label, "A");
        assert!(parse_plan("no plan").is_err());
        assert!(parse_plan("{\"scopes\": []}").is_err());
        assert!(parse_plan("{\"scopes\": 3}").is_err());
    }

    #[test]
    fn fallback_groups_by_directory() {
        let mut ir = ProjectIr::new("p");
        for (name, file) in [("A", "src/a/A.java"), ("B", "src/a/B.java"), ("C", "src/c/C.java"), ("D", "D.java")] {
            ir.classes.push(c2u_core::ClassDef { source_file: file.into(), ..c2u_core::ClassDef::new(name) });
        }
        let s = fallback_scopes(&ir);
        assert_eq!(s.iter().map(|s| s.label.as_str()).collect::<Vec<_>>(), ["src/a", "root", "src/c"]);
        assert_eq!(s[0].files, ["repo/src/a/A.java", "repo/src/a/B.java"]);
    }
}
