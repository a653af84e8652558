//! Versioned prompt templates.
//!
//! Templates use `{{name}}` placeholders. A line whose placeholders are
//! not all supplied is dropped, which is how optional task parameters
//! (scope, enriched context, dependency context) disappear from prompts
//! that do not use them.

use std::collections::BTreeMap;

use c2u_core::puml::rules;
use c2u_core::DiagramType;

use crate::backend::Role;

pub const PROMPT_VERSION: &str = "v1";
pub const DEFAULT_MAX_ELEMENTS: usize = 40;

const BASE: &str = include_str!("../prompts/v1/base.md");
const PLANNER: &str = include_str!("../prompts/v1/planner.md");
const ANALYZER: &str = include_str!("../prompts/v1/analyzer.md");
const CORRECTOR_BASE: &str = include_str!("../prompts/v1/corrector/base.md");
const DEPENDENCY_ANALYZER: &str = include_str!("../prompts/v1/dependency_analyzer.md");

const TASK_PLANNER: &str = include_str!("../prompts/v1/task/planner.md");
const TASK_ANALYZER: &str = include_str!("../prompts/v1/task/analyzer.md");
const TASK_DIAGRAM: &str = include_str!("../prompts/v1/task/diagram.md");
const TASK_CORRECTOR: &str = include_str!("../prompts/v1/task/corrector.md");
const TASK_DEPENDENCY: &str = include_str!("../prompts/v1/task/dependency_analyzer.md");

fn diagram_extension(dt: DiagramType) -> &'static str {
    match dt {
        DiagramType::Class => include_str!("../prompts/v1/diagram/class.md"),
        DiagramType::Sequence => include_str!("../prompts/v1/diagram/sequence.md"),
        DiagramType::Activity => include_str!("../prompts/v1/diagram/activity.md"),
        DiagramType::Usecase => include_str!("../prompts/v1/diagram/usecase.md"),
        DiagramType::Component => include_str!("../prompts/v1/diagram/component.md"),
        DiagramType::Deployment => include_str!("../prompts/v1/diagram/deployment.md"),
        DiagramType::SystemContext => include_str!("../prompts/v1/diagram/system_context.md"),
    }
}

fn placeholders(line: &str) -> impl Iterator<Item = &str> {
    line.split("{{").skip(1).filter_map(|rest| rest.split_once("}}").map(|(name, _)| name.trim()))
}

pub fn render(template: &str, params: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for line in template.lines() {
        if placeholders(line).any(|p| !params.contains_key(p)) {
            continue;
        }
        let mut line = line.to_string();
        for (k, v) in params {
            line = line.replace(&format!("{{{{{k}}}}}"), v);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptSet {
    /// Readability threshold injected into the diagram base block.
    pub max_elements: usize,
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet { max_elements: DEFAULT_MAX_ELEMENTS }
    }
}

impl PromptSet {
    /// Base block followed by the type-specific extension.
    pub fn diagram_system(&self, dt: DiagramType) -> String {
        let params = BTreeMap::from([("max_elements".to_string(), self.max_elements.to_string())]);
        format!("{}\n{}", render(BASE, &params), diagram_extension(dt))
    }

    /// Base rule set plus the lint rules specific to `dt`.
    pub fn corrector_system(&self, dt: DiagramType) -> String {
        let mut out = format!("{CORRECTOR_BASE}\n# Rules for {dt} diagrams\n\n");
        let specific: Vec<_> = rules().iter().filter(|r| r.applies_to.is_some_and(|ts| ts.contains(&dt))).collect();
        if specific.is_empty() {
            out.push_str("- No additional rules.\n");
        }
        for r in specific {
            let fix = if r.correctable { "fix it" } else { "report it; it cannot be fixed mechanically" };
            out.push_str(&format!("- {}: {}.\n", r.description, fix));
        }
        out
    }

    pub fn system(&self, role: Role, dt: DiagramType) -> String {
        match role {
            Role::Planner => PLANNER.to_string(),
            Role::Analyzer => ANALYZER.to_string(),
            Role::Diagram => self.diagram_system(dt),
            Role::Corrector => self.corrector_system(dt),
            Role::DependencyAnalyzer => DEPENDENCY_ANALYZER.to_string(),
        }
    }

    pub fn task(&self, role: Role, params: &BTreeMap<String, String>) -> String {
        let template = match role {
            Role::Planner => TASK_PLANNER,
            Role::Analyzer => TASK_ANALYZER,
            Role::Diagram => TASK_DIAGRAM,
            Role::Corrector => TASK_CORRECTOR,
            Role::DependencyAnalyzer => TASK_DEPENDENCY,
        };
        render(template, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn missing_placeholders_drop_lines() {
        let t = "a {{x}}\nb {{y}}\nc\n";
        assert_eq!(render(t, &p(&[("x", "1")])), "a 1\nc\n");
    }

    #[test]
    fn diagram_prompt_has_base_and_extension() {
        let s = PromptSet::default().diagram_system(DiagramType::Activity);
        assert!(s.contains("software architecture expert"));
        assert!(s.contains("at most 40 elements"));
        assert!(s.contains("Write `elseif` as one word"));
        assert!(!s.contains("{{"));
    }

    #[test]
    fn corrector_prompt_is_type_specific() {
        let ps = PromptSet::default();
        let activity = ps.corrector_system(DiagramType::Activity);
        let deployment = ps.corrector_system(DiagramType::Deployment);
        assert!(activity.contains("continue"));
        assert!(!deployment.contains("continue"));
        assert!(deployment.contains("device"));
    }

    #[test]
    fn task_prompt_injects_optional_paths() {
        let ps = PromptSet::default();
        let single = ps.task(
            Role::Diagram,
            &p(&[("diagram_type", "component"), ("project", "shop"), ("view_path", "views/view_component.json"),
                 ("output_dir", "component"), ("output_path", "component/01_component.puml")]),
        );
        assert!(single.contains("IR view: views/view_component.json"));
        assert!(!single.contains("Scope:"));
        assert!(!single.contains("Enriched context"));
        let deep = ps.task(
            Role::Diagram,
            &p(&[("diagram_type", "class"), ("project", "shop"), ("view_path", "v"), ("scope", "Checkout"),
                 ("files", "repo/a.py"), ("context_path", "class/contexts/01_checkout.json"),
                 ("dependency_path", "deps/summary.md"), ("output_dir", "class"), ("output_path", "class/01_checkout.puml")]),
        );
        for needle in ["Scope: Checkout", "Enriched context: class/contexts/01_checkout.json", "Dependency context: deps/summary.md"] {
            assert!(deep.contains(needle), "{needle}");
        }
    }
}
