//! Pattern-based PlantUML analysis: element and relationship extraction
//! for the seven supported diagram types, and the lint/fix rule engine
//! whose pre-fix verdict defines diagram validity.

macro_rules! regex {
    ($pattern:expr) => {{
        static RE: std::sync::OnceLock<regex::Regex> = std::sync::OnceLock::new();
        RE.get_or_init(|| regex::Regex::new($pattern).expect("valid pattern"))
    }};
}

mod lint;
mod parse;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::diagram::DiagramType;

pub use lint::{
    apply_fixes, lint, lint_and_fix, lint_text, rules, FixKind, LintError, LintReport, LintRule, Verdict, Violation,
    PLACEHOLDER_NAMES,
};
pub use parse::parse_artifact;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub name: String,
    /// Declaring keyword (`class`, `participant`, `node`, ...), or the
    /// implied kind for shorthand forms such as `[X]` or `(X)`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alias: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stereotype: Option<String>,
    /// Enclosing container element, if declared inside one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default)]
    pub has_note: bool,
    /// 1-based line of the declaration.
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrowKind {
    Generalization,
    Realization,
    Composition,
    Aggregation,
    Dependency,
    Association,
    Message,
    Flow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relationship {
    pub source: String,
    pub target: String,
    pub kind: ArrowKind,
    /// Arrow as written.
    pub arrow: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Relationship {
    pub fn is_labeled(&self) -> bool {
        self.label.as_deref().is_some_and(|l| !l.trim().is_empty())
    }
}

/// Non-element features some structure checks need.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Markers {
    pub has_start: bool,
    pub has_stop: bool,
    pub ifs_opened: usize,
    pub ifs_closed: usize,
    pub activations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramArtifact {
    pub diagram_type: DiagramType,
    pub text: String,
    pub elements: Vec<Element>,
    pub relationships: Vec<Relationship>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    #[serde(default)]
    pub markers: Markers,
}

impl DiagramArtifact {
    pub fn element_names(&self) -> BTreeSet<&str> {
        self.elements.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name == name)
    }

    pub fn with_scope(mut self, scope: impl Into<String>) -> Self {
        self.scope = Some(scope.into());
        self
    }
}
