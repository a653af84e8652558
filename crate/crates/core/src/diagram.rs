use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The seven supported UML diagram types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagramType {
    Class,
    Sequence,
    Activity,
    Usecase,
    Component,
    Deployment,
    SystemContext,
}

/// Orchestration path a diagram type is routed through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// One generator session reading the compacted view directly.
    Single,
    /// Planner, per-scope analyzers, then per-scope generators.
    Deep,
}

impl DiagramType {
    pub const ALL: [DiagramType; 7] = [
        DiagramType::Class,
        DiagramType::Sequence,
        DiagramType::Activity,
        DiagramType::Usecase,
        DiagramType::Component,
        DiagramType::Deployment,
        DiagramType::SystemContext,
    ];

    pub fn route(self) -> Route {
        match self {
            DiagramType::Component | DiagramType::Deployment | DiagramType::SystemContext => {
                Route::Single
            }
            DiagramType::Class
            | DiagramType::Sequence
            | DiagramType::Activity
            | DiagramType::Usecase => Route::Deep,
        }
    }

    /// Behavioral views weight call chains when ranking functions.
    pub fn is_behavioral(self) -> bool {
        matches!(self, DiagramType::Sequence | DiagramType::Activity)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DiagramType::Class => "class",
            DiagramType::Sequence => "sequence",
            DiagramType::Activity => "activity",
            DiagramType::Usecase => "usecase",
            DiagramType::Component => "component",
            DiagramType::Deployment => "deployment",
            DiagramType::SystemContext => "system_context",
        }
    }
}

impl fmt::Display for DiagramType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown diagram type `{0}` (expected one of class, sequence, activity, usecase, component, deployment, system_context)")]
pub struct UnknownDiagramType(pub String);

impl FromStr for DiagramType {
    type Err = UnknownDiagramType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        let dt = match key.as_str() {
            "class" => DiagramType::Class,
            "sequence" => DiagramType::Sequence,
            "activity" => DiagramType::Activity,
            "usecase" | "use_case" => DiagramType::Usecase,
            "component" => DiagramType::Component,
            "deployment" => DiagramType::Deployment,
            "system_context" | "systemcontext" | "context" => DiagramType::SystemContext,
            _ => return Err(UnknownDiagramType(s.to_string())),
        };
        Ok(dt)
    }
}
