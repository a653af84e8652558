//! Importance-weighted, byte-bounded compaction of a normalized IR into a
//! diagram-specific view.
//!
//! Every element is scored, the elements are put in one fixed total order
//! (score descending, then name ascending), and the longest prefix whose
//! projection fits the byte budget is kept. The prefix length starts at
//! the full element count and is halved (rounding up) until the view fits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::diagram::{DiagramType, Route};
use crate::ir::{ClassDef, ClassKind, FunctionDef, ProjectIr, Visibility};

pub const SINGLE_BUDGET_BYTES: usize = 60 * 1024;
pub const DEEP_BUDGET_BYTES: usize = 100 * 1024;

/// Longest infrastructure summary carried into a deployment view.
pub const MAX_INFRA_SUMMARY_BYTES: usize = 1024;

/// Name fragments that mark a class as architecturally central.
pub const ARCHITECTURAL_PATTERNS: [&str; 9] = [
    "service",
    "controller",
    "manager",
    "orchestrator",
    "handler",
    "repository",
    "model",
    "agent",
    "factory",
];

/// Metadata key fragments recognized as infrastructure configuration.
pub const INFRA_KEY_PATTERNS: [&str; 6] = ["docker", "compose", "yaml", "config", "port", "image"];

pub fn byte_budget(dt: DiagramType) -> usize {
    match dt.route() {
        Route::Single => SINGLE_BUDGET_BYTES,
        Route::Deep => DEEP_BUDGET_BYTES,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ViewError {
    #[error("irreducible view: a single {diagram_type} element serializes to {bytes} bytes, budget is {budget}")]
    Irreducible { diagram_type: DiagramType, bytes: usize, budget: usize },
    #[error("view generation requires a normalized IR")]
    NotNormalized,
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreWeights {
    pub inheritance: f64,
    pub name: f64,
    pub call: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights { inheritance: 10.0, name: 15.0, call: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreComponents {
    pub member_weight: f64,
    pub inheritance_weight: f64,
    pub name_bonus: f64,
    pub call_chain_weight: f64,
}

impl ScoreComponents {
    pub fn total(&self) -> f64 {
        self.member_weight + self.inheritance_weight + self.name_bonus + self.call_chain_weight
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceScore {
    pub name: String,
    pub score: f64,
    pub components: ScoreComponents,
}

impl ImportanceScore {
    fn new(name: &str, components: ScoreComponents) -> Self {
        ImportanceScore { name: name.to_string(), score: components.total(), components }
    }
}

pub fn matches_architectural_pattern(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    ARCHITECTURAL_PATTERNS.iter().any(|p| lower.contains(p))
}

pub fn score_class(c: &ClassDef, dt: DiagramType) -> ImportanceScore {
    score_class_with(c, dt, &ScoreWeights::default())
}

pub fn score_class_with(c: &ClassDef, _dt: DiagramType, w: &ScoreWeights) -> ImportanceScore {
    let components = ScoreComponents {
        member_weight: (c.methods.len() + c.attributes.len()) as f64,
        inheritance_weight: if c.has_inheritance() { w.inheritance } else { 0.0 },
        name_bonus: if matches_architectural_pattern(&c.name) { w.name } else { 0.0 },
        call_chain_weight: 0.0,
    };
    ImportanceScore::new(&c.name, components)
}

pub fn score_function(f: &FunctionDef, dt: DiagramType) -> ImportanceScore {
    score_function_with(f, dt, &ScoreWeights::default())
}

/// Calls only count for the behavioral types, where call chains are what
/// the diagram shows.
pub fn score_function_with(f: &FunctionDef, dt: DiagramType, w: &ScoreWeights) -> ImportanceScore {
    let call_weight = if dt.is_behavioral() { w.call } else { 0.0 };
    let components = ScoreComponents {
        member_weight: f64::from(f.line_count),
        call_chain_weight: call_weight * f.calls.len() as f64,
        ..Default::default()
    };
    ImportanceScore::new(&f.name, components)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Class,
    Function,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Class => "class",
            ElementKind::Function => "function",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ElementRef<'a> {
    Class(&'a ClassDef),
    Function(&'a FunctionDef),
}

impl<'a> ElementRef<'a> {
    pub fn name(&self) -> &'a str {
        match self {
            ElementRef::Class(c) => &c.name,
            ElementRef::Function(f) => &f.name,
        }
    }

    pub fn kind(&self) -> ElementKind {
        match self {
            ElementRef::Class(_) => ElementKind::Class,
            ElementRef::Function(_) => ElementKind::Function,
        }
    }

    pub fn source_file(&self) -> &'a str {
        match self {
            ElementRef::Class(c) => &c.source_file,
            ElementRef::Function(f) => &f.source_file,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RankedElement<'a> {
    pub element: ElementRef<'a>,
    pub score: ImportanceScore,
}

/// Which IR entities compete for space in a view of type `dt`.
pub fn includes_functions(dt: DiagramType) -> bool {
    !matches!(dt, DiagramType::Class | DiagramType::Component | DiagramType::SystemContext)
}

/// Whether a retained element gets its own record in a view of type `dt`.
/// System-context views list public classes only.
pub fn is_represented(dt: DiagramType, e: ElementRef<'_>) -> bool {
    match (dt, e) {
        (DiagramType::SystemContext, ElementRef::Class(c)) => c.visibility == Visibility::Public,
        (DiagramType::Class | DiagramType::Component | DiagramType::SystemContext, ElementRef::Function(_)) => false,
        _ => true,
    }
}

/// Every candidate element of `ir` for `dt`, in the view's total order.
pub fn rank_elements<'a>(ir: &'a ProjectIr, dt: DiagramType, w: &ScoreWeights) -> Vec<RankedElement<'a>> {
    let mut ranked: Vec<(usize, RankedElement<'a>)> = ir
        .classes
        .iter()
        .map(|c| RankedElement { element: ElementRef::Class(c), score: score_class_with(c, dt, w) })
        .collect::<Vec<_>>()
        .into_iter()
        .enumerate()
        .collect();
    if includes_functions(dt) {
        let offset = ranked.len();
        ranked.extend(ir.functions.iter().enumerate().map(|(i, f)| {
            (offset + i, RankedElement { element: ElementRef::Function(f), score: score_function_with(f, dt, w) })
        }));
    }
    ranked.sort_by(|(ia, a), (ib, b)| {
        b.score
            .score
            .total_cmp(&a.score.score)
            .then_with(|| a.element.name().cmp(b.element.name()))
            .then_with(|| a.element.kind().cmp(&b.element.kind()))
            .then_with(|| ia.cmp(ib))
    });
    ranked.into_iter().map(|(_, r)| r).collect()
}

/// The top `budget` elements by (score desc, name asc).
pub fn select_elements<'a>(ir: &'a ProjectIr, dt: DiagramType, budget: usize) -> Vec<RankedElement<'a>> {
    let mut ranked = rank_elements(ir, dt, &ScoreWeights::default());
    ranked.truncate(budget);
    ranked
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetailCaps {
    pub max_attributes: usize,
    pub max_methods: usize,
}

/// Per-class member caps, tightening as the project grows.
pub fn scale_detail(element_count: usize) -> DetailCaps {
    let n = match element_count {
        0..=49 => 20,
        50..=199 => 12,
        200..=999 => 8,
        _ => 5,
    };
    DetailCaps { max_attributes: n, max_methods: n }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parameters: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub returns: Option<String>,
    pub visibility: Visibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSummary {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_annotation: Option<String>,
    pub visibility: Visibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub attributes: Vec<AttributeSummary>,
    pub extends: Vec<String>,
    pub implements: Vec<String>,
    pub kind: ClassKind,
    pub methods: Vec<MethodSummary>,
    pub name: String,
    pub omitted_attributes: usize,
    pub omitted_methods: usize,
    pub visibility: Visibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallSite {
    pub calls: Vec<String>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorRecord {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub calls: Vec<String>,
    pub element: ElementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lines: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<CallSite>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UseCaseRecord {
    pub element: ElementKind,
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub public_methods: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentMember {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extends: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub implements: Vec<String>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentGroup {
    pub directory: String,
    pub members: Vec<ComponentMember>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfraRecord {
    pub key: String,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectoryRecord {
    pub elements: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextRecord {
    pub external_calls: Vec<String>,
    pub name: String,
}

/// One projected entry of a view. The set of variants a view contains is
/// fixed by its diagram type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum ViewRecord {
    Class(ClassRecord),
    Behavior(BehaviorRecord),
    UseCase(UseCaseRecord),
    ComponentGroup(ComponentGroup),
    Infrastructure(InfraRecord),
    Directory(DirectoryRecord),
    Context(ContextRecord),
}

impl ViewRecord {
    /// IR entity names this record stands for.
    pub fn element_names(&self) -> Vec<&str> {
        match self {
            ViewRecord::Class(r) => vec![&r.name],
            ViewRecord::Behavior(r) => vec![&r.name],
            ViewRecord::UseCase(r) => vec![&r.name],
            ViewRecord::ComponentGroup(g) => g.members.iter().map(|m| m.name.as_str()).collect(),
            ViewRecord::Context(r) => vec![&r.name],
            ViewRecord::Infrastructure(_) | ViewRecord::Directory(_) => Vec::new(),
        }
    }

    /// Every identifier the record mentions, for provenance checks.
    pub fn mentioned_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        match self {
            ViewRecord::Class(r) => {
                out.push(&r.name);
                out.extend(r.extends.iter().chain(&r.implements).map(String::as_str));
                out.extend(r.methods.iter().map(|m| m.name.as_str()));
                out.extend(r.methods.iter().flat_map(|m| m.parameters.iter().map(String::as_str)));
                out.extend(r.attributes.iter().map(|a| a.name.as_str()));
            }
            ViewRecord::Behavior(r) => {
                out.push(&r.name);
                out.extend(r.calls.iter().map(String::as_str));
                for m in &r.methods {
                    out.push(&m.name);
                    out.extend(m.calls.iter().map(String::as_str));
                }
            }
            ViewRecord::UseCase(r) => {
                out.push(&r.name);
                out.extend(r.public_methods.iter().map(String::as_str));
            }
            ViewRecord::ComponentGroup(g) => {
                for m in &g.members {
                    out.push(&m.name);
                    out.extend(m.extends.iter().chain(&m.implements).map(String::as_str));
                }
            }
            ViewRecord::Context(r) => {
                out.push(&r.name);
                out.extend(r.external_calls.iter().map(String::as_str));
            }
            ViewRecord::Infrastructure(_) | ViewRecord::Directory(_) => {}
        }
        out
    }
}

fn capped<T: Clone>(items: &[T], cap: usize) -> Vec<T> {
    items.iter().take(cap).cloned().collect()
}

fn source_dir(path: &str) -> &str {
    match path.rfind('/') {
        Some(i) if i > 0 => &path[..i],
        _ => ".",
    }
}

fn top_level_dir(path: &str) -> &str {
    match path.find('/') {
        Some(i) if i > 0 => &path[..i],
        _ => ".",
    }
}

fn truncate_utf8(s: &str, max: usize) -> &str {
    if s.len() <= max {
        return s;
    }
    let mut end = max;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    &s[..end]
}

pub fn is_infra_key(key: &str) -> bool {
    let lower = key.to_ascii_lowercase();
    INFRA_KEY_PATTERNS.iter().any(|p| lower.contains(p))
}

fn class_record(c: &ClassDef, caps: DetailCaps) -> ClassRecord {
    let methods = c
        .methods
        .iter()
        .take(caps.max_methods)
        .map(|m| MethodSummary {
            name: m.name.clone(),
            parameters: m.parameters.iter().take(caps.max_attributes).map(|p| p.name.clone()).collect(),
            returns: m.type_annotation.clone(),
            visibility: m.visibility.clone(),
        })
        .collect();
    let attributes = c
        .attributes
        .iter()
        .take(caps.max_attributes)
        .map(|a| AttributeSummary {
            name: a.name.clone(),
            type_annotation: a.type_annotation.clone(),
            visibility: a.visibility.clone(),
        })
        .collect();
    ClassRecord {
        attributes,
        extends: c.extends.clone(),
        implements: c.implements.clone(),
        kind: c.kind,
        methods,
        name: c.name.clone(),
        omitted_attributes: c.attributes.len().saturating_sub(caps.max_attributes),
        omitted_methods: c.methods.len().saturating_sub(caps.max_methods),
        visibility: c.visibility.clone(),
    }
}

fn behavior_record(e: ElementRef<'_>, caps: DetailCaps) -> BehaviorRecord {
    match e {
        ElementRef::Class(c) => BehaviorRecord {
            calls: Vec::new(),
            element: ElementKind::Class,
            lines: None,
            methods: c
                .methods
                .iter()
                .take(caps.max_methods)
                .map(|m| CallSite { calls: capped(&m.calls, caps.max_methods), name: m.name.clone() })
                .collect(),
            name: c.name.clone(),
        },
        ElementRef::Function(f) => BehaviorRecord {
            calls: capped(&f.calls, caps.max_methods),
            element: ElementKind::Function,
            lines: Some(f.line_count),
            methods: Vec::new(),
            name: f.name.clone(),
        },
    }
}

fn usecase_record(e: ElementRef<'_>, caps: DetailCaps) -> UseCaseRecord {
    let public_methods = match e {
        ElementRef::Class(c) => c
            .methods
            .iter()
            .filter(|m| m.visibility == Visibility::Public)
            .take(caps.max_methods)
            .map(|m| m.name.clone())
            .collect(),
        ElementRef::Function(_) => Vec::new(),
    };
    UseCaseRecord { element: e.kind(), name: e.name().to_string(), public_methods }
}

/// Names an IR defines: classes, free functions and methods.
fn defined_names(ir: &ProjectIr) -> BTreeSet<&str> {
    let mut names: BTreeSet<&str> = ir.element_names().collect();
    for c in &ir.classes {
        names.extend(c.methods.iter().map(|m| m.name.as_str()));
    }
    names
}

fn infra_entries(ir: &ProjectIr) -> impl Iterator<Item = (&String, &String)> {
    ir.metadata.iter().filter(|(k, _)| is_infra_key(k))
}

/// Projects `elements` (already in view order) onto the fields kept for
/// `dt`. Deployment views also list up to `elements.len()` infrastructure
/// metadata entries, in key order.
pub fn project(elements: &[RankedElement<'_>], ir: &ProjectIr, dt: DiagramType, caps: DetailCaps) -> Vec<ViewRecord> {
    project_with_limit(elements, ir, dt, caps, elements.len())
}

fn project_with_limit(
    elements: &[RankedElement<'_>],
    ir: &ProjectIr,
    dt: DiagramType,
    caps: DetailCaps,
    infra_limit: usize,
) -> Vec<ViewRecord> {
    match dt {
        DiagramType::Component => {
            let mut groups: BTreeMap<&str, Vec<ComponentMember>> = BTreeMap::new();
            for r in elements {
                if let ElementRef::Class(c) = r.element {
                    groups.entry(source_dir(&c.source_file)).or_default().push(ComponentMember {
                        extends: c.extends.clone(),
                        implements: c.implements.clone(),
                        name: c.name.clone(),
                    });
                }
            }
            groups
                .into_iter()
                .map(|(dir, members)| ViewRecord::ComponentGroup(ComponentGroup { directory: dir.to_string(), members }))
                .collect()
        }
        DiagramType::Deployment => {
            let mut out: Vec<ViewRecord> = infra_entries(ir)
                .take(infra_limit)
                .map(|(k, v)| {
                    ViewRecord::Infrastructure(InfraRecord {
                        key: k.clone(),
                        summary: truncate_utf8(v, MAX_INFRA_SUMMARY_BYTES).to_string(),
                    })
                })
                .collect();
            let mut dirs: BTreeMap<&str, usize> = BTreeMap::new();
            for r in elements {
                *dirs.entry(top_level_dir(r.element.source_file())).or_default() += 1;
            }
            out.extend(
                dirs.into_iter()
                    .map(|(name, elements)| ViewRecord::Directory(DirectoryRecord { elements, name: name.to_string() })),
            );
            out
        }
        _ => {
            let p = RecordProjector::new(ir, dt, caps);
            elements.iter().filter_map(|r| p.record(r.element)).collect()
        }
    }
}

/// Projection for the diagram types whose records map one-to-one onto
/// retained elements.
struct RecordProjector<'a> {
    dt: DiagramType,
    caps: DetailCaps,
    defined: BTreeSet<&'a str>,
}

impl<'a> RecordProjector<'a> {
    fn new(ir: &'a ProjectIr, dt: DiagramType, caps: DetailCaps) -> Self {
        let defined = if dt == DiagramType::SystemContext { defined_names(ir) } else { BTreeSet::new() };
        RecordProjector { dt, caps, defined }
    }

    fn is_per_element(dt: DiagramType) -> bool {
        !matches!(dt, DiagramType::Component | DiagramType::Deployment)
    }

    fn record(&self, e: ElementRef<'_>) -> Option<ViewRecord> {
        let caps = self.caps;
        match self.dt {
            DiagramType::Class => match e {
                ElementRef::Class(c) => Some(ViewRecord::Class(class_record(c, caps))),
                ElementRef::Function(_) => None,
            },
            DiagramType::Sequence | DiagramType::Activity => Some(ViewRecord::Behavior(behavior_record(e, caps))),
            DiagramType::Usecase => Some(ViewRecord::UseCase(usecase_record(e, caps))),
            DiagramType::SystemContext => match e {
                ElementRef::Class(c) if c.visibility == Visibility::Public => {
                    let mut external: Vec<String> = Vec::new();
                    for call in c.methods.iter().flat_map(|m| &m.calls) {
                        if external.len() >= caps.max_methods {
                            break;
                        }
                        if !self.defined.contains(call.as_str()) && !external.contains(call) {
                            external.push(call.clone());
                        }
                    }
                    Some(ViewRecord::Context(ContextRecord { external_calls: external, name: c.name.clone() }))
                }
                _ => None,
            },
            DiagramType::Component | DiagramType::Deployment => None,
        }
    }
}

/// Smallest prefix length of `ranked` whose records alone exceed `limit`
/// bytes, or `None` if every prefix fits. Views built from at least that
/// many elements cannot fit and need not be encoded.
fn overflow_prefix(ranked: &[RankedElement<'_>], ir: &ProjectIr, dt: DiagramType, caps: DetailCaps, limit: usize) -> Option<usize> {
    if !RecordProjector::is_per_element(dt) {
        return None;
    }
    let p = RecordProjector::new(ir, dt, caps);
    let mut total = 0usize;
    for (i, r) in ranked.iter().enumerate() {
        if let Some(record) = p.record(r.element) {
            total += canonical::encoded_len(&record) + 1;
            if total > limit {
                return Some(i + 1);
            }
        }
    }
    None
}

/// A compacted, diagram-specific projection of one IR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrView {
    /// Exact length of this view's canonical encoding, this field included.
    pub byte_size: usize,
    pub detail_caps: DetailCaps,
    pub diagram_type: DiagramType,
    /// Number of ranked elements the projection was built from.
    pub element_budget: usize,
    pub elements: Vec<ViewRecord>,
    pub project_name: String,
    pub shrink_iterations: u32,
    pub source_element_count: usize,
}

impl IrView {
    pub fn to_canonical_json(&self) -> Vec<u8> {
        canonical::to_vec(self)
    }

    pub fn from_json(bytes: &[u8]) -> serde_json::Result<IrView> {
        serde_json::from_slice(bytes)
    }

    pub fn file_name(dt: DiagramType) -> String {
        format!("view_{dt}.json")
    }

    /// Writes `view_<type>.json` into `dir` and returns its path.
    pub fn write_to_dir(&self, dir: &Path) -> io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(Self::file_name(self.diagram_type));
        std::fs::write(&path, self.to_canonical_json())?;
        Ok(path)
    }

    /// Entity names retained by the view, in record order.
    pub fn element_names(&self) -> Vec<&str> {
        self.elements.iter().flat_map(ViewRecord::element_names).collect()
    }

    /// Sets `byte_size` to the exact encoded length. The number's own width
    /// is part of the length, so the value is found as a fixed point.
    fn seal(mut self) -> Self {
        self.byte_size = 0;
        let base = canonical::encoded_len(&self) - 1;
        let mut size = base + 1;
        loop {
            let next = base + decimal_width(size);
            if next == size {
                break;
            }
            size = next;
        }
        self.byte_size = size;
        self
    }
}

fn decimal_width(n: usize) -> usize {
    n.checked_ilog10().map_or(1, |d| d as usize + 1)
}

#[derive(Debug, Clone)]
pub struct ViewOptions {
    pub weights: ScoreWeights,
    pub single_budget: usize,
    pub deep_budget: usize,
}

impl Default for ViewOptions {
    fn default() -> Self {
        ViewOptions { weights: ScoreWeights::default(), single_budget: SINGLE_BUDGET_BYTES, deep_budget: DEEP_BUDGET_BYTES }
    }
}

impl ViewOptions {
    pub fn budget(&self, dt: DiagramType) -> usize {
        match dt.route() {
            Route::Single => self.single_budget,
            Route::Deep => self.deep_budget,
        }
    }
}

pub fn generate_view(ir: &ProjectIr, dt: DiagramType) -> Result<IrView, ViewError> {
    generate_view_with(ir, dt, &ViewOptions::default())
}

/// Halves the element budget (rounding up) until the projected view fits
/// the byte budget for `dt`. Fails if a single element is already too large.
pub fn generate_view_with(ir: &ProjectIr, dt: DiagramType, opts: &ViewOptions) -> Result<IrView, ViewError> {
    if !ir.normalized {
        return Err(ViewError::NotNormalized);
    }
    let ranked = rank_elements(ir, dt, &opts.weights);
    let caps = scale_detail(ir.element_count());
    let limit = opts.budget(dt);
    let mut budget = if dt == DiagramType::Deployment {
        ranked.len().max(infra_entries(ir).count())
    } else {
        ranked.len()
    };
    let mut iterations = 0u32;
    let overflow = overflow_prefix(&ranked, ir, dt, caps, limit);
    loop {
        let take = budget.min(ranked.len());
        if overflow.is_some_and(|n| take >= n) && budget > 1 {
            budget = budget.div_ceil(2);
            iterations += 1;
            continue;
        }
        let view = IrView {
            byte_size: 0,
            detail_caps: caps,
            diagram_type: dt,
            element_budget: budget,
            elements: project_with_limit(&ranked[..take], ir, dt, caps, budget),
            project_name: ir.project_name.clone(),
            shrink_iterations: iterations,
            source_element_count: ir.element_count(),
        }
        .seal();
        if view.byte_size <= limit {
            return Ok(view);
        }
        if budget <= 1 {
            return Err(ViewError::Irreducible { diagram_type: dt, bytes: view.byte_size, budget: limit });
        }
        budget = budget.div_ceil(2);
        iterations += 1;
    }
}

/// One row of the `--explain` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplainRow {
    pub rank: usize,
    pub name: String,
    pub element_kind: ElementKind,
    pub score: f64,
    pub member_weight: f64,
    pub inheritance_weight: f64,
    pub name_bonus: f64,
    pub call_chain_weight: f64,
    pub retained: bool,
}

/// Ranked score table behind `view`, one row per candidate element.
pub fn explain(ir: &ProjectIr, view: &IrView, opts: &ViewOptions) -> Vec<ExplainRow> {
    let ranked = rank_elements(ir, view.diagram_type, &opts.weights);
    ranked
        .into_iter()
        .enumerate()
        .map(|(i, r)| ExplainRow {
            rank: i + 1,
            name: r.element.name().to_string(),
            element_kind: r.element.kind(),
            score: r.score.score,
            member_weight: r.score.components.member_weight,
            inheritance_weight: r.score.components.inheritance_weight,
            name_bonus: r.score.components.name_bonus,
            call_chain_weight: r.score.components.call_chain_weight,
            retained: i < view.element_budget,
        })
        .collect()
}

pub fn write_explain_csv<W: io::Write>(rows: &[ExplainRow], out: W) -> Result<(), ViewError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
