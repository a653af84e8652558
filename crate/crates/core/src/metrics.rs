//! Automated diagram metrics: entity recall, relationship precision,
//! syntactic validity, the five quality sub-scores with their composite,
//! and the structural complexity index.

use std::collections::{BTreeMap, BTreeSet};
use std::io;

use serde::{Deserialize, Serialize};

use crate::diagram::DiagramType;
use crate::puml::{ArrowKind, DiagramArtifact, LintReport, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("validity rate of an empty batch is undefined")]
    EmptyBatch,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Tunable constants behind the quality sub-scores.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsConfig {
    /// Best-practice relationship-to-element ratio per diagram type.
    pub density_bands: BTreeMap<DiagramType, (f64, f64)>,
    /// Words a name needs to count as self-documenting.
    pub min_name_words: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        let density_bands = BTreeMap::from([
            (DiagramType::Class, (0.5, 1.5)),
            (DiagramType::Sequence, (2.0, 8.0)),
            (DiagramType::Activity, (0.8, 1.5)),
            (DiagramType::Component, (1.0, 3.0)),
            (DiagramType::Deployment, (0.5, 1.5)),
            (DiagramType::Usecase, (0.8, 1.5)),
            (DiagramType::SystemContext, (0.7, 1.5)),
        ]);
        MetricsConfig { density_bands, min_name_words: 2 }
    }
}

/// Structural Complexity Index, `E * log2(1 + 2R/E)`.
pub fn sci(elements: f64, relationships: f64) -> f64 {
    if elements <= 0.0 {
        return 0.0;
    }
    elements * (1.0 + 2.0 * relationships / elements).log2()
}

/// One generated diagram (after any correction) with the lint report of
/// its pre-correction text.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDiagram {
    pub artifact: DiagramArtifact,
    pub report: LintReport,
}

/// Every diagram generated for one (project, diagram type) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub project: String,
    /// Language label of the project, used for grouping.
    pub language: String,
    pub diagram_type: DiagramType,
    /// One name per IR entity.
    pub ir_entities: Vec<String>,
    pub diagrams: Vec<ScoredDiagram>,
}

impl Observation {
    pub fn ir_entity_count(&self) -> usize {
        self.ir_entities.len()
    }

    pub fn diagram_elements(&self) -> BTreeSet<&str> {
        self.diagrams.iter().flat_map(|d| d.artifact.elements.iter().map(|e| e.name.as_str())).collect()
    }

    /// IR entity names that appear in at least one diagram.
    pub fn captured(&self) -> BTreeSet<&str> {
        let seen = self.diagram_elements();
        self.ir_entities.iter().map(String::as_str).filter(|n| seen.contains(n)).collect()
    }

    pub fn relationships(&self) -> impl Iterator<Item = &crate::puml::Relationship> {
        self.diagrams.iter().flat_map(|d| d.artifact.relationships.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recall {
    pub value: f64,
    /// Set when the IR had no entities and the value is a placeholder 0.
    pub empty_ir: bool,
}

/// Fraction of IR entities named (exact, case-sensitive) by some diagram.
/// Not defined for system-context diagrams, which show the system from
/// outside.
pub fn entity_recall(obs: &Observation) -> Option<Recall> {
    if obs.diagram_type == DiagramType::SystemContext {
        return None;
    }
    if obs.ir_entities.is_empty() {
        return Some(Recall { value: 0.0, empty_ir: true });
    }
    let seen = obs.diagram_elements();
    let hits = obs.ir_entities.iter().filter(|n| seen.contains(n.as_str())).count();
    Some(Recall { value: hits as f64 / obs.ir_entities.len() as f64, empty_ir: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Precision {
    pub value: f64,
    /// No relationships at all; `value` is 1 by convention.
    pub vacuous: bool,
}

/// Fraction of relationships whose endpoints are both declared, in the IR
/// or in any of the observation's diagrams. Not defined for activity
/// diagrams, whose edges connect actions rather than entities.
pub fn relationship_precision(obs: &Observation) -> Option<Precision> {
    if obs.diagram_type == DiagramType::Activity {
        return None;
    }
    let mut declared = obs.diagram_elements();
    declared.extend(obs.ir_entities.iter().map(String::as_str));
    let (mut total, mut valid) = (0usize, 0usize);
    for r in obs.relationships() {
        total += 1;
        if declared.contains(r.source.as_str()) && declared.contains(r.target.as_str()) {
            valid += 1;
        }
    }
    if total == 0 {
        return Some(Precision { value: 1.0, vacuous: true });
    }
    Some(Precision { value: valid as f64 / total as f64, vacuous: false })
}

/// Percentage of diagrams whose pre-correction text linted clean.
pub fn validity_rate<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> Result<f64, MetricsError> {
    let (mut total, mut valid) = (0usize, 0usize);
    for v in verdicts {
        total += 1;
        if *v == Verdict::Valid {
            valid += 1;
        }
    }
    if total == 0 {
        return Err(MetricsError::EmptyBatch);
    }
    Ok(100.0 * valid as f64 / total as f64)
}

/// Validity over every diagram of every observation in `batch`.
pub fn batch_validity_rate(batch: &[Observation]) -> Result<f64, MetricsError> {
    validity_rate(batch.iter().flat_map(|o| o.diagrams.iter().map(|d| &d.report.verdict)))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QualitySubscores {
    pub density: f64,
    pub connectivity: f64,
    pub labeling: f64,
    pub documentation: f64,
    pub structure: f64,
}

impl QualitySubscores {
    pub fn as_array(&self) -> [f64; 5] {
        [self.density, self.connectivity, self.labeling, self.documentation, self.structure]
    }
}

/// Composite quality: the unweighted mean of the five sub-scores.
pub fn quality_score(s: &QualitySubscores) -> f64 {
    s.as_array().iter().sum::<f64>() / 5.0
}

pub fn density_score(elements: usize, relationships: usize, band: (f64, f64)) -> f64 {
    if elements == 0 {
        return 0.0;
    }
    let rho = relationships as f64 / elements as f64;
    let (lo, hi) = band;
    let distance = if rho < lo {
        lo - rho
    } else if rho > hi {
        rho - hi
    } else {
        return 100.0;
    };
    100.0 * (1.0 - distance / (hi - lo)).max(0.0)
}

/// Splits on `_`, `-`, whitespace, dots and camel-case humps.
pub fn name_words(name: &str) -> Vec<String> {
    let mut words = Vec::new();
    for chunk in name.split(|c: char| c == '_' || c == '-' || c == '.' || c.is_whitespace()) {
        let chars: Vec<char> = chunk.chars().collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let boundary = i > 0 && c.is_uppercase() && {
                let prev = chars[i - 1];
                let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
                prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower)
            };
            if boundary && !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            current.push(c);
        }
        if !current.is_empty() {
            words.push(current);
        }
    }
    words
}

fn connected_names(a: &DiagramArtifact) -> BTreeSet<&str> {
    a.relationships.iter().flat_map(|r| [r.source.as_str(), r.target.as_str()]).collect()
}

fn is_actor_kind(kind: &str) -> bool {
    matches!(kind, "actor" | "person" | "person_ext")
}

fn is_external(e: &crate::puml::Element) -> bool {
    e.kind.ends_with("_ext")
        || e.stereotype.as_deref().is_some_and(|s| s.to_ascii_lowercase().contains("ext"))
}

fn checklist(items: &[bool]) -> f64 {
    if items.is_empty() {
        return 0.0;
    }
    100.0 * items.iter().filter(|&&b| b).count() as f64 / items.len() as f64
}

/// Type-specific structural checklist, each item weighted equally.
pub fn structure_score(a: &DiagramArtifact) -> f64 {
    if a.elements.is_empty() {
        return 0.0;
    }
    let names = a.element_names();
    let connected = connected_names(a);
    let items: Vec<bool> = match a.diagram_type {
        DiagramType::Activity => vec![
            a.markers.has_start,
            a.markers.has_stop,
            a.markers.ifs_opened == a.markers.ifs_closed,
        ],
        DiagramType::Sequence => vec![
            a.relationships
                .iter()
                .all(|r| names.contains(r.source.as_str()) && names.contains(r.target.as_str())),
            a.markers.activations > 0,
        ],
        DiagramType::Class => vec![
            a.relationships.iter().any(|r| {
                matches!(r.kind, ArrowKind::Generalization | ArrowKind::Realization | ArrowKind::Composition)
            }),
            a.elements.iter().filter(|e| e.kind == "interface").all(|e| connected.contains(e.name.as_str())),
        ],
        DiagramType::Component => vec![a.elements.iter().all(|e| connected.contains(e.name.as_str()))],
        DiagramType::Deployment => vec![
            a.elements.iter().any(|e| e.parent.as_deref().is_some_and(|p| names.contains(p))),
            a.elements.iter().filter(|e| e.kind == "node").all(|e| e.stereotype.is_some()),
        ],
        DiagramType::Usecase => {
            let actors: BTreeSet<&str> =
                a.elements.iter().filter(|e| is_actor_kind(&e.kind)).map(|e| e.name.as_str()).collect();
            let linked = |uc: &str| {
                a.relationships.iter().any(|r| {
                    (r.source == uc && actors.contains(r.target.as_str()))
                        || (r.target == uc && actors.contains(r.source.as_str()))
                })
            };
            vec![
                !actors.is_empty(),
                a.elements.iter().filter(|e| e.kind == "usecase").all(|e| linked(&e.name)),
            ]
        }
        DiagramType::SystemContext => {
            let internal: Vec<_> =
                a.elements.iter().filter(|e| !is_actor_kind(&e.kind) && !is_external(e)).collect();
            let marked: Vec<_> = internal
                .iter()
                .filter(|e| {
                    e.kind == "system"
                        || e.stereotype.as_deref().is_some_and(|s| s.to_ascii_lowercase().contains("system"))
                })
                .collect();
            let centers = if marked.is_empty() { internal.len() } else { marked.len() };
            let external_actor = a.elements.iter().any(|e| is_actor_kind(&e.kind) || is_external(e));
            vec![centers == 1, external_actor]
        }
    };
    checklist(&items)
}

pub fn quality_subscores(a: &DiagramArtifact) -> QualitySubscores {
    quality_subscores_with(a, &MetricsConfig::default())
}

pub fn quality_subscores_with(a: &DiagramArtifact, cfg: &MetricsConfig) -> QualitySubscores {
    let e = a.elements.len();
    let r = a.relationships.len();
    let band = cfg.density_bands.get(&a.diagram_type).copied().unwrap_or((0.5, 1.5));
    let connected = connected_names(a);
    let pct = |num: usize, den: usize| if den == 0 { 0.0 } else { 100.0 * num as f64 / den as f64 };
    QualitySubscores {
        density: density_score(e, r, band),
        connectivity: pct(a.elements.iter().filter(|el| connected.contains(el.name.as_str())).count(), e),
        labeling: pct(a.relationships.iter().filter(|rel| rel.is_labeled()).count(), r),
        documentation: pct(
            a.elements
                .iter()
                .filter(|el| el.has_note || name_words(&el.name).len() >= cfg.min_name_words)
                .count(),
            e,
        ),
        structure: structure_score(a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationClass {
    NoCorrection,
    PartiallyCorrected,
    Uncorrectable,
}

impl AblationClass {
    pub fn as_str(self) -> &'static str {
        match self {
            AblationClass::NoCorrection => "no_correction",
            AblationClass::PartiallyCorrected => "partially_corrected",
            AblationClass::Uncorrectable => "uncorrectable",
        }
    }
}

/// An observation with no diagrams produced nothing usable and counts as
/// uncorrectable.
pub fn classify_observation(obs: &Observation) -> AblationClass {
    let verdicts: Vec<Verdict> = obs.diagrams.iter().map(|d| d.report.verdict).collect();
    if verdicts.is_empty() || verdicts.contains(&Verdict::Uncorrectable) {
        AblationClass::Uncorrectable
    } else if verdicts.iter().all(|v| *v == Verdict::Valid) {
        AblationClass::NoCorrection
    } else {
        AblationClass::PartiallyCorrected
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AblationCounts {
    pub no_correction: usize,
    pub partially_corrected: usize,
    pub uncorrectable: usize,
}

impl AblationCounts {
    pub fn total(&self) -> usize {
        self.no_correction + self.partially_corrected + self.uncorrectable
    }

    fn add(&mut self, class: AblationClass) {
        match class {
            AblationClass::NoCorrection => self.no_correction += 1,
            AblationClass::PartiallyCorrected => self.partially_corrected += 1,
            AblationClass::Uncorrectable => self.uncorrectable += 1,
        }
    }
}

pub fn ablation_classify(batch: &[Observation]) -> AblationCounts {
    let mut counts = AblationCounts::default();
    for obs in batch {
        counts.add(classify_observation(obs));
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quality {
    pub q: f64,
    pub density: f64,
    pub connectivity: f64,
    pub labeling: f64,
    pub documentation: f64,
    pub structure: f64,
}

impl Quality {
    fn from_subscores(s: &QualitySubscores) -> Self {
        Quality {
            q: quality_score(s),
            density: s.density,
            connectivity: s.connectivity,
            labeling: s.labeling,
            documentation: s.documentation,
            structure: s.structure,
        }
    }
}

/// Scores for one observation. Per-diagram quantities (quality, SCI,
/// element and relationship counts) are means over its diagrams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub project: String,
    pub language: String,
    pub diagram_type: DiagramType,
    pub diagram_count: usize,
    pub ir_entity_count: usize,
    pub entity_recall: Option<f64>,
    pub recall_empty_ir: bool,
    pub relationship_precision: Option<f64>,
    pub precision_vacuous: bool,
    pub validity_rate: f64,
    pub quality: Quality,
    pub sci: f64,
    pub mean_elements: f64,
    pub mean_relationships: f64,
    pub ablation: AblationClass,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn score_observation(obs: &Observation) -> MetricsReport {
    score_observation_with(obs, &MetricsConfig::default())
}

pub fn score_observation_with(obs: &Observation, cfg: &MetricsConfig) -> MetricsReport {
    let recall = entity_recall(obs);
    let precision = relationship_precision(obs);
    let subscores: Vec<QualitySubscores> =
        obs.diagrams.iter().map(|d| quality_subscores_with(&d.artifact, cfg)).collect();
    let avg = QualitySubscores {
        density: mean(subscores.iter().map(|s| s.density)),
        connectivity: mean(subscores.iter().map(|s| s.connectivity)),
        labeling: mean(subscores.iter().map(|s| s.labeling)),
        documentation: mean(subscores.iter().map(|s| s.documentation)),
        structure: mean(subscores.iter().map(|s| s.structure)),
    };
    let counts: Vec<(f64, f64)> = obs
        .diagrams
        .iter()
        .map(|d| (d.artifact.elements.len() as f64, d.artifact.relationships.len() as f64))
        .collect();
    MetricsReport {
        project: obs.project.clone(),
        language: obs.language.clone(),
        diagram_type: obs.diagram_type,
        diagram_count: obs.diagrams.len(),
        ir_entity_count: obs.ir_entity_count(),
        entity_recall: recall.map(|r| r.value),
        recall_empty_ir: recall.is_some_and(|r| r.empty_ir),
        relationship_precision: precision.map(|p| p.value),
        precision_vacuous: precision.is_some_and(|p| p.vacuous),
        validity_rate: validity_rate(obs.diagrams.iter().map(|d| &d.report.verdict)).unwrap_or(0.0),
        quality: Quality::from_subscores(&avg),
        sci: mean(counts.iter().map(|&(e, r)| sci(e, r))),
        mean_elements: mean(counts.iter().map(|c| c.0)),
        mean_relationships: mean(counts.iter().map(|c| c.1)),
        ablation: classify_observation(obs),
    }
}

/// One aggregated row of a batch table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: String,
    pub observations: usize,
    pub validity_pct: Option<f64>,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub quality: f64,
    pub density: f64,
    pub connectivity: f64,
    pub labeling: f64,
    pub documentation: f64,
    pub structure: f64,
    #[serde(rename = "mean_E")]
    pub mean_e: f64,
    #[serde(rename = "mean_R")]
    pub mean_r: f64,
    pub sci: f64,
    /// Population standard deviation of per-observation SCI.
    pub sci_std: f64,
    pub mean_ir_entities: f64,
}

fn mean_opt(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.into_iter().flatten().collect();
    (!present.is_empty()).then(|| mean(present))
}

fn summarize(group: String, reports: &[&MetricsReport]) -> SummaryRow {
    let total: usize = reports.iter().map(|r| r.diagram_count).sum();
    let valid: f64 = reports.iter().map(|r| r.validity_rate / 100.0 * r.diagram_count as f64).sum();
    SummaryRow {
        group,
        observations: reports.len(),
        validity_pct: (total > 0).then(|| 100.0 * valid.round() / total as f64),
        recall: mean_opt(reports.iter().map(|r| r.entity_recall)),
        precision: mean_opt(reports.iter().map(|r| r.relationship_precision)),
        quality: mean(reports.iter().map(|r| r.quality.q)),
        density: mean(reports.iter().map(|r| r.quality.density)),
        connectivity: mean(reports.iter().map(|r| r.quality.connectivity)),
        labeling: mean(reports.iter().map(|r| r.quality.labeling)),
        documentation: mean(reports.iter().map(|r| r.quality.documentation)),
        structure: mean(reports.iter().map(|r| r.quality.structure)),
        mean_e: mean(reports.iter().map(|r| r.mean_elements)),
        mean_r: mean(reports.iter().map(|r| r.mean_relationships)),
        sci: mean(reports.iter().map(|r| r.sci)),
        sci_std: std_dev(reports.iter().map(|r| r.sci)),
        mean_ir_entities: mean(reports.iter().map(|r| r.ir_entity_count as f64)),
    }
}

fn std_dev(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = mean(v.iter().copied());
    mean(v.iter().map(|x| (x - m) * (x - m))).sqrt()
}

/// Groups `reports` by `key` (in key order) and averages each group.
pub fn summarize_by<K: Ord + ToString>(reports: &[MetricsReport], key: impl Fn(&MetricsReport) -> K) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<K, Vec<&MetricsReport>> = BTreeMap::new();
    for r in reports {
        groups.entry(key(r)).or_default().push(r);
    }
    groups.into_iter().map(|(k, rs)| summarize(k.to_string(), &rs)).collect()
}

pub fn summarize_all(reports: &[MetricsReport]) -> SummaryRow {
    let all: Vec<&MetricsReport> = reports.iter().collect();
    summarize("overall".to_string(), &all)
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "N/A".to_string(), |x| format!("{x:.digits$}"))
}

/// Writes summary rows with the first column named `group_column`.
pub fn write_summary_csv<W: io::Write>(rows: &[SummaryRow], group_column: &str, out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        group_column,
        "observations",
        "validity_pct",
        "recall",
        "precision",
        "quality",
        "density",
        "connectivity",
        "labeling",
        "documentation",
        "structure",
        "mean_E",
        "mean_R",
        "sci",
    ])?;
    for r in rows {
        w.write_record([
            r.group.clone(),
            r.observations.to_string(),
            fmt_opt(r.validity_pct, 1),
            fmt_opt(r.recall, 3),
            fmt_opt(r.precision, 3),
            format!("{:.1}", r.quality),
            format!("{:.1}", r.density),
            format!("{:.1}", r.connectivity),
            format!("{:.1}", r.labeling),
            format!("{:.1}", r.documentation),
            format!("{:.1}", r.structure),
            format!("{:.1}", r.mean_e),
            format!("{:.1}", r.mean_r),
            format!("{:.1}", r.sci),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_observations_csv<W: io::Write>(reports: &[MetricsReport], out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "project",
        "language",
        "diagram_type",
        "diagrams",
        "ir_entities",
        "recall",
        "precision",
        "precision_vacuous",
        "validity_pct",
        "quality",
        "density",
        "connectivity",
        "labeling",
        "documentation",
        "structure",
        "mean_E",
        "mean_R",
        "sci",
        "ablation",
    ])?;
    for r in reports {
        w.write_record([
            r.project.clone(),
            r.language.clone(),
            r.diagram_type.to_string(),
            r.diagram_count.to_string(),
            r.ir_entity_count.to_string(),
            fmt_opt(r.entity_recall, 3),
            fmt_opt(r.relationship_precision, 3),
            r.precision_vacuous.to_string(),
            format!("{:.1}", r.validity_rate),
            format!("{:.1}", r.quality.q),
            format!("{:.1}", r.quality.density),
            format!("{:.1}", r.quality.connectivity),
            format!("{:.1}", r.quality.labeling),
            format!("{:.1}", r.quality.documentation),
            format!("{:.1}", r.quality.structure),
            format!("{:.1}", r.mean_elements),
            format!("{:.1}", r.mean_relationships),
            format!("{:.1}", r.sci),
            r.ablation.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Ablation counts per diagram type plus an overall row.
pub fn write_ablation_csv<W: io::Write>(reports: &[MetricsReport], out: W) -> Result<(), MetricsError> {
    let mut per_type: BTreeMap<String, AblationCounts> = BTreeMap::new();
    let mut overall = AblationCounts::default();
    for r in reports {
        per_type.entry(r.diagram_type.to_string()).or_default().add(r.ablation);
        overall.add(r.ablation);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["diagram_type", "no_correction", "partially_corrected", "uncorrectable", "total"])?;
    let rows = per_type.into_iter().chain(std::iter::once(("overall".to_string(), overall)));
    for (name, c) in rows {
        w.write_record([
            name,
            c.no_correction.to_string(),
            c.partially_corrected.to_string(),
            c.uncorrectable.to_string(),
            c.total().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
