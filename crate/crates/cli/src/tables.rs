//! Aggregate tables written by `evaluate`.
//!
//! | file                    | rows                       | columns |
//! |-------------------------|----------------------------|---------|
//! | `by_type.csv`           | diagram type, overall      | observations, validity_pct, recall, precision, quality |
//! | `quality_by_type.csv`   | diagram type, overall      | quality and its five sub-scores |
//! | `by_language.csv`       | language label, overall    | observations, validity_pct, recall, precision, quality |
//! | `by_project.csv`        | project                    | language, ir_entities, validity_pct, recall, quality |
//! | `sci_by_type.csv`       | diagram type, overall      | mean_E, mean_R, sci, sci_std |
//! | `ablation.csv`          | diagram type, overall      | no_correction, partially_corrected, uncorrectable, total |
//!
//! Missing values (recall for system-context diagrams, precision with no
//! relationships in the group) are written as `N/A`.

use std::fs::File;
use std::path::Path;

use c2u_core::metrics::{summarize_all, summarize_by, write_ablation_csv, write_observations_csv, MetricsReport, SummaryRow};

pub const FILES: [&str; 7] = [
    "observations.csv",
    "by_type.csv",
    "quality_by_type.csv",
    "by_language.csv",
    "by_project.csv",
    "sci_by_type.csv",
    "ablation.csv",
];

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "N/A".to_string(), |x| format!("{x:.digits$}"))
}

fn f1(v: f64) -> String {
    format!("{v:.1}")
}

fn write(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn with_overall(reports: &[MetricsReport], mut rows: Vec<SummaryRow>) -> Vec<SummaryRow> {
    rows.push(summarize_all(reports));
    rows
}

pub fn write_all(reports: &[MetricsReport], dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    write_observations_csv(reports, File::create(dir.join(FILES[0]))?)?;

    let by_type = with_overall(reports, summarize_by(reports, |r| r.diagram_type));
    write(
        &dir.join(FILES[1]),
        &["diagram_type", "observations", "validity_pct", "recall", "precision", "quality"],
        by_type.iter().map(|r| {
            vec![r.group.clone(), r.observations.to_string(), opt(r.validity_pct, 1), opt(r.recall, 3), opt(r.precision, 3), f1(r.quality)]
        }),
    )?;
    write(
        &dir.join(FILES[2]),
        &["diagram_type", "quality", "density", "connectivity", "labeling", "documentation", "structure"],
        by_type.iter().map(|r| {
            vec![r.group.clone(), f1(r.quality), f1(r.density), f1(r.connectivity), f1(r.labeling), f1(r.documentation), f1(r.structure)]
        }),
    )?;

    let by_language = with_overall(reports, summarize_by(reports, |r| r.language.clone()));
    write(
        &dir.join(FILES[3]),
        &["language", "observations", "validity_pct", "recall", "precision", "quality"],
        by_language.iter().map(|r| {
            vec![r.group.clone(), r.observations.to_string(), opt(r.validity_pct, 1), opt(r.recall, 3), opt(r.precision, 3), f1(r.quality)]
        }),
    )?;

    let by_project = summarize_by(reports, |r| r.project.clone());
    write(
        &dir.join(FILES[4]),
        &["project", "language", "ir_entities", "validity_pct", "recall", "quality"],
        by_project.iter().map(|r| {
            let language = reports.iter().find(|x| x.project == r.group).map(|x| x.language.clone()).unwrap_or_default();
            vec![r.group.clone(), language, format!("{:.0}", r.mean_ir_entities), opt(r.validity_pct, 1), opt(r.recall, 3), f1(r.quality)]
        }),
    )?;

    write(
        &dir.join(FILES[5]),
        &["diagram_type", "mean_E", "mean_R", "sci", "sci_std"],
        by_type.iter().map(|r| vec![r.group.clone(), f1(r.mean_e), f1(r.mean_r), f1(r.sci), f1(r.sci_std)]),
    )?;

    write_ablation_csv(reports, File::create(dir.join(FILES[6]))?)?;
    Ok(())
}
