//! Corpus evaluation: every diagram type for every corpus project, scored
//! and aggregated.
//!
//! Layout under the output root:
//!
//! ```text
//! <project>/ir/<project>.norm.ir.json
//! <project>/ir/<project>.extraction.json
//! <project>/views/view_<type>.json
//! <project>/<type>/NN_<scope>.puml, .lint.json, plan.json, contexts/
//! <project>/observations/<type>.json
//! <project>/events.jsonl
//! observations.csv and the tables listed in [`crate::tables`]
//! ```
//!
//! With `--resume`, an observation whose JSON file exists is loaded
//! instead of regenerated, and new events are appended to `events.jsonl`.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use c2u_core::metrics::{score_observation_with, MetricsReport};
use c2u_core::DiagramType;

use crate::commands::{print_report, runtime};
use crate::config::{CorpusEntry, RunConfig};
use crate::pipeline::{ensure_normalized, extract_raw, language_label, make_backend, observation, prepare, run_type, ProjectSetup};
use crate::{exit, tables, BackendArgs};

fn observation_path(run_dir: &Path, dt: DiagramType) -> PathBuf {
    run_dir.join("observations").join(format!("{dt}.json"))
}

fn load_observation(path: &Path) -> Option<MetricsReport> {
    serde_json::from_slice(&std::fs::read(path).ok()?).ok()
}

struct ProjectOutcome {
    reports: Vec<MetricsReport>,
    errors: bool,
}

async fn evaluate_project(
    entry: &CorpusEntry,
    out: &Path,
    resume: bool,
    args: &BackendArgs,
    cfg: &RunConfig,
) -> anyhow::Result<ProjectOutcome> {
    let name = entry.project_name();
    let run_dir = out.join(&name);
    if !resume && run_dir.exists() {
        std::fs::remove_dir_all(&run_dir).with_context(|| format!("cannot clear {}", run_dir.display()))?;
    }

    let (raw, report) = extract_raw(&entry.path, &entry.languages).with_context(|| format!("project {name}"))?;
    let mut ir = ensure_normalized(raw);
    ir.project_name = name.clone();
    let ir_dir = run_dir.join("ir");
    std::fs::create_dir_all(&ir_dir)?;
    ir.write_file(ir_dir.join(format!("{name}.norm.ir.json")))?;
    std::fs::write(ir_dir.join(format!("{name}.extraction.json")), serde_json::to_string_pretty(&report)? + "\n")?;
    println!("{name}: {report}; {} entities", ir.element_count());
    let language = entry.label.clone().unwrap_or_else(|| language_label(&ir));

    let mut reports = Vec::new();
    let mut pending = Vec::new();
    for dt in DiagramType::ALL {
        match load_observation(&observation_path(&run_dir, dt)).filter(|_| resume) {
            Some(r) => reports.push(r),
            None => pending.push(dt),
        }
    }
    if pending.is_empty() {
        return Ok(ProjectOutcome { reports, errors: false });
    }
    for dt in &pending {
        let dir = run_dir.join(dt.as_str());
        if dir.exists() {
            std::fs::remove_dir_all(&dir)?;
        }
    }

    let backend = make_backend(args.backend.unwrap_or(cfg.backend), cfg, args.scripts.as_deref())?;
    let ir_snapshot = ir.clone();
    let setup = ProjectSetup {
        name: name.clone(),
        repo_root: &entry.path,
        run_dir: &run_dir,
        ir,
        deps: None,
        deterministic: args.deterministic,
    };
    let (ctx, _) = prepare(setup, &pending, backend, cfg).await?;
    std::fs::create_dir_all(run_dir.join("observations"))?;
    let mcfg = cfg.metrics_config();
    let mut failed = false;
    for dt in pending {
        let orch = run_type(&ctx, dt).await;
        failed |= orch.as_ref().is_none_or(|o| !o.failures.is_empty());
        let obs = observation(&ir_snapshot, &name, &language, dt, orch.as_ref());
        let report = score_observation_with(&obs, &mcfg);
        std::fs::write(observation_path(&run_dir, dt), serde_json::to_string_pretty(&report)? + "\n")?;
        reports.push(report);
    }

    let events = run_dir.join("events.jsonl");
    let mut file = std::fs::OpenOptions::new().create(true).append(resume).write(true).truncate(!resume).open(&events)?;
    file.write_all(ctx.events.to_jsonl().as_bytes())?;
    reports.sort_by_key(|r| r.diagram_type);
    Ok(ProjectOutcome { reports, errors: failed || ctx.events.has_errors() })
}

pub fn evaluate(corpus: &Path, out: Option<PathBuf>, resume: bool, args: &BackendArgs) -> anyhow::Result<i32> {
    let cfg = RunConfig::load(corpus)?;
    if cfg.corpus.is_empty() {
        anyhow::bail!("{} lists no [[corpus]] entries", corpus.display());
    }
    let out = out.unwrap_or_else(|| cfg.output.clone());
    std::fs::create_dir_all(&out)?;

    let rt = runtime()?;
    let mut reports = Vec::new();
    let mut errors = false;
    for entry in &cfg.corpus {
        match rt.block_on(evaluate_project(entry, &out, resume, args, &cfg)) {
            Ok(outcome) => {
                errors |= outcome.errors;
                reports.extend(outcome.reports);
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                errors = true;
            }
        }
    }
    for r in &reports {
        print_report(r);
    }
    tables::write_all(&reports, &out)?;
    println!("{} observations -> {}", reports.len(), out.display());
    Ok(if errors { exit::ERROR } else { exit::OK })
}
