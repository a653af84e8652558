use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use c2u_agents::Orchestration;
use c2u_core::metrics::{score_observation_with, MetricsReport, Observation, ScoredDiagram};
use c2u_core::puml::{lint_and_fix, parse_artifact, LintReport, Verdict};
use c2u_core::view::{explain, generate_view_with, write_explain_csv};
use c2u_core::{DiagramType, Language, ProjectIr};
use serde_json::json;

use crate::config::RunConfig;
use crate::pipeline::{ensure_normalized, extract_raw, language_label, make_backend, prepare, run_type, ProjectSetup};
use crate::{exit, tables, BackendArgs, Command, ConfigArg};

pub fn dispatch(command: Command) -> anyhow::Result<i32> {
    match command {
        Command::Extract { repo, out, raw, name, languages } => extract(&repo, &out, raw, name, &languages),
        Command::View { ir, diagram, out, explain, config } => view(&ir, &diagram, &out, explain, &load(&config)?),
        Command::Generate { input, diagram, repo, deps, out, concurrency, backend, config } => {
            let mut cfg = load(&config)?;
            if let Some(n) = concurrency {
                cfg.concurrency = n.max(1);
            }
            generate(&input, &diagram, repo.as_deref(), deps.as_deref(), out, &backend, cfg)
        }
        Command::Lint { file, diagram_type, fix, json } => lint(&file, &diagram_type, fix, json),
        Command::Metrics { ir, diagrams, diagram_type, label, out, config } => {
            metrics(&ir, &diagrams, diagram_type.as_deref(), label, &out, &load(&config)?)
        }
        Command::Evaluate { corpus, out, resume, backend } => crate::evaluate::evaluate(&corpus, out, resume, &backend),
    }
}

fn load(arg: &ConfigArg) -> anyhow::Result<RunConfig> {
    match &arg.config {
        Some(path) => Ok(RunConfig::load(path)?),
        None => Ok(RunConfig::default()),
    }
}

pub fn parse_types(spec: &str) -> anyhow::Result<Vec<DiagramType>> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(DiagramType::ALL.to_vec());
    }
    let mut types = Vec::new();
    for part in spec.split(',') {
        let dt: DiagramType = part.parse()?;
        if !types.contains(&dt) {
            types.push(dt);
        }
    }
    Ok(types)
}

fn parse_languages(names: &[String]) -> anyhow::Result<Vec<Language>> {
    names
        .iter()
        .map(|n| {
            Language::ALL
                .into_iter()
                .find(|l| l.as_str().eq_ignore_ascii_case(n.trim()))
                .ok_or_else(|| anyhow!("unknown language `{n}` (expected java, python, javascript or php)"))
        })
        .collect()
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn read_ir(path: &Path) -> anyhow::Result<ProjectIr> {
    ProjectIr::read_file(path).with_context(|| format!("cannot load IR from {}", path.display()))
}

fn extract(repo: &Path, out: &Path, raw: bool, name: Option<String>, languages: &[String]) -> anyhow::Result<i32> {
    let langs = parse_languages(languages)?;
    let (ir, report) = extract_raw(repo, &langs)?;
    let mut ir = if raw { ir } else { ensure_normalized(ir) };
    if let Some(name) = name {
        ir.project_name = name;
    }
    std::fs::create_dir_all(out)?;
    let suffix = if raw { "raw" } else { "norm" };
    let ir_path = out.join(format!("{}.{suffix}.ir.json", ir.project_name));
    ir.write_file(&ir_path)?;
    write_json(&out.join(format!("{}.extraction.json", ir.project_name)), &report)?;
    println!("{report}");
    println!(
        "{}: {} classes, {} functions, normalized={} -> {}",
        ir.project_name,
        ir.classes.len(),
        ir.functions.len(),
        ir.normalized,
        ir_path.display()
    );
    if ir.element_count() == 0 {
        eprintln!("no classes or functions found in {}", repo.display());
        return Ok(exit::EMPTY_IR);
    }
    Ok(exit::OK)
}

fn view(ir_path: &Path, diagram: &str, out: &Path, with_explain: bool, cfg: &RunConfig) -> anyhow::Result<i32> {
    let types = parse_types(diagram)?;
    let ir = ensure_normalized(read_ir(ir_path)?);
    let opts = cfg.view_options();
    for dt in types {
        let view = generate_view_with(&ir, dt, &opts)?;
        let path = view.write_to_dir(out)?;
        println!(
            "{dt}: {} bytes (budget {}), {} shrink iterations, {} of {} elements -> {}",
            view.byte_size,
            opts.budget(dt),
            view.shrink_iterations,
            view.element_names().len(),
            view.source_element_count,
            path.display()
        );
        if with_explain {
            let rows = explain(&ir, &view, &opts);
            write_explain_csv(&rows, File::create(out.join(format!("explain_{dt}.csv")))?)?;
        }
    }
    Ok(exit::OK)
}

fn verdict_counts(o: &Orchestration) -> BTreeMap<&'static str, usize> {
    let mut counts = BTreeMap::from([("valid", 0), ("corrected", 0), ("uncorrectable", 0)]);
    for d in &o.diagrams {
        *counts.entry(d.correction.report.verdict.as_str()).or_default() += 1;
    }
    counts
}

fn summary_json(ctx_dir: &Path, o: &Orchestration) -> serde_json::Value {
    let diagrams: Vec<_> = o
        .diagrams
        .iter()
        .map(|d| {
            json!({
                "index": d.index,
                "scope": d.scope,
                "file": d.correction.path.strip_prefix(ctx_dir).unwrap_or(&d.correction.path),
                "verdict": d.correction.report.verdict,
                "final_verdict": d.correction.final_report.verdict,
                "elements": d.correction.artifact.elements.len(),
                "relationships": d.correction.artifact.relationships.len(),
            })
        })
        .collect();
    json!({
        "diagram_type": o.diagram_type,
        "route": o.route,
        "sessions": o.sessions,
        "scopes": o.plan.as_ref().map(|p| p.scopes.iter().map(|s| s.label.clone()).collect::<Vec<_>>()),
        "diagrams": diagrams,
        "failures": o.failures,
    })
}

pub(crate) fn runtime() -> anyhow::Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

fn generate(
    input: &Path,
    diagram: &str,
    repo: Option<&Path>,
    deps: Option<&Path>,
    out: Option<PathBuf>,
    backend_args: &BackendArgs,
    cfg: RunConfig,
) -> anyhow::Result<i32> {
    let types = parse_types(diagram)?;
    let kind = backend_args.backend.unwrap_or(cfg.backend);
    let backend = make_backend(kind, &cfg, backend_args.scripts.as_deref())?;

    let (ir, repo_root) = if input.is_dir() {
        let (raw, report) = extract_raw(input, &[])?;
        println!("{report}");
        (ensure_normalized(raw), repo.unwrap_or(input).to_path_buf())
    } else {
        let Some(repo) = repo else {
            bail!("--repo is required when generating from an IR file");
        };
        (ensure_normalized(read_ir(input)?), repo.to_path_buf())
    };
    if ir.element_count() == 0 {
        eprintln!("no classes or functions to draw");
        return Ok(exit::EMPTY_IR);
    }

    let out = out.unwrap_or_else(|| cfg.output.clone());
    let run_dir = out.join(&ir.project_name);
    for dt in &types {
        let dir = run_dir.join(dt.as_str());
        if dir.exists() {
            std::fs::remove_dir_all(&dir).with_context(|| format!("cannot clear {}", dir.display()))?;
        }
    }
    let setup = ProjectSetup {
        name: ir.project_name.clone(),
        repo_root: &repo_root,
        run_dir: &run_dir,
        ir,
        deps,
        deterministic: backend_args.deterministic,
    };

    let rt = runtime()?;
    let (ctx, results) = rt.block_on(async {
        let (ctx, ready) = prepare(setup, &types, backend, &cfg).await?;
        let mut results = Vec::new();
        for dt in ready {
            results.push(run_type(&ctx, dt).await);
        }
        anyhow::Ok((ctx, results))
    })?;

    let mut failed = false;
    let mut summary = Vec::new();
    for o in results.iter().flatten() {
        let c = verdict_counts(o);
        println!(
            "{}: {} diagrams (valid {}, corrected {}, uncorrectable {}), {} sessions, {} failed scopes",
            o.diagram_type,
            o.diagrams.len(),
            c["valid"],
            c["corrected"],
            c["uncorrectable"],
            o.sessions,
            o.failures.len()
        );
        failed |= !o.failures.is_empty();
        summary.push(summary_json(&run_dir, o));
    }
    write_json(&run_dir.join("run.json"), &summary)?;
    ctx.events.write_jsonl(&run_dir.join("events.jsonl"))?;
    let total = ctx.stats.total();
    println!(
        "{} sessions, ~{} input / ~{} output tokens -> {}",
        ctx.stats.sessions().len(),
        total.input_tokens,
        total.output_tokens,
        run_dir.display()
    );
    if failed || ctx.events.has_errors() {
        eprintln!("errors were logged; see {}", run_dir.join("events.jsonl").display());
        return Ok(exit::ERROR);
    }
    Ok(exit::OK)
}

pub fn verdict_exit(v: Verdict) -> i32 {
    match v {
        Verdict::Valid => exit::OK,
        Verdict::Corrected => exit::CORRECTED,
        Verdict::Uncorrectable => exit::UNCORRECTABLE,
    }
}

fn lint(file: &Path, diagram_type: &str, fix: bool, as_json: bool) -> anyhow::Result<i32> {
    let dt: DiagramType = diagram_type.parse()?;
    let text = std::fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
    let (report, fixed) = lint_and_fix(&parse_artifact(&text, dt));
    if fix && report.verdict == Verdict::Corrected {
        std::fs::write(file, &fixed.text)?;
    }
    if as_json {
        println!("{}", report.to_json());
    } else {
        println!("{}: {} ({dt})", file.display(), report.verdict);
        for v in &report.violations {
            println!("  line {}: {} {}", v.line, v.rule, v.excerpt);
        }
        if fix && report.verdict == Verdict::Corrected {
            println!("  applied {} fixes", report.fixes_applied);
        }
    }
    Ok(verdict_exit(report.verdict))
}

/// Pre-correction report for `puml`: the `initial` entry of its
/// `.lint.json` sibling when one exists, else a fresh lint.
fn initial_report(puml: &Path, text: &str, dt: DiagramType) -> anyhow::Result<LintReport> {
    let sidecar = puml.with_extension("lint.json");
    if sidecar.is_file() {
        let value: serde_json::Value = serde_json::from_slice(&std::fs::read(&sidecar)?)?;
        let initial = value.get("initial").cloned().ok_or_else(|| anyhow!("{} has no `initial` report", sidecar.display()))?;
        return Ok(serde_json::from_value(initial)?);
    }
    Ok(c2u_core::puml::lint_text(text, dt))
}

/// Groups the `.puml` files under `dir` into one observation per type.
pub fn collect_observations(
    ir: &ProjectIr,
    dir: &Path,
    forced: Option<DiagramType>,
    language: &str,
) -> anyhow::Result<Vec<Observation>> {
    let mut by_type: BTreeMap<DiagramType, Vec<ScoredDiagram>> = BTreeMap::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != "puml") {
            continue;
        }
        let dt = match forced {
            Some(dt) => dt,
            None => {
                let parent = path.parent().and_then(|p| p.file_name()).and_then(|n| n.to_str()).unwrap_or_default();
                parent.parse().map_err(|_| anyhow!("cannot tell the diagram type of {}; pass --type", path.display()))?
            }
        };
        let text = std::fs::read_to_string(path)?;
        let report = initial_report(path, &text, dt)?;
        by_type.entry(dt).or_default().push(ScoredDiagram { artifact: parse_artifact(&text, dt), report });
    }
    if by_type.is_empty() {
        bail!("no .puml files under {}", dir.display());
    }
    Ok(by_type
        .into_iter()
        .map(|(dt, diagrams)| Observation {
            project: ir.project_name.clone(),
            language: language.to_string(),
            diagram_type: dt,
            ir_entities: ir.element_names().map(String::from).collect(),
            diagrams,
        })
        .collect())
}

pub(crate) fn print_report(r: &MetricsReport) {
    let opt = |v: Option<f64>| v.map_or_else(|| "N/A".to_string(), |x| format!("{x:.3}"));
    println!(
        "{} {}: {} diagrams, recall {}, precision {}, validity {:.1}%, Q {:.1}, SCI {:.1}, {}",
        r.project,
        r.diagram_type,
        r.diagram_count,
        opt(r.entity_recall),
        opt(r.relationship_precision),
        r.validity_rate,
        r.quality.q,
        r.sci,
        r.ablation.as_str()
    );
}

fn metrics(ir_path: &Path, dir: &Path, forced: Option<&str>, label: Option<String>, out: &Path, cfg: &RunConfig) -> anyhow::Result<i32> {
    let ir = ensure_normalized(read_ir(ir_path)?);
    let forced = forced.map(str::parse::<DiagramType>).transpose()?;
    let language = label.unwrap_or_else(|| language_label(&ir));
    let observations = collect_observations(&ir, dir, forced, &language)?;
    let mcfg = cfg.metrics_config();
    let reports: Vec<MetricsReport> = observations.iter().map(|o| score_observation_with(o, &mcfg)).collect();
    for r in &reports {
        print_report(r);
    }
    tables::write_all(&reports, out)?;
    write_json(&out.join("metrics.json"), &reports)?;
    Ok(exit::OK)
}
