//! Deterministic stand-in for a model.
//!
//! Every role works through the same tools a live model gets: it reads the
//! inputs named in its task parameters, derives its answer from their
//! contents and writes the artifact. Responses depend only on the request,
//! so runs are reproducible regardless of scheduling.
//!
//! Roughly a quarter of generated diagrams carry a syntax defect chosen by
//! hashing the output path: most are mechanically fixable, some are not.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use async_trait::async_trait;
use c2u_core::puml::{lint_and_fix, parse_artifact, Verdict};
use c2u_core::view::{IrView, ViewRecord};
use c2u_core::{ClassKind, DiagramType, Language, Visibility};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::analyze::EnrichedContext;
use crate::backend::{Backend, BackendError, BackendRecord, BackendRequest, Role};
use crate::prompts::DEFAULT_MAX_ELEMENTS;
use crate::scripted::{text, tool_call};

#[derive(Debug, Clone)]
pub struct SyntheticBackend {
    /// Percentage of diagrams that get a defect.
    pub defect_rate: u8,
    pub max_elements: usize,
}

impl Default for SyntheticBackend {
    fn default() -> Self {
        SyntheticBackend { defect_rate: 25, max_elements: DEFAULT_MAX_ELEMENTS }
    }
}

fn hash(s: &str) -> u64 {
    let d = Sha256::digest(s.as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

fn param<'a>(req: &'a BackendRequest, key: &str) -> &'a str {
    req.params.get(key).map(String::as_str).unwrap_or_default()
}

fn read(path: &str, id: usize) -> BackendRecord {
    tool_call(format!("read{id}"), "Read", json!({ "path": path }))
}

fn write(path: &str, content: &str) -> BackendRecord {
    tool_call("write", "Write", json!({ "path": path, "content": content }))
}

/// Outputs of the turn-0 reads, in order; errors read as empty.
fn outputs(req: &BackendRequest) -> Vec<&str> {
    req.tool_results.iter().map(|r| if r.is_error { "" } else { r.output.as_str() }).collect()
}

fn is_source(path: &str) -> bool {
    Language::from_path(Path::new(path)).is_some()
}

fn humanize(name: &str) -> String {
    let mut words: Vec<String> = Vec::new();
    let mut cur = String::new();
    let mut prev_lower = false;
    for c in name.chars() {
        if c == '_' || c == '-' || c == ' ' {
            if !cur.is_empty() {
                words.push(std::mem::take(&mut cur));
            }
            prev_lower = false;
            continue;
        }
        if c.is_uppercase() && prev_lower && !cur.is_empty() {
            words.push(std::mem::take(&mut cur));
        }
        prev_lower = c.is_lowercase() || c.is_ascii_digit();
        cur.push(c);
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    words
        .iter()
        .map(|w| {
            let mut cs = w.chars();
            cs.next().map(|f| f.to_uppercase().chain(cs.flat_map(char::to_lowercase)).collect()).unwrap_or_default()
        })
        .collect::<Vec<String>>()
        .join(" ")
}

fn symbol(v: &Visibility) -> &'static str {
    match v {
        Visibility::Public => "+",
        Visibility::Private => "-",
        Visibility::Protected => "#",
        Visibility::Package => "~",
        Visibility::Raw(_) => "",
    }
}

fn quoted(name: &str) -> String {
    format!("\"{}\"", name.replace('"', "'"))
}

fn alias(prefix: &str, i: usize) -> String {
    format!("{prefix}{i}")
}

// ---------------------------------------------------------------- planner

fn plan_scopes(files: &[&str], min: usize, max: usize) -> Vec<(String, Vec<String>)> {
    let mut dirs: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for f in files.iter().filter(|f| is_source(f)) {
        let dir = f.rsplit_once('/').map_or("repo", |(d, _)| d);
        dirs.entry(dir).or_default().push(f.to_string());
    }
    let mut groups: Vec<(String, Vec<String>)> = dirs.into_iter().map(|(d, fs)| (d.to_string(), fs)).collect();
    groups.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
    if groups.len() > max && max > 0 {
        let rest: Vec<String> = groups.drain(max - 1..).flat_map(|(_, fs)| fs).collect();
        groups.push(("other modules".into(), rest));
    }
    while groups.len() < min {
        let Some(i) = (0..groups.len()).filter(|&i| groups[i].1.len() >= 2).max_by_key(|&i| groups[i].1.len()) else {
            break;
        };
        let half = groups[i].1.len() / 2;
        let moved = groups[i].1.split_off(half);
        let label = format!("{} part 2", groups[i].0);
        groups.push((label, moved));
    }
    let mut seen = BTreeSet::new();
    groups
        .into_iter()
        .map(|(dir, fs)| {
            let short = dir.rsplit('/').next().unwrap_or(&dir);
            let label = if short == "repo" { "root".to_string() } else { humanize(short) };
            let label = if seen.insert(label.clone()) { label } else { dir.trim_start_matches("repo/").to_string() };
            (label, fs)
        })
        .collect()
}

fn planner(req: &BackendRequest) -> Vec<BackendRecord> {
    match req.turn {
        0 => vec![read(param(req, "view_path"), 0), tool_call("glob", "Glob", json!({ "pattern": "repo/**" }))],
        1 => {
            let out = outputs(req);
            let files: Vec<&str> = out.get(1).copied().unwrap_or_default().lines().collect();
            let min = param(req, "min_scopes").parse().unwrap_or(1);
            let max = param(req, "max_scopes").parse().unwrap_or(3);
            let scopes: Vec<_> = plan_scopes(&files, min, max)
                .into_iter()
                .map(|(label, files)| {
                    let rationale = format!("{} source files that change together", files.len());
                    json!({ "label": label, "files": files, "rationale": rationale })
                })
                .collect();
            let plan = json!({ "target_diagram_count": scopes.len(), "scopes": scopes });
            vec![write(param(req, "plan_path"), &serde_json::to_string_pretty(&plan).expect("json"))]
        }
        _ => vec![text("Plan written.")],
    }
}

// --------------------------------------------------------------- analyzer

fn analyze_sources(scope: &str, files: &[(&str, &str)]) -> EnrichedContext {
    let decl = regex::Regex::new(r"(?m)^\s*(?:export\s+)?(?:public\s+|abstract\s+|final\s+)*(?:class|interface|enum|trait)\s+(\w+)").expect("regex");
    let func = regex::Regex::new(r"(?m)^(?:def|function|export\s+function|async\s+function)\s+(\w+)").expect("regex");
    let call = regex::Regex::new(r"(\w+)\s*\.\s*(\w+)\s*\(").expect("regex");
    let new = regex::Regex::new(r"\bnew\s+(\w+)\s*\(").expect("regex");
    let header = regex::Regex::new(r"(?m)(?:class|interface)\s+(\w+)([^{\n]*)").expect("regex");
    let clause = regex::Regex::new(r"\b(extends|implements)\s+([\w\s,]+?)\s*(?:\bimplements\b|\bextends\b|$)").expect("regex");
    let py_inherit = regex::Regex::new(r"(?m)^class\s+(\w+)\(([\w\s,.]+)\)").expect("regex");

    let mut owners: Vec<(&str, String)> = Vec::new();
    let mut participants: Vec<String> = Vec::new();
    for (path, src) in files {
        let declared: Vec<String> = decl.captures_iter(src).chain(func.captures_iter(src)).map(|c| c[1].to_string()).collect();
        let stem = Path::new(path).file_stem().and_then(|s| s.to_str()).unwrap_or("module").to_string();
        owners.push((path, declared.first().cloned().unwrap_or(stem)));
        for d in declared {
            if !participants.contains(&d) {
                participants.push(d);
            }
        }
    }

    let lower: Vec<(String, &String)> = participants.iter().map(|p| (p.to_lowercase(), p)).collect();
    let find = |receiver: &str| {
        let r = receiver.to_lowercase();
        if r.len() < 3 || r == "this" || r == "self" {
            return None;
        }
        lower.iter().find(|(l, _)| l.ends_with(&r) || r.ends_with(l.as_str())).map(|(_, p)| (*p).clone())
    };
    let mut flows = Vec::new();
    let mut relationships = Vec::new();
    for ((_, src), (_, owner)) in files.iter().zip(&owners) {
        for c in call.captures_iter(src) {
            if let Some(target) = find(&c[1]).filter(|t| t != owner) {
                let f = format!("{owner} -> {target}: {}", &c[2]);
                if !flows.contains(&f) {
                    flows.push(f);
                }
            }
        }
        for c in new.captures_iter(src) {
            if let Some(target) = participants.iter().find(|p| **p == c[1]).filter(|t| *t != owner) {
                let f = format!("{owner} -> {target}: create");
                if !flows.contains(&f) {
                    flows.push(f);
                }
            }
        }
        for h in header.captures_iter(src) {
            let mut rest = &h[2];
            while let Some(c) = clause.captures(rest) {
                for parent in c[2].split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    relationships.push(format!("{} {} {parent}", &h[1], &c[1]));
                }
                rest = &rest[c.get(2).expect("group").end()..];
            }
        }
        for c in py_inherit.captures_iter(src) {
            for parent in c[2].split(',').map(|s| s.trim().rsplit('.').next().unwrap_or("")).filter(|s| !s.is_empty() && *s != "object") {
                relationships.push(format!("{} extends {parent}", &c[1]));
            }
        }
    }
    EnrichedContext {
        scope: scope.to_string(),
        participants,
        flows,
        relationships,
        files_read: files.iter().map(|(p, _)| p.to_string()).collect(),
        empty: false,
        truncated: false,
    }
}

fn analyzer(req: &BackendRequest) -> Vec<BackendRecord> {
    let files: Vec<&str> = param(req, "files").split(", ").filter(|s| !s.is_empty()).collect();
    match req.turn {
        0 if !files.is_empty() => files.iter().enumerate().map(|(i, f)| read(f, i)).collect(),
        0 | 1 => {
            let out = outputs(req);
            let read: Vec<(&str, &str)> =
                files.iter().zip(out.iter().chain(std::iter::repeat(&""))).filter(|(_, s)| !s.is_empty()).map(|(f, s)| (*f, *s)).collect();
            let ctx = analyze_sources(param(req, "scope"), &read);
            vec![write(param(req, "context_path"), &serde_json::to_string_pretty(&ctx).expect("json"))]
        }
        _ => vec![text("Context written.")],
    }
}

// ---------------------------------------------------------------- diagram

struct Inputs {
    view: Option<IrView>,
    context: Option<EnrichedContext>,
}

fn class_records(view: &IrView) -> impl Iterator<Item = &c2u_core::view::ClassRecord> {
    view.elements.iter().filter_map(|r| match r {
        ViewRecord::Class(c) => Some(c),
        _ => None,
    })
}

/// View element names restricted to the scope's participants when there
/// is a usable context, else the leading view elements.
fn in_scope<'a>(names: Vec<&'a str>, ctx: Option<&EnrichedContext>, cap: usize) -> Vec<&'a str> {
    let wanted: BTreeSet<&str> = ctx.map(|c| c.participants.iter().map(String::as_str).collect()).unwrap_or_default();
    let hit: Vec<&str> = names.iter().copied().filter(|n| wanted.contains(n)).collect();
    let mut out = if hit.is_empty() { names } else { hit };
    out.truncate(cap);
    out
}

fn class_diagram(inp: &Inputs, cap: usize) -> String {
    let mut s = String::new();
    let Some(view) = &inp.view else { return s };
    let names = in_scope(class_records(view).map(|c| c.name.as_str()).collect(), inp.context.as_ref(), cap);
    let keep: BTreeSet<&str> = names.iter().copied().collect();
    let mut edges = Vec::new();
    for c in class_records(view).filter(|c| keep.contains(c.name.as_str())) {
        let kw = match c.kind {
            ClassKind::Interface => "interface",
            ClassKind::Enum => "enum",
            ClassKind::Class => "class",
        };
        let _ = writeln!(s, "{kw} {} {{", c.name);
        for a in c.attributes.iter().take(6) {
            let _ = writeln!(s, "  {}{}{}", symbol(&a.visibility), a.name, a.type_annotation.as_ref().map(|t| format!(": {t}")).unwrap_or_default());
        }
        for m in c.methods.iter().take(8) {
            let _ = writeln!(s, "  {}{}()", symbol(&m.visibility), m.name);
        }
        s.push_str("}\n");
        for p in &c.extends {
            edges.push(format!("{p} <|-- {}", c.name));
        }
        for p in &c.implements {
            edges.push(format!("{p} <|.. {}", c.name));
        }
    }
    if let Some(ctx) = &inp.context {
        for f in &ctx.flows {
            if let Some((a, rest)) = f.split_once(" -> ") {
                let b = rest.split(':').next().unwrap_or("").trim();
                let e = format!("{a} ..> {b} : uses");
                if keep.contains(a) && keep.contains(b) && !edges.contains(&e) {
                    edges.push(e);
                }
            }
        }
    }
    for e in edges {
        s.push_str(&e);
        s.push('\n');
    }
    s
}

fn sequence_diagram(inp: &Inputs, cap: usize) -> String {
    let mut s = String::new();
    let flows: Vec<(String, String, String)> = inp
        .context
        .iter()
        .flat_map(|c| &c.flows)
        .filter_map(|f| {
            let (a, rest) = f.split_once(" -> ")?;
            let (b, m) = rest.split_once(':')?;
            Some((a.trim().to_string(), b.trim().to_string(), m.trim().to_string()))
        })
        .take(cap)
        .collect();
    let mut parts: Vec<String> = Vec::new();
    for (a, b, _) in &flows {
        for p in [a, b] {
            if !parts.contains(p) {
                parts.push(p.clone());
            }
        }
    }
    if parts.is_empty() {
        let names: Vec<&str> = inp.view.iter().flat_map(|v| v.element_names()).collect();
        parts = in_scope(names, inp.context.as_ref(), 4).into_iter().map(str::to_string).collect();
    }
    s.push_str("actor User\n");
    for p in &parts {
        let _ = writeln!(s, "participant {p}");
    }
    let Some(first) = parts.first() else { return s };
    let _ = writeln!(s, "User -> {first} : request");
    let _ = writeln!(s, "activate {first}");
    if flows.is_empty() {
        for w in parts.windows(2) {
            let _ = writeln!(s, "{} -> {} : call", w[0], w[1]);
            let _ = writeln!(s, "{} --> {} : result", w[1], w[0]);
        }
    }
    for (a, b, m) in &flows {
        let _ = writeln!(s, "{a} -> {b} : {m}");
        let _ = writeln!(s, "{b} --> {a}");
    }
    let _ = writeln!(s, "{first} --> User : response");
    let _ = writeln!(s, "deactivate {first}");
    s
}

fn activity_diagram(inp: &Inputs, cap: usize) -> String {
    let mut steps: Vec<String> = inp
        .context
        .iter()
        .flat_map(|c| &c.flows)
        .filter_map(|f| {
            let (a, rest) = f.split_once(" -> ")?;
            let (b, m) = rest.split_once(':')?;
            Some(format!("{} asks {} to {}", a.trim(), b.trim(), humanize(m.trim()).to_lowercase()))
        })
        .take(cap.saturating_sub(4))
        .collect();
    if steps.is_empty() {
        let names: Vec<&str> = inp.view.iter().flat_map(|v| v.element_names()).collect();
        steps = in_scope(names, inp.context.as_ref(), 5).into_iter().map(|n| format!("Run {n}")).collect();
    }
    let mut s = String::from("start\n:Receive request;\n");
    let _ = writeln!(s, "if (request valid?) then (yes)");
    for step in &steps {
        let _ = writeln!(s, "  :{step};");
    }
    s.push_str("else (no)\n  :Reject request;\nendif\n:Return result;\nstop\n");
    s
}

fn usecase_diagram(inp: &Inputs, cap: usize) -> String {
    let mut s = String::new();
    let Some(view) = &inp.view else { return s };
    let records: Vec<_> = view
        .elements
        .iter()
        .filter_map(|r| match r {
            ViewRecord::UseCase(u) => Some(u),
            _ => None,
        })
        .collect();
    let names = in_scope(records.iter().map(|u| u.name.as_str()).collect(), inp.context.as_ref(), cap);
    let admin = names.iter().any(|n| n.to_lowercase().contains("admin"));
    s.push_str("left to right direction\nactor User\n");
    if admin {
        s.push_str("actor Administrator\n");
    }
    let mut k = 0;
    let mut seen = BTreeSet::new();
    for u in records.iter().filter(|u| names.contains(&u.name.as_str())) {
        let _ = writeln!(s, "rectangle {} {{", quoted(&u.name));
        let mut links = Vec::new();
        for m in u.public_methods.iter().take(4) {
            let label = humanize(m);
            if !seen.insert(label.clone()) || k >= cap {
                continue;
            }
            k += 1;
            let a = alias("UC", k);
            let _ = writeln!(s, "  usecase {} as {a}", quoted(&label));
            let actor = if admin && u.name.to_lowercase().contains("admin") { "Administrator" } else { "User" };
            links.push(format!("{actor} --> {a}"));
        }
        s.push_str("}\n");
        for l in links {
            s.push_str(&l);
            s.push('\n');
        }
    }
    s
}

fn component_diagram(inp: &Inputs, cap: usize) -> String {
    let mut s = String::new();
    let Some(view) = &inp.view else { return s };
    let mut members = BTreeSet::new();
    let mut edges = Vec::new();
    for r in &view.elements {
        let ViewRecord::ComponentGroup(g) = r else { continue };
        if members.len() >= cap {
            break;
        }
        let _ = writeln!(s, "package {} {{", quoted(&g.directory));
        for m in &g.members {
            if members.len() >= cap {
                break;
            }
            members.insert(m.name.clone());
            let _ = writeln!(s, "  [{}]", m.name);
        }
        s.push_str("}\n");
        for m in &g.members {
            for t in m.extends.iter().chain(&m.implements) {
                edges.push((m.name.clone(), t.clone()));
            }
        }
    }
    for (a, b) in edges {
        if members.contains(&a) && members.contains(&b) {
            let _ = writeln!(s, "[{a}] ..> [{b}]");
        }
    }
    s
}

fn deployment_diagram(inp: &Inputs, cap: usize) -> String {
    let mut s = String::new();
    let Some(view) = &inp.view else { return s };
    let mut services: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut dirs = Vec::new();
    for r in &view.elements {
        match r {
            ViewRecord::Infrastructure(i) => {
                let path = i.key.split_once(':').map_or(i.key.as_str(), |(_, p)| p);
                let (dir, file) = path.rsplit_once('/').unwrap_or(("app", path));
                let svc = dir.rsplit('/').next().unwrap_or(dir).to_string();
                services.entry(svc).or_default().push(file.to_string());
            }
            ViewRecord::Directory(d) => dirs.push(d.name.clone()),
            _ => {}
        }
    }
    s.push_str("node \"Deployment Host\" as host <<server>> {\n");
    let mut k = 0;
    for (svc, files) in services.iter().take(cap / 2) {
        k += 1;
        let _ = writeln!(s, "  node {} as {} <<container>> {{", quoted(svc), alias("svc", k));
        for f in files.iter().take(3) {
            let _ = writeln!(s, "    artifact {}", quoted(&format!("{svc}/{f}")));
        }
        s.push_str("  }\n");
    }
    if services.is_empty() {
        s.push_str("  node \"Application\" as svc1 <<runtime>> {\n");
        for d in dirs.iter().take(cap.saturating_sub(2)) {
            let _ = writeln!(s, "    artifact {}", quoted(d));
        }
        s.push_str("  }\n");
        k = 1;
    }
    s.push_str("}\n");
    s.push_str("node \"Client\" as client <<device>>\n");
    if k > 0 {
        s.push_str("client --> svc1 : https\n");
    }
    for i in 2..=k {
        let _ = writeln!(s, "svc1 --> {} : internal", alias("svc", i));
    }
    s
}

fn system_context_diagram(inp: &Inputs, project: &str, cap: usize) -> String {
    let mut s = String::new();
    let externals: BTreeSet<String> = inp
        .view
        .iter()
        .flat_map(|v| &v.elements)
        .filter_map(|r| match r {
            ViewRecord::Context(c) => Some(c),
            _ => None,
        })
        .flat_map(|c| &c.external_calls)
        .map(|e| e.split('.').next().unwrap_or(e).to_string())
        .filter(|e| !e.is_empty())
        .collect();
    s.push_str("actor User\n");
    let _ = writeln!(s, "rectangle {} as system <<system>>", quoted(&format!("{} System", humanize(project))));
    s.push_str("User --> system : uses\n");
    for (i, e) in externals.iter().take(cap.saturating_sub(2)).enumerate() {
        let a = alias("ext", i + 1);
        let _ = writeln!(s, "rectangle {} as {a} <<external>>", quoted(&humanize(e)));
        let _ = writeln!(s, "system --> {a} : calls");
    }
    s
}

/// Adds a defect chosen by `h`: the first branch is uncorrectable.
fn inject_defect(body: &str, dt: DiagramType, h: u64) -> String {
    let mut body = body.to_string();
    if h % 5 == 0 {
        return match dt {
            DiagramType::SystemContext => format!("!include <C4/C4_Context>\nSystem_Ext(legacy, \"Legacy\")\n{body}"),
            _ => format!("{body}{}\n", match dt {
                DiagramType::Activity => ":Example;",
                DiagramType::Usecase => "usecase (Example)",
                DiagramType::Component => "[Example]",
                DiagramType::Deployment => "node Example",
                DiagramType::Sequence => "participant Example",
                _ => "class Example",
            }),
        };
    }
    match (dt, h % 3) {
        (DiagramType::Activity, 0) if body.contains("else (no)") => body.replace("else (no)", "else if (retry?) then (yes)\n  :Retry request;\nelse (no)"),
        (DiagramType::Activity, 1) => body.replace(":Return result;", ":Return result;\ncontinue"),
        (DiagramType::Deployment, 0 | 1) => body.replacen("node \"Deployment Host\"", "device \"Deployment Host\"", 1),
        (DiagramType::Sequence, 0) => body.replacen("participant ", "participant <<service>> ", 1),
        (_, 0) => format!("skinparam linetype ortho\n{body}"),
        (_, 1) => {
            body.push_str("}\n");
            body
        }
        _ => format!("```plantuml\n@startuml\n{body}@enduml\n```\n"),
    }
}

fn wrap(body: &str) -> String {
    if body.starts_with("```") || body.contains("@startuml") {
        body.to_string()
    } else {
        format!("@startuml\n{body}@enduml\n")
    }
}

impl SyntheticBackend {
    fn diagram(&self, req: &BackendRequest, dt: DiagramType) -> Vec<BackendRecord> {
        let context_path = param(req, "context_path");
        match req.turn {
            0 => {
                let mut reads = vec![read(param(req, "view_path"), 0)];
                if !context_path.is_empty() {
                    reads.push(read(context_path, 1));
                }
                reads
            }
            1 => {
                let out = outputs(req);
                let inp = Inputs {
                    view: out.first().and_then(|v| IrView::from_json(v.as_bytes()).ok()),
                    context: out.get(1).and_then(|c| serde_json::from_str(c).ok()),
                };
                let cap = self.max_elements;
                let body = match dt {
                    DiagramType::Class => class_diagram(&inp, cap),
                    DiagramType::Sequence => sequence_diagram(&inp, cap),
                    DiagramType::Activity => activity_diagram(&inp, cap),
                    DiagramType::Usecase => usecase_diagram(&inp, cap),
                    DiagramType::Component => component_diagram(&inp, cap),
                    DiagramType::Deployment => deployment_diagram(&inp, cap),
                    DiagramType::SystemContext => system_context_diagram(&inp, param(req, "project"), cap),
                };
                let output = param(req, "output_path");
                let h = hash(&format!("{}/{output}", param(req, "project")));
                let body = if (h % 100) < u64::from(self.defect_rate) { inject_defect(&body, dt, h / 100) } else { body };
                vec![write(output, &wrap(&body))]
            }
            _ => vec![text(format!("Wrote {}.", param(req, "output_path")))],
        }
    }

    fn corrector(&self, req: &BackendRequest, dt: DiagramType) -> Vec<BackendRecord> {
        let path = param(req, "puml_path");
        match req.turn {
            0 => vec![read(path, 0)],
            1 => {
                let src = outputs(req).first().copied().unwrap_or_default();
                let (report, fixed) = lint_and_fix(&parse_artifact(src, dt));
                match report.verdict {
                    Verdict::Valid => vec![text("No issues found.")],
                    Verdict::Corrected => vec![write(path, &fixed.text)],
                    Verdict::Uncorrectable => {
                        let bad: BTreeSet<usize> =
                            report.violations.iter().filter(|v| v.rule == "R8").map(|v| v.line).collect();
                        if bad.is_empty() {
                            return vec![text("Remaining issues need a manual rewrite.")];
                        }
                        let kept: String = src
                            .lines()
                            .enumerate()
                            .filter(|(i, _)| !bad.contains(&(i + 1)))
                            .map(|(_, l)| format!("{l}\n"))
                            .collect();
                        vec![write(path, &kept)]
                    }
                }
            }
            _ => vec![text("Correction finished.")],
        }
    }

    fn dependency_analyzer(&self, req: &BackendRequest) -> Vec<BackendRecord> {
        match req.turn {
            0 => vec![read(param(req, "summary_path"), 0)],
            _ => {
                let src = outputs(req).first().copied().unwrap_or_default();
                let libs: Vec<&str> = src.lines().filter_map(|l| l.strip_prefix("## ")).map(|l| l.split(" (").next().unwrap_or(l)).collect();
                if libs.is_empty() {
                    vec![text("No third-party classes are likely to appear.")]
                } else {
                    vec![text(format!("Libraries likely to appear at integration points: {}.", libs.join(", ")))]
                }
            }
        }
    }
}

#[async_trait]
impl Backend for SyntheticBackend {
    fn name(&self) -> &str {
        "synthetic"
    }

    async fn respond(&self, req: &BackendRequest) -> Result<Vec<BackendRecord>, BackendError> {
        let dt = || {
            param(req, "diagram_type").parse::<DiagramType>().map_err(|e| BackendError::Config(format!("diagram_type: {e}")))
        };
        Ok(match req.role {
            Role::Planner => planner(req),
            Role::Analyzer => analyzer(req),
            Role::Diagram => self.diagram(req, dt()?),
            Role::Corrector => self.corrector(req, dt()?),
            Role::DependencyAnalyzer => self.dependency_analyzer(req),
        })
    }
}
