use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use c2u_core::ir::MethodDef;
use c2u_core::normalize::normalize;
use c2u_core::synth::{synthetic_ir, SynthSpec};
use c2u_core::view::{rank_elements, scale_detail, IrView, ScoreWeights};
use c2u_core::{ClassDef, DiagramType, ProjectIr};
use serde_json::json;

fn shop() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/shop")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn c2u(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_c2u")).args(args).env_remove("C2U_BACKEND").output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| (e.path().strip_prefix(root).unwrap().display().to_string(), std::fs::read(e.path()).unwrap()))
        .collect()
}

fn puml_files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(Result::ok)
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".puml"))
        .collect();
    v.sort();
    v
}

#[test]
fn extract_writes_ir_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = c2u(&["extract", s(&shop()), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let ir = ProjectIr::read_file(dir.path().join("shop.norm.ir.json")).unwrap();
    assert!(ir.normalized);
    assert!(ir.element_count() > 0);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("shop.extraction.json")).unwrap()).unwrap();
    assert_eq!(report["files_with_errors"], 1);
    assert!(stdout(&o).contains("scanned 7 files"));
}

#[test]
fn extract_raw_skips_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let o = c2u(&["extract", s(&shop()), "--out", s(dir.path()), "--raw", "--name", "raw_shop"]);
    assert_eq!(o.status.code(), Some(0));
    let ir = ProjectIr::read_file(dir.path().join("raw_shop.raw.ir.json")).unwrap();
    assert!(!ir.normalized);
    assert_eq!(ir.project_name, "raw_shop");
    assert!(stdout(&o).contains("normalized=false"));
}

#[test]
fn extract_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(c2u(&["extract", s(&empty), "--out", s(dir.path())]).status.code(), Some(2));
    let o = c2u(&["extract", s(&dir.path().join("missing")), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing"));
}

fn write_ir(dir: &Path, ir: &ProjectIr) -> PathBuf {
    let path = dir.join(format!("{}.norm.ir.json", ir.project_name));
    ir.write_file(&path).unwrap();
    path
}

#[test]
fn view_reports_shrinking() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(c2u(&["extract", s(&shop()), "--out", s(dir.path())]).status.code(), Some(0));
    let o = c2u(&["view", s(&dir.path().join("shop.norm.ir.json")), "--diagram", "class", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 shrink iterations"), "{}", stdout(&o));

    let spec = SynthSpec { max_methods: 30, max_annotation_len: 20, ..SynthSpec::with_elements(3000) };
    let mut big = normalize(synthetic_ir(&spec, 7));
    big.project_name = "big".into();
    let ir_path = write_ir(dir.path(), &big);
    let o = c2u(&["view", s(&ir_path), "--diagram", "all", "--out", s(&dir.path().join("big")), "--explain"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let view = IrView::from_json(&std::fs::read(dir.path().join("big/view_class.json")).unwrap()).unwrap();
    assert!(view.shrink_iterations > 0);
    // An unshrunk projection of every ranked class, measured with the plain
    // serializer, must already exceed the budget.
    let ranked = rank_elements(&big, DiagramType::Class, &ScoreWeights::default());
    let caps = scale_detail(big.element_count());
    let full = c2u_core::view::project(&ranked, &big, DiagramType::Class, caps);
    assert!(serde_json::to_vec(&full).unwrap().len() > 100 * 1024);
    assert_eq!(std::fs::read_dir(dir.path().join("big")).unwrap().count(), 14);
}

#[test]
fn view_rejects_unknown_types() {
    let dir = tempfile::tempdir().unwrap();
    let ir_path = write_ir(dir.path(), &normalize(ProjectIr::new("p")));
    let o = c2u(&["view", s(&ir_path), "--diagram", "flowchart"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown diagram type"));
    assert_eq!(c2u(&["view"]).status.code(), Some(1));
}

#[test]
fn config_ranges_are_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c2u.toml");
    std::fs::write(&cfg, "[budgets]\nsingle = 1024\n").unwrap();
    let ir_path = write_ir(dir.path(), &normalize(ProjectIr::new("p")));
    let o = c2u(&["view", s(&ir_path), "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("budgets.single"));
}

#[test]
fn generate_component_with_mock_backend() {
    let dir = tempfile::tempdir().unwrap();
    let o = c2u(&["generate", s(&shop()), "--diagram", "component", "--out", s(dir.path()), "--deterministic"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run = dir.path().join("shop");
    assert_eq!(puml_files(&run.join("component")), ["01_component.puml"]);
    assert!(run.join("component/01_component.lint.json").is_file());
    assert!(run.join("views/view_component.json").is_file());
    let events = std::fs::read_to_string(run.join("events.jsonl")).unwrap();
    assert_eq!(events.lines().filter(|l| l.contains("\"session_end\"")).count(), 2);
    assert!(events.lines().all(|l| l.contains("\"timestamp_us\":0")));
}

#[test]
fn generate_class_follows_a_scripted_plan() {
    let dir = tempfile::tempdir().unwrap();
    let scripts = dir.path().join("scripts");
    std::fs::create_dir(&scripts).unwrap();
    let plan = json!({ "scopes": [
        { "label": "Orders", "files": ["repo/backend/src/main/java/com/shop/OrderService.java"] },
        { "label": "Reports", "files": ["repo/scripts/reports.py"] },
        { "label": "Web", "files": ["repo/web/src/cart.js"] },
    ]});
    let script = json!({ "turns": [
        [{ "type": "tool_call", "id": "w", "tool": "Write", "input": { "path": "{{plan_path}}", "content": plan.to_string() } }],
        [{ "type": "text", "text": "planned" }],
    ]});
    std::fs::write(scripts.join("planner.json"), script.to_string()).unwrap();

    let out = dir.path().join("out");
    let o = c2u(&["generate", s(&shop()), "--diagram", "class", "--out", s(&out), "--scripts", s(&scripts)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(puml_files(&out.join("shop/class")), ["01_orders.puml", "02_reports.puml", "03_web.puml"]);
    let run: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("shop/run.json")).unwrap()).unwrap();
    assert_eq!(run[0]["sessions"], 10);
    assert_eq!(run[0]["scopes"], json!(["Orders", "Reports", "Web"]));
}

#[test]
fn generate_from_ir_needs_the_repo() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(c2u(&["extract", s(&shop()), "--out", s(dir.path())]).status.code(), Some(0));
    let ir = dir.path().join("shop.norm.ir.json");
    let out = dir.path().join("out");
    let o = c2u(&["generate", s(&ir), "--diagram", "deployment", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--repo"));
    let o = c2u(&["generate", s(&ir), "--diagram", "deployment", "--out", s(&out), "--repo", s(&shop())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(puml_files(&out.join("shop/deployment")).len(), 1);
}

#[test]
fn api_backend_without_key_fails_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_c2u"))
        .args(["generate", s(&shop()), "--diagram", "component", "--out", s(&out)])
        .env("C2U_BACKEND", "api")
        .env("C2U_API_URL", "http://127.0.0.1:9")
        .env_remove("C2U_API_KEY")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("C2U_API_KEY"));
    assert!(!out.exists());
}

#[test]
fn error_events_force_a_failing_exit() {
    let dir = tempfile::tempdir().unwrap();
    let scripts = dir.path().join("scripts");
    std::fs::create_dir(&scripts).unwrap();
    std::fs::write(scripts.join("diagram.json"), json!({ "turns": [[{ "type": "text", "text": "nothing to draw" }]] }).to_string()).unwrap();
    let out = dir.path().join("out");
    let o = c2u(&["generate", s(&shop()), "--diagram", "component", "--out", s(&out), "--scripts", s(&scripts)]);
    assert_eq!(o.status.code(), Some(1));
    let events = std::fs::read_to_string(out.join("shop/events.jsonl")).unwrap();
    assert!(events.contains("\"kind\":\"error\""));
}

fn lint_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn lint_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let clean = lint_file(dir.path(), "clean.puml", "@startuml\nclass Order\nclass Customer\nCustomer --> Order : places\n@enduml\n");
    assert_eq!(c2u(&["lint", s(&clean), "--type", "class"]).status.code(), Some(0));

    let activity = "@startuml\nstart\n:Receive order;\nif (in stock?) then (yes)\n  :Ship;\nelse (no)\n  continue\nendif\nstop\n@enduml\n";
    let file = lint_file(dir.path(), "act.puml", activity);
    let o = c2u(&["lint", s(&file), "--type", "activity"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(std::fs::read_to_string(&file).unwrap(), activity);
    let o = c2u(&["lint", s(&file), "--type", "activity", "--fix"]);
    assert_eq!(o.status.code(), Some(3));
    let fixed = std::fs::read_to_string(&file).unwrap();
    assert!(!fixed.contains("continue"));
    assert_eq!(c2u(&["lint", s(&file), "--type", "activity"]).status.code(), Some(0));

    let c4 = "@startuml\n!include <C4/C4_Context>\nPerson(customer, \"Customer\")\nSystem(shop, \"Shop\")\nRel(customer, shop, \"Buys\")\n@enduml\n";
    let file = lint_file(dir.path(), "ctx.puml", c4);
    let o = c2u(&["lint", s(&file), "--type", "system_context", "--json", "--fix"]);
    assert_eq!(o.status.code(), Some(4));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["verdict"], "uncorrectable");
    assert_eq!(std::fs::read_to_string(&file).unwrap(), c4);
}

fn ten_entity_ir(dir: &Path) -> PathBuf {
    let mut ir = ProjectIr::new("ten");
    for name in ["Alpha", "Bravo", "Charlie", "Delta", "Echo", "Foxtrot", "Golf", "Hotel", "India", "Juliet"] {
        let mut c = ClassDef::new(name);
        c.source_file = format!("src/{name}.java");
        c.methods.push(MethodDef { name: "run".into(), visibility: Default::default(), type_annotation: None, parameters: vec![], calls: vec![] });
        ir.classes.push(c);
    }
    let ir = normalize(ir);
    assert_eq!(ir.element_count(), 10);
    write_ir(dir, &ir)
}

#[test]
fn metrics_recall_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let ir = ten_entity_ir(dir.path());
    let diagrams = dir.path().join("diagrams/class");
    std::fs::create_dir_all(&diagrams).unwrap();
    std::fs::write(diagrams.join("01_a.puml"), "@startuml\nclass Alpha\nclass Bravo\nAlpha --> Bravo : uses\n@enduml\n").unwrap();
    std::fs::write(diagrams.join("02_b.puml"), "@startuml\nclass Charlie\nclass Bravo\n@enduml\n").unwrap();
    let out = dir.path().join("m");
    let o = c2u(&["metrics", "--ir", s(&ir), "--diagrams", s(&dir.path().join("diagrams")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reports: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("metrics.json")).unwrap()).unwrap();
    assert!((reports[0]["entity_recall"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert!(std::fs::read_to_string(out.join("observations.csv")).unwrap().contains(",0.300,"));

    let empty = dir.path().join("none");
    std::fs::create_dir(&empty).unwrap();
    let o = c2u(&["metrics", "--ir", s(&ir), "--diagrams", s(&empty), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no .puml files"));
}

#[test]
fn metrics_prefers_the_pre_fix_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures().join("corpus.toml");
    let out = dir.path().join("ev");
    assert_eq!(c2u(&["evaluate", "--corpus", s(&corpus), "--out", s(&out), "--deterministic"]).status.code(), Some(0));
    let run = out.join("shop");
    let m = dir.path().join("m");
    let o = c2u(&["metrics", "--ir", s(&run.join("ir/shop.norm.ir.json")), "--diagrams", s(&run), "--out", s(&m)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // The diagrams on disk are already fixed; the tables must still agree
    // with the evaluation, which scored the generated text.
    let ablation = |p: &Path| std::fs::read_to_string(p.join("ablation.csv")).unwrap();
    let lines = |t: String| t.lines().filter(|l| !l.starts_with("overall")).map(String::from).collect::<Vec<_>>();
    let from_eval: Vec<String> = std::fs::read_dir(run.join("observations"))
        .unwrap()
        .map(|e| serde_json::from_slice::<serde_json::Value>(&std::fs::read(e.unwrap().path()).unwrap()).unwrap())
        .map(|v| format!("{}:{}", v["diagram_type"].as_str().unwrap(), v["ablation"].as_str().unwrap()))
        .collect();
    let from_metrics: serde_json::Value = serde_json::from_slice(&std::fs::read(m.join("metrics.json")).unwrap()).unwrap();
    for r in from_metrics.as_array().unwrap() {
        let key = format!("{}:{}", r["diagram_type"].as_str().unwrap(), r["ablation"].as_str().unwrap());
        assert!(from_eval.contains(&key), "{key}");
    }
    assert_eq!(lines(ablation(&m)).len(), 8);
}

#[test]
fn evaluate_resumes_finished_observations() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures().join("corpus.toml");
    let out = dir.path().join("ev");
    assert_eq!(c2u(&["evaluate", "--corpus", s(&corpus), "--out", s(&out), "--deterministic"]).status.code(), Some(0));
    let before = tree(&out);

    let obs = out.join("library/observations/class.json");
    let mut report: serde_json::Value = serde_json::from_slice(&std::fs::read(&obs).unwrap()).unwrap();
    report["diagram_count"] = json!(99);
    std::fs::write(&obs, serde_json::to_string_pretty(&report).unwrap() + "\n").unwrap();
    std::fs::remove_file(out.join("library/observations/sequence.json")).unwrap();
    std::fs::remove_dir_all(out.join("library/sequence")).unwrap();

    let o = c2u(&["evaluate", "--corpus", s(&corpus), "--out", s(&out), "--deterministic", "--resume"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("observations.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("library,python,class,99,")));
    assert_eq!(std::fs::read(out.join("library/observations/sequence.json")).unwrap(), before["library/observations/sequence.json"]);
    assert_eq!(std::fs::read(out.join("library/sequence/01_catalog.puml")).unwrap(), before["library/sequence/01_catalog.puml"]);
    let events = std::fs::read_to_string(out.join("library/events.jsonl")).unwrap();
    assert!(events.len() > before["library/events.jsonl"].len());

    let o = c2u(&["evaluate", "--corpus", s(&corpus), "--out", s(&out), "--deterministic"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(tree(&out), before);
}

#[test]
fn malformed_corpus_entries_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.toml");
    std::fs::write(&corpus, format!("[[corpus]]\npath = {:?}\n\n[[corpus]]\nname = \"ghost\"\npath = \"nowhere\"\n", s(&shop()))).unwrap();
    let o = c2u(&["evaluate", "--corpus", s(&corpus), "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("corpus entry 1 (ghost)"), "{}", stderr(&o));

    std::fs::write(&corpus, "[[corpus]]\npath = \"a\"\nlanguages = [\"cobol\"]\n").unwrap();
    let o = c2u(&["evaluate", "--corpus", s(&corpus)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("corpus[0].languages[0]"), "{}", stderr(&o));

    std::fs::write(&corpus, "backend = \"mock\"\n").unwrap();
    assert_eq!(c2u(&["evaluate", "--corpus", s(&corpus)]).status.code(), Some(1));
}
