use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use c2u_core::extract::{detect_languages, extract_project, ExtractorRegistry};
use c2u_core::normalize::normalize;
use c2u_core::{Language, Visibility};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/shop")
}

fn copy_tree(from: &Path, to: &Path) {
    for entry in walkdir::WalkDir::new(from) {
        let entry = entry.unwrap();
        let rel = entry.path().strip_prefix(from).unwrap();
        let dest = to.join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&dest).unwrap();
        } else {
            fs::copy(entry.path(), &dest).unwrap();
        }
    }
}

fn names(ir: &c2u_core::ProjectIr) -> BTreeSet<String> {
    ir.element_names().map(str::to_string).collect()
}

#[test]
fn malformed_file_does_not_hide_siblings() {
    let root = fixture();
    let langs = detect_languages(&root).unwrap();
    assert_eq!(langs, BTreeSet::from([Language::Java, Language::Python, Language::JavaScript, Language::Php]));
    let (ir, report) = extract_project(&root, &langs, &ExtractorRegistry::default()).unwrap();

    for expected in ["OrderService", "OrderRepository", "Order", "ReportBuilder", "export_report", "Cart", "renderCart", "Mailer"] {
        assert!(names(&ir).contains(expected), "missing {expected}");
    }
    assert_eq!(report.files_with_errors, 1);
    assert_eq!(report.error_files, ["scripts/broken.py"]);
    assert_eq!(report.files_scanned, 7);
    assert!(ir.metadata.keys().any(|k| k.contains("Dockerfile")));
}

#[test]
fn extraction_is_deterministic() {
    let root = fixture();
    let langs = detect_languages(&root).unwrap();
    let a = extract_project(&root, &langs, &ExtractorRegistry::default()).unwrap().0;
    let b = extract_project(&root, &langs, &ExtractorRegistry::default()).unwrap().0;
    assert_eq!(a.to_canonical_json(), b.to_canonical_json());
}

#[test]
fn raw_defects_are_normalized() {
    let root = fixture();
    let langs = detect_languages(&root).unwrap();
    let (raw, _) = extract_project(&root, &langs, &ExtractorRegistry::default()).unwrap();
    assert!(!raw.normalized);
    let ir = normalize(raw);
    ir.validate().unwrap();
    let service = ir.classes.iter().find(|c| c.name == "OrderService").unwrap();
    assert_eq!(service.extends, ["BaseService"]);
    let mailer = ir.classes.iter().find(|c| c.name == "Mailer").unwrap();
    assert_eq!(mailer.extends, ["Transport"]);
    assert!(mailer.attributes.iter().find(|a| a.name.trim_start_matches('$') == "host").unwrap().visibility == Visibility::Public);
    let builder = ir.classes.iter().find(|c| c.name == "ReportBuilder").unwrap();
    let format = builder.methods.iter().find(|m| m.name == "_format").unwrap();
    assert_eq!(format.visibility, Visibility::Protected);
}

#[test]
fn prefixing_a_declaration_keeps_other_entities() {
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&fixture(), dir.path());
    let langs = detect_languages(dir.path()).unwrap();
    let registry = ExtractorRegistry::default();
    let before = names(&extract_project(dir.path(), &langs, &registry).unwrap().0);

    let prefixes = [
        ("scripts/reports.py", "def injected_helper():\n    return 1\n\n"),
        ("scripts/broken.py", "class Injected:\n    pass\n\n"),
        ("web/src/cart.js", "function injectedFn() { return 1; }\n"),
    ];
    for (file, prefix) in prefixes {
        let path = dir.path().join(file);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, format!("{prefix}{text}")).unwrap();
        let after = names(&extract_project(dir.path(), &langs, &registry).unwrap().0);
        let lost: Vec<_> = before.difference(&after).collect();
        assert!(lost.is_empty(), "prefixing {file} lost {lost:?}");
    }
}
