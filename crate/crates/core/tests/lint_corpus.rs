use std::path::{Path, PathBuf};

use c2u_core::puml::{apply_fixes, lint, lint_text, parse_artifact, Verdict};
use c2u_core::DiagramType;

fn corpus() -> Vec<(DiagramType, Verdict, PathBuf)> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/puml");
    let mut out = Vec::new();
    for dt in DiagramType::ALL {
        let mut files: Vec<PathBuf> = std::fs::read_dir(root.join(dt.as_str()))
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "puml"))
            .collect();
        files.sort();
        for path in files {
            let stem = path.file_stem().unwrap().to_str().unwrap();
            let verdict = match stem.rsplit('.').next().unwrap() {
                "valid" => Verdict::Valid,
                "corrected" => Verdict::Corrected,
                "uncorrectable" => Verdict::Uncorrectable,
                other => panic!("bad verdict suffix {other}"),
            };
            out.push((dt, verdict, path));
        }
    }
    out
}

#[test]
fn corpus_covers_every_type() {
    let files = corpus();
    assert!(files.len() >= 21);
    for dt in DiagramType::ALL {
        assert!(files.iter().filter(|f| f.0 == dt).count() >= 3, "{dt}");
        assert!(files.iter().any(|f| f.0 == dt && f.1 == Verdict::Valid), "{dt} lacks a clean file");
    }
}

#[test]
fn corpus_verdicts_match() {
    for (dt, expected, path) in corpus() {
        let text = std::fs::read_to_string(&path).unwrap();
        let report = lint_text(&text, dt);
        assert_eq!(report.verdict, expected, "{}: {:?}", path.display(), report.violations);
    }
}

#[test]
fn corrected_files_relint_valid_and_fixes_are_idempotent() {
    for (dt, expected, path) in corpus() {
        let text = std::fs::read_to_string(&path).unwrap();
        let artifact = parse_artifact(&text, dt);
        let report = lint(&artifact);
        match expected {
            Verdict::Uncorrectable => assert!(apply_fixes(&artifact, &report).is_err()),
            _ => {
                let fixed = apply_fixes(&artifact, &report).unwrap();
                let again = lint(&fixed);
                assert_eq!(again.verdict, Verdict::Valid, "{}: {:?}\n{}", path.display(), again.violations, fixed.text);
                let twice = apply_fixes(&fixed, &again).unwrap();
                assert_eq!(twice.text, fixed.text, "{}", path.display());
                let before = artifact.element_names();
                assert!(fixed.element_names().iter().all(|n| before.contains(n)), "{}", path.display());
            }
        }
    }
}

#[test]
fn named_defects_are_detected() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/puml");
    let cases = [
        ("activity/continue.corrected.puml", DiagramType::Activity, "R4"),
        ("activity/else_if.corrected.puml", DiagramType::Activity, "R5"),
        ("deployment/device.corrected.puml", DiagramType::Deployment, "R6"),
        ("component/ortho.corrected.puml", DiagramType::Component, "R3"),
        ("class/ortho_and_braces.corrected.puml", DiagramType::Class, "R2"),
        ("sequence/participant_stereotypes.corrected.puml", DiagramType::Sequence, "R7"),
        ("sequence/missing_delimiters.corrected.puml", DiagramType::Sequence, "R1"),
        ("system_context/c4_stereotypes.uncorrectable.puml", DiagramType::SystemContext, "R9"),
        ("class/placeholder.uncorrectable.puml", DiagramType::Class, "R8"),
    ];
    for (file, dt, rule) in cases {
        let report = lint_text(&std::fs::read_to_string(root.join(file)).unwrap(), dt);
        assert!(report.violated_rules().iter().any(|r| *r == rule), "{file}: {:?}", report.violated_rules());
    }
}
