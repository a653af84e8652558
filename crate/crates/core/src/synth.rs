//! Seeded generator of raw IRs for fuzzing, benchmarks and demos.
//!
//! The output carries every defect normalization is meant to remove:
//! raw visibility modifiers, qualified and generic inheritance targets,
//! and memberless classes or trivial functions.

use rand::seq::IndexedRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ir::{AttributeDef, ClassDef, ClassKind, FunctionDef, Language, MethodDef, Parameter, ProjectIr, Visibility};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub classes: usize,
    pub functions: usize,
    pub max_methods: usize,
    pub max_attributes: usize,
    pub max_parameters: usize,
    pub max_calls: usize,
    /// Upper bound on type annotation length; drives serialized size.
    pub max_annotation_len: usize,
    /// Fraction of classes and functions generated as noise.
    pub noise_ratio: f64,
    pub infra_entries: usize,
}

impl SynthSpec {
    /// About 70% classes and 30% functions.
    pub fn with_elements(n: usize) -> Self {
        let classes = n * 7 / 10;
        SynthSpec { classes, functions: n - classes, ..SynthSpec::default() }
    }
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            classes: 70,
            functions: 30,
            max_methods: 12,
            max_attributes: 8,
            max_parameters: 4,
            max_calls: 6,
            max_annotation_len: 24,
            noise_ratio: 0.05,
            infra_entries: 2,
        }
    }
}

const LANGS: [Language; 4] = [Language::Java, Language::Python, Language::JavaScript, Language::Php];
const SUFFIXES: [&str; 12] = [
    "Service", "Controller", "Repository", "Manager", "Handler", "Factory", "Model", "Helper", "Util", "Record",
    "Adapter", "View",
];
const VERBS: [&str; 10] = ["get", "set", "load", "save", "build", "parse", "render", "check", "send", "update"];
const NOUNS: [&str; 10] = ["User", "Order", "Item", "Config", "Token", "Page", "Event", "Report", "Cart", "Price"];
const MODIFIERS: [&str; 12] =
    ["", "", "public", "private", "protected", "package", "internal", "#", "var", "static", "readonly", "fileprivate"];
const EXTERNAL_CALLS: [&str; 6] = ["print", "log.info", "console.log", "json_encode", "len", "Math.max"];

fn ext(lang: Language) -> &'static str {
    match lang {
        Language::Java => "java",
        Language::Python => "py",
        Language::JavaScript => "js",
        Language::Php => "php",
    }
}

fn member_name(rng: &mut ChaCha8Rng, lang: Language) -> String {
    let base = format!("{}{}", VERBS.choose(rng).unwrap(), NOUNS.choose(rng).unwrap());
    if lang == Language::Python {
        match rng.random_range(0..6) {
            0 => format!("_{base}"),
            1 => format!("__{base}"),
            2 => "__init__".to_string(),
            _ => base,
        }
    } else {
        base
    }
}

fn annotation(rng: &mut ChaCha8Rng, max: usize) -> Option<String> {
    if max == 0 || rng.random_bool(0.3) {
        return None;
    }
    let len = rng.random_range(1..=max);
    let mut s = String::from(*NOUNS.choose(rng).unwrap());
    while s.len() < len {
        s.push_str(NOUNS.choose(rng).unwrap());
    }
    s.truncate(len);
    Some(s)
}

fn visibility(rng: &mut ChaCha8Rng) -> Visibility {
    Visibility::raw(*MODIFIERS.choose(rng).unwrap())
}

fn inheritance_target(rng: &mut ChaCha8Rng, base: &str) -> String {
    match rng.random_range(0..5) {
        0 => format!("com.acme.core.{base}"),
        1 => format!("\\App\\Base\\{base}"),
        2 => format!("{base}<T>"),
        3 => format!("pkg::{base}"),
        _ => base.to_string(),
    }
}

/// Deterministic in `(spec, seed)`.
pub fn synthetic_ir(spec: &SynthSpec, seed: u64) -> ProjectIr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ir = ProjectIr::new(format!("synthetic-{seed}"));

    let class_names: Vec<String> = (0..spec.classes)
        .map(|i| format!("{}{}{}", NOUNS[i % NOUNS.len()], SUFFIXES[(i / NOUNS.len()) % SUFFIXES.len()], i))
        .collect();
    let function_names: Vec<String> = (0..spec.functions)
        .map(|i| format!("{}_{}_{i}", VERBS[i % VERBS.len()], NOUNS[(i / VERBS.len()) % NOUNS.len()].to_lowercase()))
        .collect();

    let mut callable: Vec<String> = function_names.clone();
    callable.extend(EXTERNAL_CALLS.iter().map(|s| s.to_string()));

    for (i, name) in class_names.iter().enumerate() {
        let lang = LANGS[rng.random_range(0..LANGS.len())];
        ir.languages.insert(lang);
        let mut c = ClassDef::new(name.clone());
        c.source_file = format!("src/mod{}/{}.{}", i % 17, name, ext(lang));
        c.qualified_name = Some(format!("app.mod{}.{name}", i % 17));
        c.visibility = visibility(&mut rng);
        c.kind = match rng.random_range(0..10) {
            0 => ClassKind::Interface,
            1 => ClassKind::Enum,
            _ => ClassKind::Class,
        };
        let noise = rng.random_bool(spec.noise_ratio);
        if !noise {
            for _ in 0..rng.random_range(0..=spec.max_methods) {
                let parameters = (0..rng.random_range(0..=spec.max_parameters))
                    .map(|p| Parameter { name: format!("p{p}"), type_annotation: annotation(&mut rng, spec.max_annotation_len) })
                    .collect();
                let calls = (0..rng.random_range(0..=spec.max_calls))
                    .map(|_| callable.choose(&mut rng).unwrap().clone())
                    .collect();
                c.methods.push(MethodDef {
                    name: member_name(&mut rng, lang),
                    visibility: visibility(&mut rng),
                    type_annotation: annotation(&mut rng, spec.max_annotation_len),
                    parameters,
                    calls,
                });
            }
            for a in 0..rng.random_range(0..=spec.max_attributes) {
                c.attributes.push(AttributeDef {
                    name: format!("field{a}"),
                    visibility: visibility(&mut rng),
                    type_annotation: annotation(&mut rng, spec.max_annotation_len),
                });
            }
            if i > 0 && rng.random_bool(0.3) {
                let base = &class_names[rng.random_range(0..i)];
                c.extends.push(inheritance_target(&mut rng, base));
            }
            if i > 0 && rng.random_bool(0.2) {
                let base = &class_names[rng.random_range(0..i)];
                c.implements.push(inheritance_target(&mut rng, base));
            }
        }
        ir.classes.push(c);
    }

    for (i, name) in function_names.iter().enumerate() {
        let lang = LANGS[rng.random_range(0..LANGS.len())];
        ir.languages.insert(lang);
        let mut f = FunctionDef::new(name.clone());
        f.source_file = format!("src/mod{}/funcs.{}", i % 11, ext(lang));
        if rng.random_bool(spec.noise_ratio) {
            f.line_count = 1;
        } else {
            f.line_count = rng.random_range(2..200);
            f.parameters = (0..rng.random_range(0..=spec.max_parameters))
                .map(|p| Parameter { name: format!("arg{p}"), type_annotation: annotation(&mut rng, spec.max_annotation_len) })
                .collect();
            f.calls = (0..rng.random_range(0..=spec.max_calls)).map(|_| callable.choose(&mut rng).unwrap().clone()).collect();
        }
        ir.functions.push(f);
    }

    for k in 0..spec.infra_entries {
        ir.metadata.insert(format!("docker:services/svc{k}/Dockerfile"), format!("image=python:3.{k}; port={}", 8000 + k));
    }
    ir.metadata.insert("file_count".into(), (spec.classes + spec.functions).to_string());
    ir
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::normalize;

    #[test]
    fn deterministic_and_sized() {
        let spec = SynthSpec::with_elements(100);
        let a = synthetic_ir(&spec, 7);
        assert_eq!(a, synthetic_ir(&spec, 7));
        assert_ne!(a, synthetic_ir(&spec, 8));
        assert_eq!(a.element_count(), 100);
        assert!(!a.normalized);
        let n = normalize(a);
        n.validate().unwrap();
    }
}
