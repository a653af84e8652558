//! Deterministic post-processing of a raw IR into the canonical schema.
//!
//! Three transformations, applied in a fixed order by [`normalize`]:
//! noise filtering, inheritance canonicalization, visibility mapping.
//! Each is idempotent and none introduces a name that was not in its input.

use crate::ir::{ClassDef, FunctionDef, Language, ProjectIr, Visibility};

/// Maps language-specific modifiers onto the four UML visibilities.
///
/// Values that are already canonical are left alone. Raw modifiers are
/// resolved per source language:
///
/// | language   | rule                                                        |
/// |------------|-------------------------------------------------------------|
/// | Java       | modifier as written, none means `package`                   |
/// | PHP        | modifier as written, none means `public` (PHP's default)    |
/// | Python     | `__x` private, `_x` protected, otherwise public             |
/// | JavaScript | `#x` private, TypeScript-style modifiers as written, else public |
///
/// Anything unrecognized becomes `package`.
pub fn normalize_visibility(mut ir: ProjectIr) -> ProjectIr {
    for class in &mut ir.classes {
        let lang = class.language();
        let class_name = class.name.clone();
        resolve(&mut class.visibility, lang, &class_name);
        for m in &mut class.methods {
            resolve(&mut m.visibility, lang, &m.name);
        }
        for a in &mut class.attributes {
            resolve(&mut a.visibility, lang, &a.name);
        }
    }
    ir
}

fn resolve(vis: &mut Visibility, lang: Option<Language>, name: &str) {
    let Visibility::Raw(modifier) = vis else {
        return;
    };
    let modifier = modifier.trim().to_ascii_lowercase();
    let explicit = match modifier.as_str() {
        "public" => Some(Visibility::Public),
        "private" => Some(Visibility::Private),
        "protected" => Some(Visibility::Protected),
        "package" | "internal" => Some(Visibility::Package),
        _ => None,
    };
    *vis = match (explicit, lang) {
        (Some(v), _) => v,
        (None, Some(Language::Python)) if modifier.is_empty() => python_visibility(name),
        (None, Some(Language::JavaScript)) if modifier == "#" => Visibility::Private,
        (None, Some(Language::JavaScript)) if modifier.is_empty() => Visibility::Public,
        (None, Some(Language::Php)) if modifier.is_empty() || modifier == "var" => Visibility::Public,
        _ => Visibility::Package,
    };
}

fn python_visibility(name: &str) -> Visibility {
    let dunder = name.starts_with("__") && name.ends_with("__") && name.len() > 4;
    if dunder {
        Visibility::Public
    } else if name.starts_with("__") {
        Visibility::Private
    } else if name.starts_with('_') {
        Visibility::Protected
    } else {
        Visibility::Public
    }
}

/// Final segment of a dotted, backslash- or `::`-separated path, with any
/// generic arguments removed.
pub fn simple_name(target: &str) -> &str {
    let t = target.trim();
    let t = t.find(['<', '[', '(']).map_or(t, |i| &t[..i]).trim_end();
    let t = t.trim_end_matches(['.', '\\', ':', '/']);
    t.rsplit(['.', '\\', ':', '/']).next().unwrap_or(t)
}

/// Reduces every inheritance target (and the class name itself) to its
/// simple name, then drops duplicates keeping the first occurrence.
pub fn canonicalize_inheritance(mut ir: ProjectIr) -> ProjectIr {
    for class in &mut ir.classes {
        let simple = simple_name(&class.name);
        if simple != class.name && !simple.is_empty() {
            class.name = simple.to_string();
        }
        class.extends = canonical_targets(&class.extends);
        class.implements = canonical_targets(&class.implements);
    }
    ir
}

fn canonical_targets(targets: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(targets.len());
    for t in targets {
        let s = simple_name(t);
        if !s.is_empty() && !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

pub fn is_noise_class(c: &ClassDef) -> bool {
    c.methods.is_empty() && c.attributes.is_empty() && !c.has_inheritance()
}

pub fn is_noise_function(f: &FunctionDef) -> bool {
    f.line_count < 2 && f.calls.is_empty()
}

/// Drops memberless classes without inheritance links and one-line
/// functions that call nothing.
pub fn filter_noise(mut ir: ProjectIr) -> ProjectIr {
    ir.classes.retain(|c| !is_noise_class(c));
    ir.functions.retain(|f| !is_noise_function(f));
    ir
}

/// filter → canonicalize → visibility, then marks the IR normalized.
pub fn normalize(ir: ProjectIr) -> ProjectIr {
    let mut ir = normalize_visibility(canonicalize_inheritance(filter_noise(ir)));
    ir.normalized = true;
    ir
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{AttributeDef, MethodDef};

    fn class(name: &str, file: &str) -> ClassDef {
        ClassDef { source_file: file.into(), ..ClassDef::new(name) }
    }

    fn method(name: &str, vis: Visibility) -> MethodDef {
        MethodDef { name: name.into(), visibility: vis, ..Default::default() }
    }

    fn ir_with(classes: Vec<ClassDef>) -> ProjectIr {
        ProjectIr { classes, ..ProjectIr::new("p") }
    }

    #[test]
    fn java_visibility() {
        let mut c = class("A", "A.java");
        c.methods.push(method("a", Visibility::Protected));
        c.methods.push(method("b", Visibility::default()));
        let ir = normalize_visibility(ir_with(vec![c]));
        let c = &ir.classes[0];
        assert_eq!(c.methods[0].visibility, Visibility::Protected);
        assert_eq!(c.methods[1].visibility, Visibility::Package);
        assert_eq!(c.visibility, Visibility::Package);
    }

    #[test]
    fn python_underscore_rule() {
        let mut c = class("Svc", "svc.py");
        for n in ["_helper", "__secret", "__init__", "run"] {
            c.methods.push(method(n, Visibility::default()));
        }
        let ir = normalize_visibility(ir_with(vec![c]));
        let got: Vec<_> = ir.classes[0].methods.iter().map(|m| m.visibility.clone()).collect();
        assert_eq!(got, [Visibility::Protected, Visibility::Private, Visibility::Public, Visibility::Public]);
    }

    #[test]
    fn javascript_and_php_defaults() {
        let mut js = class("Cart", "cart.js");
        js.attributes.push(AttributeDef { name: "items".into(), visibility: Visibility::raw("#"), ..Default::default() });
        js.attributes.push(AttributeDef { name: "total".into(), ..Default::default() });
        let mut php = class("Mailer", "Mailer.php");
        php.methods.push(method("send", Visibility::default()));
        let ir = normalize_visibility(ir_with(vec![js, php]));
        assert_eq!(ir.classes[0].attributes[0].visibility, Visibility::Private);
        assert_eq!(ir.classes[0].attributes[1].visibility, Visibility::Public);
        assert_eq!(ir.classes[1].methods[0].visibility, Visibility::Public);
    }

    #[test]
    fn unknown_modifier_maps_to_package() {
        let mut c = class("A", "A.java");
        c.methods.push(method("x", Visibility::raw("pub")));
        let ir = normalize_visibility(ir_with(vec![c]));
        assert_eq!(ir.classes[0].methods[0].visibility, Visibility::Package);
    }

    #[test]
    fn inheritance_canonicalization() {
        let cases: [(&[&str], &[&str]); 5] = [
            (&["pkg.Base"], &["Base"]),
            (&["a.B", "c.B"], &["B"]),
            (&["Base"], &["Base"]),
            (&["\\App\\Base\\Mailer", "Mailer"], &["Mailer"]),
            (&["com.x.Repo<User>", "typing.Generic[T]"], &["Repo", "Generic"]),
        ];
        for (input, want) in cases {
            let mut c = class("A", "a.py");
            c.extends = input.iter().map(|s| s.to_string()).collect();
            let ir = canonicalize_inheritance(ir_with(vec![c]));
            assert_eq!(ir.classes[0].extends, want, "{input:?}");
        }
    }

    #[test]
    fn noise_filter() {
        let mut with_method = class("A", "A.java");
        with_method.methods.push(method("m", Visibility::Public));
        let mut inherits_only = class("B", "B.java");
        inherits_only.extends.push("Base".into());
        let marker = class("Marker", "Marker.java");
        let mut ir = ir_with(vec![with_method, inherits_only, marker]);
        ir.functions = vec![
            FunctionDef { line_count: 1, ..FunctionDef::new("tiny") },
            FunctionDef { line_count: 1, calls: vec!["x".into()], ..FunctionDef::new("caller") },
            FunctionDef { line_count: 5, ..FunctionDef::new("long") },
        ];
        let ir = filter_noise(ir);
        let names: Vec<_> = ir.element_names().collect();
        assert_eq!(names, ["A", "B", "caller", "long"]);
    }

    #[test]
    fn combined_fixture_fixes_all_defects() {
        let mut svc = class("Svc", "svc.py");
        svc.extends = vec!["pkg.mod.Base".into(), "other.Base".into()];
        svc.methods.push(method("_helper", Visibility::default()));
        let empty = class("Empty", "e.py");
        let ir = normalize(ir_with(vec![svc, empty]));
        assert!(ir.normalized);
        assert_eq!(ir.classes.len(), 1);
        assert_eq!(ir.classes[0].extends, ["Base"]);
        assert_eq!(ir.classes[0].methods[0].visibility, Visibility::Protected);
        ir.validate().unwrap();
        assert_eq!(normalize(ir.clone()), ir);
    }
}
