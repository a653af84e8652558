use tree_sitter::Node;

use super::syntax::{child_of_kind, field, field_text, line_count, named_children, parse, push_unique, text, visit};
use super::{ExtractError, Extractor, FileFacts};
use crate::ir::{AttributeDef, ClassDef, ClassKind, FunctionDef, Language, MethodDef, Parameter, Visibility};

pub(crate) struct PhpExtractor;

impl Extractor for PhpExtractor {
    fn language(&self) -> Language {
        Language::Php
    }

    fn extract_file(&self, rel_path: &str, source: &str) -> Result<FileFacts, ExtractError> {
        let tree = parse(Language::Php, tree_sitter_php::LANGUAGE_PHP.into(), source)?;
        let root = tree.root_node();
        let mut facts = FileFacts { had_errors: root.has_error(), ..Default::default() };
        let mut namespace = None;
        scan(root, source, rel_path, &mut namespace, &mut facts);
        Ok(facts)
    }
}

fn scan(node: Node<'_>, src: &str, file: &str, ns: &mut Option<String>, out: &mut FileFacts) {
    for child in named_children(node) {
        match child.kind() {
            "namespace_definition" => {
                let name = field_text(child, "name", src);
                if let Some(body) = field(child, "body") {
                    let mut inner = name;
                    scan(body, src, file, &mut inner, out);
                } else {
                    *ns = name;
                }
            }
            "class_declaration" | "interface_declaration" | "trait_declaration" | "enum_declaration" => {
                if let Some(c) = class(child, src, file, ns.as_deref()) {
                    out.classes.push(c);
                }
            }
            "function_definition" => {
                if let Some(name) = field_text(child, "name", src) {
                    out.functions.push(FunctionDef {
                        name,
                        source_file: file.to_string(),
                        parameters: parameters(child, src, None),
                        calls: field(child, "body").map(|b| calls(b, src)).unwrap_or_default(),
                        line_count: line_count(child),
                    });
                }
            }
            "ERROR" | "program" | "compound_statement" => scan(child, src, file, ns, out),
            _ => {}
        }
    }
}

fn visibility(node: Node<'_>, src: &str) -> Visibility {
    child_of_kind(node, "visibility_modifier")
        .map(|m| Visibility::raw(text(m, src).to_ascii_lowercase()))
        .unwrap_or_default()
}

fn names_in(node: Node<'_>, src: &str) -> Vec<String> {
    let mut out = Vec::new();
    for n in named_children(node) {
        if matches!(n.kind(), "name" | "qualified_name") {
            push_unique(&mut out, text(n, src));
        }
    }
    out
}

fn class(node: Node<'_>, src: &str, file: &str, ns: Option<&str>) -> Option<ClassDef> {
    let name = field_text(node, "name", src)?;
    let kind = match node.kind() {
        "interface_declaration" => ClassKind::Interface,
        "enum_declaration" => ClassKind::Enum,
        _ => ClassKind::Class,
    };
    let mut c = ClassDef {
        qualified_name: ns.map(|n| format!("{n}\\{name}")),
        name,
        kind,
        source_file: file.to_string(),
        ..Default::default()
    };
    if let Some(base) = child_of_kind(node, "base_clause") {
        c.extends = names_in(base, src);
    }
    if let Some(ifaces) = child_of_kind(node, "class_interface_clause") {
        c.implements = names_in(ifaces, src);
    }
    let Some(body) = field(node, "body") else {
        return Some(c);
    };
    for member in named_children(body) {
        match member.kind() {
            "property_declaration" => {
                let vis = visibility(member, src);
                let ty = field_text(member, "type", src);
                for el in named_children(member) {
                    if el.kind() == "property_element" {
                        if let Some(var) = field(el, "name").or_else(|| child_of_kind(el, "variable_name")) {
                            c.attributes.push(AttributeDef {
                                name: text(var, src).trim_start_matches('$').to_string(),
                                visibility: vis.clone(),
                                type_annotation: ty.clone(),
                            });
                        }
                    }
                }
            }
            "const_declaration" => {
                let vis = visibility(member, src);
                for el in named_children(member) {
                    if el.kind() == "const_element" {
                        if let Some(n) = child_of_kind(el, "name") {
                            c.attributes.push(AttributeDef {
                                name: text(n, src).to_string(),
                                visibility: vis.clone(),
                                type_annotation: None,
                            });
                        }
                    }
                }
            }
            "enum_case" => {
                if let Some(n) = field_text(member, "name", src) {
                    c.attributes.push(AttributeDef { name: n, visibility: Visibility::Public, type_annotation: None });
                }
            }
            "method_declaration" => {
                let Some(name) = field_text(member, "name", src) else { continue };
                let params = parameters(member, src, Some(&mut c.attributes));
                c.methods.push(MethodDef {
                    name,
                    visibility: visibility(member, src),
                    type_annotation: field_text(member, "return_type", src),
                    parameters: params,
                    calls: field(member, "body").map(|b| calls(b, src)).unwrap_or_default(),
                });
            }
            _ => {}
        }
    }
    Some(c)
}

/// Constructor-promoted parameters also become attributes.
fn parameters(node: Node<'_>, src: &str, mut promoted: Option<&mut Vec<AttributeDef>>) -> Vec<Parameter> {
    let mut out = Vec::new();
    let Some(params) = field(node, "parameters") else {
        return out;
    };
    for p in named_children(params) {
        if !matches!(p.kind(), "simple_parameter" | "variadic_parameter" | "property_promotion_parameter") {
            continue;
        }
        let name = field(p, "name")
            .map(|n| text(n, src).trim_start_matches('$').to_string())
            .unwrap_or_default();
        let ty = field_text(p, "type", src);
        if p.kind() == "property_promotion_parameter" {
            if let Some(attrs) = promoted.as_deref_mut() {
                attrs.push(AttributeDef { name: name.clone(), visibility: visibility(p, src), type_annotation: ty.clone() });
            }
        }
        out.push(Parameter { name, type_annotation: ty });
    }
    out
}

fn calls(body: Node<'_>, src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let stop = |n: Node<'_>| matches!(n.kind(), "class_declaration" | "anonymous_class");
    visit(body, &stop, &mut |n| {
        let callee = match n.kind() {
            "function_call_expression" => field(n, "function").map(|f| {
                let t = text(f, src);
                t.rsplit('\\').next().unwrap_or(t)
            }),
            "member_call_expression" | "nullsafe_member_call_expression" | "scoped_call_expression" => {
                field(n, "name").map(|f| text(f, src))
            }
            _ => None,
        };
        if let Some(c) = callee {
            if !c.starts_with('$') {
                push_unique(&mut out, c);
            }
        }
    });
    out
}
