use tree_sitter::Node;

use super::syntax::{
    child_of_kind, field, field_text, named_children, parse, push_unique, strip_type_args, text,
    visit,
};
use super::{ExtractError, Extractor, FileFacts};
use crate::ir::{AttributeDef, ClassDef, ClassKind, Language, MethodDef, Parameter, Visibility};

pub(crate) struct JavaExtractor;

impl Extractor for JavaExtractor {
    fn language(&self) -> Language {
        Language::Java
    }

    fn extract_file(&self, rel_path: &str, source: &str) -> Result<FileFacts, ExtractError> {
        let tree = parse(Language::Java, tree_sitter_java::LANGUAGE.into(), source)?;
        let root = tree.root_node();
        let mut facts = FileFacts { had_errors: root.has_error(), ..Default::default() };
        let package = find_package(root, source);
        let mut cx = Cx { src: source, file: rel_path, out: &mut facts };
        cx.scan(root, package.as_deref());
        Ok(facts)
    }
}

struct Cx<'a> {
    src: &'a str,
    file: &'a str,
    out: &'a mut FileFacts,
}

fn find_package(root: Node<'_>, src: &str) -> Option<String> {
    let decl = child_of_kind(root, "package_declaration")?;
    named_children(decl)
        .into_iter()
        .find(|n| matches!(n.kind(), "scoped_identifier" | "identifier"))
        .map(|n| text(n, src).to_string())
}

fn modifier(node: Node<'_>, src: &str) -> Visibility {
    let Some(mods) = child_of_kind(node, "modifiers") else {
        return Visibility::default();
    };
    let text = text(mods, src);
    for word in ["public", "private", "protected"] {
        if text.split(|c: char| !c.is_alphanumeric()).any(|w| w == word) {
            return Visibility::raw(word);
        }
    }
    Visibility::default()
}

fn type_list(node: Node<'_>, src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let list = if node.kind() == "type_list" { Some(node) } else { child_of_kind(node, "type_list") };
    if let Some(list) = list {
        for t in named_children(list) {
            push_unique(&mut out, strip_type_args(text(t, src)));
        }
    }
    out
}

impl Cx<'_> {
    fn qualify(&self, outer: Option<&str>, name: &str) -> Option<String> {
        outer.map(|o| format!("{o}.{name}"))
    }

    /// Visits type declarations directly under `node`, descending through
    /// error-recovery nodes.
    fn scan(&mut self, node: Node<'_>, outer: Option<&str>) {
        for child in named_children(node) {
            match child.kind() {
                "class_declaration" | "interface_declaration" | "enum_declaration"
                | "record_declaration" => self.declaration(child, outer),
                "ERROR" | "program" => self.scan(child, outer),
                _ => {}
            }
        }
    }

    fn declaration(&mut self, node: Node<'_>, outer: Option<&str>) {
        let Some(name) = field_text(node, "name", self.src) else {
            return;
        };
        let kind = match node.kind() {
            "interface_declaration" => ClassKind::Interface,
            "enum_declaration" => ClassKind::Enum,
            _ => ClassKind::Class,
        };
        let qualified = self.qualify(outer, &name);
        let mut class = ClassDef {
            name: name.clone(),
            qualified_name: qualified.clone(),
            kind,
            visibility: modifier(node, self.src),
            source_file: self.file.to_string(),
            ..Default::default()
        };
        if let Some(sup) = field(node, "superclass") {
            for t in named_children(sup) {
                push_unique(&mut class.extends, strip_type_args(text(t, self.src)));
            }
        }
        if let Some(ext) = child_of_kind(node, "extends_interfaces") {
            class.extends.extend(type_list(ext, self.src));
        }
        if let Some(ifaces) = field(node, "interfaces") {
            class.implements = type_list(ifaces, self.src);
        }
        if let Some(params) = field(node, "parameters") {
            // record components
            for p in named_children(params) {
                if let Some(n) = field_text(p, "name", self.src) {
                    class.attributes.push(AttributeDef {
                        name: n,
                        visibility: Visibility::raw("private"),
                        type_annotation: field_text(p, "type", self.src),
                    });
                }
            }
        }
        let inner_outer = qualified.unwrap_or(name);
        if let Some(body) = field(node, "body") {
            self.members(body, &mut class, &inner_outer);
        }
        self.out.classes.push(class);
    }

    fn members(&mut self, body: Node<'_>, class: &mut ClassDef, outer: &str) {
        for member in named_children(body) {
            match member.kind() {
                "field_declaration" | "constant_declaration" => {
                    let vis = modifier(member, self.src);
                    let ty = field_text(member, "type", self.src);
                    for decl in named_children(member) {
                        if decl.kind() == "variable_declarator" {
                            if let Some(n) = field_text(decl, "name", self.src) {
                                class.attributes.push(AttributeDef {
                                    name: n,
                                    visibility: vis.clone(),
                                    type_annotation: ty.clone(),
                                });
                            }
                        }
                    }
                }
                "enum_constant" => {
                    if let Some(n) = field_text(member, "name", self.src) {
                        class.attributes.push(AttributeDef {
                            name: n,
                            visibility: Visibility::Public,
                            type_annotation: Some(class.name.clone()),
                        });
                    }
                }
                "method_declaration" | "constructor_declaration" | "compact_constructor_declaration" => {
                    if let Some(m) = self.method(member) {
                        class.methods.push(m);
                    }
                }
                "class_declaration" | "interface_declaration" | "enum_declaration"
                | "record_declaration" => self.declaration(member, Some(outer)),
                "enum_body_declarations" | "ERROR" => self.members(member, class, outer),
                _ => {}
            }
        }
    }

    fn method(&self, node: Node<'_>) -> Option<MethodDef> {
        let name = field_text(node, "name", self.src)?;
        let mut parameters = Vec::new();
        if let Some(params) = field(node, "parameters") {
            for p in named_children(params) {
                match p.kind() {
                    "formal_parameter" => parameters.push(Parameter {
                        name: field_text(p, "name", self.src).unwrap_or_default(),
                        type_annotation: field_text(p, "type", self.src),
                    }),
                    "spread_parameter" => {
                        let ty = named_children(p).first().map(|t| format!("{}...", text(*t, self.src)));
                        let name = child_of_kind(p, "variable_declarator")
                            .and_then(|d| field_text(d, "name", self.src))
                            .unwrap_or_default();
                        parameters.push(Parameter { name, type_annotation: ty });
                    }
                    _ => {}
                }
            }
        }
        let mut calls = Vec::new();
        if let Some(body) = field(node, "body") {
            let stop = |n: Node<'_>| matches!(n.kind(), "class_declaration" | "class_body");
            visit(body, &stop, &mut |n| {
                if n.kind() == "method_invocation" {
                    if let Some(callee) = field_text(n, "name", self.src) {
                        push_unique(&mut calls, callee);
                    }
                }
            });
        }
        Some(MethodDef {
            name,
            visibility: modifier(node, self.src),
            type_annotation: field_text(node, "type", self.src),
            parameters,
            calls,
        })
    }
}
