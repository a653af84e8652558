use tree_sitter::Node;

use super::syntax::{field, field_text, line_count, named_children, parse, push_unique, text, visit};
use super::{ExtractError, Extractor, FileFacts};
use crate::ir::{AttributeDef, ClassDef, ClassKind, FunctionDef, Language, MethodDef, Parameter, Visibility};

/// Python has no access modifiers; visibility is decided from the name
/// during normalization, so everything is extracted with an empty modifier.
pub(crate) struct PythonExtractor;

impl Extractor for PythonExtractor {
    fn language(&self) -> Language {
        Language::Python
    }

    fn extract_file(&self, rel_path: &str, source: &str) -> Result<FileFacts, ExtractError> {
        let tree = parse(Language::Python, tree_sitter_python::LANGUAGE.into(), source)?;
        let root = tree.root_node();
        let mut facts = FileFacts { had_errors: root.has_error(), ..Default::default() };
        let module = module_path(rel_path);
        scan(root, source, rel_path, &module, &mut facts, true);
        Ok(facts)
    }
}

fn module_path(rel: &str) -> String {
    let trimmed = rel.strip_suffix(".py").unwrap_or(rel);
    let trimmed = trimmed.strip_suffix("/__init__").unwrap_or(trimmed);
    trimmed.replace('/', ".")
}

fn unwrap_decorated(node: Node<'_>) -> Node<'_> {
    if node.kind() == "decorated_definition" {
        field(node, "definition").unwrap_or(node)
    } else {
        node
    }
}

fn scan(node: Node<'_>, src: &str, file: &str, qual: &str, out: &mut FileFacts, top: bool) {
    for child in named_children(node) {
        let def = unwrap_decorated(child);
        match def.kind() {
            "class_definition" => class(def, src, file, qual, out),
            "function_definition" if top => {
                if let Some(f) = function(def, src, file) {
                    out.functions.push(f);
                }
            }
            "ERROR" | "module" | "if_statement" | "block" => scan(def, src, file, qual, out, top),
            _ => {}
        }
    }
}

fn class(node: Node<'_>, src: &str, file: &str, qual: &str, out: &mut FileFacts) {
    let Some(name) = field_text(node, "name", src) else {
        return;
    };
    let qualified = if qual.is_empty() { name.clone() } else { format!("{qual}.{name}") };
    let mut c = ClassDef {
        name: name.clone(),
        qualified_name: Some(qualified.clone()),
        source_file: file.to_string(),
        ..Default::default()
    };
    if let Some(supers) = field(node, "superclasses") {
        for s in named_children(supers) {
            if matches!(s.kind(), "identifier" | "attribute" | "subscript") {
                let t = text(s, src);
                let base = t.split('[').next().unwrap_or(t).trim();
                push_unique(&mut c.extends, base);
            }
        }
    }
    let last = |s: &String| s.rsplit('.').next().unwrap_or(s).to_string();
    if c.extends.iter().map(last).any(|b| matches!(b.as_str(), "Enum" | "IntEnum" | "StrEnum" | "Flag")) {
        c.kind = ClassKind::Enum;
    } else if c.extends.iter().map(last).any(|b| matches!(b.as_str(), "Protocol" | "ABC")) {
        c.kind = ClassKind::Interface;
    }

    if let Some(body) = field(node, "body") {
        for member in named_children(body) {
            let def = unwrap_decorated(member);
            match def.kind() {
                "function_definition" => {
                    if let Some(m) = method(def, src, &mut c.attributes) {
                        c.methods.push(m);
                    }
                }
                "expression_statement" => {
                    for assign in named_children(def) {
                        if assign.kind() == "assignment" {
                            if let Some(left) = field(assign, "left") {
                                if left.kind() == "identifier" {
                                    add_attribute(&mut c.attributes, text(left, src), field_text(assign, "type", src));
                                }
                            }
                        }
                    }
                }
                "class_definition" => class(def, src, file, &qualified, out),
                _ => {}
            }
        }
    }
    out.classes.push(c);
}

fn add_attribute(attrs: &mut Vec<AttributeDef>, name: &str, ty: Option<String>) {
    if name.is_empty() || attrs.iter().any(|a| a.name == name) {
        return;
    }
    attrs.push(AttributeDef { name: name.to_string(), visibility: Visibility::default(), type_annotation: ty });
}

fn parameters(node: Node<'_>, src: &str) -> Vec<Parameter> {
    let mut out = Vec::new();
    let Some(params) = field(node, "parameters") else {
        return out;
    };
    for p in named_children(params) {
        let (name, ty) = match p.kind() {
            "identifier" => (text(p, src).to_string(), None),
            "typed_parameter" => {
                let name = named_children(p).first().map(|n| text(*n, src).to_string()).unwrap_or_default();
                (name, field_text(p, "type", src))
            }
            "default_parameter" | "typed_default_parameter" => {
                (field_text(p, "name", src).unwrap_or_default(), field_text(p, "type", src))
            }
            "list_splat_pattern" | "dictionary_splat_pattern" => (text(p, src).to_string(), None),
            _ => continue,
        };
        if name == "self" || name == "cls" || name.is_empty() {
            continue;
        }
        out.push(Parameter { name, type_annotation: ty });
    }
    out
}

fn calls(body: Node<'_>, src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let stop = |n: Node<'_>| matches!(n.kind(), "class_definition" | "function_definition");
    visit(body, &stop, &mut |n| {
        if n.kind() == "call" {
            if let Some(f) = field(n, "function") {
                let callee = match f.kind() {
                    "identifier" => Some(text(f, src)),
                    "attribute" => field(f, "attribute").map(|a| text(a, src)),
                    _ => None,
                };
                if let Some(c) = callee {
                    push_unique(&mut out, c);
                }
            }
        }
    });
    out
}

fn method(node: Node<'_>, src: &str, attrs: &mut Vec<AttributeDef>) -> Option<MethodDef> {
    let name = field_text(node, "name", src)?;
    let body = field(node, "body");
    if let Some(body) = body {
        // instance attributes assigned through `self.x = ...`
        let stop = |n: Node<'_>| matches!(n.kind(), "class_definition" | "function_definition");
        visit(body, &stop, &mut |n| {
            if n.kind() == "assignment" {
                if let Some(left) = field(n, "left") {
                    if left.kind() == "attribute"
                        && field(left, "object").is_some_and(|o| text(o, src) == "self")
                    {
                        if let Some(attr) = field(left, "attribute") {
                            add_attribute(attrs, text(attr, src), field_text(n, "type", src));
                        }
                    }
                }
            }
        });
    }
    Some(MethodDef {
        name,
        visibility: Visibility::default(),
        type_annotation: field_text(node, "return_type", src),
        parameters: parameters(node, src),
        calls: body.map(|b| calls(b, src)).unwrap_or_default(),
    })
}

fn function(node: Node<'_>, src: &str, file: &str) -> Option<FunctionDef> {
    let name = field_text(node, "name", src)?;
    Some(FunctionDef {
        name,
        source_file: file.to_string(),
        parameters: parameters(node, src),
        calls: field(node, "body").map(|b| calls(b, src)).unwrap_or_default(),
        line_count: line_count(node),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> FileFacts {
        PythonExtractor.extract_file("pkg/models.py", src).unwrap()
    }

    #[test]
    fn qualified_base_kept_verbatim() {
        let f = run("class User(pkg.mod.Base, Mixin):\n    def save(self):\n        pass\n");
        assert_eq!(f.classes[0].extends, ["pkg.mod.Base", "Mixin"]);
        assert_eq!(f.classes[0].qualified_name.as_deref(), Some("pkg.models.User"));
    }

    #[test]
    fn members_and_functions() {
        let src = "\
import os

class Repo:
    limit: int = 10

    def __init__(self, db: Db, *, retries=3):
        self.db = db
        self._cache = {}
        connect(db)

    @property
    def _helper(self):
        return self.db.query(x)

def main(argv):
    repo = Repo(make_db())
    repo._helper
    run()

def tiny(): pass
";
        let f = run(src);
        let repo = &f.classes[0];
        let attrs: Vec<_> = repo.attributes.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(attrs, ["limit", "db", "_cache"]);
        let methods: Vec<_> = repo.methods.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(methods, ["__init__", "_helper"]);
        assert_eq!(repo.methods[0].calls, ["connect"]);
        assert_eq!(repo.methods[0].parameters.len(), 2);
        assert_eq!(repo.methods[1].calls, ["query"]);
        assert_eq!(f.functions.len(), 2);
        assert_eq!(f.functions[0].name, "main");
        assert_eq!(f.functions[0].calls, ["Repo", "make_db", "run"]);
        assert_eq!(f.functions[0].line_count, 4);
        assert_eq!(f.functions[1].line_count, 1);
    }

    #[test]
    fn enum_and_protocol_kinds() {
        let f = run("class Color(Enum):\n    RED = 1\n\nclass Store(typing.Protocol):\n    def get(self): ...\n");
        assert_eq!(f.classes[0].kind, ClassKind::Enum);
        assert_eq!(f.classes[1].kind, ClassKind::Interface);
    }
}
