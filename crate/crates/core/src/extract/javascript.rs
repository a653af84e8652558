use tree_sitter::Node;

use super::syntax::{
    child_of_kind, field, field_text, line_count, named_children, parse, push_unique, strip_type_args,
    text, visit,
};
use super::{ExtractError, Extractor, FileFacts};
use crate::ir::{AttributeDef, ClassDef, FunctionDef, Language, MethodDef, Parameter, Visibility};

/// JavaScript frontend. Parses with the TSX grammar, a superset of modern
/// JavaScript including JSX. `#private` members get the raw modifier `#`.
pub(crate) struct JavaScriptExtractor;

impl Extractor for JavaScriptExtractor {
    fn language(&self) -> Language {
        Language::JavaScript
    }

    fn extract_file(&self, rel_path: &str, source: &str) -> Result<FileFacts, ExtractError> {
        let tree = parse(Language::JavaScript, tree_sitter_typescript::LANGUAGE_TSX.into(), source)?;
        let root = tree.root_node();
        let mut facts = FileFacts { had_errors: root.has_error(), ..Default::default() };
        scan(root, source, rel_path, &mut facts);
        Ok(facts)
    }
}

fn scan(node: Node<'_>, src: &str, file: &str, out: &mut FileFacts) {
    for child in named_children(node) {
        match child.kind() {
            "class_declaration" | "abstract_class_declaration" => {
                if let Some(name) = field_text(child, "name", src) {
                    out.classes.push(class(child, name, src, file));
                }
            }
            "function_declaration" | "generator_function_declaration" => {
                if let Some(name) = field_text(child, "name", src) {
                    out.functions.push(function(child, name, src, file));
                }
            }
            "lexical_declaration" | "variable_declaration" => {
                for decl in named_children(child) {
                    if decl.kind() != "variable_declarator" {
                        continue;
                    }
                    let (Some(name), Some(value)) = (field(decl, "name"), field(decl, "value")) else {
                        continue;
                    };
                    if name.kind() != "identifier" {
                        continue;
                    }
                    let name = text(name, src).to_string();
                    match value.kind() {
                        "arrow_function" | "function_expression" | "function" | "generator_function" => {
                            out.functions.push(function(value, name, src, file))
                        }
                        "class" => out.classes.push(class(value, name, src, file)),
                        _ => {}
                    }
                }
            }
            "export_statement" | "ERROR" | "program" | "statement_block" => scan(child, src, file, out),
            _ => {}
        }
    }
}

fn member_name(node: Node<'_>, src: &str) -> Option<(String, Visibility)> {
    let name = field(node, "name").or_else(|| field(node, "property"))?;
    let raw = text(name, src);
    let accessibility = child_of_kind(node, "accessibility_modifier").map(|m| text(m, src).to_string());
    if let Some(stripped) = raw.strip_prefix('#') {
        Some((stripped.to_string(), Visibility::raw("#")))
    } else {
        Some((raw.to_string(), accessibility.map(Visibility::raw).unwrap_or_default()))
    }
}

fn class(node: Node<'_>, name: String, src: &str, file: &str) -> ClassDef {
    let mut c = ClassDef { name, source_file: file.to_string(), ..Default::default() };
    if let Some(heritage) = child_of_kind(node, "class_heritage") {
        for clause in named_children(heritage) {
            match clause.kind() {
                "extends_clause" => {
                    for v in named_children(clause) {
                        if v.kind() != "type_arguments" {
                            push_unique(&mut c.extends, strip_type_args(text(v, src)));
                        }
                    }
                }
                "implements_clause" => {
                    for v in named_children(clause) {
                        push_unique(&mut c.implements, strip_type_args(text(v, src)));
                    }
                }
                _ => {}
            }
        }
    }
    if let Some(body) = field(node, "body") {
        for member in named_children(body) {
            match member.kind() {
                "method_definition" | "abstract_method_signature" | "method_signature" => {
                    let Some((name, visibility)) = member_name(member, src) else {
                        continue;
                    };
                    c.methods.push(MethodDef {
                        name,
                        visibility,
                        type_annotation: field(member, "return_type")
                            .map(|t| text(t, src).trim_start_matches(':').trim().to_string()),
                        parameters: parameters(member, src),
                        calls: field(member, "body").map(|b| calls(b, src)).unwrap_or_default(),
                    });
                }
                "public_field_definition" | "field_definition" => {
                    if let Some((name, visibility)) = member_name(member, src) {
                        let type_annotation = field(member, "type")
                            .map(|t| text(t, src).trim_start_matches(':').trim().to_string());
                        c.attributes.push(AttributeDef { name, visibility, type_annotation });
                    }
                }
                _ => {}
            }
        }
    }
    c
}

fn parameters(node: Node<'_>, src: &str) -> Vec<Parameter> {
    let mut out = Vec::new();
    let params = field(node, "parameters").or_else(|| field(node, "parameter"));
    let Some(params) = params else {
        return out;
    };
    if params.kind() == "identifier" {
        out.push(Parameter { name: text(params, src).to_string(), type_annotation: None });
        return out;
    }
    for p in named_children(params) {
        let (name, ty) = match p.kind() {
            "required_parameter" | "optional_parameter" => {
                let name = field(p, "pattern").map(|n| text(n, src).to_string()).unwrap_or_default();
                let ty = field(p, "type").map(|t| text(t, src).trim_start_matches(':').trim().to_string());
                (name, ty)
            }
            "identifier" | "assignment_pattern" | "rest_pattern" => (text(p, src).to_string(), None),
            _ => continue,
        };
        out.push(Parameter { name, type_annotation: ty });
    }
    out
}

fn calls(body: Node<'_>, src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let stop = |n: Node<'_>| matches!(n.kind(), "class_declaration" | "class");
    visit(body, &stop, &mut |n| {
        if n.kind() == "call_expression" {
            if let Some(f) = field(n, "function") {
                let callee = match f.kind() {
                    "identifier" => Some(text(f, src)),
                    "member_expression" => field(f, "property").map(|p| text(p, src)),
                    _ => None,
                };
                if let Some(c) = callee {
                    push_unique(&mut out, c.trim_start_matches('#'));
                }
            }
        }
    });
    out
}

fn function(node: Node<'_>, name: String, src: &str, file: &str) -> FunctionDef {
    FunctionDef {
        name,
        source_file: file.to_string(),
        parameters: parameters(node, src),
        calls: field(node, "body").map(|b| calls(b, src)).unwrap_or_default(),
        line_count: line_count(node),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> FileFacts {
        JavaScriptExtractor.extract_file("src/app.js", src).unwrap()
    }

    #[test]
    fn classes_fields_and_calls() {
        let src = "\
import x from 'y';
export class Cart extends models.Base {
  #items = [];
  total = 0;
  add(item, qty) { this.#check(item); validate(item); }
  #check(i) {}
}
function checkout(cart) {
  pay(cart);
}
const helper = (a) => { log(a); };
export default function main() { run(); }
";
        let f = run(src);
        assert_eq!(f.classes.len(), 1);
        let cart = &f.classes[0];
        assert_eq!(cart.extends, ["models.Base"]);
        let attrs: Vec<_> = cart.attributes.iter().map(|a| (a.name.as_str(), a.visibility.as_str())).collect();
        assert_eq!(attrs, [("items", "#"), ("total", "")]);
        let methods: Vec<_> = cart.methods.iter().map(|m| (m.name.as_str(), m.visibility.as_str())).collect();
        assert_eq!(methods, [("add", ""), ("check", "#")]);
        assert_eq!(cart.methods[0].calls, ["check", "validate"]);
        let fns: Vec<_> = f.functions.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(fns, ["checkout", "helper", "main"]);
        assert_eq!(f.functions[0].calls, ["pay"]);
        assert_eq!(f.functions[0].line_count, 3);
    }

    #[test]
    fn class_expression_binding() {
        let f = run("const Store = class extends Base { get() { return 1; } };");
        assert_eq!(f.classes[0].name, "Store");
        assert_eq!(f.classes[0].extends, ["Base"]);
    }
}
