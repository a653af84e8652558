//! Small helpers over tree-sitter nodes shared by the language frontends.

use tree_sitter::{Node, Parser, Tree};

use super::ExtractError;
use crate::ir::Language;

pub(crate) fn parse(
    language: Language,
    grammar: tree_sitter::Language,
    source: &str,
) -> Result<Tree, ExtractError> {
    let mut parser = Parser::new();
    parser
        .set_language(&grammar)
        .map_err(|e| ExtractError::Grammar { language, message: e.to_string() })?;
    parser.parse(source, None).ok_or_else(|| ExtractError::Grammar {
        language,
        message: "parser returned no tree".into(),
    })
}

pub(crate) fn text<'a>(node: Node<'_>, src: &'a str) -> &'a str {
    node.utf8_text(src.as_bytes()).unwrap_or("")
}

pub(crate) fn named_children<'t>(node: Node<'t>) -> Vec<Node<'t>> {
    let mut cursor = node.walk();
    node.named_children(&mut cursor).collect()
}

pub(crate) fn field<'t>(node: Node<'t>, name: &str) -> Option<Node<'t>> {
    node.child_by_field_name(name)
}

pub(crate) fn field_text(node: Node<'_>, name: &str, src: &str) -> Option<String> {
    field(node, name).map(|n| text(n, src).to_string())
}

pub(crate) fn child_of_kind<'t>(node: Node<'t>, kind: &str) -> Option<Node<'t>> {
    named_children(node).into_iter().find(|c| c.kind() == kind)
}

/// Pre-order walk over named descendants, not descending into nodes for
/// which `stop` returns true (the stopping node itself is still visited).
pub(crate) fn visit<'t>(node: Node<'t>, stop: &dyn Fn(Node<'t>) -> bool, f: &mut dyn FnMut(Node<'t>)) {
    for child in named_children(node) {
        f(child);
        if !stop(child) {
            visit(child, stop, f);
        }
    }
}

/// Line span of a node, inclusive.
pub(crate) fn line_count(node: Node<'_>) -> u32 {
    (node.end_position().row - node.start_position().row + 1) as u32
}

/// Pushes `name` unless already present, keeping first-seen order.
pub(crate) fn push_unique(list: &mut Vec<String>, name: impl Into<String>) {
    let name = name.into();
    if !name.is_empty() && !list.contains(&name) {
        list.push(name);
    }
}

/// Removes generic arguments and surrounding whitespace from a type
/// reference: `Base<T>` becomes `Base`.
pub(crate) fn strip_type_args(s: &str) -> String {
    let s = s.trim();
    let cut = s.find(['<', '(']).unwrap_or(s.len());
    s[..cut].trim().to_string()
}
