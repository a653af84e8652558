use std::collections::BTreeMap;

use super::{ArrowKind, DiagramArtifact, Element, Markers, Relationship};
use crate::diagram::DiagramType;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum LineKind {
    Blank,
    Code,
    /// `'` comment or inside a `/' ... '/` block.
    Comment,
    /// Inside a multi-line note or legend; free text.
    Note,
}

#[derive(Debug, Clone, Copy)]
pub(super) struct Line<'a> {
    /// 1-based.
    pub number: usize,
    pub raw: &'a str,
    pub kind: LineKind,
}

impl Line<'_> {
    pub fn trimmed(&self) -> &str {
        self.raw.trim()
    }
}

fn opens_note_block(t: &str) -> bool {
    let note = regex!(r"^(?:r|h)?note\b");
    if note.is_match(t) {
        // single-line forms carry their text after a colon, or are a
        // quoted floating note
        let after_target = !t.contains(':') && !regex!(r#"^note\s+"[^"]*"\s+as\s+\w+"#).is_match(t);
        return after_target && !t.ends_with("end note") && !t.ends_with("endnote");
    }
    t == "legend" || t.starts_with("legend ")
}

fn closes_note_block(t: &str) -> bool {
    matches!(t, "end note" | "endnote" | "end rnote" | "endrnote" | "end hnote" | "endhnote" | "endlegend" | "end legend")
}

/// Classifies each line so free text never reaches the pattern matchers.
pub(super) fn scan_lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    let mut in_comment = false;
    let mut in_note = false;
    for (i, raw) in text.lines().enumerate() {
        let t = raw.trim();
        let kind = if in_comment {
            if t.contains("'/") {
                in_comment = false;
            }
            LineKind::Comment
        } else if in_note {
            if closes_note_block(t) {
                in_note = false;
            }
            LineKind::Note
        } else if t.is_empty() {
            LineKind::Blank
        } else if t.starts_with("/'") {
            in_comment = !t[2..].contains("'/");
            LineKind::Comment
        } else if t.starts_with('\'') {
            LineKind::Comment
        } else {
            if opens_note_block(t) {
                in_note = true;
            }
            LineKind::Code
        };
        out.push(Line { number: i + 1, raw, kind });
    }
    out
}

/// Braces outside double-quoted strings, as (opens, closes).
pub(super) fn count_braces(t: &str) -> (usize, usize) {
    let mut quoted = false;
    let (mut open, mut close) = (0, 0);
    for ch in t.chars() {
        match ch {
            '"' => quoted = !quoted,
            '{' if !quoted => open += 1,
            '}' if !quoted => close += 1,
            _ => {}
        }
    }
    (open, close)
}

/// Activity action text; braces inside it are prose.
pub(super) fn is_action_line(t: &str) -> bool {
    t.starts_with(':') && !regex!(r"^:[^:]+:(\s|$)").is_match(t)
}

const NAME: &str = r#""(?P<q>[^"]*)"|\[(?P<b>[^\]]+)\]|\((?P<p>[^)]*)\)|:(?P<c>[^:\s][^:]*):|(?P<id>[A-Za-z_$][\w$]*(?:(?:\.|::|\\)[\w$]+)*)"#;

struct Declared {
    keyword: String,
    name: String,
    alias: Option<String>,
    stereotype: Option<String>,
    opens_brace: bool,
    rest: String,
}

fn name_from_caps(c: &regex::Captures<'_>) -> Option<(String, &'static str)> {
    if let Some(m) = c.name("q") {
        return Some((m.as_str().trim().to_string(), "quoted"));
    }
    if let Some(m) = c.name("b") {
        return Some((m.as_str().trim().to_string(), "component"));
    }
    if let Some(m) = c.name("p") {
        return Some((m.as_str().trim().to_string(), "usecase"));
    }
    if let Some(m) = c.name("c") {
        return Some((m.as_str().trim().to_string(), "actor"));
    }
    c.name("id").map(|m| (m.as_str().to_string(), "id"))
}

fn stereotype_of(rest: &str) -> Option<String> {
    regex!(r"<<\s*([^>]*?)\s*>>").captures(rest).map(|c| c[1].to_string())
}

fn alias_of(rest: &str) -> Option<String> {
    regex!(r#"^\s*as\s+(?:"([^"]+)"|([\w$.]+))"#)
        .captures(rest)
        .and_then(|c| c.get(1).or_else(|| c.get(2)))
        .map(|m| m.as_str().to_string())
}

const KEYWORDS: &str = "abstract\\s+class|abstract|class|interface|enum|annotation|entity|participant|actor|boundary|control|database|collections|queue|component|node|cloud|artifact|usecase|rectangle|frame|folder|storage|file|card|agent|person|system|device|hexagon|stack|circle|package|namespace|box|partition|together";

fn declaration(t: &str) -> Option<Declared> {
    let re = regex!(&format!(r#"^(?P<kw>{KEYWORDS})\s+(?:{NAME})(?:<[^<>]*>)?(?P<rest>.*)$"#));
    let caps = re.captures(t)?;
    let rest = caps.name("rest").map_or("", |m| m.as_str());
    // `actor -> B` uses a participant called "actor"
    if regex!(r"^\s*[-.<]").is_match(rest) && !rest.trim_start().starts_with("<<") {
        return None;
    }
    let (name, _) = name_from_caps(&caps)?;
    let keyword = caps["kw"].split_whitespace().last().unwrap_or("").to_string();
    Some(Declared {
        keyword,
        alias: alias_of(rest),
        stereotype: stereotype_of(rest),
        opens_brace: rest.trim_end().ends_with('{'),
        rest: rest.to_string(),
        name,
    })
}

fn shorthand_declaration(t: &str, dt: DiagramType) -> Option<Declared> {
    if matches!(dt, DiagramType::Activity | DiagramType::Sequence) {
        return None;
    }
    let re = regex!(r#"^(?:\[(?P<b>[^\]]+)\]|\((?P<p>[^)*][^)]*)\)|:(?P<c>[^:\s][^:]*):)(?P<rest>\s*(?:as\s+.*|<<.*|\{\s*|))$"#);
    let caps = re.captures(t)?;
    let (name, kind) = name_from_caps(&caps)?;
    let rest = caps.name("rest").map_or("", |m| m.as_str());
    Some(Declared {
        keyword: kind.to_string(),
        alias: alias_of(rest),
        stereotype: stereotype_of(rest),
        opens_brace: rest.trim_end().ends_with('{'),
        rest: rest.to_string(),
        name,
    })
}

const CLASS_LIKE: [&str; 6] = ["class", "interface", "enum", "annotation", "entity", "abstract"];
const CONTAINER_ONLY: [&str; 5] = ["package", "namespace", "box", "partition", "together"];

fn element_kind(keyword: &str) -> &str {
    match keyword {
        "device" => "node",
        "abstract" => "class",
        k => k,
    }
}

struct Endpoint {
    name: String,
    implied_kind: Option<&'static str>,
}

fn endpoint(raw: &str) -> Option<Endpoint> {
    let caps = regex!(&format!("^(?:{NAME})$")).captures(raw.trim())?;
    let (name, form) = name_from_caps(&caps)?;
    if name.is_empty() || name.starts_with('*') {
        return None;
    }
    let implied_kind = match form {
        "component" | "usecase" | "actor" => Some(form),
        _ => None,
    };
    Some(Endpoint { name, implied_kind })
}

fn relationship_re() -> &'static regex::Regex {
    let endpoint = r#""[^"]+"|\[[^\]]+\]|\([^)]*\)|:[^:\s][^:]*:|[A-Za-z_$][\w$]*(?:(?:\.|::|\\)[\w$]+)*"#;
    let arrow = r"[<*o#x+}^|\\/]{0,3}[-.]+(?:\[[^\]]*\]|(?:up|down|left|right|u|d|l|r)[-.])?[-.]*[>*o#x+{^|\\/]{0,3}";
    regex!(&format!(
        r#"^(?P<src>{endpoint})\s*(?:"[^"]*"\s*)?(?P<arrow>{arrow})\s*(?:"[^"]*"\s*)?(?P<dst>{endpoint})\s*(?P<act>\+\+|--|\*\*|!!)?\s*(?::\s*(?P<label>.*))?$"#
    ))
}

/// Kind and whether source and target must be swapped so that the source
/// is the specific/whole/sending end.
fn classify(arrow: &str, dt: DiagramType) -> (ArrowKind, bool) {
    let core = regex!(r"\[[^\]]*\]|up|down|left|right").replace_all(arrow, "");
    let core = core.as_ref();
    let dashed = core.contains('.');
    let left_tri = core.starts_with("<|") || core.starts_with('^');
    let right_tri = core.ends_with("|>") || core.ends_with('^');
    let left_head = core.starts_with('<');
    let right_head = core.ends_with('>');
    match dt {
        DiagramType::Sequence => return (ArrowKind::Message, left_head && !right_head),
        DiagramType::Activity => return (ArrowKind::Flow, left_head && !right_head),
        _ => {}
    }
    if left_tri || right_tri {
        let kind = if dashed { ArrowKind::Realization } else { ArrowKind::Generalization };
        return (kind, left_tri && !right_tri);
    }
    let left_diamond = core.starts_with(['*', 'o']);
    let right_diamond = core.ends_with(['*', 'o']);
    if left_diamond || right_diamond {
        let filled = if left_diamond { core.starts_with('*') } else { core.ends_with('*') };
        let kind = if filled { ArrowKind::Composition } else { ArrowKind::Aggregation };
        return (kind, right_diamond && !left_diamond);
    }
    let kind = if dashed && (left_head || right_head) { ArrowKind::Dependency } else { ArrowKind::Association };
    (kind, left_head && !right_head)
}

#[derive(Debug)]
enum Frame {
    Container(Option<String>),
    Body,
}

#[derive(Default)]
struct Builder {
    elements: Vec<Element>,
    index: BTreeMap<String, usize>,
    relationships: Vec<Relationship>,
    noted: Vec<String>,
    markers: Markers,
}

impl Builder {
    fn add_element(&mut self, name: &str, kind: &str, line: usize, parent: Option<String>) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.elements.len();
        self.elements.push(Element {
            name: name.to_string(),
            kind: kind.to_string(),
            alias: None,
            stereotype: None,
            parent,
            has_note: false,
            line,
        });
        self.index.insert(name.to_string(), i);
        i
    }

    fn declare(&mut self, d: &Declared, line: usize, parent: Option<String>) {
        let i = self.add_element(&d.name, element_kind(&d.keyword), line, parent);
        let e = &mut self.elements[i];
        if e.alias.is_none() {
            e.alias = d.alias.clone();
        }
        if e.stereotype.is_none() {
            e.stereotype = d.stereotype.clone();
        }
    }

    fn relate(&mut self, source: String, target: String, kind: ArrowKind, arrow: &str, label: Option<String>) {
        if source.is_empty() || target.is_empty() {
            return;
        }
        let label = label.map(|l| l.trim().to_string()).filter(|l| !l.is_empty());
        self.relationships.push(Relationship { source, target, kind, arrow: arrow.to_string(), label });
    }

    fn finish(mut self, dt: DiagramType, text: &str) -> DiagramArtifact {
        let aliases: BTreeMap<String, String> = self
            .elements
            .iter()
            .filter_map(|e| e.alias.as_ref().map(|a| (a.clone(), e.name.clone())))
            .collect();
        let resolve = |n: &str| -> String {
            if self.index.contains_key(n) {
                n.to_string()
            } else {
                aliases.get(n).cloned().unwrap_or_else(|| n.to_string())
            }
        };
        for r in &mut self.relationships {
            r.source = resolve(&r.source);
            r.target = resolve(&r.target);
        }
        for e in &mut self.elements {
            if let Some(p) = e.parent.take() {
                e.parent = Some(resolve(&p));
            }
        }
        for n in std::mem::take(&mut self.noted) {
            let n = resolve(&n);
            if let Some(&i) = self.index.get(&n) {
                self.elements[i].has_note = true;
            }
        }
        DiagramArtifact {
            diagram_type: dt,
            text: text.to_string(),
            elements: self.elements,
            relationships: self.relationships,
            scope: None,
            markers: self.markers,
        }
    }
}

struct Activity {
    last: Option<String>,
    branches: Vec<String>,
    pending_label: Option<String>,
}

impl Activity {
    fn node(&mut self, b: &mut Builder, name: &str, kind: &str, line: usize, parent: Option<String>) {
        b.add_element(name, kind, line, parent);
        if let Some(prev) = self.last.take() {
            if prev != name {
                b.relate(prev, name.to_string(), ArrowKind::Flow, "->", self.pending_label.take());
            }
        }
        self.pending_label = None;
        self.last = Some(name.to_string());
    }

    /// Returns true if the line was an activity construct.
    fn line(&mut self, b: &mut Builder, t: &str, line: usize, parent: Option<String>) -> bool {
        if let Some(c) = regex!(r"^if\s*\((.*?)\)\s*(?:then\b.*)?(?:is\b.*)?$").captures(t) {
            b.markers.ifs_opened += 1;
            let cond = c[1].trim().to_string();
            if !cond.is_empty() {
                self.node(b, &cond, "if", line, parent);
            }
            self.branches.push(self.last.clone().unwrap_or_default());
            return true;
        }
        if let Some(c) = regex!(r"^else\s*if\s*\((.*?)\)").captures(t) {
            let cond = c[1].trim().to_string();
            self.last = self.branches.last().cloned().filter(|s| !s.is_empty());
            if !cond.is_empty() {
                self.node(b, &cond, "if", line, parent);
            }
            return true;
        }
        if regex!(r"^else\b").is_match(t) {
            self.last = self.branches.last().cloned().filter(|s| !s.is_empty());
            return true;
        }
        if regex!(r"^end\s*if\b").is_match(t) {
            b.markers.ifs_closed += 1;
            self.branches.pop();
            return true;
        }
        if regex!(r"^(?:fork|split)\s+again\b").is_match(t) {
            self.last = self.branches.last().cloned().filter(|s| !s.is_empty());
            return true;
        }
        if regex!(r"^(?:fork|split)$").is_match(t) {
            self.node(b, "fork", "fork", line, parent);
            self.branches.push("fork".to_string());
            return true;
        }
        if regex!(r"^end\s*(?:fork|merge|split)\b").is_match(t) {
            self.branches.pop();
            return true;
        }
        if t == "start" {
            b.markers.has_start = true;
            self.last = None;
            return true;
        }
        if matches!(t, "stop" | "end" | "kill" | "detach") {
            b.markers.has_stop = true;
            self.last = None;
            return true;
        }
        if let Some(c) = regex!(r"^-+>\s*(.*?);?$").captures(t) {
            let label = c[1].trim().to_string();
            self.pending_label = (!label.is_empty()).then_some(label);
            return true;
        }
        regex!(r"^(?:while|endwhile|end\s+while|repeat|backward|detach)\b").is_match(t)
    }
}

fn c4_element(t: &str) -> Option<(String, String, Option<String>, bool)> {
    let re = regex!(
        r#"^(?P<m>Person(?:_Ext)?|System(?:Db|Queue)?(?:_Ext)?|Container(?:Db|Queue)?(?:_Ext)?|Component(?:Db|Queue)?(?:_Ext)?|Node(?:_L|_R)?|Deployment_Node(?:_L|_R)?|(?:System_|Container_|Enterprise_)?Boundary)\s*\(\s*(?P<alias>[\w.$]+)\s*(?:,\s*"(?P<label>[^"]*)")?[^{]*(?P<brace>\{)?\s*$"#
    );
    let c = re.captures(t)?;
    let alias = c["alias"].to_string();
    let label = c.name("label").map(|m| m.as_str().trim().to_string()).filter(|l| !l.is_empty());
    Some((c["m"].to_ascii_lowercase(), alias, label, c.name("brace").is_some()))
}

fn c4_relation(t: &str) -> Option<(String, String, Option<String>, bool)> {
    let re = regex!(r#"^(?P<m>Bi)?Rel(?:_(?P<dir>[A-Za-z]+))?\s*\(\s*(?P<a>[\w.$]+)\s*,\s*(?P<b>[\w.$]+)\s*(?:,\s*"(?P<label>[^"]*)")?"#);
    let c = re.captures(t)?;
    let back = c.name("dir").is_some_and(|d| d.as_str() == "Back");
    let label = c.name("label").map(|m| m.as_str().to_string());
    Some((c["a"].to_string(), c["b"].to_string(), label, back))
}

const IGNORED_PREFIXES: [&str; 14] = [
    "@", "!", "skinparam", "hide", "show", "title", "header", "footer", "caption", "scale", "autonumber",
    "left to right", "top to bottom", "legend",
];

/// Extracts elements and relationships from PlantUML `text` using the
/// grammar of diagram type `dt`. Unrecognized lines are ignored.
pub fn parse_artifact(text: &str, dt: DiagramType) -> DiagramArtifact {
    let mut b = Builder::default();
    let mut stack: Vec<Frame> = Vec::new();
    let mut activity = Activity { last: None, branches: Vec::new(), pending_label: None };
    let mut pending_action: Option<(String, usize)> = None;

    for line in scan_lines(text) {
        if line.kind != LineKind::Code {
            continue;
        }
        let t = line.trimmed();
        let parent = stack.iter().rev().find_map(|f| match f {
            Frame::Container(name) => Some(name.clone()),
            Frame::Body => None,
        });
        let parent = parent.flatten();

        if dt == DiagramType::Activity {
            if let Some((mut acc, start)) = pending_action.take() {
                acc.push(' ');
                acc.push_str(t);
                if let Some(done) = finished_action(&acc) {
                    activity.node(&mut b, &done, "action", start, parent);
                } else {
                    pending_action = Some((acc, start));
                }
                continue;
            }
        }

        let (opens, closes) = count_braces(t);
        if stack.iter().any(|f| matches!(f, Frame::Body)) {
            for _ in 0..closes {
                stack.pop();
            }
            for _ in 0..opens {
                stack.push(Frame::Body);
            }
            continue;
        }
        if t.starts_with('}') {
            for _ in 0..closes {
                stack.pop();
            }
            continue;
        }
        let mut pushed = false;

        if let Some(c) = regex!(r"^(?:r|h)?note\s+(?:left|right|top|bottom)\s+of\s+(.+?)\s*(?::.*)?$").captures(t) {
            b.noted.push(endpoint(&c[1]).map_or_else(|| c[1].to_string(), |e| e.name));
            continue;
        }
        if let Some(c) = regex!(r"^(?:r|h)?note\s+over\s+([^:]+?)\s*(?::.*)?$").captures(t) {
            for n in c[1].split(',') {
                b.noted.push(n.trim().to_string());
            }
            continue;
        }
        if t.starts_with("note") {
            continue;
        }
        if let Some(c) = regex!(r"^(?:de)?activate\s+(\S+)").captures(t) {
            if !t.starts_with("de") {
                b.markers.activations += 1;
            }
            let _ = c;
            continue;
        }
        if t.starts_with("autoactivate on") {
            b.markers.activations += 1;
            continue;
        }

        if dt == DiagramType::Activity {
            if is_action_line(t) {
                match finished_action(t) {
                    Some(done) => activity.node(&mut b, &done, "action", line.number, parent),
                    None => pending_action = Some((t.to_string(), line.number)),
                }
                continue;
            }
            if activity.line(&mut b, t, line.number, parent.clone()) {
                if opens > closes {
                    stack.push(Frame::Container(None));
                }
                continue;
            }
            if let Some(c) = regex!(r"^partition\s+(.+?)\s*\{?$").captures(t) {
                if opens > closes {
                    stack.push(Frame::Container(Some(c[1].trim_matches('"').to_string())));
                }
                continue;
            }
        }

        if IGNORED_PREFIXES.iter().any(|p| t.starts_with(p)) {
            if opens > closes {
                stack.push(Frame::Body);
            }
            continue;
        }

        if let Some((kind, alias, label, brace)) = c4_element(t) {
            let is_boundary = kind.ends_with("boundary");
            let name = label.clone().unwrap_or_else(|| alias.clone());
            if !is_boundary {
                let i = b.add_element(&name, &kind, line.number, parent.clone());
                if name != alias && b.elements[i].alias.is_none() {
                    b.elements[i].alias = Some(alias.clone());
                }
            }
            if brace {
                stack.push(Frame::Container(if is_boundary { None } else { Some(name) }));
            }
            continue;
        }
        if let Some((a, z, label, back)) = c4_relation(t) {
            let (s, d) = if back { (z, a) } else { (a, z) };
            b.relate(s, d, ArrowKind::Dependency, "Rel", label);
            continue;
        }

        let declared = declaration(t).or_else(|| shorthand_declaration(t, dt));
        if let Some(d) = declared {
            let container_only = CONTAINER_ONLY.contains(&d.keyword.as_str());
            if !container_only {
                b.declare(&d, line.number, parent.clone());
                inline_inheritance(&mut b, &d);
            }
            if d.opens_brace {
                let body = CLASS_LIKE.contains(&d.keyword.as_str());
                stack.push(if body { Frame::Body } else { Frame::Container(Some(d.name.clone())) });
                pushed = true;
            }
            if !pushed && opens > closes {
                stack.push(Frame::Body);
            }
            continue;
        }

        if let Some(c) = relationship_re().captures(t) {
            let (Some(src), Some(dst)) = (endpoint(&c["src"]), endpoint(&c["dst"])) else {
                if c["src"].starts_with("(*") {
                    b.markers.has_start = true;
                }
                if c["dst"].starts_with("(*") {
                    b.markers.has_stop = true;
                }
                continue;
            };
            if c.name("act").is_some_and(|m| m.as_str() == "++") {
                b.markers.activations += 1;
            }
            let shorthand_ok = !matches!(dt, DiagramType::Activity | DiagramType::Sequence);
            for e in [&src, &dst] {
                if let (Some(kind), true) = (e.implied_kind, shorthand_ok) {
                    b.add_element(&e.name, kind, line.number, parent.clone());
                }
            }
            let arrow = &c["arrow"];
            let (kind, swap) = classify(arrow, dt);
            let (s, d) = if swap { (dst.name, src.name) } else { (src.name, dst.name) };
            b.relate(s, d, kind, arrow, c.name("label").map(|m| m.as_str().to_string()));
            continue;
        }

        if opens > closes {
            stack.push(Frame::Body);
        }
    }
    b.finish(dt, text)
}

/// `class A extends B implements C, D`
fn inline_inheritance(b: &mut Builder, d: &Declared) {
    let re = regex!(r"\b(extends|implements)\s+([\w$.,\s<>]+?)(?:\s+(?:extends|implements)\b|\s*\{|\s*<<|$)");
    let mut rest = d.rest.as_str();
    while let Some(c) = re.captures(rest) {
        let kind = if &c[1] == "extends" { ArrowKind::Generalization } else { ArrowKind::Realization };
        for target in c[2].split(',') {
            let target = target.trim();
            let target = target.find('<').map_or(target, |i| &target[..i]);
            if !target.is_empty() {
                b.relate(d.name.clone(), target.to_string(), kind, &c[1], None);
            }
        }
        rest = &rest[c.get(2).map_or(rest.len(), |m| m.end())..];
    }
}

/// Text of a complete `:action;` (possibly accumulated over lines).
fn finished_action(acc: &str) -> Option<String> {
    let body = acc.strip_prefix(':')?;
    let end = body.trim_end();
    let last = end.chars().last()?;
    if matches!(last, ';' | '|' | '<' | '>' | '/' | ']' | '}') {
        let text = end[..end.len() - last.len_utf8()].trim();
        let text = regex!(r"\s+").replace_all(text, " ").to_string();
        return Some(text);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puml::ArrowKind::*;

    fn names(a: &DiagramArtifact) -> Vec<&str> {
        a.elements.iter().map(|e| e.name.as_str()).collect()
    }

    fn rels(a: &DiagramArtifact) -> Vec<(&str, &str, ArrowKind)> {
        a.relationships.iter().map(|r| (r.source.as_str(), r.target.as_str(), r.kind)).collect()
    }

    #[test]
    fn minimal_class_diagram() {
        let a = parse_artifact("class A\nclass B\nA --|> B", DiagramType::Class);
        assert_eq!(names(&a), ["A", "B"]);
        assert_eq!(rels(&a), [("A", "B", Generalization)]);
    }

    #[test]
    fn empty_input() {
        let a = parse_artifact("", DiagramType::Sequence);
        assert!(a.elements.is_empty() && a.relationships.is_empty());
    }

    #[test]
    fn class_arrows_and_directions() {
        let src = "\
@startuml
interface Repo
abstract class Base {
  +save(): void
  -id: int
}
class UserService<T> extends Base implements Repo {
  {static} +create()
}
Base <|-- Admin
Repo <|.. Impl
Order *-- \"many\" Line : contains
Line --* Order2
Cart o-- Item
A ..> B : uses
B <.. C
A -- D
@enduml";
        let a = parse_artifact(src, DiagramType::Class);
        assert_eq!(names(&a), ["Repo", "Base", "UserService"]);
        assert_eq!(
            rels(&a),
            [
                ("UserService", "Base", Generalization),
                ("UserService", "Repo", Realization),
                ("Admin", "Base", Generalization),
                ("Impl", "Repo", Realization),
                ("Order", "Line", Composition),
                ("Order2", "Line", Composition),
                ("Cart", "Item", Aggregation),
                ("A", "B", Dependency),
                ("C", "B", Dependency),
                ("A", "D", Association),
            ]
        );
        assert_eq!(a.relationships[4].label.as_deref(), Some("contains"));
        assert_eq!(a.relationships[7].label.as_deref(), Some("uses"));
    }

    #[test]
    fn sequence_fixture_matches_hand_tally() {
        // 6 participants, 10 messages, 2 activations
        let src = "\
@startuml
actor User
participant \"Web UI\" as UI
participant Api
participant Auth <<service>>
database Db
queue Events
User -> UI : open
UI -> Api : GET /orders
activate Api
Api -> Auth : verify
Auth --> Api : ok
Api ->> Db : query
Db --> Api : rows
Api -> Events ++ : publish
Events --> Api
Api --> UI : 200
UI --> User : render
deactivate Api
note right of Api : caches results
@enduml";
        let a = parse_artifact(src, DiagramType::Sequence);
        assert_eq!(names(&a), ["User", "Web UI", "Api", "Auth", "Db", "Events"]);
        assert_eq!(a.relationships.len(), 10);
        assert!(a.relationships.iter().all(|r| r.kind == Message));
        assert_eq!(a.relationships[1].source, "Web UI");
        assert_eq!(a.relationships[9].target, "User");
        assert_eq!(a.relationships.iter().filter(|r| r.is_labeled()).count(), 9);
        assert_eq!(a.markers.activations, 2);
        assert!(a.element("Api").unwrap().has_note);
        assert_eq!(a.element("Auth").unwrap().stereotype.as_deref(), Some("service"));
    }

    #[test]
    fn activity_flow_edges() {
        let src = "\
@startuml
start
:Receive order;
if (in stock?) then (yes)
  :Reserve items;
  -> shipped;
  :Ship;
else (no)
  :Notify
   customer;
endif
fork
  :Log;
fork again
  :Bill;
end fork
stop
@enduml";
        let a = parse_artifact(src, DiagramType::Activity);
        assert_eq!(
            names(&a),
            ["Receive order", "in stock?", "Reserve items", "Ship", "Notify customer", "fork", "Log", "Bill"]
        );
        assert_eq!(
            rels(&a),
            [
                ("Receive order", "in stock?", Flow),
                ("in stock?", "Reserve items", Flow),
                ("Reserve items", "Ship", Flow),
                ("in stock?", "Notify customer", Flow),
                ("Notify customer", "fork", Flow),
                ("fork", "Log", Flow),
                ("fork", "Bill", Flow),
            ]
        );
        assert_eq!(a.relationships[2].label.as_deref(), Some("shipped"));
        assert!(a.markers.has_start && a.markers.has_stop);
        assert_eq!((a.markers.ifs_opened, a.markers.ifs_closed), (1, 1));
    }

    #[test]
    fn component_shorthand_and_groups() {
        let src = "\
package \"Backend\" {
  [Order Service] as OS
  component Billing <<service>>
}
[Gateway] --> OS : routes
OS ..> Billing
";
        let a = parse_artifact(src, DiagramType::Component);
        assert_eq!(names(&a), ["Order Service", "Billing", "Gateway"]);
        assert_eq!(rels(&a), [("Gateway", "Order Service", Association), ("Order Service", "Billing", Dependency)]);
        assert_eq!(a.element("Billing").unwrap().parent.as_deref(), Some("Backend"));
    }

    #[test]
    fn deployment_nesting_and_device() {
        let src = "\
node \"App Server\" as app <<server>> {
  artifact api.jar
}
device Phone
database Postgres
app --> Postgres : jdbc
";
        let a = parse_artifact(src, DiagramType::Deployment);
        assert_eq!(names(&a), ["App Server", "api.jar", "Phone", "Postgres"]);
        assert_eq!(a.element("api.jar").unwrap().parent.as_deref(), Some("App Server"));
        assert_eq!(a.element("Phone").unwrap().kind, "node");
        assert_eq!(rels(&a), [("App Server", "Postgres", Association)]);
    }

    #[test]
    fn usecase_forms() {
        let src = "\
actor Customer
:Admin: as A
usecase (Checkout) as UC1
(Browse)
Customer --> UC1
A --> (Manage Stock)
";
        let a = parse_artifact(src, DiagramType::Usecase);
        assert_eq!(names(&a), ["Customer", "Admin", "Checkout", "Browse", "Manage Stock"]);
        assert_eq!(a.element("Manage Stock").unwrap().kind, "usecase");
        assert_eq!(rels(&a), [("Customer", "Checkout", Association), ("Admin", "Manage Stock", Association)]);
    }

    #[test]
    fn system_context_c4_macros() {
        let src = "\
!include <C4/C4_Context>
Person(user, \"Customer\")
System_Boundary(b, \"Shop\") {
  System(shop, \"Shop System\")
}
System_Ext(pay, \"Payment Provider\")
Rel(user, shop, \"buys\")
Rel_Back(pay, shop, \"charges\")
";
        let a = parse_artifact(src, DiagramType::SystemContext);
        assert_eq!(names(&a), ["Customer", "Shop System", "Payment Provider"]);
        assert_eq!(
            rels(&a),
            [("Customer", "Shop System", Dependency), ("Shop System", "Payment Provider", Dependency)]
        );
    }

    #[test]
    fn notes_and_comments_are_not_parsed() {
        let src = "\
class A
note left of A
  class Ghost
end note
' class Commented
/' class Block
'/
class B
";
        let a = parse_artifact(src, DiagramType::Class);
        assert_eq!(names(&a), ["A", "B"]);
        assert!(a.element("A").unwrap().has_note);
    }

    #[test]
    fn relationship_endpoints_never_empty() {
        let a = parse_artifact("\"\" --> B\nA --> \"\"\n", DiagramType::Class);
        assert!(a.relationships.iter().all(|r| !r.source.is_empty() && !r.target.is_empty()));
    }
}
