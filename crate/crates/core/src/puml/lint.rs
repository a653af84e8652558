use std::fmt;

use serde::{Deserialize, Serialize};

use super::parse::{count_braces, is_action_line, scan_lines, LineKind};
use super::{parse_artifact, DiagramArtifact};
use crate::diagram::DiagramType;

/// Element names that betray an unfinished diagram.
pub const PLACEHOLDER_NAMES: [&str; 5] = ["Foo", "Bar", "TODO", "Placeholder", "Example"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "fix")]
pub enum FixKind {
    Rewrite { pattern: &'static str, replacement: &'static str },
    DeleteLine,
    InsertDelimiter,
    /// Delete dangling closers, close what is left open.
    BalanceBraces,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LintRule {
    pub id: &'static str,
    /// `None` means every diagram type.
    pub applies_to: Option<&'static [DiagramType]>,
    pub description: &'static str,
    pub fix: Option<FixKind>,
    pub correctable: bool,
}

impl LintRule {
    pub fn applies(&self, dt: DiagramType) -> bool {
        self.applies_to.is_none_or(|types| types.contains(&dt))
    }
}

const RULES: [LintRule; 10] = [
    LintRule {
        id: "R1",
        applies_to: None,
        description: "missing, duplicated or misplaced @startuml/@enduml",
        fix: Some(FixKind::InsertDelimiter),
        correctable: true,
    },
    LintRule {
        id: "R2",
        applies_to: None,
        description: "unbalanced braces",
        fix: Some(FixKind::BalanceBraces),
        correctable: true,
    },
    LintRule {
        id: "R3",
        applies_to: None,
        description: "skinparam linetype ortho",
        fix: Some(FixKind::DeleteLine),
        correctable: true,
    },
    LintRule {
        id: "R4",
        applies_to: Some(&[DiagramType::Activity]),
        description: "continue keyword",
        fix: Some(FixKind::DeleteLine),
        correctable: true,
    },
    LintRule {
        id: "R5",
        applies_to: Some(&[DiagramType::Activity]),
        description: "`else if` instead of `elseif`",
        fix: Some(FixKind::Rewrite { pattern: "else if", replacement: "elseif" }),
        correctable: true,
    },
    LintRule {
        id: "R6",
        applies_to: Some(&[DiagramType::Deployment]),
        description: "`device` instead of `node`",
        fix: Some(FixKind::Rewrite { pattern: "device", replacement: "node" }),
        correctable: true,
    },
    LintRule {
        id: "R7",
        applies_to: Some(&[DiagramType::Sequence]),
        description: "stereotype or arrow modifier in a participant declaration",
        fix: Some(FixKind::Rewrite { pattern: "<<...>> | ++ | -- | ->", replacement: "" }),
        correctable: true,
    },
    LintRule {
        id: "R8",
        applies_to: None,
        description: "placeholder element name",
        fix: None,
        correctable: false,
    },
    LintRule {
        id: "R9",
        applies_to: Some(&[DiagramType::SystemContext]),
        description: "C4 construct outside the supported subset",
        fix: None,
        correctable: false,
    },
    LintRule {
        id: "extension:code-fence",
        applies_to: None,
        description: "markdown code fence around the diagram",
        fix: Some(FixKind::DeleteLine),
        correctable: true,
    },
];

pub fn rules() -> &'static [LintRule] {
    &RULES
}

fn rule(id: &str) -> &'static LintRule {
    RULES.iter().find(|r| r.id == id).expect("known rule id")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Corrected,
    Uncorrectable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Corrected => "corrected",
            Verdict::Uncorrectable => "uncorrectable",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    /// 1-based; points at the last line for whole-file problems.
    pub line: usize,
    pub excerpt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintReport {
    pub diagram_type: DiagramType,
    pub violations: Vec<Violation>,
    pub fixes_applied: usize,
    pub uncorrectable: bool,
    pub verdict: Verdict,
}

impl LintReport {
    fn from_violations(dt: DiagramType, mut violations: Vec<Violation>) -> Self {
        violations.sort_by(|a, b| a.line.cmp(&b.line).then_with(|| a.rule.cmp(&b.rule)));
        let uncorrectable = violations.iter().any(|v| !rule(&v.rule).correctable);
        let verdict = if violations.is_empty() {
            Verdict::Valid
        } else if uncorrectable {
            Verdict::Uncorrectable
        } else {
            Verdict::Corrected
        };
        LintReport { diagram_type: dt, violations, fixes_applied: 0, uncorrectable, verdict }
    }

    pub fn violated_rules(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.violations.iter().map(|v| v.rule.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LintError {
    #[error("cannot apply fixes: violations of {0:?} have no deterministic fix")]
    Uncorrectable(Vec<String>),
}

fn excerpt(line: &str) -> String {
    let t = line.trim();
    match t.char_indices().nth(80) {
        Some((i, _)) => format!("{}...", &t[..i]),
        None => t.to_string(),
    }
}

fn is_fence(t: &str) -> bool {
    t.starts_with("```")
}

fn is_start(t: &str) -> bool {
    t.starts_with("@startuml")
}

fn is_end(t: &str) -> bool {
    t.starts_with("@enduml")
}

fn delimiters_ok(text: &str) -> Result<(), (usize, String)> {
    let lines = scan_lines(text);
    let significant: Vec<_> = lines
        .iter()
        .filter(|l| l.kind != LineKind::Blank && l.kind != LineKind::Comment && !is_fence(l.trimmed()))
        .collect();
    let last_line = lines.len().max(1);
    let starts: Vec<_> = significant.iter().filter(|l| is_start(l.trimmed())).collect();
    let ends: Vec<_> = significant.iter().filter(|l| is_end(l.trimmed())).collect();
    if starts.is_empty() {
        return Err((1, "missing @startuml".into()));
    }
    if ends.is_empty() {
        return Err((last_line, "missing @enduml".into()));
    }
    if starts.len() > 1 {
        return Err((starts[1].number, "duplicate @startuml".into()));
    }
    if ends.len() > 1 {
        return Err((ends[1].number, "duplicate @enduml".into()));
    }
    let first = significant.first().expect("a delimiter exists");
    if !is_start(first.trimmed()) {
        return Err((first.number, format!("content before @startuml: {}", excerpt(first.raw))));
    }
    let last = significant.last().expect("a delimiter exists");
    if !is_end(last.trimmed()) {
        return Err((last.number, format!("content after @enduml: {}", excerpt(last.raw))));
    }
    Ok(())
}

/// Lines whose braces are structural.
fn brace_lines(text: &str, dt: DiagramType) -> Vec<(usize, usize, usize)> {
    scan_lines(text)
        .into_iter()
        .filter(|l| l.kind == LineKind::Code)
        .filter(|l| !(dt == DiagramType::Activity && is_action_line(l.trimmed())))
        .map(|l| {
            let (o, c) = count_braces(l.trimmed());
            (l.number, o, c)
        })
        .filter(|&(_, o, c)| o + c > 0)
        .collect()
}

/// (dangling closer lines, unclosed opener lines)
fn brace_problems(text: &str, dt: DiagramType) -> (Vec<usize>, Vec<usize>) {
    let mut open: Vec<usize> = Vec::new();
    let mut dangling = Vec::new();
    let lines: Vec<&str> = text.lines().collect();
    for (number, _, _) in brace_lines(text, dt) {
        let mut quoted = false;
        for ch in lines[number - 1].chars() {
            match ch {
                '"' => quoted = !quoted,
                '{' if !quoted => open.push(number),
                '}' if !quoted => {
                    if open.pop().is_none() {
                        dangling.push(number);
                    }
                }
                _ => {}
            }
        }
    }
    (dangling, open)
}

const PARTICIPANT_KEYWORDS: &str = r"^\s*(?:participant|actor|boundary|control|entity|database|collections|queue)\s";

fn unquoted(t: &str) -> String {
    regex!(r#""[^"]*""#).replace_all(t, "\"\"").into_owned()
}

fn participant_defect(t: &str) -> bool {
    if !regex!(PARTICIPANT_KEYWORDS).is_match(t) {
        return false;
    }
    let bare = unquoted(t);
    bare.contains("<<") || regex!(r"(\+\+|--|\*\*|!!|-+>+|<-+)").is_match(&bare)
}

const C4_MACROS: &str = r"^\s*(?:Person|System|Container|Component|SystemDb|SystemQueue|ContainerDb|ContainerQueue|ComponentDb|ComponentQueue|Deployment_Node|Node|Boundary|System_Boundary|Container_Boundary|Enterprise_Boundary|Rel|BiRel|Lay|SHOW_LEGEND|LAYOUT_[A-Z_]+|UpdateElementStyle|AddElementTag|AddRelTag)(?:_[A-Za-z]+)?\s*\(";

/// Lints PlantUML text for diagram type `dt`.
pub fn lint_text(text: &str, dt: DiagramType) -> LintReport {
    let mut violations = Vec::new();
    let mut push = |rule: &str, line: usize, ex: String| {
        violations.push(Violation { rule: rule.to_string(), line, excerpt: ex });
    };

    if let Err((line, msg)) = delimiters_ok(text) {
        push("R1", line, msg);
    }
    let (dangling, unclosed) = brace_problems(text, dt);
    let lines: Vec<&str> = text.lines().collect();
    for n in dangling {
        push("R2", n, format!("dangling '}}': {}", excerpt(lines[n - 1])));
    }
    for n in unclosed {
        push("R2", n, format!("unclosed '{{': {}", excerpt(lines[n - 1])));
    }

    for l in scan_lines(text) {
        let t = l.trimmed();
        if is_fence(t) && l.kind != LineKind::Note {
            push("extension:code-fence", l.number, excerpt(t));
            continue;
        }
        if l.kind != LineKind::Code {
            continue;
        }
        if regex!(r"(?i)^skinparam\s+linetype\s+ortho$").is_match(t) {
            push("R3", l.number, excerpt(t));
        }
        match dt {
            DiagramType::Activity => {
                if regex!(r"^continue\s*;?$").is_match(t) {
                    push("R4", l.number, excerpt(t));
                }
                if regex!(r"^else\s+if\b").is_match(t) {
                    push("R5", l.number, excerpt(t));
                }
            }
            DiagramType::Deployment if regex!(r"^device\b").is_match(t) => push("R6", l.number, excerpt(t)),
            DiagramType::Sequence if participant_defect(t) => push("R7", l.number, excerpt(t)),
            DiagramType::SystemContext => {
                if regex!(r"(?i)^!include.*c4").is_match(t) || regex!(C4_MACROS).is_match(t) {
                    push("R9", l.number, excerpt(t));
                }
            }
            _ => {}
        }
    }

    let artifact = parse_artifact(text, dt);
    for e in &artifact.elements {
        let placeholder = |n: &str| PLACEHOLDER_NAMES.iter().any(|p| p.eq_ignore_ascii_case(n));
        if placeholder(&e.name) || e.alias.as_deref().is_some_and(placeholder) {
            push("R8", e.line, format!("placeholder name {:?}", e.name));
        }
        if dt == DiagramType::SystemContext
            && e.stereotype.is_some()
            && !matches!(e.kind.as_str(), "rectangle" | "actor")
        {
            push("R9", e.line, format!("stereotyped {} {:?}", e.kind, e.name));
        }
    }
    LintReport::from_violations(dt, violations)
}

/// Lints an already parsed artifact.
pub fn lint(artifact: &DiagramArtifact) -> LintReport {
    lint_text(&artifact.text, artifact.diagram_type)
}

fn join(lines: &[String], trailing_newline: bool) -> String {
    let mut out = lines.join("\n");
    if trailing_newline {
        out.push('\n');
    }
    out
}

fn fix_text(text: &str, dt: DiagramType) -> String {
    let trailing_newline = text.ends_with('\n') || text.is_empty();
    let code = |text: &str| -> Vec<bool> { scan_lines(text).iter().map(|l| l.kind == LineKind::Code).collect() };

    let kinds = scan_lines(text);
    let mut lines: Vec<String> = Vec::new();
    for l in &kinds {
        let t = l.trimmed();
        if is_fence(t) && l.kind != LineKind::Note {
            continue;
        }
        if l.kind == LineKind::Code {
            if regex!(r"(?i)^skinparam\s+linetype\s+ortho$").is_match(t) {
                continue;
            }
            if dt == DiagramType::Activity && regex!(r"^continue\s*;?$").is_match(t) {
                continue;
            }
        }
        lines.push(l.raw.to_string());
    }

    let is_code = code(&join(&lines, false));
    for (line, code) in lines.iter_mut().zip(is_code) {
        if !code {
            continue;
        }
        match dt {
            DiagramType::Activity => {
                *line = regex!(r"^(\s*)else\s+if\b").replace(line, "${1}elseif").into_owned();
            }
            DiagramType::Deployment => {
                *line = regex!(r"^(\s*)device\b").replace(line, "${1}node").into_owned();
            }
            DiagramType::Sequence if participant_defect(line) => {
                *line = strip_participant(line);
            }
            _ => {}
        }
    }

    let mut text = join(&lines, trailing_newline);
    if delimiters_ok(&text).is_err() {
        text = fix_delimiters(&text, trailing_newline);
    }
    let (dangling, unclosed) = brace_problems(&text, dt);
    if !dangling.is_empty() || !unclosed.is_empty() {
        text = fix_braces(&text, dt, trailing_newline);
    }
    text
}

fn strip_participant(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    // keep quoted names intact
    let mut rest = line;
    while let Some(start) = rest.find('"') {
        let Some(len) = rest[start + 1..].find('"') else { break };
        out.push_str(&strip_modifiers(&rest[..start]));
        out.push_str(&rest[start..start + len + 2]);
        rest = &rest[start + len + 2..];
    }
    out.push_str(&strip_modifiers(rest));
    regex!(r"[ \t]+$").replace(&out, "").into_owned()
}

fn strip_modifiers(s: &str) -> String {
    let s = regex!(r"\s*<<[^>]*>>").replace_all(s, "");
    let s = regex!(r"\s*(?:-+>+|<-+)\s*\S*").replace_all(&s, "");
    regex!(r"\s*(?:\+\+|--|\*\*|!!)").replace_all(&s, "").into_owned()
}

fn fix_delimiters(text: &str, trailing_newline: bool) -> String {
    let mut header = None;
    let mut body = Vec::new();
    for l in scan_lines(text) {
        let t = l.trimmed();
        let delimiter_line = l.kind == LineKind::Code && (is_start(t) || is_end(t));
        if delimiter_line {
            if header.is_none() && is_start(t) {
                header = Some(t.to_string());
            }
            continue;
        }
        body.push(l.raw.to_string());
    }
    while body.first().is_some_and(|l| l.trim().is_empty()) {
        body.remove(0);
    }
    while body.last().is_some_and(|l| l.trim().is_empty()) {
        body.pop();
    }
    let mut lines = vec![header.unwrap_or_else(|| "@startuml".to_string())];
    lines.extend(body);
    lines.push("@enduml".to_string());
    let _ = trailing_newline;
    join(&lines, true)
}

fn fix_braces(text: &str, dt: DiagramType, trailing_newline: bool) -> String {
    let (dangling, unclosed) = brace_problems(text, dt);
    let mut lines: Vec<Option<String>> = text.lines().map(|l| Some(l.to_string())).collect();
    for n in dangling.iter().rev() {
        let Some(line) = lines[n - 1].take() else { continue };
        if line.trim_start().starts_with('}') {
            continue;
        }
        lines[n - 1] = Some(remove_unmatched_closers(&line));
    }
    let mut out: Vec<String> = lines.into_iter().flatten().collect();
    let at = out.iter().rposition(|l| is_end(l.trim())).unwrap_or(out.len());
    for _ in 0..unclosed.len() {
        out.insert(at, "}".to_string());
    }
    join(&out, trailing_newline)
}

/// Drops every `}` on a line that closes nothing opened on it. Only
/// called for lines the scan found dangling closers on, so any opener on
/// the line is matched first.
fn remove_unmatched_closers(line: &str) -> String {
    let mut depth = 0usize;
    let mut quoted = false;
    let mut out = String::with_capacity(line.len());
    for ch in line.chars() {
        match ch {
            '"' => quoted = !quoted,
            '{' if !quoted => depth += 1,
            '}' if !quoted => {
                if depth == 0 {
                    continue;
                }
                depth -= 1;
            }
            _ => {}
        }
        out.push(ch);
    }
    out
}

/// Applies every deterministic fix. The result re-lints valid.
pub fn apply_fixes(artifact: &DiagramArtifact, report: &LintReport) -> Result<DiagramArtifact, LintError> {
    if report.uncorrectable {
        let ids = report
            .violations
            .iter()
            .filter(|v| !rule(&v.rule).correctable)
            .map(|v| v.rule.clone())
            .collect();
        return Err(LintError::Uncorrectable(ids));
    }
    if report.violations.is_empty() {
        return Ok(artifact.clone());
    }
    let text = fix_text(&artifact.text, artifact.diagram_type);
    let mut fixed = parse_artifact(&text, artifact.diagram_type);
    fixed.scope = artifact.scope.clone();
    Ok(fixed)
}

/// Lints `artifact` and, when every violation is correctable, fixes it.
/// The returned report describes the input; `fixes_applied` counts the
/// violations that were fixed.
pub fn lint_and_fix(artifact: &DiagramArtifact) -> (LintReport, DiagramArtifact) {
    let mut report = lint(artifact);
    match apply_fixes(artifact, &report) {
        Ok(fixed) => {
            report.fixes_applied = report.violations.len();
            (report, fixed)
        }
        Err(_) => (report, artifact.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(text: &str, dt: DiagramType) -> LintReport {
        lint_text(text, dt)
    }

    fn fixed(text: &str, dt: DiagramType) -> DiagramArtifact {
        let a = parse_artifact(text, dt);
        let r = lint(&a);
        apply_fixes(&a, &r).unwrap()
    }

    #[test]
    fn rule_table_is_consistent() {
        for r in rules() {
            assert_eq!(r.correctable, r.fix.is_some(), "{}", r.id);
        }
        assert_eq!(rules().iter().filter(|r| r.id.starts_with('R')).count(), 9);
    }

    #[test]
    fn clean_class_diagram_is_valid() {
        let r = check("@startuml\nclass Order {\n  +total(): int\n}\nclass Line\nOrder *-- Line\n@enduml\n", DiagramType::Class);
        assert_eq!(r.verdict, Verdict::Valid);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn missing_delimiters() {
        let text = "class A\nclass B\n";
        let r = check(text, DiagramType::Class);
        assert_eq!(r.violated_rules(), ["R1"]);
        let f = fixed(text, DiagramType::Class);
        assert!(f.text.starts_with("@startuml"));
        assert_eq!(lint(&f).verdict, Verdict::Valid);
        assert_eq!(f.text, "@startuml\nclass A\nclass B\n@enduml\n");
    }

    #[test]
    fn misplaced_and_duplicated_delimiters() {
        for text in [
            "Here is the diagram:\n@startuml\nclass A\n@enduml\n",
            "@startuml\nclass A\n@enduml\n@enduml\n",
            "@startuml\n@startuml\nclass A\n@enduml",
            "```plantuml\n@startuml\nclass A\n@enduml\n```\n",
        ] {
            let r = check(text, DiagramType::Class);
            assert_eq!(r.verdict, Verdict::Corrected, "{text}");
            assert_eq!(lint(&fixed(text, DiagramType::Class)).verdict, Verdict::Valid, "{text}");
        }
    }

    #[test]
    fn activity_continue_and_elseif() {
        let text = "@startuml\nstart\nwhile (more?)\n  :step;\n  if (skip?) then (yes)\n    continue\n  else if (stop?) then (yes)\n    :halt;\n  endif\nendwhile\nstop\n@enduml\n";
        let r = check(text, DiagramType::Activity);
        assert_eq!(r.violated_rules(), ["R4", "R5"]);
        assert_eq!(r.verdict, Verdict::Corrected);
        let f = fixed(text, DiagramType::Activity);
        assert!(!f.text.contains("continue"));
        assert!(f.text.contains("  elseif (stop?) then (yes)"));
        assert_eq!(lint(&f).verdict, Verdict::Valid);
    }

    #[test]
    fn continue_is_only_flagged_in_activity() {
        let r = check("@startuml\nclass A\ncontinue\n@enduml", DiagramType::Class);
        assert_eq!(r.verdict, Verdict::Valid);
    }

    #[test]
    fn device_becomes_node() {
        let f = fixed("@startuml\ndevice \"DB\" { }\n@enduml\n", DiagramType::Deployment);
        assert_eq!(f.text, "@startuml\nnode \"DB\" { }\n@enduml\n");
    }

    #[test]
    fn linetype_ortho_deleted() {
        let text = "@startuml\nskinparam linetype ortho\n[A] --> [B]\n@enduml\n";
        assert_eq!(check(text, DiagramType::Component).violated_rules(), ["R3"]);
        assert_eq!(fixed(text, DiagramType::Component).text, "@startuml\n[A] --> [B]\n@enduml\n");
    }

    #[test]
    fn braces_balanced() {
        let open = "@startuml\nnode App {\n  artifact api\n@enduml\n";
        let r = check(open, DiagramType::Deployment);
        assert_eq!(r.violated_rules(), ["R2"]);
        assert_eq!(fixed(open, DiagramType::Deployment).text, "@startuml\nnode App {\n  artifact api\n}\n@enduml\n");
        let dangling = "@startuml\nclass A {\n}\n}\nclass B }\n@enduml\n";
        let f = fixed(dangling, DiagramType::Class);
        assert_eq!(f.text, "@startuml\nclass A {\n}\nclass B \n@enduml\n");
        assert_eq!(lint(&f).verdict, Verdict::Valid);
    }

    #[test]
    fn braces_in_strings_notes_and_actions_ignored() {
        let text = "@startuml\nstart\n:parse {json;\nnote right\n  a { b\nend note\nA -> B : \"{\"\nstop\n@enduml\n";
        assert_eq!(check(text, DiagramType::Activity).verdict, Verdict::Valid);
    }

    #[test]
    fn participant_stereotypes_stripped() {
        let text = "@startuml\nparticipant Api <<service>>\nparticipant \"Web <<UI>>\" as W ++\nApi -> W : x\n@enduml\n";
        let r = check(text, DiagramType::Sequence);
        assert_eq!(r.violations.len(), 2);
        assert!(r.violations.iter().all(|v| v.rule == "R7"));
        let f = fixed(text, DiagramType::Sequence);
        assert_eq!(f.text, "@startuml\nparticipant Api\nparticipant \"Web <<UI>>\" as W\nApi -> W : x\n@enduml\n");
        assert_eq!(lint(&f).verdict, Verdict::Valid);
    }

    #[test]
    fn placeholder_names_uncorrectable() {
        let a = parse_artifact("@startuml\nclass Foo\nclass Order\n@enduml\n", DiagramType::Class);
        let r = lint(&a);
        assert_eq!(r.verdict, Verdict::Uncorrectable);
        assert_eq!(r.violations[0].line, 2);
        assert!(apply_fixes(&a, &r).is_err());
        let (report, out) = lint_and_fix(&a);
        assert_eq!(report.fixes_applied, 0);
        assert_eq!(out.text, a.text);
    }

    #[test]
    fn c4_system_context_uncorrectable() {
        let texts = [
            "@startuml\n!include <C4/C4_Context>\nPerson(u, \"User\")\n@enduml\n",
            "@startuml\nactor User\nnode Shop <<system>>\nUser --> Shop : buys\n@enduml\n",
        ];
        for t in texts {
            let r = check(t, DiagramType::SystemContext);
            assert_eq!(r.verdict, Verdict::Uncorrectable, "{t}");
            assert!(r.violated_rules().contains(&"R9"));
        }
        let plain = "@startuml\nactor User <<external>>\nrectangle Shop <<system>>\nUser --> Shop : buys\n@enduml\n";
        assert_eq!(check(plain, DiagramType::SystemContext).verdict, Verdict::Valid);
    }

    #[test]
    fn fixes_are_idempotent_and_conservative() {
        let text = "```\nskinparam linetype ortho\ndevice Phone {\nartifact app\nnode Srv\nPhone --> Srv\n";
        let once = fixed(text, DiagramType::Deployment);
        let twice = fixed(&once.text, DiagramType::Deployment);
        assert_eq!(once.text, twice.text);
        let before = parse_artifact(text, DiagramType::Deployment);
        assert!(once.element_names().is_subset(&before.element_names()));
        assert_eq!(lint(&once).verdict, Verdict::Valid);
    }
}
