//! Language-agnostic intermediate representation of a repository.
//!
//! A [`ProjectIr`] is produced raw by [`crate::extract`] and rewritten by
//! [`crate::normalize`]. Its canonical serialization (sorted keys, no
//! whitespace) is the unit the view compactor measures, so
//! [`ProjectIr::to_canonical_json`] must stay byte-stable.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical;

#[derive(Debug, thiserror::Error)]
pub enum IrError {
    #[error("IR parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("IR validation error at {path}: {message}")]
    Validation { path: String, message: String },
    #[error("cannot merge an empty list of IRs")]
    EmptyMerge,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Java,
    Python,
    #[serde(rename = "javascript")]
    JavaScript,
    Php,
}

impl Language {
    pub const ALL: [Language; 4] =
        [Language::Java, Language::Python, Language::JavaScript, Language::Php];

    pub fn as_str(self) -> &'static str {
        match self {
            Language::Java => "java",
            Language::Python => "python",
            Language::JavaScript => "javascript",
            Language::Php => "php",
        }
    }

    /// Extension-based detection; no shebang sniffing.
    pub fn from_extension(ext: &str) -> Option<Language> {
        match ext {
            "java" => Some(Language::Java),
            "py" => Some(Language::Python),
            "js" | "mjs" => Some(Language::JavaScript),
            "php" => Some(Language::Php),
            _ => None,
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Option<Language> {
        path.as_ref()
            .extension()
            .and_then(|e| e.to_str())
            .and_then(Language::from_extension)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "java" => Ok(Language::Java),
            "python" | "py" => Ok(Language::Python),
            "javascript" | "js" => Ok(Language::JavaScript),
            "php" => Ok(Language::Php),
            other => Err(format!("unsupported language `{other}`")),
        }
    }
}

/// UML visibility.
///
/// Normalized IRs only ever contain the four canonical variants. Raw IRs
/// carry whatever modifier text the extractor saw in [`Visibility::Raw`]
/// (the empty string when no modifier was written).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    Private,
    Protected,
    Package,
    #[serde(untagged)]
    Raw(String),
}

impl Default for Visibility {
    fn default() -> Self {
        Visibility::Raw(String::new())
    }
}

impl Visibility {
    pub const CANONICAL: [Visibility; 4] =
        [Visibility::Public, Visibility::Private, Visibility::Protected, Visibility::Package];

    pub fn is_canonical(&self) -> bool {
        matches!(
            self,
            Visibility::Public | Visibility::Private | Visibility::Protected | Visibility::Package
        )
    }

    /// Wraps modifier text, mapping the four canonical names to their
    /// variants so that a raw IR round-trips through JSON unchanged.
    pub fn raw(modifier: impl Into<String>) -> Visibility {
        let modifier = modifier.into();
        match modifier.as_str() {
            "public" => Visibility::Public,
            "private" => Visibility::Private,
            "protected" => Visibility::Protected,
            "package" => Visibility::Package,
            _ => Visibility::Raw(modifier),
        }
    }

    /// Modifier text for raw values, canonical name otherwise.
    pub fn as_str(&self) -> &str {
        match self {
            Visibility::Public => "public",
            Visibility::Private => "private",
            Visibility::Protected => "protected",
            Visibility::Package => "package",
            Visibility::Raw(s) => s,
        }
    }

    /// PlantUML member prefix.
    pub fn uml_symbol(&self) -> &'static str {
        match self {
            Visibility::Public => "+",
            Visibility::Private => "-",
            Visibility::Protected => "#",
            Visibility::Package => "~",
            Visibility::Raw(_) => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    #[default]
    Class,
    Interface,
    Enum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Parameter {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_annotation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct MethodDef {
    pub name: String,
    #[serde(default)]
    pub visibility: Visibility,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_annotation: Option<String>,
    #[serde(default)]
    pub parameters: Vec<Parameter>,
    #[serde(default)]
    pub calls: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct AttributeDef {
    pub name: String,
    #[serde(default)]
    pub visibility: Visibility,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_annotation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ClassDef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualified_name: Option<String>,
    #[serde(default)]
    pub kind: ClassKind,
    #[serde(default)]
    pub visibility: Visibility,
    #[serde(default)]
    pub methods: Vec<MethodDef>,
    #[serde(default)]
    pub attributes: Vec<AttributeDef>,
    #[serde(default)]
    pub extends: Vec<String>,
    #[serde(default)]
    pub implements: Vec<String>,
    #[serde(default)]
    pub source_file: String,
}

impl ClassDef {
    pub fn new(name: impl Into<String>) -> Self {
        ClassDef { name: name.into(), ..Default::default() }
    }

    pub fn has_inheritance(&self) -> bool {
        !self.extends.is_empty() || !self.implements.is_empty()
    }

    pub fn language(&self) -> Option<Language> {
        Language::from_path(&self.source_file)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct FunctionDef {
    pub name: String,
    #[serde(default)]
    pub source_file: String,
    #[serde(default)]
    pub parameters: Vec<Parameter>,
    #[serde(default)]
    pub calls: Vec<String>,
    /// Body length in source lines; an importance hint for ranking.
    #[serde(default)]
    pub line_count: u32,
}

impl FunctionDef {
    pub fn new(name: impl Into<String>) -> Self {
        FunctionDef { name: name.into(), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ProjectIr {
    pub project_name: String,
    #[serde(default)]
    pub languages: BTreeSet<Language>,
    pub classes: Vec<ClassDef>,
    pub functions: Vec<FunctionDef>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    #[serde(default)]
    pub normalized: bool,
}

impl ProjectIr {
    pub fn new(project_name: impl Into<String>) -> Self {
        ProjectIr { project_name: project_name.into(), ..Default::default() }
    }

    /// Number of IR entities: classes plus free functions.
    pub fn element_count(&self) -> usize {
        self.classes.len() + self.functions.len()
    }

    /// Names of every IR entity, one per entity (duplicates kept).
    pub fn element_names(&self) -> impl Iterator<Item = &str> {
        self.classes
            .iter()
            .map(|c| c.name.as_str())
            .chain(self.functions.iter().map(|f| f.name.as_str()))
    }

    pub fn to_canonical_json(&self) -> Vec<u8> {
        canonical::to_vec(self)
    }

    /// Alias of [`ProjectIr::to_canonical_json`].
    pub fn serialize(&self) -> Vec<u8> {
        self.to_canonical_json()
    }

    /// Parses and validates an IR document.
    ///
    /// Type errors report a JSON-pointer path (`/classes/2/name`); a
    /// normalized IR is additionally checked against the normalized-schema
    /// invariants.
    pub fn deserialize(bytes: &[u8]) -> Result<ProjectIr, IrError> {
        let value: Value = serde_json::from_slice(bytes).map_err(|e| IrError::Parse {
            path: "/".into(),
            message: e.to_string(),
        })?;
        let ir: ProjectIr = serde_path_to_error::deserialize(value).map_err(|e| {
            let message = e.inner().to_string();
            let mut path = pointer(&e.path().to_string());
            if let Some(field) = missing_field(&message) {
                if path == "/" {
                    path.clear();
                }
                path.push('/');
                path.push_str(field);
            }
            IrError::Parse { path, message }
        })?;
        ir.validate()?;
        Ok(ir)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<ProjectIr, IrError> {
        let bytes = std::fs::read(path)?;
        ProjectIr::deserialize(&bytes)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<(), IrError> {
        std::fs::write(path, self.to_canonical_json())?;
        Ok(())
    }

    /// Checks the schema invariants that serde alone cannot express.
    pub fn validate(&self) -> Result<(), IrError> {
        for (i, f) in self.functions.iter().enumerate() {
            if f.name.is_empty() {
                return Err(invalid(format!("/functions/{i}/name"), "function name is empty"));
            }
        }
        if !self.normalized {
            return Ok(());
        }
        let mut seen = HashSet::new();
        for (ci, c) in self.classes.iter().enumerate() {
            let base = format!("/classes/{ci}");
            if !seen.insert(c.name.as_str()) {
                return Err(invalid(format!("{base}/name"), format!("duplicate class `{}`", c.name)));
            }
            check_visibility(&c.visibility, || format!("{base}/visibility"))?;
            for (mi, m) in c.methods.iter().enumerate() {
                check_visibility(&m.visibility, || format!("{base}/methods/{mi}/visibility"))?;
            }
            for (ai, a) in c.attributes.iter().enumerate() {
                check_visibility(&a.visibility, || format!("{base}/attributes/{ai}/visibility"))?;
            }
            for (field, list) in [("extends", &c.extends), ("implements", &c.implements)] {
                for (ti, target) in list.iter().enumerate() {
                    if is_qualified(target) {
                        return Err(invalid(
                            format!("{base}/{field}/{ti}"),
                            format!("qualified inheritance target `{target}` in a normalized IR"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// True when `name` contains a namespace or package separator.
pub fn is_qualified(name: &str) -> bool {
    name.contains('.') || name.contains('\\') || name.contains("::") || name.contains('/')
}

fn check_visibility(v: &Visibility, path: impl FnOnce() -> String) -> Result<(), IrError> {
    if v.is_canonical() {
        Ok(())
    } else {
        Err(invalid(
            path(),
            format!("visibility `{}` is not one of public, private, protected, package", v.as_str()),
        ))
    }
}

fn invalid(path: String, message: impl Into<String>) -> IrError {
    IrError::Validation { path, message: message.into() }
}

/// Converts serde_path_to_error's `a.b[0].c` notation to `/a/b/0/c`.
fn pointer(dotted: &str) -> String {
    if dotted == "." || dotted.is_empty() {
        return "/".into();
    }
    let mut out = String::new();
    for part in dotted.split('.') {
        let mut rest = part;
        while !rest.is_empty() {
            match rest.find('[') {
                Some(0) => {
                    let end = rest.find(']').unwrap_or(rest.len() - 1);
                    out.push('/');
                    out.push_str(&rest[1..end]);
                    rest = &rest[(end + 1).min(rest.len())..];
                }
                Some(i) => {
                    out.push('/');
                    out.push_str(&rest[..i]);
                    rest = &rest[i..];
                }
                None => {
                    out.push('/');
                    out.push_str(rest);
                    rest = "";
                }
            }
        }
    }
    out
}

fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

/// Merges per-language IRs of one repository into a single IR.
///
/// Class names defined in more than one language are disambiguated by
/// suffixing the language identifier (`App` becomes `App_java` and
/// `App_python`). No entity is dropped.
pub fn merge(irs: Vec<ProjectIr>) -> Result<ProjectIr, IrError> {
    let mut irs = irs.into_iter();
    let first = irs.next().ok_or(IrError::EmptyMerge)?;
    let rest: Vec<ProjectIr> = irs.collect();
    if rest.is_empty() {
        return Ok(first);
    }
    let all: Vec<ProjectIr> = std::iter::once(first).chain(rest).collect();

    let lang_tag = |c: &ClassDef| c.language().map(|l| l.as_str()).unwrap_or("unknown");
    let mut langs_by_name: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for ir in &all {
        for c in &ir.classes {
            langs_by_name.entry(c.name.as_str()).or_default().insert(lang_tag(c));
        }
    }
    let colliding: HashSet<String> = langs_by_name
        .into_iter()
        .filter(|(_, langs)| langs.len() > 1)
        .map(|(name, _)| name.to_string())
        .collect();

    let mut merged = ProjectIr {
        project_name: all[0].project_name.clone(),
        normalized: all.iter().all(|ir| ir.normalized),
        ..Default::default()
    };
    let mut taken: HashSet<String> = all
        .iter()
        .flat_map(|ir| ir.classes.iter())
        .filter(|c| !colliding.contains(&c.name))
        .map(|c| c.name.clone())
        .collect();
    for ir in all {
        merged.languages.extend(ir.languages.iter().copied());
        for (k, v) in ir.metadata {
            merged.metadata.entry(k).or_insert(v);
        }
        for mut class in ir.classes {
            if colliding.contains(&class.name) {
                let base = format!("{}_{}", class.name, lang_tag(&class));
                let mut candidate = base.clone();
                let mut n = 2;
                while taken.contains(&candidate) {
                    candidate = format!("{base}_{n}");
                    n += 1;
                }
                taken.insert(candidate.clone());
                class.name = candidate;
            }
            merged.classes.push(class);
        }
        merged.functions.extend(ir.functions);
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class_in(name: &str, file: &str) -> ClassDef {
        ClassDef { source_file: file.into(), ..ClassDef::new(name) }
    }

    #[test]
    fn empty_ir_has_fixed_encoding() {
        let ir = ProjectIr::new("p");
        let s = String::from_utf8(ir.serialize()).unwrap();
        assert_eq!(
            s,
            r#"{"classes":[],"functions":[],"languages":[],"metadata":{},"normalized":false,"project_name":"p"}"#
        );
    }

    #[test]
    fn raw_visibility_round_trips() {
        let mut ir = ProjectIr::new("p");
        let mut c = ClassDef::new("A");
        c.visibility = Visibility::raw("pub");
        c.attributes.push(AttributeDef { name: "x".into(), visibility: Visibility::Private, ..Default::default() });
        ir.classes.push(c);
        let back = ProjectIr::deserialize(&ir.serialize()).unwrap();
        assert_eq!(back, ir);
        assert_eq!(back.classes[0].visibility, Visibility::Raw("pub".into()));
        assert_eq!(back.classes[0].attributes[0].visibility, Visibility::Private);
    }

    #[test]
    fn missing_classes_reports_pointer() {
        let err = ProjectIr::deserialize(br#"{"project_name":"p","functions":[]}"#).unwrap_err();
        match err {
            IrError::Parse { path, .. } => assert_eq!(path, "/classes"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nested_type_error_reports_pointer() {
        let doc = br#"{"project_name":"p","functions":[],"classes":[{"name":"A"},{"name":7}]}"#;
        match ProjectIr::deserialize(doc).unwrap_err() {
            IrError::Parse { path, .. } => assert_eq!(path, "/classes/1/name"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_canonical_visibility_rejected_when_normalized() {
        // Only the four canonical names pass; everything else is a raw modifier.
        for (vis, ok) in [("public", true), ("private", true), ("protected", true), ("package", true), ("pub", false), ("", false)] {
            let doc = format!(
                r#"{{"project_name":"p","normalized":true,"functions":[],"classes":[{{"name":"A","visibility":"{vis}"}}]}}"#
            );
            let res = ProjectIr::deserialize(doc.as_bytes());
            assert_eq!(res.is_ok(), ok, "visibility {vis:?}");
            if !ok {
                match res.unwrap_err() {
                    IrError::Validation { path, .. } => assert_eq!(path, "/classes/0/visibility"),
                    other => panic!("unexpected {other:?}"),
                }
            }
        }
    }

    #[test]
    fn normalized_rejects_qualified_targets_and_duplicates() {
        let mut ir = ProjectIr::new("p");
        ir.normalized = true;
        let mut c = ClassDef::new("A");
        c.visibility = Visibility::Public;
        c.extends.push("pkg.Base".into());
        ir.classes.push(c);
        assert!(matches!(ir.validate(), Err(IrError::Validation { .. })));
        ir.classes[0].extends = vec!["Base".into()];
        ir.validate().unwrap();
        ir.classes.push(ir.classes[0].clone());
        assert!(matches!(ir.validate(), Err(IrError::Validation { .. })));
    }

    #[test]
    fn merge_singleton_is_identity() {
        let mut ir = ProjectIr::new("p");
        ir.classes.push(class_in("A", "a.py"));
        assert_eq!(merge(vec![ir.clone()]).unwrap(), ir);
        assert!(matches!(merge(vec![]), Err(IrError::EmptyMerge)));
    }

    #[test]
    fn merge_distinct_names() {
        let mut a = ProjectIr::new("p");
        a.languages.insert(Language::Java);
        a.classes.push(class_in("A", "A.java"));
        let mut b = ProjectIr::new("p");
        b.languages.insert(Language::Python);
        b.classes.push(class_in("B", "b.py"));
        b.functions.push(FunctionDef::new("main"));
        let m = merge(vec![a, b]).unwrap();
        assert_eq!(m.classes.len(), 2);
        assert_eq!(m.element_count(), 3);
        assert_eq!(m.languages.len(), 2);
    }

    #[test]
    fn merge_suffixes_cross_language_collisions() {
        let mut a = ProjectIr::new("p");
        a.classes.push(class_in("App", "src/App.java"));
        a.classes.push(class_in("Only", "src/Only.java"));
        let mut b = ProjectIr::new("p");
        b.classes.push(class_in("App", "app.py"));
        let m = merge(vec![a, b]).unwrap();
        let names: Vec<_> = m.classes.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["App_java", "Only", "App_python"]);
    }

    #[test]
    fn merge_suffix_avoids_existing_names() {
        let mut a = ProjectIr::new("p");
        a.classes.push(class_in("App", "App.java"));
        a.classes.push(class_in("App_java", "Other.java"));
        let mut b = ProjectIr::new("p");
        b.classes.push(class_in("App", "app.py"));
        let m = merge(vec![a, b]).unwrap();
        let names: BTreeSet<_> = m.classes.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names.len(), 3);
        assert!(names.contains("App_java_2"));
    }

    #[test]
    fn pointer_conversion() {
        assert_eq!(pointer("classes[3].methods[0].name"), "/classes/3/methods/0/name");
        assert_eq!(pointer("."), "/");
        assert_eq!(pointer("project_name"), "/project_name");
    }
}
