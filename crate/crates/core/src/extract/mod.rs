//! Repository scanning and per-language structure extraction.
//!
//! Every supported language has one [`Extractor`] in the
//! [`ExtractorRegistry`]. The bundled extractors are tree-sitter based, so a
//! file with syntax errors still yields whatever declarations the parser
//! recovered; such files are counted in [`ExtractionReport`].

mod infra;
mod java;
mod javascript;
mod php;
mod python;
mod syntax;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::ir::{ClassDef, FunctionDef, Language, ProjectIr};

pub use infra::infrastructure_entry;

/// Directory names never descended into.
pub const SKIPPED_DIRS: [&str; 5] = ["node_modules", "vendor", "target", "dist", ".git"];

/// Files above this size are skipped rather than parsed.
pub const MAX_FILE_BYTES: u64 = 2 * 1024 * 1024;

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("cannot read repository root {path}: {source}")]
    Root { path: PathBuf, source: std::io::Error },
    #[error("no extractor registered for {0}")]
    Unregistered(Language),
    #[error("failed to load the {language} grammar: {message}")]
    Grammar { language: Language, message: String },
}

/// Structure recovered from one source file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileFacts {
    pub classes: Vec<ClassDef>,
    pub functions: Vec<FunctionDef>,
    /// The parse tree contained error or missing nodes.
    pub had_errors: bool,
}

/// A language frontend. Implementations must be deterministic.
pub trait Extractor: Send + Sync {
    fn language(&self) -> Language;

    /// Extracts classes and free functions from `source`. `rel_path` is the
    /// repository-relative path recorded as `source_file`.
    fn extract_file(&self, rel_path: &str, source: &str) -> Result<FileFacts, ExtractError>;
}

pub struct ExtractorRegistry {
    extractors: BTreeMap<Language, Box<dyn Extractor>>,
}

impl fmt::Debug for ExtractorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtractorRegistry")
            .field("languages", &self.extractors.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Default for ExtractorRegistry {
    fn default() -> Self {
        let mut registry = ExtractorRegistry::empty();
        registry.register(Box::new(java::JavaExtractor));
        registry.register(Box::new(python::PythonExtractor));
        registry.register(Box::new(javascript::JavaScriptExtractor));
        registry.register(Box::new(php::PhpExtractor));
        registry
    }
}

impl ExtractorRegistry {
    pub fn empty() -> Self {
        ExtractorRegistry { extractors: BTreeMap::new() }
    }

    /// Registers `extractor`, replacing any previous one for its language.
    pub fn register(&mut self, extractor: Box<dyn Extractor>) {
        self.extractors.insert(extractor.language(), extractor);
    }

    pub fn get(&self, language: Language) -> Result<&dyn Extractor, ExtractError> {
        self.extractors
            .get(&language)
            .map(|e| e.as_ref())
            .ok_or(ExtractError::Unregistered(language))
    }

    pub fn languages(&self) -> impl Iterator<Item = Language> + '_ {
        self.extractors.keys().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub files_scanned: usize,
    pub files_with_errors: usize,
    pub error_files: Vec<String>,
    pub skipped: Vec<SkippedFile>,
    pub per_language: BTreeMap<Language, usize>,
}

impl fmt::Display for ExtractionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scanned {} files ({} with parse errors, {} skipped)",
            self.files_scanned,
            self.files_with_errors,
            self.skipped.len()
        )?;
        for (lang, n) in &self.per_language {
            write!(f, "; {lang}: {n}")?;
        }
        Ok(())
    }
}

fn walk(root: &Path) -> impl Iterator<Item = walkdir::DirEntry> {
    WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| {
            e.depth() == 0
                || !(e.file_type().is_dir()
                    && e.file_name().to_str().is_some_and(|n| SKIPPED_DIRS.contains(&n)))
        })
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
}

fn check_root(root: &Path) -> Result<(), ExtractError> {
    std::fs::read_dir(root)
        .map(|_| ())
        .map_err(|source| ExtractError::Root { path: root.to_path_buf(), source })
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Languages with at least one source file under `root`, by extension.
pub fn detect_languages(root: &Path) -> Result<BTreeSet<Language>, ExtractError> {
    check_root(root)?;
    Ok(walk(root).filter_map(|e| Language::from_path(e.path())).collect())
}

/// Extracts a raw IR for `langs` from the tree rooted at `root`.
///
/// Files are parsed in parallel; the result is assembled in
/// `(source_file, name)` order so it does not depend on scheduling.
pub fn extract_project(
    root: &Path,
    langs: &BTreeSet<Language>,
    registry: &ExtractorRegistry,
) -> Result<(ProjectIr, ExtractionReport), ExtractError> {
    check_root(root)?;
    for &lang in langs {
        registry.get(lang)?;
    }

    let mut sources = Vec::new();
    let mut infra_files = Vec::new();
    for entry in walk(root) {
        let rel = relative(root, entry.path());
        match Language::from_path(entry.path()) {
            Some(lang) if langs.contains(&lang) => sources.push((lang, rel, entry.into_path())),
            Some(_) => {}
            None => {
                if infra::is_infrastructure_file(&rel) {
                    infra_files.push((rel, entry.into_path()));
                }
            }
        }
    }

    let mut report = ExtractionReport { files_scanned: sources.len(), ..Default::default() };
    for (lang, _, _) in &sources {
        *report.per_language.entry(*lang).or_default() += 1;
    }

    enum Outcome {
        Parsed(FileFacts),
        Skipped(String),
    }
    let outcomes: Vec<(String, Outcome)> = sources
        .par_iter()
        .map(|(lang, rel, path)| {
            let outcome = match read_source(path) {
                Err(reason) => Outcome::Skipped(reason),
                Ok(text) => match registry.get(*lang).and_then(|x| x.extract_file(rel, &text)) {
                    Ok(facts) => Outcome::Parsed(facts),
                    Err(e) => Outcome::Skipped(e.to_string()),
                },
            };
            (rel.clone(), outcome)
        })
        .collect();

    let mut classes_by_lang: BTreeMap<Language, Vec<ClassDef>> = BTreeMap::new();
    let mut functions = Vec::new();
    let mut present = BTreeSet::new();
    for ((lang, _, _), (rel, outcome)) in sources.iter().zip(outcomes) {
        match outcome {
            Outcome::Skipped(reason) => report.skipped.push(SkippedFile { path: rel, reason }),
            Outcome::Parsed(facts) => {
                present.insert(*lang);
                if facts.had_errors {
                    report.files_with_errors += 1;
                    report.error_files.push(rel);
                }
                classes_by_lang.entry(*lang).or_default().extend(facts.classes);
                functions.extend(facts.functions);
            }
        }
    }

    let mut ir = ProjectIr::new(project_name(root));
    ir.languages = present;
    for (_, mut classes) in classes_by_lang {
        classes.sort_by(|a, b| (&a.source_file, &a.name).cmp(&(&b.source_file, &b.name)));
        disambiguate(&mut classes);
        ir.classes.extend(classes);
    }
    ir.classes.sort_by(|a, b| (&a.source_file, &a.name).cmp(&(&b.source_file, &b.name)));
    functions.sort_by(|a: &FunctionDef, b| (&a.source_file, &a.name).cmp(&(&b.source_file, &b.name)));
    ir.functions = functions;

    ir.metadata.insert("file_count".into(), report.files_scanned.to_string());
    ir.metadata.insert("repository".into(), project_name(root));
    for (rel, path) in infra_files {
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Some((key, value)) = infrastructure_entry(&rel, &text) {
                ir.metadata.insert(key, value);
            }
        }
    }
    Ok((ir, report))
}

fn read_source(path: &Path) -> Result<String, String> {
    let meta = std::fs::metadata(path).map_err(|e| e.to_string())?;
    if meta.len() > MAX_FILE_BYTES {
        return Err(format!("file larger than {MAX_FILE_BYTES} bytes"));
    }
    let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|_| "not valid UTF-8".to_string())
}

fn project_name(root: &Path) -> String {
    root.canonicalize()
        .ok()
        .as_deref()
        .unwrap_or(root)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "project".into())
}

/// Gives repeated simple names within one language a numeric suffix
/// (`Util`, `Util_2`, ...), in source order.
fn disambiguate(classes: &mut [ClassDef]) {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for c in classes.iter() {
        *counts.entry(c.name.clone()).or_default() += 1;
    }
    let mut taken: BTreeSet<String> = counts.keys().cloned().collect();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for c in classes.iter_mut() {
        if counts[&c.name] < 2 {
            continue;
        }
        let n = seen.entry(c.name.clone()).or_default();
        *n += 1;
        if *n == 1 {
            continue;
        }
        let mut k = *n;
        let mut candidate = format!("{}_{k}", c.name);
        while taken.contains(&candidate) {
            k += 1;
            candidate = format!("{}_{k}", c.name);
        }
        taken.insert(candidate.clone());
        c.name = candidate;
    }
}
