//! Filesystem tools executed on behalf of agents.
//!
//! Agents address files through virtual paths whose first component names
//! a mount (`repo/src/App.java`, `views/view_class.json`). Every mount is
//! readable; only writable mounts accept `Write`. Absolute paths and `..`
//! components are rejected, so no tool can reach outside the mounts.

use std::collections::BTreeMap;
use std::path::{Component, Path, PathBuf};

use globset::Glob;
use serde::Deserialize;
use serde_json::Value;

use crate::backend::Tool;

pub const MAX_READ_BYTES: usize = 512 * 1024;
pub const MAX_GREP_LINES: usize = 200;
pub const MAX_GLOB_RESULTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mount {
    pub root: PathBuf,
    pub writable: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Sandbox {
    mounts: BTreeMap<String, Mount>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ToolError {
    #[error("invalid input for {tool}: {message}")]
    Input { tool: Tool, message: String },
    #[error("path `{0}` is outside the sandbox")]
    Escape(String),
    #[error("`{0}` is read-only")]
    ReadOnly(String),
    #[error("`{path}`: {message}")]
    Io { path: String, message: String },
    #[error("bad pattern `{pattern}`: {message}")]
    Pattern { pattern: String, message: String },
}

#[derive(Deserialize)]
struct PathInput {
    path: String,
}

#[derive(Deserialize)]
struct WriteInput {
    path: String,
    content: String,
}

#[derive(Deserialize)]
struct GlobInput {
    pattern: String,
}

#[derive(Deserialize)]
struct GrepInput {
    pattern: String,
    #[serde(default)]
    path: Option<String>,
}

fn io_err(path: &str, e: impl ToString) -> ToolError {
    ToolError::Io { path: path.to_string(), message: e.to_string() }
}

impl Sandbox {
    pub fn new() -> Self {
        Sandbox::default()
    }

    pub fn mount(mut self, name: impl Into<String>, root: impl Into<PathBuf>, writable: bool) -> Self {
        self.mounts.insert(name.into(), Mount { root: root.into(), writable });
        self
    }

    pub fn mounts(&self) -> impl Iterator<Item = (&str, &Mount)> {
        self.mounts.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Maps a virtual path to the host path and its mount.
    pub fn resolve(&self, virtual_path: &str) -> Result<(PathBuf, &Mount), ToolError> {
        let escape = || ToolError::Escape(virtual_path.to_string());
        let path = Path::new(virtual_path.trim_start_matches("./"));
        let mut parts = Vec::new();
        for c in path.components() {
            match c {
                Component::Normal(p) => parts.push(p.to_str().ok_or_else(escape)?),
                Component::CurDir => {}
                _ => return Err(escape()),
            }
        }
        let (first, rest) = parts.split_first().ok_or_else(escape)?;
        let mount = self.mounts.get(*first).ok_or_else(escape)?;
        let mut host = mount.root.clone();
        host.extend(rest);
        Ok((host, mount))
    }

    /// Host path to virtual path, when `host` lies under some mount.
    pub fn virtual_path(&self, host: &Path) -> Option<String> {
        self.mounts.iter().find_map(|(name, m)| {
            let rel = host.strip_prefix(&m.root).ok()?;
            let rel = rel.to_string_lossy().replace('\\', "/");
            Some(if rel.is_empty() { name.clone() } else { format!("{name}/{rel}") })
        })
    }

    pub fn execute(&self, tool: Tool, input: &Value) -> Result<String, ToolError> {
        fn parse<T: serde::de::DeserializeOwned>(tool: Tool, input: &Value) -> Result<T, ToolError> {
            serde_json::from_value(input.clone()).map_err(|e| ToolError::Input { tool, message: e.to_string() })
        }
        match tool {
            Tool::Read => self.read(&parse::<PathInput>(tool, input)?.path),
            Tool::Write => {
                let w: WriteInput = parse(tool, input)?;
                self.write(&w.path, &w.content)
            }
            Tool::Glob => self.glob(&parse::<GlobInput>(tool, input)?.pattern),
            Tool::Grep => {
                let g: GrepInput = parse(tool, input)?;
                self.grep(&g.pattern, g.path.as_deref())
            }
        }
    }

    pub fn read(&self, path: &str) -> Result<String, ToolError> {
        let (host, _) = self.resolve(path)?;
        let bytes = std::fs::read(&host).map_err(|e| io_err(path, e))?;
        let mut text = String::from_utf8_lossy(&bytes).into_owned();
        if text.len() > MAX_READ_BYTES {
            let mut end = MAX_READ_BYTES;
            while !text.is_char_boundary(end) {
                end -= 1;
            }
            text.truncate(end);
        }
        Ok(text)
    }

    pub fn write(&self, path: &str, content: &str) -> Result<String, ToolError> {
        let (host, mount) = self.resolve(path)?;
        if !mount.writable {
            return Err(ToolError::ReadOnly(path.to_string()));
        }
        if let Some(parent) = host.parent() {
            std::fs::create_dir_all(parent).map_err(|e| io_err(path, e))?;
        }
        std::fs::write(&host, content).map_err(|e| io_err(path, e))?;
        Ok(format!("wrote {} bytes to {path}", content.len()))
    }

    fn files(&self) -> impl Iterator<Item = String> + '_ {
        self.mounts.iter().flat_map(|(name, m)| {
            walkdir::WalkDir::new(&m.root)
                .sort_by_file_name()
                .into_iter()
                .filter_map(Result::ok)
                .filter(|e| e.file_type().is_file())
                .filter_map(move |e| {
                    let rel = e.path().strip_prefix(&m.root).ok()?.to_string_lossy().replace('\\', "/");
                    Some(format!("{name}/{rel}"))
                })
        })
    }

    /// Newline-separated virtual paths matching `pattern`, sorted.
    pub fn glob(&self, pattern: &str) -> Result<String, ToolError> {
        let matcher = Glob::new(pattern)
            .map_err(|e| ToolError::Pattern { pattern: pattern.to_string(), message: e.to_string() })?
            .compile_matcher();
        let mut hits: Vec<String> = self.files().filter(|p| matcher.is_match(p)).collect();
        hits.sort();
        hits.truncate(MAX_GLOB_RESULTS);
        Ok(hits.join("\n"))
    }

    /// `path:line:text` for each line matching the regex `pattern` under
    /// `scope` (a file or directory; every mount when absent).
    pub fn grep(&self, pattern: &str, scope: Option<&str>) -> Result<String, ToolError> {
        let re = regex::Regex::new(pattern)
            .map_err(|e| ToolError::Pattern { pattern: pattern.to_string(), message: e.to_string() })?;
        if let Some(s) = scope {
            self.resolve(s)?;
        }
        let prefix = scope.map(|s| s.trim_end_matches('/').to_string());
        let mut out = Vec::new();
        for file in self.files() {
            if let Some(p) = &prefix {
                if file != *p && !file.starts_with(&format!("{p}/")) {
                    continue;
                }
            }
            let Ok(text) = self.read(&file) else { continue };
            for (i, line) in text.lines().enumerate() {
                if re.is_match(line) {
                    out.push(format!("{file}:{}:{}", i + 1, line.trim()));
                    if out.len() >= MAX_GREP_LINES {
                        return Ok(out.join("\n"));
                    }
                }
            }
        }
        Ok(out.join("\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sandbox() -> (tempfile::TempDir, Sandbox) {
        let dir = tempfile::tempdir().unwrap();
        let repo = dir.path().join("repo");
        std::fs::create_dir_all(repo.join("src")).unwrap();
        std::fs::write(repo.join("src/App.java"), "class App {\n  void run() {}\n}\n").unwrap();
        std::fs::write(repo.join("README"), "hello\n").unwrap();
        let out = dir.path().join("out");
        std::fs::create_dir_all(&out).unwrap();
        let sb = Sandbox::new().mount("repo", &repo, false).mount("out", &out, true);
        (dir, sb)
    }

    #[test]
    fn read_write_and_read_only() {
        let (_d, sb) = sandbox();
        assert!(sb.execute(Tool::Read, &json!({"path": "repo/src/App.java"})).unwrap().starts_with("class App"));
        sb.execute(Tool::Write, &json!({"path": "out/x/a.puml", "content": "@startuml\n@enduml\n"})).unwrap();
        assert_eq!(sb.read("out/x/a.puml").unwrap(), "@startuml\n@enduml\n");
        assert_eq!(sb.write("repo/new.txt", "x"), Err(ToolError::ReadOnly("repo/new.txt".into())));
    }

    #[test]
    fn escapes_are_rejected() {
        let (_d, sb) = sandbox();
        for p in ["../etc/passwd", "/etc/passwd", "repo/../../x", "nomount/a", ""] {
            assert!(matches!(sb.read(p), Err(ToolError::Escape(_))), "{p}");
        }
        assert!(matches!(sb.write("out/../repo/x", "y"), Err(ToolError::Escape(_))));
    }

    #[test]
    fn glob_and_grep() {
        let (_d, sb) = sandbox();
        assert_eq!(sb.glob("repo/**/*.java").unwrap(), "repo/src/App.java");
        assert_eq!(sb.glob("*/README").unwrap(), "repo/README");
        assert_eq!(sb.grep(r"void \w+", None).unwrap(), "repo/src/App.java:2:void run() {}");
        assert_eq!(sb.grep("hello", Some("repo/src")).unwrap(), "");
        assert!(sb.execute(Tool::Glob, &json!({"nope": 1})).is_err());
    }

    #[test]
    fn virtual_paths_round_trip() {
        let (d, sb) = sandbox();
        let host = d.path().join("out/class/01_a.puml");
        assert_eq!(sb.virtual_path(&host).unwrap(), "out/class/01_a.puml");
        assert_eq!(sb.resolve("out/class/01_a.puml").unwrap().0, host);
    }
}
