//! Infrastructure configuration files recorded as IR metadata, so the
//! deployment view has something concrete to work from.

const MAX_VALUE_CHARS: usize = 512;

fn file_name(rel: &str) -> &str {
    rel.rsplit('/').next().unwrap_or(rel)
}

fn kind_of(rel: &str) -> Option<&'static str> {
    let name = file_name(rel).to_ascii_lowercase();
    if name == "dockerfile" || name.starts_with("dockerfile.") || name.ends_with(".dockerfile") {
        return Some("docker");
    }
    let is_yaml = name.ends_with(".yml") || name.ends_with(".yaml");
    if is_yaml && (name.starts_with("docker-compose") || name.starts_with("compose")) {
        return Some("compose");
    }
    if is_yaml {
        return Some("yaml");
    }
    let config_ext = [".ini", ".conf", ".cfg", ".properties", ".toml", ".env"];
    if name == ".env" || config_ext.iter().any(|e| name.ends_with(e)) {
        return Some("config");
    }
    None
}

pub(crate) fn is_infrastructure_file(rel: &str) -> bool {
    kind_of(rel).is_some()
}

/// Summarizes one configuration file as a `(kind:path, summary)` metadata
/// entry. The summary lists base images, exposed ports and services where
/// the format makes them recognizable by line scanning.
pub fn infrastructure_entry(rel: &str, text: &str) -> Option<(String, String)> {
    let kind = kind_of(rel)?;
    let mut facts: Vec<String> = Vec::new();
    match kind {
        "docker" => {
            for line in text.lines().map(str::trim) {
                let upper = line.to_ascii_uppercase();
                if upper.starts_with("FROM ") {
                    if let Some(image) = line.split_whitespace().nth(1) {
                        facts.push(format!("image={image}"));
                    }
                } else if upper.starts_with("EXPOSE ") {
                    for port in line.split_whitespace().skip(1) {
                        facts.push(format!("port={port}"));
                    }
                }
            }
        }
        "compose" | "yaml" => {
            let mut in_services = false;
            for raw in text.lines() {
                if raw.trim_start().starts_with('#') || raw.trim().is_empty() {
                    continue;
                }
                let indent = raw.len() - raw.trim_start().len();
                let line = raw.trim();
                if indent == 0 {
                    in_services = line.starts_with("services:");
                    if kind == "yaml" {
                        if let Some(key) = line.strip_suffix(':').or_else(|| line.split(':').next()) {
                            facts.push(format!("key={}", key.trim()));
                        }
                    }
                    continue;
                }
                if in_services && indent == 2 && line.ends_with(':') {
                    facts.push(format!("service={}", line.trim_end_matches(':')));
                } else if let Some(image) = line.strip_prefix("image:") {
                    facts.push(format!("image={}", unquote(image)));
                } else if let Some(port) = line
                    .strip_prefix("containerPort:")
                    .or_else(|| line.strip_prefix("port:"))
                {
                    facts.push(format!("port={}", unquote(port)));
                } else if in_services && line.starts_with("- ") && line.contains(':') {
                    let entry = unquote(&line[2..]);
                    if entry.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                        facts.push(format!("port={entry}"));
                    }
                }
            }
        }
        _ => {
            for line in text.lines().map(str::trim) {
                let Some((key, value)) = line.split_once('=').or_else(|| line.split_once(':')) else {
                    continue;
                };
                let lower = key.trim().to_ascii_lowercase();
                if ["port", "host", "url", "image"].iter().any(|p| lower.contains(p)) {
                    facts.push(format!("{}={}", key.trim(), unquote(value)));
                }
            }
        }
    }
    let mut value = facts.join("; ");
    if value.chars().count() > MAX_VALUE_CHARS {
        value = value.chars().take(MAX_VALUE_CHARS).collect();
    }
    Some((format!("{kind}:{rel}"), value))
}

fn unquote(s: &str) -> String {
    s.trim().trim_matches(|c| c == '"' || c == '\'').to_string()
}
