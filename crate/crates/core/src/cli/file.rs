//! Scenario files: TOML with `[frame]`, `[channel]`, `[radio]`, `[topology]`
//! and `[run]` sections, dotted-key overrides, and line-numbered diagnostics.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{FrameConfig, FrameSection};
use crate::sim::{ChannelSection, RadioSection, RunSection, Scenario, TopologySection};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub frame: FrameSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radio: Option<RadioSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySection>,
    #[serde(default)]
    pub run: RunSection,
}

/// A problem found in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub key: String,
    /// 1-based line in the source file, when it can be located.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

fn is_header(line: &str, path: &str) -> bool {
    let l = line.trim();
    l == format!("[{path}]") || l == format!("[[{path}]]")
}

fn key_of(line: &str) -> Option<&str> {
    let (k, _) = line.split_once('=')?;
    Some(k.trim().trim_matches('"'))
}

/// Best-effort line of a dotted key such as `frame.SubbandWidth` or
/// `topology.users[1].velocity`.
pub fn locate_key(src: &str, key: &str) -> Option<usize> {
    let parts: Vec<&str> = key.split('.').map(|p| p.split('[').next().unwrap_or(p)).collect();
    let lines: Vec<&str> = src.lines().collect();
    for split in (1..parts.len()).rev() {
        let table = parts[..split].join(".");
        let rest = parts[split..].join(".");
        if let Some(h) = lines.iter().position(|l| is_header(l, &table)) {
            for (i, l) in lines.iter().enumerate().skip(h + 1) {
                if l.trim_start().starts_with('[') {
                    break;
                }
                if key_of(l) == Some(rest.as_str()) {
                    return Some(i + 1);
                }
            }
            return Some(h + 1);
        }
    }
    let last = parts.last()?;
    lines
        .iter()
        .position(|l| key_of(l) == Some(*last) || is_header(l, last))
        .map(|i| i + 1)
}

fn diag(src: &str, key: impl Into<String>, message: impl Into<String>) -> Diagnostic {
    let key = key.into();
    Diagnostic {
        line: locate_key(src, &key),
        key,
        message: message.into(),
    }
}

/// Parses `value` as a TOML value, falling back to a bare string.
fn parse_override_value(value: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()))
}

/// Applies `key=value` with a dotted key; intermediate tables are created.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), Diagnostic> {
    let bad = |m: &str| Diagnostic {
        key: assignment.to_string(),
        line: None,
        message: m.to_string(),
    };
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| bad("override must have the form key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(bad("empty path component"));
    }
    let mut cur = table;
    for p in &path[..path.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| bad(&format!("{p} is not a table")))?;
    }
    cur.insert(path[path.len() - 1].to_string(), parse_override_value(value.trim()));
    Ok(())
}

impl ScenarioFile {
    /// Parses source text and applies overrides in order (last wins).
    pub fn parse(src: &str, overrides: &[String]) -> Result<Self, Vec<Diagnostic>> {
        let mut table: toml::Table = toml::from_str(src).map_err(|e| {
            vec![Diagnostic {
                key: "syntax".into(),
                line: e.span().map(|s| line_of_offset(src, s.start)),
                message: e.message().trim().to_string(),
            }]
        })?;
        if overrides.is_empty() {
            return toml::from_str::<Self>(src).map_err(|e| {
                vec![Diagnostic {
                    key: "schema".into(),
                    line: e.span().map(|s| line_of_offset(src, s.start)),
                    message: e.message().trim().to_string(),
                }]
            });
        }
        let mut errors = Vec::new();
        for o in overrides {
            if let Err(d) = apply_override(&mut table, o) {
                errors.push(d);
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        Self::deserialize(toml::Value::Table(table)).map_err(|e| {
            vec![Diagnostic {
                key: "schema".into(),
                line: None,
                message: e.message().trim().to_string(),
            }]
        })
    }

    /// Checks every invariant; `src` is used to attach line numbers.
    pub fn into_scenario(self, src: &str) -> Result<Scenario, Vec<Diagnostic>> {
        let mut errors = Vec::new();
        let frame = match FrameConfig::from_section(&self.frame) {
            Ok(f) => Some(f),
            Err(es) => {
                for e in es {
                    errors.push(diag(src, format!("frame.{}", e.key()), e.to_string()));
                }
                None
            }
        };
        if self.radio.is_none() {
            errors.push(diag(src, "radio", "missing required section [radio]"));
        }
        if self.topology.is_none() {
            errors.push(diag(src, "topology", "missing required section [topology]"));
        }
        let (Some(frame), Some(radio), Some(topology)) = (frame, self.radio, self.topology) else {
            return Err(errors);
        };
        Scenario::new(frame, self.channel, radio, topology, self.run)
            .map_err(|es| es.into_iter().map(|e| diag(src, e.key, e.message)).collect())
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            frame: s.frame.to_section(),
            channel: s.channel.clone(),
            radio: Some(s.radio.clone()),
            topology: Some(s.topology.clone()),
            run: s.run.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario sections serialize to TOML")
    }
}

/// Parse, override and validate in one step.
pub fn load_scenario(src: &str, overrides: &[String]) -> Result<Scenario, Vec<Diagnostic>> {
    ScenarioFile::parse(src, overrides)?.into_scenario(src)
}
