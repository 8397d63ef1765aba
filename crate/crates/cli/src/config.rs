//! Line-oriented scenario configs: `[section]` headers, `key = value`
//! pairs, comma-separated lists, `#` comments.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Parsed config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    sections: BTreeMap<String, Section>,
}

/// One `[section]` with its entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Section {
    name: String,
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| !n.is_empty() && !n.contains(['[', ']']))
                    .ok_or_else(|| {
                    CliError::config(format!("line {line_no}: malformed section header {line:?}"))
                })?;
                if sections.contains_key(name) {
                    return Err(CliError::config(format!("line {line_no}: duplicate section [{name}]")));
                }
                sections.insert(name.to_string(), Section { name: name.to_string(), entries: BTreeMap::new() });
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {line_no}: expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(CliError::config(format!("line {line_no}: empty key")));
            }
            let name = current
                .as_ref()
                .ok_or_else(|| CliError::config(format!("line {line_no}: `{key}` appears before any section")))?;
            let section = sections.get_mut(name).expect("current section exists");
            if section.entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::config(format!("line {line_no}: duplicate key `{key}` in [{name}]")));
            }
        }
        Ok(Config { sections })
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&Section, CliError> {
        self.section(name).ok_or_else(|| CliError::config(format!("missing section [{name}]")))
    }

    /// Set (or replace) one entry, creating the section if needed.
    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        self.sections
            .entry(section.to_string())
            .or_insert_with(|| Section { name: section.to_string(), entries: BTreeMap::new() })
            .entries
            .insert(key.to_string(), value.into());
    }
}

impl Section {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require_raw(&self, key: &str) -> Result<&str, CliError> {
        self.raw(key).ok_or_else(|| CliError::config(format!("[{}] is missing `{key}`", self.name)))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key).map(|v| parse_value(&self.name, key, v)).transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        parse_value(&self.name, key, self.require_raw(key)?)
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.raw(key).map(|v| v.split(',').map(|item| parse_value(&self.name, key, item.trim())).collect()).transpose()
    }

    pub fn require_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, CliError> {
        self.list(key)?.ok_or_else(|| CliError::config(format!("[{}] is missing `{key}`", self.name)))
    }

    /// A list of whitespace-separated tuples, e.g. `1 0, -1 2`.
    pub fn tuples<T: FromStr>(&self, key: &str) -> Result<Option<Vec<Vec<T>>>, CliError> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| item.split_whitespace().map(|x| parse_value(&self.name, key, x)).collect())
                    .collect()
            })
            .transpose()
    }

    /// Times as a comma list or an inclusive `start:stop:step` range.
    pub fn times(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(raw) = self.raw(key) else { return Ok(None) };
        if !raw.contains(':') {
            return self.list(key);
        }
        let parts: Vec<f64> =
            raw.split(':').map(|p| parse_value(&self.name, key, p.trim())).collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(CliError::config(format!("[{}] `{key}`: ranges are start:stop:step", self.name)));
        };
        if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(CliError::config(format!("[{}] `{key}`: bad range {raw}", self.name)));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 10_000_000 {
            return Err(CliError::config(format!("[{}] `{key}`: range has too many points", self.name)));
        }
        Ok(Some((0..count).map(|i| start + step * i as f64).collect()))
    }
}

fn parse_value<T: FromStr>(section: &str, key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::config(format!("[{section}] `{key}`: cannot parse {value:?}")))
}
