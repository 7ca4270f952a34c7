//! Flat `key = value` text format with optional `[section]` headers.
//!
//! Used for config files, audit reports, and the ensemble manifest. Keys
//! inside a section are reported as `section.key`.

use crate::error::{Error, Result};

/// Parse key-value text into `(key, value)` pairs in file order.
///
/// Blank lines and `#` comments are skipped. A `[section]` header prefixes
/// the keys that follow it with `section.`.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(Error::ConfigParse {
                    line: idx + 1,
                    message: format!("unterminated section header `{line}`"),
                });
            };
            let name = name.trim();
            if name.is_empty() || name.contains(['.', '=', '[', ']']) {
                return Err(Error::ConfigParse {
                    line: idx + 1,
                    message: format!("invalid section name `{name}`"),
                });
            }
            section = name.to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::ConfigParse {
                line: idx + 1,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        if key.is_empty() || key.contains(['[', ']', '=']) {
            return Err(Error::ConfigParse {
                line: idx + 1,
                message: format!("invalid key `{key}`"),
            });
        }
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        pairs.push((full, value.trim().to_string()));
    }
    Ok(pairs)
}

/// Incremental writer for the same format.
#[derive(Debug, Default)]
pub struct KvWriter {
    out: String,
    section: String,
}

impl KvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: &str) {
        for line in text.lines() {
            self.out.push_str("# ");
            self.out.push_str(line);
            self.out.push('\n');
        }
    }

    /// Write `key = value`, opening a `[section]` header when the dotted
    /// prefix of `key` changes.
    pub fn pair(&mut self, key: &str, value: impl std::fmt::Display) {
        let (section, bare) = match key.split_once('.') {
            Some((s, k)) => (s, k),
            None => ("", key),
        };
        if section != self.section {
            if !self.out.is_empty() {
                self.out.push('\n');
            }
            self.out.push_str(&format!("[{section}]\n"));
            self.section = section.to_string();
        }
        self.out.push_str(&format!("{bare} = {value}\n"));
    }

    pub fn list(&mut self, key: &str, items: impl IntoIterator<Item = impl std::fmt::Display>) {
        let joined = items
            .into_iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        self.pair(key, joined);
    }

    pub fn finish(self) -> String {
        self.out
    }
}

/// Parse a comma-separated list value.
pub fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_pairs() {
        let text = "# header\nroot = 1\n[data]\nsource = synthetic\ndays = 120\n\n[relief]\nthreshold = 0.01\n";
        let pairs = parse_kv(text).unwrap();
        assert_eq!(
            pairs,
            vec![
                ("root".into(), "1".into()),
                ("data.source".into(), "synthetic".into()),
                ("data.days".into(), "120".into()),
                ("relief.threshold".into(), "0.01".into()),
            ]
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_kv("no equals sign").is_err());
        assert!(parse_kv("[unterminated").is_err());
        assert!(parse_kv("[bad.section]\n").is_err());
        assert!(parse_kv("= value\n").is_err());
    }

    #[test]
    fn writer_round_trips_through_parser() {
        let mut w = KvWriter::new();
        w.comment("generated");
        w.pair("data.source", "synthetic");
        w.pair("data.days", 120);
        w.pair("relief.threshold", 0.01);
        w.list("relief.forced_include", ["ambient_temp"]);
        let text = w.finish();
        let pairs = parse_kv(&text).unwrap();
        assert_eq!(pairs[0], ("data.source".into(), "synthetic".into()));
        assert_eq!(
            pairs[3],
            ("relief.forced_include".into(), "ambient_temp".into())
        );
    }
}
