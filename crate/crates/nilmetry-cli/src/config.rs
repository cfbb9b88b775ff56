//! Experiment configuration files.
//!
//! The format is the same TOML key-value document used for algebra
//! definitions; command-line flags override config-file keys. The seed is
//! mandatory one way or the other — there is no wall-clock default.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

/// Keys an experiment file may set. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub kind: Option<String>,
    pub group: Option<String>,
    pub map: Option<String>,
    pub metric: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub triples: Option<usize>,
    pub radius: Option<f64>,
    pub pairs: Option<String>,
    pub claim: Option<String>,
    pub out: Option<PathBuf>,
    pub scales: Option<Vec<f64>>,
    pub grid: Option<usize>,
    pub z: Option<String>,
    pub n_list: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub planar: Option<String>,
    pub budget: Option<usize>,
    pub curl_tol: Option<f64>,
    pub fd_step: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
    }

    /// Rejects a config whose `kind` key disagrees with the subcommand.
    pub fn check_kind(&self, expected: &str) -> Result<(), CliError> {
        if let Some(kind) = &self.kind {
            if kind != expected {
                return Err(CliError::usage(format!(
                    "config is for kind `{kind}`, but the `{expected}` subcommand was invoked"
                )));
            }
        }
        Ok(())
    }
}

/// Flag value, else config value, else default.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag value, else config value, else a usage error naming the key.
pub fn require<T>(flag: Option<T>, file: Option<T>, key: &str) -> Result<T, CliError> {
    flag.or(file)
        .ok_or_else(|| CliError::usage(format!("missing required `{key}` (flag or config key)")))
}

/// Parses a complex literal like `4+4i`, `-3-2i`, `1.5`, `2i`, or `i`.
pub fn parse_complex(text: &str) -> Result<(f64, f64), CliError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(CliError::usage("empty complex literal".into()));
    }
    let bad = || CliError::usage(format!("cannot parse complex literal `{text}`"));
    // Split before the LAST sign that is not an exponent sign and not
    // leading.
    let bytes = s.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let b = bytes[i];
        if (b == b'+' || b == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let parse_im = |part: &str| -> Result<f64, CliError> {
        let body = part.strip_suffix('i').ok_or_else(bad)?;
        match body {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            other => other.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) if s.ends_with('i') => {
            let re: f64 = s[..i].parse().map_err(|_| bad())?;
            let im = parse_im(&s[i..])?;
            Ok((re, im))
        }
        _ => {
            if s.ends_with('i') {
                Ok((0.0, parse_im(&s)?))
            } else {
                Ok((s.parse().map_err(|_| bad())?, 0.0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("4+4i").unwrap(), (4.0, 4.0));
        assert_eq!(parse_complex("-3-2i").unwrap(), (-3.0, -2.0));
        assert_eq!(parse_complex("1.5").unwrap(), (1.5, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), (0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), (0.0, -1.0));
        assert_eq!(parse_complex("1e2+3i").unwrap(), (100.0, 3.0));
        assert!(parse_complex("fish").is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let err: Result<FileConfig, _> = toml::from_str("bogus = 1");
        assert!(err.is_err());
    }
}
