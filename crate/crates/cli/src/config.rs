//! Flat `key = value` configuration with `[section]` headers. Keys are
//! addressed as `section.key`; the embedded default file defines the full
//! key set, and later layers may only override existing keys.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chaoslab_core::Caps;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const DEFAULT_CONFIG: &str = include_str!("../config/default.conf");

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(src: &str, path: &str) -> Result<Self> {
        let err = |line: usize, column: usize, message: String| CliError::Config {
            path: path.to_string(),
            line,
            column,
            message,
        };
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (idx, raw) in src.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            let trimmed = line.trim();
            let indent = line.len() - line.trim_start().len() + 1;
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line_no, indent, "unterminated section header".into()))?
                    .trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(err(line_no, indent + 1, format!("bad section name `{name}`")));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(err(line_no, indent, "expected `key = value`".into()));
            };
            let key = line[..eq].trim();
            let value = line[eq + 1..].trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(err(line_no, indent, format!("bad key `{key}`")));
            }
            let Some(section) = &section else {
                return Err(err(line_no, indent, format!("key `{key}` outside any [section]")));
            };
            let full = format!("{section}.{key}");
            if entries.insert(full.clone(), value.to_string()).is_some() {
                return Err(err(line_no, indent, format!("duplicate key `{full}`")));
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn defaults() -> Self {
        Self::parse(DEFAULT_CONFIG, "default.conf").expect("embedded default config parses")
    }

    /// Defaults overlaid with the file at `path`.
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let layer = Self::parse(&src, &path.display().to_string())?;
        let mut cfg = Self::defaults();
        for (key, value) in layer.entries {
            cfg.set(&key, &value)?;
        }
        Ok(cfg)
    }

    /// Overrides an existing key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.entries.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                Ok(())
            }
            None => Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
    }

    /// Applies a `section.key=value` assignment.
    pub fn assign(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected section.key=value, got `{assignment}`")))?;
        self.set(key.trim(), value)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// Canonical text: one `section.key=value` line per entry, sorted.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key).ok_or_else(|| CliError::Usage(format!("missing config key `{key}`")))?;
        raw.parse()
            .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{raw}`")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let raw = self.get(key).ok_or_else(|| CliError::Usage(format!("missing config key `{key}`")))?;
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{s}`")))
            })
            .collect()
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            other => Err(CliError::Usage(format!("format must be csv, json or both, got `{other}`"))),
        }
    }
}

/// Typed view of a [`ConfigFile`] plus the run switches that do not change
/// any computed value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub caps: Caps,
    pub seed: u64,
    pub rel_tol: f64,
    pub out: PathBuf,
    pub format: OutputFormat,
    /// Reuse cached results keyed by the config hash.
    pub cache: bool,
    /// Record wall times in artifacts; such artifacts are not byte-stable.
    pub timings: bool,
}

impl RunConfig {
    pub fn from_file(file: ConfigFile) -> Result<Self> {
        let caps = Caps {
            axis_bits: file.parsed("caps.axis_bits")?,
            total_bits: file.parsed("caps.total_bits")?,
            subset_bits: file.parsed("caps.subset_bits")?,
            sup_rows: file.parsed("caps.sup_rows")?,
            exhaustive_n: file.parsed("caps.exhaustive_n")?,
            monte_carlo_n: file.parsed("caps.monte_carlo_n")?,
        };
        let all = [
            caps.axis_bits,
            caps.total_bits,
            caps.subset_bits,
            caps.sup_rows,
            caps.exhaustive_n,
            caps.monte_carlo_n,
        ];
        if all.contains(&0) {
            return Err(CliError::Usage("every cap must be positive".into()));
        }
        if caps.axis_bits > 40 || caps.total_bits > 40 || caps.sup_rows > 63 {
            return Err(CliError::Usage("caps beyond 40 bits (63 rows) are not supported".into()));
        }
        let rel_tol: f64 = file.parsed("run.rel_tol")?;
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(CliError::Usage(format!("run.rel_tol must lie in (0, 1), got {rel_tol}")));
        }
        Ok(RunConfig {
            caps,
            seed: file.parsed("run.seed")?,
            rel_tol,
            out: PathBuf::from(file.get("run.out").unwrap_or("chaoslab-out")),
            format: file.parsed("run.format")?,
            cache: true,
            timings: false,
            file,
        })
    }

    pub fn defaults() -> Self {
        Self::from_file(ConfigFile::defaults()).expect("embedded default config is valid")
    }

    /// Re-derives the typed fields after editing `self.file`.
    pub fn with_assignments<'a>(&self, assignments: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut file = self.file.clone();
        for a in assignments {
            file.assign(a)?;
        }
        let mut next = Self::from_file(file)?;
        next.cache = self.cache;
        next.timings = self.timings;
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_validate() {
        let cfg = RunConfig::defaults();
        assert_eq!(cfg.caps, Caps::default());
        assert_eq!(cfg.format, OutputFormat::Both);
        assert_eq!(cfg.file.list::<u32>("proposition.k").unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = ConfigFile::parse("[run]\nseed 3\n", "x.conf").unwrap_err();
        assert!(matches!(e, CliError::Config { line: 2, column: 1, .. }), "{e}");
        let e = ConfigFile::parse("seed = 3\n", "x.conf").unwrap_err();
        assert!(matches!(e, CliError::Config { line: 1, .. }));
        let e = ConfigFile::parse("[run\n", "x.conf").unwrap_err();
        assert!(matches!(e, CliError::Config { line: 1, .. }));
        let e = ConfigFile::parse("[a]\nk=1\nk=2\n", "x.conf").unwrap_err();
        assert!(matches!(e, CliError::Config { line: 3, .. }));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn overrides_only_known_keys() {
        let cfg = RunConfig::defaults();
        let next = cfg.with_assignments(["run.seed=7", "caps.exhaustive_n = 4"]).unwrap();
        assert_eq!(next.seed, 7);
        assert_eq!(next.caps.exhaustive_n, 4);
        assert_ne!(next.file.hash(), cfg.file.hash());
        assert!(cfg.with_assignments(["run.nope=1"]).is_err());
        assert!(cfg.with_assignments(["caps.sup_rows=0"]).is_err());
        assert!(cfg.with_assignments(["run.format=xml"]).is_err());
    }

    #[test]
    fn canonical_text_is_sorted() {
        let c = ConfigFile::parse("[b]\nz=1\n[a]\ny = 2 \n", "x").unwrap();
        assert_eq!(c.canonical(), "a.y=2\nb.z=1\n");
        assert_eq!(c.hash().len(), 64);
    }
}
