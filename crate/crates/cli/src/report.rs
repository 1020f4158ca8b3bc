//! Suite results and their CSV/JSON renderings. Every artifact opens with
//! the seed and the full config snapshot so it can be regenerated exactly.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "==",
        })
    }
}

/// `measured <relation> bound`, up to `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub status: Status,
    pub measured: Option<f64>,
    pub relation: Relation,
    pub bound: f64,
    pub tolerance: f64,
    pub note: String,
}

impl Check {
    pub fn new(id: impl Into<String>, measured: f64, relation: Relation, bound: f64, tolerance: f64) -> Self {
        let holds = match relation {
            Relation::Le => measured <= bound + tolerance,
            Relation::Ge => measured >= bound - tolerance,
            Relation::Eq => (measured - bound).abs() <= tolerance,
        };
        Check {
            id: id.into(),
            status: if holds { Status::Pass } else { Status::Fail },
            measured: Some(measured),
            relation,
            bound,
            tolerance,
            note: String::new(),
        }
    }

    pub fn le(id: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(id, measured, Relation::Le, bound, tolerance)
    }

    pub fn ge(id: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(id, measured, Relation::Ge, bound, tolerance)
    }

    pub fn eq(id: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(id, measured, Relation::Eq, bound, tolerance)
    }

    pub fn skip(id: impl Into<String>, relation: Relation, bound: f64, reason: impl Into<String>) -> Self {
        Check {
            id: id.into(),
            status: Status::Skip,
            measured: None,
            relation,
            bound,
            tolerance: 0.0,
            note: reason.into(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub config: BTreeMap<String, String>,
}

impl Provenance {
    pub fn of(cfg: &RunConfig) -> Self {
        Provenance {
            seed: cfg.seed,
            config_hash: cfg.file.hash(),
            config: cfg.file.entries().clone(),
        }
    }

    fn csv_preamble(&self, title: &str) -> String {
        let mut out = format!("# {title}\n# seed={}\n# config_hash={}\n", self.seed, self.config_hash);
        for (k, v) in &self.config {
            out.push_str(&format!("# config.{k}={v}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub provenance: Provenance,
    /// Present only when timings were requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl SuiteResult {
    /// Panics on a duplicate check id: suites are written so that cannot happen.
    pub fn new(suite: impl Into<String>, checks: Vec<Check>, cfg: &RunConfig) -> Self {
        let suite = suite.into();
        let mut seen = std::collections::BTreeSet::new();
        for c in &checks {
            assert!(seen.insert(c.id.as_str()), "duplicate check id `{}` in suite {suite}", c.id);
        }
        SuiteResult {
            passed: checks.iter().all(|c| c.status != Status::Fail),
            suite,
            checks,
            provenance: Provenance::of(cfg),
            wall_ms: None,
        }
    }

    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("suite result serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.provenance.csv_preamble(&format!("chaoslab verify {}", self.suite));
        if let Some(ms) = self.wall_ms {
            out.push_str(&format!("# wall_ms={ms}\n"));
        }
        let mut w = csv_writer();
        w.write_record(["check", "status", "measured", "relation", "bound", "tolerance", "note"])
            .expect("in-memory write");
        for c in &self.checks {
            w.write_record([
                c.id.clone(),
                c.status.to_string(),
                c.measured.map(|v| v.to_string()).unwrap_or_default(),
                c.relation.to_string(),
                c.bound.to_string(),
                c.tolerance.to_string(),
                c.note.clone(),
            ])
            .expect("in-memory write");
        }
        out.push_str(&finish(w));
        out
    }

    /// One human-readable line per check, then a summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let measured = c.measured.map_or_else(|| "-".to_string(), |v| format!("{v:.12}"));
            out.push_str(&format!(
                "[{}] {}/{}: {} {} {}",
                c.status, self.suite, c.id, measured, c.relation, c.bound
            ));
            if !c.note.is_empty() {
                out.push_str(&format!("  ({})", c.note));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "{}: {} ({} pass, {} fail, {} skip)\n",
            self.suite,
            if self.passed { "PASS" } else { "FAIL" },
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Skip)
        ));
        out
    }
}

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub(crate) fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub status: Status,
    /// `exhaustive_average` or `monte_carlo`.
    pub mode: String,
    pub samples: Option<u64>,
    pub mean: Option<f64>,
    pub std_dev: Option<f64>,
    /// `mean / n^{3/2}`.
    pub ratio: Option<f64>,
    /// `phi` of the Walsh arrangement when `n` is a power of two.
    pub walsh: Option<f64>,
    pub exhaustive_inf: Option<f64>,
    pub note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub rng: String,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
    pub rows: Vec<ScalingRow>,
    pub provenance: Provenance,
}

impl ScalingTable {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scaling table serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.provenance.csv_preamble("chaoslab scaling");
        out.push_str(&format!("# rng={}\n", self.rng));
        let mut w = csv_writer();
        w.write_record([
            "n",
            "status",
            "mode",
            "samples",
            "mean",
            "std_dev",
            "ratio",
            "ratio_lower",
            "ratio_upper",
            "walsh",
            "exhaustive_inf",
            "elapsed_ms",
            "note",
        ])
        .expect("in-memory write");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.status.to_string(),
                r.mode.clone(),
                r.samples.map(|s| s.to_string()).unwrap_or_default(),
                opt(r.mean),
                opt(r.std_dev),
                opt(r.ratio),
                self.ratio_lower.to_string(),
                self.ratio_upper.to_string(),
                opt(r.walsh),
                opt(r.exhaustive_inf),
                opt(r.elapsed_ms),
                r.note.clone(),
            ])
            .expect("in-memory write");
        }
        out.push_str(&finish(w));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_relations() {
        assert_eq!(Check::le("a", 1.0, 1.0, 0.0).status, Status::Pass);
        assert_eq!(Check::le("a", 1.1, 1.0, 0.05).status, Status::Fail);
        assert_eq!(Check::ge("a", 0.99, 1.0, 0.02).status, Status::Pass);
        assert_eq!(Check::eq("a", 2.0, 2.0, 0.0).status, Status::Pass);
        assert_eq!(Check::eq("a", f64::NAN, 2.0, 1.0).status, Status::Fail);
    }

    #[test]
    fn skips_do_not_fail_a_suite() {
        let cfg = RunConfig::defaults();
        let r = SuiteResult::new(
            "x",
            vec![Check::le("a", 0.0, 1.0, 0.0), Check::skip("b", Relation::Le, 1.0, "cap")],
            &cfg,
        );
        assert!(r.passed);
        let r = SuiteResult::new("x", vec![Check::le("a", 2.0, 1.0, 0.0)], &cfg);
        assert!(!r.passed);
    }

    #[test]
    #[should_panic(expected = "duplicate check id")]
    fn duplicate_ids_rejected() {
        let cfg = RunConfig::defaults();
        SuiteResult::new("x", vec![Check::le("a", 0.0, 1.0, 0.0), Check::le("a", 0.0, 1.0, 0.0)], &cfg);
    }

    #[test]
    fn csv_has_preamble_header_and_lf() {
        let cfg = RunConfig::defaults();
        let r = SuiteResult::new("x", vec![Check::le("a,b", 0.5, 1.0, 0.0).with_note("q\"uote")], &cfg);
        let csv = r.to_csv();
        assert!(csv.starts_with("# chaoslab verify x\n# seed=20240917\n"));
        assert!(!csv.contains('\r'));
        assert!(csv.contains("check,status,measured,relation,bound,tolerance,note\n"));
        assert!(csv.contains("\"a,b\",pass,0.5,<=,1,0,\"q\"\"uote\"\n"));
        let json = r.to_json();
        let back: SuiteResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
