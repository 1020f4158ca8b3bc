//! Subcommand implementations. Each returns a value; printing and exit
//! codes are left to the binary.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use chaoslab_core::extremal::{EXACT_AVERAGE_MAX_N, RNG_ALGORITHM, WALSH_MAX_K};
use chaoslab_core::io::{matrix_to_text, read_matrix};
use chaoslab_core::{
    eval_decoupled, eval_undecoupled, exact_average, exhaustive_inf, monte_carlo_average, rearrangement,
    sup_norm_decoupled, sup_norm_signs, sup_norm_undecoupled, walsh_sign_arrangement, ChaosError,
    CoefficientMatrix, SpaceSpec,
};
use serde::{Deserialize, Serialize};

use crate::cache;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::{ScalingRow, ScalingTable, Status, SuiteResult};
use crate::suites::{aggregate, run_suites, Selection, RATIO_LOWER, RATIO_UPPER};

/// Decoupled `sum a_ij r_i(s) r_j(t)` on the square, or undecoupled
/// `sum b_ij r_i(t) r_j(t)` on the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Decoupled,
    Undecoupled,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Decoupled => "decoupled",
            Mode::Undecoupled => "undecoupled",
        })
    }
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decoupled" => Ok(Mode::Decoupled),
            "undecoupled" => Ok(Mode::Undecoupled),
            other => Err(CliError::Usage(format!("mode must be decoupled or undecoupled, got `{other}`"))),
        }
    }
}

fn load(path: &Path) -> Result<CoefficientMatrix> {
    read_matrix(path).map_err(|source| CliError::Input {
        path: path.display().to_string(),
        source,
    })
}

/// Input errors (wrong shape, nonzero diagonal) are reported against the file.
fn on_input<T>(path: &Path, r: chaoslab_core::Result<T>) -> Result<T> {
    r.map_err(|source| {
        if source.is_resource_cap() {
            CliError::Core(source)
        } else {
            CliError::Input {
                path: path.display().to_string(),
                source,
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupnormReport {
    pub path: PathBuf,
    pub rows: usize,
    pub cols: usize,
    pub mode: Mode,
    pub sup_norm: f64,
}

impl SupnormReport {
    pub fn to_text(&self) -> String {
        format!("{}x{} {} sup_norm = {}\n", self.rows, self.cols, self.mode, self.sup_norm)
    }
}

/// Exact `L_inf` norm of the polynomial with the coefficients in `path`.
/// The undecoupled form includes the diagonal as given (`r_i^2 = 1`).
pub fn cmd_supnorm(path: &Path, mode: Mode, cfg: &RunConfig) -> Result<SupnormReport> {
    let a = load(path)?;
    let sup_norm = match mode {
        Mode::Decoupled => on_input(path, sup_norm_decoupled(&a, &cfg.caps))?,
        Mode::Undecoupled => on_input(path, sup_norm_undecoupled(&a, &cfg.caps))?,
    };
    Ok(SupnormReport {
        path: path.to_path_buf(),
        rows: a.rows(),
        cols: a.cols(),
        mode,
        sup_norm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub path: PathBuf,
    pub rows: usize,
    pub cols: usize,
    pub mode: Mode,
    pub space: String,
    pub value: f64,
}

impl NormReport {
    pub fn to_text(&self) -> String {
        format!("{}x{} {} {} = {}\n", self.rows, self.cols, self.mode, self.space, self.value)
    }
}

/// Evaluates the polynomial, rearranges it and applies the norm of `space`.
/// The undecoupled form requires a zero diagonal.
pub fn cmd_norm(path: &Path, space: &str, mode: Mode, cfg: &RunConfig) -> Result<NormReport> {
    let spec = space
        .parse::<SpaceSpec>()
        .and_then(SpaceSpec::validate)
        .map_err(|e| CliError::Usage(format!("space `{space}`: {e}")))?;
    let a = load(path)?;
    let r = match mode {
        Mode::Decoupled => rearrangement(&on_input(path, eval_decoupled(&a, &cfg.caps))?),
        Mode::Undecoupled => rearrangement(&on_input(path, eval_undecoupled(&a, &cfg.caps))?),
    };
    let value = spec.norm(&r)?;
    Ok(NormReport {
        path: path.to_path_buf(),
        rows: a.rows(),
        cols: a.cols(),
        mode,
        space: spec.to_string(),
        value,
    })
}

/// Runs one suite, or every suite concurrently for `all` (check ids then
/// carry a `suite/` prefix). Cached by config hash unless disabled.
pub fn cmd_verify(selection: Selection, cfg: &RunConfig) -> Result<Vec<SuiteResult>> {
    let start = Instant::now();
    let compute = || -> Result<Vec<SuiteResult>> {
        let mut results = run_suites(&selection.suites(), cfg)?;
        if selection == Selection::All {
            results.push(aggregate("all", &results, cfg));
        }
        Ok(results)
    };
    let mut results = cache::cached(cfg, &format!("verify-{}", selection.name()), compute)?;
    if cfg.timings {
        let ms = start.elapsed().as_secs_f64() * 1e3;
        for r in &mut results {
            r.wall_ms = Some(ms);
        }
    }
    Ok(results)
}

/// Sample count for `cmd_scaling`: a Monte-Carlo count or the exact average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Samples {
    Count(u64),
    All,
}

impl FromStr for Samples {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Samples::All),
            _ => match s.parse::<u64>() {
                Ok(c) if c > 0 => Ok(Samples::Count(c)),
                _ => Err(CliError::Usage(format!("samples must be a positive count or `all`, got `{s}`"))),
            },
        }
    }
}

fn scaling_row(n: usize, samples: Samples, cfg: &RunConfig) -> Result<ScalingRow> {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut row = ScalingRow {
        n,
        status: Status::Skip,
        mode: String::new(),
        samples: None,
        mean: None,
        std_dev: None,
        ratio: None,
        walsh: None,
        exhaustive_inf: None,
        note: String::new(),
        elapsed_ms: None,
    };

    let mean = match samples {
        Samples::All if n as u32 > EXACT_AVERAGE_MAX_N => {
            row.mode = "exhaustive_average".into();
            Err(ChaosError::EnumerationTooLarge {
                what: "exact average n",
                bits: n as u32,
                cap: EXACT_AVERAGE_MAX_N,
            })
        }
        Samples::All => exact_average(n),
        Samples::Count(s) => monte_carlo_average(n, s, cfg.seed, &cfg.caps),
    };
    match mean {
        Ok(r) => {
            row.mode = r.mode.as_str().to_string();
            row.samples = Some(r.samples);
            row.mean = Some(r.value);
            row.std_dev = r.std_dev;
            row.ratio = Some(r.ratio());
            let inside = (RATIO_LOWER..=RATIO_UPPER).contains(&r.ratio());
            row.status = if inside { Status::Pass } else { Status::Fail };
        }
        Err(e) if e.is_resource_cap() => {
            if row.mode.is_empty() {
                row.mode = "monte_carlo".into();
            }
            notes.push(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }

    if n.is_power_of_two() {
        let k = n.trailing_zeros();
        if k <= WALSH_MAX_K {
            match walsh_sign_arrangement(k).and_then(|w| sup_norm_signs(&w, &cfg.caps)) {
                Ok(v) => row.walsh = Some(v as f64),
                Err(e) if e.is_resource_cap() => notes.push(format!("walsh: {e}")),
                Err(e) => return Err(e.into()),
            }
        } else {
            notes.push(format!("walsh: k is capped at {WALSH_MAX_K}"));
        }
    }
    if n as u32 <= cfg.caps.exhaustive_n {
        row.exhaustive_inf = Some(exhaustive_inf(n, false, &cfg.caps)?.value);
    }
    row.note = notes.join("; ");
    if cfg.timings {
        row.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(row)
}

/// One row per `n` in `scaling.n`: the mean of `phi_n` over random sign
/// matrices (or the exact average), its ratio to `n^{3/2}`, the Walsh value
/// where `n` is a power of two and the exhaustive infimum where `n` is
/// within the cap. Rows beyond a cap are marked `skip`.
pub fn cmd_scaling(cfg: &RunConfig) -> Result<ScalingTable> {
    let ns: Vec<usize> = cfg.file.list("scaling.n")?;
    if ns.contains(&0) {
        return Err(CliError::Usage("scaling.n entries must be positive".into()));
    }
    let samples: Samples = cfg
        .file
        .get("scaling.samples")
        .ok_or_else(|| CliError::Usage("missing config key `scaling.samples`".into()))?
        .parse()?;
    let compute = || -> Result<ScalingTable> {
        let rows = ns.iter().map(|&n| scaling_row(n, samples, cfg)).collect::<Result<_>>()?;
        Ok(ScalingTable {
            rng: RNG_ALGORITHM.to_string(),
            ratio_lower: RATIO_LOWER,
            ratio_upper: RATIO_UPPER,
            rows,
            provenance: crate::report::Provenance::of(cfg),
        })
    };
    cache::cached(cfg, "scaling", compute)
}

/// The Walsh sign arrangement of order `k` in the text matrix format.
pub fn cmd_walsh(k: u32) -> Result<String> {
    let theta = walsh_sign_arrangement(k).map_err(|e| match e {
        e if e.is_resource_cap() => CliError::Core(e),
        other => CliError::Usage(other.to_string()),
    })?;
    Ok(format!(
        "# Walsh sign arrangement, k = {k}\n{}",
        matrix_to_text(&theta.to_coefficients())
    ))
}
