//! Named verification suites. Each one reads its pinned scale from the
//! config section of the same name and returns one check per inequality
//! instance (or one aggregated check over a batch of random trials).

use std::fmt;
use std::str::FromStr;

use chaoslab_core::extremal::WALSH_MAX_K;
use chaoslab_core::rearrange::log_distribution_unclipped;
use chaoslab_core::{
    clt, decouple_identity_rhs, distribution, eval_decoupled, eval_undecoupled, exact_average,
    exhaustive_inf, exp_moment, lemma2_bracket, log_distribution_l, lp_norm, monte_carlo_average,
    orlicz_exp_norm, shift_map, sidon_defect, sup_norm_signs, sup_norm_undecoupled, theorem7_witness,
    walsh_sign_arrangement, ChaosError, CoefficientMatrix, OrliczExp, Rearrangement, SignMatrix,
    WitnessMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::{Check, Relation, SuiteResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Khinchin,
    Decoupling,
    Lemma2,
    Lemma3,
    Theorem5,
    Proposition,
    Theorem6,
    Theorem7,
    Orlicz,
    Clt,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Khinchin,
        Suite::Decoupling,
        Suite::Lemma2,
        Suite::Lemma3,
        Suite::Theorem5,
        Suite::Proposition,
        Suite::Theorem6,
        Suite::Theorem7,
        Suite::Orlicz,
        Suite::Clt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Khinchin => "khinchin",
            Suite::Decoupling => "decoupling",
            Suite::Lemma2 => "lemma2",
            Suite::Lemma3 => "lemma3",
            Suite::Theorem5 => "theorem5",
            Suite::Proposition => "proposition",
            Suite::Theorem6 => "theorem6",
            Suite::Theorem7 => "theorem7",
            Suite::Orlicz => "orlicz",
            Suite::Clt => "clt",
        }
    }

    /// Every randomized suite draws from its own stream of the run seed.
    fn rng(self, cfg: &RunConfig) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(0x5ee7_0000 + self as u64);
        rng
    }

    pub fn run(self, cfg: &RunConfig) -> Result<SuiteResult> {
        let checks = match self {
            Suite::Khinchin => khinchin(cfg)?,
            Suite::Decoupling => decoupling(cfg)?,
            Suite::Lemma2 => lemma2(cfg)?,
            Suite::Lemma3 => lemma3(cfg)?,
            Suite::Theorem5 => theorem5(cfg)?,
            Suite::Proposition => proposition(cfg)?,
            Suite::Theorem6 => theorem6(cfg)?,
            Suite::Theorem7 => theorem7(cfg)?,
            Suite::Orlicz => orlicz(cfg)?,
            Suite::Clt => clt_suite(cfg)?,
        };
        Ok(SuiteResult::new(self.name(), checks, cfg))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single suite or `all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    One(Suite),
    All,
}

impl Selection {
    pub fn name(self) -> &'static str {
        match self {
            Selection::One(s) => s.name(),
            Selection::All => "all",
        }
    }

    pub fn suites(self) -> Vec<Suite> {
        match self {
            Selection::One(s) => vec![s],
            Selection::All => Suite::ALL.to_vec(),
        }
    }
}

impl FromStr for Selection {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(Selection::All);
        }
        Suite::ALL
            .iter()
            .find(|suite| suite.name() == s)
            .map(|&suite| Selection::One(suite))
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                CliError::Usage(format!("unknown suite `{s}` (expected one of {}, all)", names.join(", ")))
            })
    }
}

/// Runs the suites on separate threads; results come back in suite order.
pub fn run_suites(suites: &[Suite], cfg: &RunConfig) -> Result<Vec<SuiteResult>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = suites.iter().map(|&s| scope.spawn(move || s.run(cfg))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect()
    })
}

/// Joins suite results into one whose check ids are prefixed by suite name.
pub fn aggregate(name: &str, results: &[SuiteResult], cfg: &RunConfig) -> SuiteResult {
    let checks = results
        .iter()
        .flat_map(|r| {
            r.checks.iter().map(move |c| Check {
                id: format!("{}/{}", r.suite, c.id),
                ..c.clone()
            })
        })
        .collect();
    SuiteResult::new(name, checks, cfg)
}

/// Turns a resource-cap error into a skipped check.
fn capped(id: String, relation: Relation, bound: f64, f: impl FnOnce() -> chaoslab_core::Result<Check>) -> Result<Check> {
    match f() {
        Ok(c) => Ok(c),
        Err(e) if e.is_resource_cap() => Ok(Check::skip(id, relation, bound, e.to_string())),
        Err(e) => Err(e.into()),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> CoefficientMatrix {
    let data = (0..n * m).map(|_| rng.random_range(-1.0..1.0)).collect();
    CoefficientMatrix::new(n, m, data).expect("positive dimensions")
}

fn random_zero_diagonal(rng: &mut ChaCha8Rng, n: usize) -> CoefficientMatrix {
    let mut b = random_matrix(rng, n, n);
    for i in 0..n {
        b.set(i, i, 0.0);
    }
    b
}

fn random_symmetric_signs(rng: &mut ChaCha8Rng, n: usize) -> SignMatrix {
    let mut data = vec![1i8; n * n];
    for i in 0..n {
        for j in i..n {
            let s = if rng.random::<bool>() { 1 } else { -1 };
            data[i * n + j] = s;
            data[j * n + i] = s;
        }
    }
    SignMatrix::new_symmetric(n, data).expect("symmetric by construction")
}

fn positive(cfg: &RunConfig, key: &str) -> Result<usize> {
    let v: usize = cfg.file.parsed(key)?;
    if v == 0 {
        return Err(CliError::Usage(format!("config key `{key}` must be positive")));
    }
    Ok(v)
}

/// Moment growth `||x||_q <= q ||a||_2`, the `L^1` lower bound and the
/// exponential moment, over random `a` normalized to `||a||_2 = 1`.
fn khinchin(cfg: &RunConfig) -> Result<Vec<Check>> {
    let f = &cfg.file;
    let trials = positive(cfg, "khinchin.trials")?;
    let max_n = positive(cfg, "khinchin.max_n")?;
    let moments: Vec<f64> = f.list("khinchin.moments")?;
    let l1_lower: f64 = f.parsed("khinchin.l1_lower")?;
    let u: f64 = f.parsed("khinchin.exp_u")?;

    let mut rng = Suite::Khinchin.rng(cfg);
    let mut worst_moment = vec![0.0f64; moments.len()];
    let mut least_l1 = f64::INFINITY;
    let mut worst_exp = 0.0f64;
    for _ in 0..trials {
        let n = rng.random_range(1..=max_n);
        let m = rng.random_range(1..=max_n);
        let a = random_matrix(&mut rng, n, m);
        let a = a.scale(1.0 / a.l2_norm());
        let x = eval_decoupled(&a, &cfg.caps)?;
        for (slot, &q) in worst_moment.iter_mut().zip(&moments) {
            *slot = slot.max(lp_norm(&x, q)?);
        }
        least_l1 = least_l1.min(lp_norm(&x, 1.0)?);
        worst_exp = worst_exp.max(exp_moment(&x, u)?);
    }

    let note = format!("{trials} random a, n, m <= {max_n}, ||a||_2 = 1");
    let mut checks: Vec<Check> = moments
        .iter()
        .zip(worst_moment)
        .map(|(&q, v)| Check::le(format!("moment_q{q}"), v, q, 1e-12).with_note(note.clone()))
        .collect();
    checks.push(Check::ge("l1_lower", least_l1, l1_lower, 1e-12).with_note(note.clone()));
    checks.push(Check::le(format!("exp_moment_u{u}"), worst_exp, 1.0, 0.0).with_note(note));
    Ok(checks)
}

/// The undecoupled sum against the literal `2^N`-subset average of
/// decoupled sums, pointwise.
fn decoupling(cfg: &RunConfig) -> Result<Vec<Check>> {
    let trials = positive(cfg, "decoupling.trials")?;
    let n = positive(cfg, "decoupling.n")?;
    let tol: f64 = cfg.file.parsed("decoupling.tolerance")?;
    let mut rng = Suite::Decoupling.rng(cfg);

    let gap = |b: &CoefficientMatrix| -> chaoslab_core::Result<f64> {
        let lhs = eval_undecoupled(b, &cfg.caps)?;
        let rhs = decouple_identity_rhs(b, b.rows(), &cfg.caps)?;
        Ok(lhs
            .values()
            .iter()
            .zip(rhs.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max))
    };

    let mut checks = Vec::new();
    let example = CoefficientMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]])?;
    checks.push(Check::eq("example_n2", gap(&example)?, 0.0, 0.0));
    let id = format!("random_n{n}_max_gap");
    checks.push(capped(id.clone(), Relation::Le, tol, || {
        let mut worst = 0.0f64;
        for _ in 0..trials {
            worst = worst.max(gap(&random_zero_diagonal(&mut rng, n))?);
        }
        Ok(Check::le(id.clone(), worst, tol, 0.0).with_note(format!("{trials} random zero-diagonal b")))
    })?);
    Ok(checks)
}

/// `L(z) = int_0^1 n_{ln(e/s)}(z) ds` inside its two-sided bracket.
fn lemma2(cfg: &RunConfig) -> Result<Vec<Check>> {
    let zs: Vec<f64> = cfg.file.list("lemma2.z")?;
    let mut checks = Vec::new();
    for z in zs {
        let value = log_distribution_l(z, cfg.rel_tol)?;
        let (lo, hi) = lemma2_bracket(z);
        let tol = value * cfg.rel_tol;
        checks.push(Check::ge(format!("z{z}_lower"), value, lo, tol));
        checks.push(Check::le(format!("z{z}_upper"), value, hi, tol));
        let unclipped = log_distribution_unclipped(z, cfg.rel_tol)?;
        checks.push(
            Check::le(format!("z{z}_unclipped_upper"), unclipped.value + unclipped.tail_bound, hi, 0.0)
                .with_note("unclipped integral plus truncation tail"),
        );
    }
    Ok(checks)
}

/// The decoupled polynomial and its shifted undecoupled copy have the same law.
fn lemma3(cfg: &RunConfig) -> Result<Vec<Check>> {
    let trials = positive(cfg, "lemma3.trials")?;
    let n = positive(cfg, "lemma3.n")?;
    let mut rng = Suite::Lemma3.rng(cfg);
    let id = format!("shift_map_n{n}_mismatches");
    Ok(vec![capped(id.clone(), Relation::Eq, 0.0, || {
        let mut mismatches = 0;
        for _ in 0..trials {
            let a = random_matrix(&mut rng, n, n);
            let shifted = eval_undecoupled(&shift_map(&a, n)?, &cfg.caps)?;
            let direct = eval_decoupled(&a, &cfg.caps)?;
            if !distribution(&shifted).same_as(&distribution(&direct)) {
                mismatches += 1;
            }
        }
        Ok(Check::eq(id.clone(), f64::from(mismatches), 0.0, 0.0).with_note(format!("{trials} random a")))
    })?])
}

pub const RATIO_LOWER: f64 = std::f64::consts::FRAC_1_SQRT_2;
pub const RATIO_UPPER: f64 = 9.0 * std::f64::consts::SQRT_2;

/// `inf_theta phi_n(theta) >= n^{3/2}/sqrt 2` exactly for small `n`, and
/// the average of `phi_n` between `n^{3/2}/sqrt 2` and `9 sqrt 2 n^{3/2}`.
fn theorem5(cfg: &RunConfig) -> Result<Vec<Check>> {
    let f = &cfg.file;
    let mut checks = Vec::new();
    for n in f.list::<usize>("theorem5.exhaustive")? {
        let bound = (n as f64).powf(1.5) / std::f64::consts::SQRT_2;
        let id = format!("inf_n{n}");
        checks.push(capped(id.clone(), Relation::Ge, bound, || {
            let r = exhaustive_inf(n, false, &cfg.caps)?;
            Ok(Check::ge(id.clone(), r.value, bound, 0.0).with_note(format!("{} canonical matrices", r.samples)))
        })?);
        if n == 2 {
            if let Some(Some(v)) = checks.last().map(|c| c.measured) {
                checks.push(Check::eq("inf_n2_exact", v, 2.0, 0.0));
            }
        }
    }
    for n in f.list::<usize>("theorem5.exact_average")? {
        let r = match exact_average(n) {
            Ok(r) => r,
            Err(e @ ChaosError::EnumerationTooLarge { .. }) => {
                checks.push(Check::skip(format!("avg_n{n}_ratio_lower"), Relation::Ge, RATIO_LOWER, e.to_string()));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        checks.push(Check::ge(format!("avg_n{n}_ratio_lower"), r.ratio(), RATIO_LOWER, 0.0));
        checks.push(Check::le(format!("avg_n{n}_ratio_upper"), r.ratio(), RATIO_UPPER, 0.0));
        if n == 2 {
            checks.push(Check::eq("avg_n2_exact", r.value, 3.0, 0.0));
        }
    }
    let samples: u64 = f.parsed("theorem5.samples")?;
    for n in f.list::<usize>("theorem5.monte_carlo")? {
        let id = format!("mc_n{n}_ratio_lower");
        let lower = capped(id.clone(), Relation::Ge, RATIO_LOWER, || {
            let r = monte_carlo_average(n, samples, cfg.seed, &cfg.caps)?;
            Ok(Check::ge(id.clone(), r.ratio(), RATIO_LOWER, 0.0)
                .with_note(format!("mean {} over {samples} samples", r.value)))
        })?;
        if let Some(ratio) = lower.measured {
            checks.push(Check::le(format!("mc_n{n}_ratio_upper"), ratio, RATIO_UPPER, 0.0));
        }
        checks.push(lower);
    }
    Ok(checks)
}

/// `phi(W_k) <= 2^{3k/2}` for the Walsh arrangement and the resulting
/// Sidon defect `phi(W_k) / 4^k <= 2^{-k/2}`.
fn proposition(cfg: &RunConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for k in cfg.file.list::<u32>("proposition.k")? {
        let bound = (1.5 * k as f64).exp2();
        let id = format!("walsh_k{k}");
        if k > WALSH_MAX_K {
            checks.push(Check::skip(id, Relation::Le, bound, format!("k is capped at {WALSH_MAX_K}")));
            continue;
        }
        let check = capped(id.clone(), Relation::Le, bound, || {
            let phi = sup_norm_signs(&walsh_sign_arrangement(k)?, &cfg.caps)? as f64;
            Ok(Check::le(id.clone(), phi, bound, 0.0))
        })?;
        if let Some(phi) = check.measured {
            match k {
                1 => checks.push(Check::eq("walsh_k1_exact", phi, 2.0, 0.0)),
                2 => checks.push(Check::eq("walsh_k2_exact", phi, 8.0, 0.0)),
                _ => {}
            }
            let defect = sidon_defect(k, &cfg.caps)?;
            checks.push(Check::le(format!("sidon_defect_k{k}"), defect, (-(k as f64) / 2.0).exp2(), 1e-15));
        }
        checks.push(check);
    }
    Ok(checks)
}

/// `phi_bar(theta) <= phi(theta)` for symmetric sign matrices: the
/// undecoupled form is the decoupled one restricted to `eps = delta`.
fn theorem6(cfg: &RunConfig) -> Result<Vec<Check>> {
    let trials = positive(cfg, "theorem6.trials")?;
    let max_n = positive(cfg, "theorem6.max_n")?;
    let mut rng = Suite::Theorem6.rng(cfg);
    let id = "phi_bar_minus_phi".to_string();
    Ok(vec![capped(id.clone(), Relation::Le, 0.0, || {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..trials {
            let n = rng.random_range(1..=max_n);
            let theta = random_symmetric_signs(&mut rng, n);
            let phi = sup_norm_signs(&theta, &cfg.caps)? as f64;
            let phi_bar = sup_norm_undecoupled(&theta.to_coefficients(), &cfg.caps)?;
            worst = worst.max(phi_bar - phi);
        }
        Ok(Check::le(id.clone(), worst, 0.0, 0.0)
            .with_note(format!("{trials} random symmetric theta, n <= {max_n}")))
    })?])
}

/// Block construction: corner values, rearrangement values at `u_k`, and
/// growth of the `phi_eps` quasi-norm of the partial images.
fn theorem7(cfg: &RunConfig) -> Result<Vec<Check>> {
    let f = &cfg.file;
    let eps: f64 = f.parsed("theorem7.eps")?;
    let max_block: u32 = f.parsed("theorem7.max_block")?;
    let mode = match f.get("theorem7.mode") {
        Some("full") => WitnessMode::Full,
        Some("corner") => WitnessMode::Corner,
        other => {
            return Err(CliError::Usage(format!(
                "theorem7.mode must be full or corner, got `{}`",
                other.unwrap_or("")
            )))
        }
    };
    let r = match theorem7_witness(eps, max_block, mode, &cfg.caps) {
        Ok(r) => r,
        Err(e) if e.is_resource_cap() => {
            return Ok(vec![Check::skip("witness", Relation::Le, 0.0, e.to_string())]);
        }
        Err(ChaosError::InvalidArgument(m)) => return Err(CliError::Usage(m)),
        Err(e) => return Err(e.into()),
    };
    let growth = (eps / 2.0).exp2();
    let mut checks = Vec::new();
    for (idx, b) in r.blocks.iter().enumerate() {
        let k = b.k;
        let square = (2.0 * k as f64).exp2();
        checks.push(Check::eq(format!("corner_k{k}"), b.corner_value, square, 0.0));
        checks.push(Check::le(format!("z_sup_k{k}"), b.z_sup, b.z_bound, 0.0));
        if let Some(v) = b.y_star_at_u_k {
            checks.push(Check::ge(format!("y_star_k{k}"), v, square, 0.0));
        }
        if let (Some(q), Some(m)) = (b.partial_quasinorm, b.partial_marcinkiewicz) {
            checks.push(Check::ge(format!("quasinorm_k{k}"), q, b.lower_bound, 0.0));
            checks.push(
                Check::ge(format!("marcinkiewicz_over_quasinorm_k{k}"), m / q, 1.0, 1e-12)
                    .with_note("grid value of the norm against the exact quasi-norm"),
            );
            if idx > 0 {
                if let Some(prev) = r.blocks[idx - 1].partial_quasinorm {
                    checks.push(Check::ge(format!("growth_k{k}"), q / prev, growth, 0.0));
                }
            }
        }
    }
    checks.push(Check::le("x_sup", r.x_sup, r.x_sup_bound, 0.0));
    Ok(checks)
}

/// Fundamental function of the exponential Orlicz space.
fn orlicz(cfg: &RunConfig) -> Result<Vec<Check>> {
    let ts: Vec<f64> = cfg.file.list("orlicz.t")?;
    let tol: f64 = cfg.file.parsed("orlicz.tolerance")?;
    let rel_tol = (tol * 1e-3).max(1e-14);
    let mut checks = Vec::new();
    for t in ts {
        let r = Rearrangement::indicator(t, 1.0)?;
        let e = std::f64::consts::E;
        let normalized = orlicz_exp_norm(&r, rel_tol)? * (1.0 + (e - 1.0) / t).ln();
        checks.push(Check::eq(format!("t{t}"), normalized, 1.0, tol));
        let literal = OrliczExp::literal().norm(&r, rel_tol)? * (1.0 + 1.0 / t).ln();
        checks.push(Check::eq(format!("t{t}_literal"), literal, 1.0, tol));
    }
    Ok(checks)
}

/// Kolmogorov distance between the exact law of `n^{-1/2} sum r_i` and the
/// Gaussian.
fn clt_suite(cfg: &RunConfig) -> Result<Vec<Check>> {
    let n: u32 = cfg.file.parsed("clt.n")?;
    let bound: f64 = cfg.file.parsed("clt.bound")?;
    let d = clt::kolmogorov_distance(n).map_err(|e| match e {
        ChaosError::InvalidArgument(m) => CliError::Usage(m),
        other => other.into(),
    })?;
    Ok(vec![
        Check::le(format!("tail_distance_n{n}"), d.tail, bound, 0.0)
            .with_note("sup_z |mu{|v_n| > z} - Phi(z)|"),
        Check::le(format!("cdf_distance_n{n}"), d.cdf, bound, 0.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_parses() {
        assert_eq!("all".parse::<Selection>().unwrap(), Selection::All);
        assert_eq!("clt".parse::<Selection>().unwrap(), Selection::One(Suite::Clt));
        let e = "nope".parse::<Selection>().unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn random_symmetric_is_symmetric() {
        let mut rng = Suite::Theorem6.rng(&RunConfig::defaults());
        let t = random_symmetric_signs(&mut rng, 5);
        assert!(t.is_symmetric());
    }

    #[test]
    fn capped_checks_skip() {
        let cfg = RunConfig::defaults().with_assignments(["caps.exhaustive_n=3"]).unwrap();
        let r = Suite::Theorem5.run(&cfg).unwrap();
        let skip = r.checks.iter().find(|c| c.id == "inf_n4").unwrap();
        assert_eq!(skip.status, crate::report::Status::Skip);
        assert!(r.passed);
    }
}
