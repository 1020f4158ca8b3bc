use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::phi_of_masks;
use crate::caps::{self, Caps};
use crate::error::{ChaosError, Result};

/// Generator behind [`monte_carlo_average`]: ChaCha8 keyed by
/// `seed_from_u64(seed)`, with stream number `k` reserved for sample `k`.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64/stream=sample_index";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    ExhaustiveAverage,
    MonteCarlo,
    Walsh,
}

impl SearchMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::ExhaustiveAverage => "exhaustive_average",
            SearchMode::MonteCarlo => "monte_carlo",
            SearchMode::Walsh => "walsh",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub n: usize,
    pub mode: SearchMode,
    /// Undecoupled (`theta` symmetric) rather than decoupled.
    pub symmetric: bool,
    pub value: f64,
    pub std_dev: Option<f64>,
    /// Matrices scanned or drawn.
    pub samples: u64,
    pub seed: Option<u64>,
    pub rng: Option<String>,
    /// A minimizing matrix for exhaustive searches.
    pub witness: Option<Vec<Vec<i8>>>,
    pub elapsed_ms: f64,
}

impl SearchReport {
    pub fn ratio(&self) -> f64 {
        self.value / (self.n as f64).powf(1.5)
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Column masks of the canonical decoupled matrix `code`: first row and
/// column are `+1`, entry `(i, j)` for `i, j >= 1` is `-1` iff bit
/// `(i-1)(n-1) + (j-1)` of `code` is set.
fn canonical_columns(n: usize, code: u64) -> Vec<u64> {
    let mut cols = vec![0u64; n];
    for (j, col) in cols.iter_mut().enumerate().skip(1) {
        for i in 1..n {
            if code >> ((i - 1) * (n - 1) + (j - 1)) & 1 == 1 {
                *col |= 1 << i;
            }
        }
    }
    cols
}

/// Symmetric matrix with first row `+1`; the free entries `(i, j)`,
/// `1 <= i <= j < n`, are read from `code` in row-major order.
fn canonical_symmetric(n: usize, code: u64) -> Vec<i8> {
    let mut theta = vec![1i8; n * n];
    let mut bit = 0;
    for i in 1..n {
        for j in i..n {
            if code >> bit & 1 == 1 {
                theta[i * n + j] = -1;
                theta[j * n + i] = -1;
            }
            bit += 1;
        }
    }
    theta
}

/// `max_eps |eps^T theta eps|` for a small symmetric sign matrix, in integers.
fn phi_bar(theta: &[i8], n: usize) -> i64 {
    let mut best = 0i64;
    for eps in 0..1u64 << (n - 1) {
        let s = |i: usize| if eps >> i & 1 == 1 { -1i64 } else { 1 };
        let mut q = 0i64;
        for i in 0..n {
            let row: i64 = (0..n).map(|j| i64::from(theta[i * n + j]) * s(j)).sum();
            q += s(i) * row;
        }
        best = best.max(q.abs());
    }
    best
}

fn rows_of(cols: &[u64], n: usize) -> Vec<Vec<i8>> {
    (0..n)
        .map(|i| cols.iter().map(|c| if c >> i & 1 == 1 { -1 } else { 1 }).collect())
        .collect()
}

/// Exact `inf_theta phi_n(theta)` (or `inf` over symmetric `theta` of the
/// undecoupled norm). Row and column sign flips leave the norm unchanged, so
/// only matrices whose first row and column are `+1` are scanned; in the
/// symmetric case `theta -> D theta D` and `theta -> -theta` fix the first
/// row.
pub fn exhaustive_inf(n: usize, symmetric: bool, caps: &Caps) -> Result<SearchReport> {
    if n == 0 {
        return Err(ChaosError::InvalidArgument("n must be positive".into()));
    }
    caps::check("exhaustive n", n as u32, caps.exhaustive_n)?;
    let start = Instant::now();
    let free_bits = if symmetric { n * (n - 1) / 2 } else { (n - 1) * (n - 1) };
    let total = 1u64 << free_bits;
    let (value, code) = if symmetric {
        (0..total)
            .into_par_iter()
            .map(|code| (phi_bar(&canonical_symmetric(n, code), n) as u64, code))
            .min()
            .expect("non-empty range")
    } else {
        (0..total)
            .into_par_iter()
            .map(|code| (u64::from(phi_of_masks(&canonical_columns(n, code), n as u32)), code))
            .min()
            .expect("non-empty range")
    };
    let witness = if symmetric {
        canonical_symmetric(n, code).chunks(n).map(<[i8]>::to_vec).collect()
    } else {
        rows_of(&canonical_columns(n, code), n)
    };
    Ok(SearchReport {
        n,
        mode: SearchMode::Exhaustive,
        symmetric,
        value: value as f64,
        std_dev: None,
        samples: total,
        seed: None,
        rng: None,
        witness: Some(witness),
        elapsed_ms: elapsed_ms(start),
    })
}

pub const EXACT_AVERAGE_MAX_N: u32 = 4;

/// `2^{-n^2} sum_theta phi_n(theta)` over every sign matrix.
pub fn exact_average(n: usize) -> Result<SearchReport> {
    if n == 0 {
        return Err(ChaosError::InvalidArgument("n must be positive".into()));
    }
    caps::check("exact average n", n as u32, EXACT_AVERAGE_MAX_N)?;
    let start = Instant::now();
    let total = 1u64 << (n * n);
    let col_mask = (1u64 << n) - 1;
    let sum: u64 = (0..total)
        .into_par_iter()
        .map(|code| {
            let cols: Vec<u64> = (0..n).map(|j| (code >> (j * n)) & col_mask).collect();
            u64::from(phi_of_masks(&cols, n as u32))
        })
        .sum();
    Ok(SearchReport {
        n,
        mode: SearchMode::ExhaustiveAverage,
        symmetric: false,
        value: sum as f64 / total as f64,
        std_dev: None,
        samples: total,
        seed: None,
        rng: None,
        witness: None,
        elapsed_ms: elapsed_ms(start),
    })
}

fn sample_columns(n: usize, seed: u64, index: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let words: Vec<u64> = (0..(n * n).div_ceil(64)).map(|_| rng.next_u64()).collect();
    let bit = |p: usize| words[p / 64] >> (p % 64) & 1 == 1;
    (0..n)
        .map(|j| (0..n).filter(|&i| bit(i * n + j)).fold(0u64, |m, i| m | 1 << i))
        .collect()
}

/// Mean of `phi_n(theta)` over `samples` uniform sign matrices. Sample `k`
/// is drawn from its own generator stream, so the result does not depend on
/// how the work is split across threads.
pub fn monte_carlo_average(n: usize, samples: u64, seed: u64, caps: &Caps) -> Result<SearchReport> {
    if n == 0 || samples == 0 {
        return Err(ChaosError::InvalidArgument("n and samples must be positive".into()));
    }
    caps::check("Monte-Carlo n", n as u32, caps.monte_carlo_n)?;
    let start = Instant::now();
    let values: Vec<u32> = (0..samples)
        .into_par_iter()
        .map(|k| phi_of_masks(&sample_columns(n, seed, k), n as u32))
        .collect();
    let mean = values.iter().map(|&v| f64::from(v)).sum::<f64>() / samples as f64;
    let std_dev = if samples > 1 {
        let ss: f64 = values.iter().map(|&v| (f64::from(v) - mean).powi(2)).sum();
        Some((ss / (samples - 1) as f64).sqrt())
    } else {
        None
    };
    Ok(SearchReport {
        n,
        mode: SearchMode::MonteCarlo,
        symmetric: false,
        value: mean,
        std_dev,
        samples,
        seed: Some(seed),
        rng: Some(RNG_ALGORITHM.to_string()),
        witness: None,
        elapsed_ms: elapsed_ms(start),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::SignMatrix;
    use crate::extremal::{sup_norm_signs, sup_norm_undecoupled};

    fn caps() -> Caps {
        Caps::default()
    }

    /// Minimum over every sign matrix, no canonical reduction.
    fn brute_inf(n: usize) -> u64 {
        (0..1u64 << (n * n))
            .map(|code| {
                let data = (0..n * n).map(|p| if code >> p & 1 == 1 { -1 } else { 1 }).collect();
                sup_norm_signs(&SignMatrix::new(n, n, data).unwrap(), &caps()).unwrap()
            })
            .min()
            .unwrap()
    }

    fn brute_inf_symmetric(n: usize) -> f64 {
        let upper: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        (0..1u64 << upper.len())
            .map(|code| {
                let mut data = vec![1i8; n * n];
                for (b, &(i, j)) in upper.iter().enumerate() {
                    if code >> b & 1 == 1 {
                        data[i * n + j] = -1;
                        data[j * n + i] = -1;
                    }
                }
                let theta = SignMatrix::new_symmetric(n, data).unwrap();
                sup_norm_undecoupled(&theta.to_coefficients(), &caps()).unwrap()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn canonical_inf_matches_brute_force() {
        for n in 1..=3 {
            assert_eq!(exhaustive_inf(n, false, &caps()).unwrap().value, brute_inf(n) as f64);
        }
        for n in 1..=4 {
            assert_eq!(exhaustive_inf(n, true, &caps()).unwrap().value, brute_inf_symmetric(n));
        }
    }

    #[test]
    fn inf_examples() {
        // Frozen from brute-force enumeration.
        let decoupled = [1.0, 2.0, 5.0, 8.0, 11.0];
        let symmetric = [1.0, 2.0, 5.0, 8.0, 9.0];
        for n in 1..=5 {
            let r = exhaustive_inf(n, false, &caps()).unwrap();
            assert_eq!(r.value, decoupled[n - 1]);
            assert_eq!(r.samples, 1 << ((n - 1) * (n - 1)));
            let w = r.witness.unwrap().concat();
            let w = SignMatrix::new(n, n, w).unwrap();
            assert_eq!(sup_norm_signs(&w, &caps()).unwrap() as f64, r.value);
            assert!(r.value >= (n as f64).powf(1.5) / 2f64.sqrt() - 1e-12);

            let r = exhaustive_inf(n, true, &caps()).unwrap();
            assert_eq!(r.value, symmetric[n - 1]);
            let w = SignMatrix::new_symmetric(n, r.witness.unwrap().concat()).unwrap();
            assert_eq!(sup_norm_undecoupled(&w.to_coefficients(), &caps()).unwrap(), r.value);
        }
        assert!(exhaustive_inf(6, false, &caps()).unwrap_err().is_resource_cap());
    }

    #[test]
    fn exact_average_examples() {
        assert_eq!(exact_average(1).unwrap().value, 1.0);
        let r = exact_average(2).unwrap();
        assert_eq!((r.value, r.samples), (3.0, 16));
        // Frozen from brute-force enumeration.
        assert_eq!(exact_average(3).unwrap().value, 6.375);
    }

    #[test]
    fn monte_carlo_reproducible_and_unbiased() {
        let a = monte_carlo_average(5, 500, 7, &caps()).unwrap();
        let b = monte_carlo_average(5, 500, 7, &caps()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_dev.unwrap().to_bits(), b.std_dev.unwrap().to_bits());
        let c = monte_carlo_average(5, 500, 8, &caps()).unwrap();
        assert_ne!(a.value, c.value);

        let m = monte_carlo_average(1, 10, 3, &caps()).unwrap();
        assert_eq!(m.value, 1.0);

        let mc = monte_carlo_average(3, 20000, 11, &caps()).unwrap();
        let sd = mc.std_dev.unwrap() / (20000f64).sqrt();
        assert!((mc.value - 6.375).abs() < 5.0 * sd, "{} vs 6.375", mc.value);
    }

    #[test]
    fn monte_carlo_independent_of_thread_count() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| monte_carlo_average(6, 300, 99, &caps()).unwrap());
        let many = monte_carlo_average(6, 300, 99, &caps()).unwrap();
        assert_eq!(single.value.to_bits(), many.value.to_bits());
    }

    #[test]
    fn report_serializes() {
        let r = exhaustive_inf(2, false, &caps()).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.starts_with("{\"n\":2,\"mode\":\"exhaustive\""));
        let back: SearchReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.value, 2.0);
    }
}
