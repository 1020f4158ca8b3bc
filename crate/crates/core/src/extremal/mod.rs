//! Exact `L_inf` norms of chaos polynomials by hypercube enumeration, and the
//! extremal sign problems built on them.
//!
//! For the decoupled polynomial the maximum over `delta` is taken in closed
//! form, `sup |eps^T A delta| = max_eps sum_j |sum_i a_ij eps_i|`, so only the
//! `2^{n-1}` sign vectors with `eps_n = +1` are scanned. Sign matrices use a
//! popcount kernel, `sum_i theta_ij eps_i = n - 2 popcount(col_j ^ eps)`;
//! real matrices walk each block of sign vectors in Gray-code order, updating
//! column sums by one row per step. Blocks have a fixed size so every
//! reduction is independent of the thread count.

mod blowup;
mod search;

pub use blowup::{theorem7_witness, BlockReport, Theorem7Report, WitnessMode};
pub use search::{
    exact_average, exhaustive_inf, monte_carlo_average, SearchMode, SearchReport, EXACT_AVERAGE_MAX_N,
    RNG_ALGORITHM,
};

use rayon::prelude::*;

use crate::caps::{self, Caps};
use crate::chaos::{CoefficientMatrix, SignMatrix};
use crate::dyadic::{blocks, signf, walsh, DyadicPoint};
use crate::error::{ChaosError, Result};

const BLOCK_BITS: u32 = 12;

/// `phi(theta)` for column masks over `n` rows, scanned serially.
#[inline]
pub(crate) fn phi_of_masks(cols: &[u64], n: u32) -> u32 {
    phi_of_masks_range(cols, n, 0, 1u64 << (n - 1))
}

#[inline]
fn phi_of_masks_range(cols: &[u64], n: u32, start: u64, end: u64) -> u32 {
    let mut best = 0u32;
    for eps in start..end {
        let total: u32 = cols
            .iter()
            .map(|&c| (n as i32 - 2 * (c ^ eps).count_ones() as i32).unsigned_abs())
            .sum();
        best = best.max(total);
    }
    best
}

/// `||sum theta_ij r_i(s) r_j(t)||_inf` for a sign matrix; exact integer.
pub fn sup_norm_signs(theta: &SignMatrix, caps: &Caps) -> Result<u64> {
    let n = theta.rows() as u32;
    caps::check("sup-norm rows", n, caps.sup_rows)?;
    let cols = theta.column_masks();
    let total = 1u64 << (n - 1);
    Ok(blocks(total, BLOCK_BITS + 2)
        .map(|(start, end)| phi_of_masks_range(&cols, n, start, end))
        .max()
        .unwrap_or(0) as u64)
}

fn gray_block_decoupled(a: &CoefficientMatrix, start: u64, end: u64) -> f64 {
    let (n, m) = (a.rows(), a.cols());
    let mut sums: Vec<f64> = (0..m)
        .map(|j| (0..n).map(|i| a.get(i, j) * signf(start, i)).sum())
        .collect();
    let mut best = sums.iter().map(|s| s.abs()).sum::<f64>();
    let mut mask = start;
    for t in 1..(end - start) {
        let bit = t.trailing_zeros() as usize;
        let old = signf(mask, bit);
        mask ^= 1 << bit;
        for (j, s) in sums.iter_mut().enumerate() {
            *s -= 2.0 * old * a.get(bit, j);
        }
        best = best.max(sums.iter().map(|s| s.abs()).sum());
    }
    best
}

/// `||sum a_ij r_i(s) r_j(t)||_inf` for a real matrix.
pub fn sup_norm_decoupled(a: &CoefficientMatrix, caps: &Caps) -> Result<f64> {
    if a.is_sign_matrix() {
        return Ok(sup_norm_signs(&SignMatrix::from_coefficients(a)?, caps)? as f64);
    }
    let n = a.rows() as u32;
    caps::check("sup-norm rows", n, caps.sup_rows)?;
    let total = 1u64 << (n - 1);
    Ok(blocks(total, BLOCK_BITS)
        .map(|(start, end)| gray_block_decoupled(a, start, end))
        .reduce(|| 0.0, f64::max))
}

fn gray_block_undecoupled(b: &CoefficientMatrix, start: u64, end: u64) -> f64 {
    let n = b.rows();
    let sym = |i: usize, j: usize| b.get(i, j) + b.get(j, i);
    let mut v: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| sym(i, j) * signf(start, j)).sum())
        .collect();
    let mut q = crate::chaos::quadratic(b, start);
    let mut best = q.abs();
    let mut mask = start;
    for t in 1..(end - start) {
        let k = t.trailing_zeros() as usize;
        let e = signf(mask, k);
        q -= 2.0 * e * (v[k] - 2.0 * b.get(k, k) * e);
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= 2.0 * e * sym(i, k);
        }
        mask ^= 1 << k;
        best = best.max(q.abs());
    }
    best
}

/// `||sum_ij b_ij r_i(t) r_j(t)||_inf` with the diagonal included as given.
pub fn sup_norm_undecoupled(b: &CoefficientMatrix, caps: &Caps) -> Result<f64> {
    if !b.is_square() {
        return Err(ChaosError::NotSquare {
            rows: b.rows(),
            cols: b.cols(),
        });
    }
    let n = b.rows() as u32;
    caps::check("sup-norm rows", n, caps.axis_bits)?;
    let total = 1u64 << (n - 1);
    Ok(blocks(total, BLOCK_BITS)
        .map(|(start, end)| gray_block_undecoupled(b, start, end))
        .reduce(|| 0.0, f64::max))
}

pub const WALSH_MAX_K: u32 = 5;

/// `theta_ij = w_j` on the cell `((i-1) 2^{-k}, i 2^{-k})`, for `i, j <= 2^k`.
pub fn walsh_sign_arrangement(k: u32) -> Result<SignMatrix> {
    caps::check("Walsh order k", k, WALSH_MAX_K)?;
    let n = 1usize << k;
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        let cell = DyadicPoint::from_cell(i as u64, k)?;
        for j in 1..=n {
            data.push(walsh(j as u64, &cell)?);
        }
    }
    SignMatrix::new(n, n, data)
}

/// `phi(W_k) / 2^{2k}`: sup norm over the l1 norm of the coefficients for the
/// Walsh arrangement. A Sidon system would keep this bounded below.
pub fn sidon_defect(k: u32, caps: &Caps) -> Result<f64> {
    let theta = walsh_sign_arrangement(k)?;
    Ok(sup_norm_signs(&theta, caps)? as f64 / (2.0 * k as f64).exp2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::eval_decoupled;
    use proptest::prelude::*;

    fn caps() -> Caps {
        Caps::default()
    }

    /// max over every (eps, delta) of |eps^T A delta|.
    fn brute_decoupled(a: &CoefficientMatrix) -> f64 {
        let mut best: f64 = 0.0;
        for eps in 0..1u64 << a.rows() {
            for delta in 0..1u64 << a.cols() {
                best = best.max(a.bilinear(eps, delta).abs());
            }
        }
        best
    }

    fn brute_undecoupled(b: &CoefficientMatrix) -> f64 {
        (0..1u64 << b.rows())
            .map(|e| crate::chaos::quadratic(b, e).abs())
            .fold(0.0, f64::max)
    }

    fn signs(n: usize, data: &[i8]) -> SignMatrix {
        SignMatrix::new(n, n, data.to_vec()).unwrap()
    }

    #[test]
    fn decoupled_examples() {
        for n in 1..=6 {
            let ones = CoefficientMatrix::filled(n, n, 1.0).unwrap();
            assert_eq!(sup_norm_decoupled(&ones, &caps()).unwrap(), (n * n) as f64);
        }
        let w = CoefficientMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert_eq!(sup_norm_decoupled(&w, &caps()).unwrap(), 2.0);
        assert_eq!(
            sup_norm_decoupled(&CoefficientMatrix::filled(1, 1, 1.0).unwrap(), &caps()).unwrap(),
            1.0
        );
    }

    #[test]
    fn undecoupled_examples() {
        let ones = CoefficientMatrix::filled(2, 2, 1.0).unwrap();
        assert_eq!(sup_norm_undecoupled(&ones, &caps()).unwrap(), 4.0);
        let off = CoefficientMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(sup_norm_undecoupled(&off, &caps()).unwrap(), 2.0);
    }

    #[test]
    fn walsh_examples() {
        assert_eq!(walsh_sign_arrangement(0).unwrap(), signs(1, &[1]));
        assert_eq!(walsh_sign_arrangement(1).unwrap(), signs(2, &[1, 1, 1, -1]));
        assert_eq!(
            walsh_sign_arrangement(2).unwrap(),
            signs(4, &[1, 1, 1, 1, 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1, 1])
        );
        // Values frozen from brute-force enumeration.
        let expected = [1u64, 2, 8, 20, 64];
        for (k, &phi) in expected.iter().enumerate() {
            let w = walsh_sign_arrangement(k as u32).unwrap();
            assert_eq!(sup_norm_signs(&w, &caps()).unwrap(), phi);
            assert!(phi as f64 <= (1.5 * k as f64).exp2() + 1e-12);
        }
        assert!(walsh_sign_arrangement(6).unwrap_err().is_resource_cap());
    }

    #[test]
    fn walsh_rows_orthogonal() {
        for k in 0..=5 {
            let w = walsh_sign_arrangement(k).unwrap();
            let n = w.rows();
            for a in 0..n {
                for b in 0..n {
                    let dot: i32 = (0..n).map(|j| i32::from(w.get(a, j) * w.get(b, j))).sum();
                    assert_eq!(dot, if a == b { n as i32 } else { 0 });
                }
            }
        }
    }

    #[test]
    fn sidon_examples() {
        assert_eq!(sidon_defect(0, &caps()).unwrap(), 1.0);
        assert_eq!(sidon_defect(2, &caps()).unwrap(), 0.5);
        assert_eq!(sidon_defect(4, &caps()).unwrap(), 0.25);
        let d: Vec<f64> = (0..=4).map(|k| sidon_defect(k, &caps()).unwrap()).collect();
        assert!(d.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn undecoupled_not_above_decoupled_for_walsh() {
        for k in 0..=3 {
            let w = walsh_sign_arrangement(k).unwrap().to_coefficients();
            assert!(sup_norm_undecoupled(&w, &caps()).unwrap() <= sup_norm_decoupled(&w, &caps()).unwrap());
        }
    }

    #[test]
    fn large_real_matrix_spans_several_blocks() {
        // 15 rows: 2^14 sign vectors, four Gray blocks; compare to the
        // materialized function.
        let n = 15;
        let data: Vec<f64> = (0..n * 3).map(|p| ((p * 37 % 23) as f64 - 11.0) / 7.0).collect();
        let a = CoefficientMatrix::new(n, 3, data).unwrap();
        let x = eval_decoupled(&a, &caps()).unwrap();
        let direct = x.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((sup_norm_decoupled(&a, &caps()).unwrap() - direct).abs() < 1e-9);

        let mut b = CoefficientMatrix::new(n, n, (0..n * n).map(|p| ((p * 13 % 17) as f64 - 8.0) / 3.0).collect()).unwrap();
        b.set(0, 0, 2.5);
        let direct = brute_undecoupled(&b);
        assert!((sup_norm_undecoupled(&b, &caps()).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn caps_enforced() {
        let tight = Caps {
            sup_rows: 3,
            axis_bits: 3,
            ..Caps::default()
        };
        let a = CoefficientMatrix::filled(4, 4, 0.5).unwrap();
        assert!(sup_norm_decoupled(&a, &tight).unwrap_err().is_resource_cap());
        assert!(sup_norm_undecoupled(&a, &tight).unwrap_err().is_resource_cap());
    }

    fn matrix(max_n: usize) -> impl Strategy<Value = CoefficientMatrix> {
        (1..=max_n, 1..=max_n).prop_flat_map(|(n, m)| {
            prop::collection::vec(-5.0f64..5.0, n * m)
                .prop_map(move |d| CoefficientMatrix::new(n, m, d).unwrap())
        })
    }

    fn square(max_n: usize) -> impl Strategy<Value = CoefficientMatrix> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec(-5.0f64..5.0, n * n)
                .prop_map(move |d| CoefficientMatrix::new(n, n, d).unwrap())
        })
    }

    fn sign_matrix(n: usize) -> impl Strategy<Value = SignMatrix> {
        prop::collection::vec(prop::bool::ANY, n * n)
            .prop_map(move |b| SignMatrix::new(n, n, b.into_iter().map(|x| if x { 1 } else { -1 }).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn reduction_matches_brute_force(a in matrix(4)) {
            let fast = sup_norm_decoupled(&a, &Caps::default()).unwrap();
            prop_assert!((fast - brute_decoupled(&a)).abs() <= 1e-12);
        }

        #[test]
        fn undecoupled_matches_brute_force(a in square(5)) {
            let fast = sup_norm_undecoupled(&a, &Caps::default()).unwrap();
            prop_assert!((fast - brute_undecoupled(&a)).abs() <= 1e-12);
        }

        #[test]
        fn flip_and_permutation_invariance(theta in (2usize..=8).prop_flat_map(sign_matrix), row in 0usize..8, col in 0usize..8, shift in 1usize..8) {
            let n = theta.rows();
            let base = sup_norm_signs(&theta, &Caps::default()).unwrap();
            let (row, col) = (row % n, col % n);
            let mut flipped = theta.data().to_vec();
            for j in 0..n { flipped[row * n + j] *= -1; }
            for i in 0..n { flipped[i * n + col] *= -1; }
            let flipped = SignMatrix::new(n, n, flipped).unwrap();
            prop_assert_eq!(sup_norm_signs(&flipped, &Caps::default()).unwrap(), base);
            // cyclic shift of rows and of columns
            let permuted: Vec<i8> = (0..n * n)
                .map(|p| theta.get((p / n + shift) % n, (p % n + 2 * shift) % n))
                .collect();
            let permuted = SignMatrix::new(n, n, permuted).unwrap();
            prop_assert_eq!(sup_norm_signs(&permuted, &Caps::default()).unwrap(), base);
        }
    }
}
