//! Exact law of the normalized Rademacher sum `v_n = n^{-1/2} sum_{i<=n} r_i`
//! and its Kolmogorov distance to the Gaussian.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{ChaosError, Result};

pub const MAX_N: u32 = 120;

/// Atoms `(value, probability)` of `v_n`, increasing in value.
pub fn rademacher_sum_law(n: u32) -> Result<Vec<(f64, f64)>> {
    if n == 0 || n > MAX_N {
        return Err(ChaosError::InvalidArgument(format!("n must lie in 1..={MAX_N}, got {n}")));
    }
    let scale = (n as f64).sqrt();
    let total = (n as f64).exp2();
    let mut binom: u128 = 1;
    let mut out = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        // k coordinates equal to +1
        out.push(((2.0 * k as f64 - n as f64) / scale, binom as f64 / total));
        binom = binom * u128::from(n - k) / u128::from(k + 1);
    }
    Ok(out)
}

/// `Phi(z) = (2/sqrt(2 pi)) int_z^inf e^{-u^2/2} du`, the limit of `mu{|v_n| > z}`.
pub fn gaussian_two_sided_tail(z: f64) -> f64 {
    erfc(z / std::f64::consts::SQRT_2)
}

pub fn gaussian_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltDistance {
    pub n: u32,
    /// `sup_{z > 0} |mu{|v_n| > z} - Phi(z)|`.
    pub tail: f64,
    /// `sup_z |P(v_n <= z) - N(z)|`.
    pub cdf: f64,
}

pub fn kolmogorov_distance(n: u32) -> Result<CltDistance> {
    let law = rademacher_sum_law(n)?;

    // Law of |v_n| as increasing atoms.
    let mut abs: Vec<(f64, f64)> = Vec::new();
    for &(v, p) in &law {
        let a = v.abs();
        match abs.iter_mut().find(|(x, _)| (*x - a).abs() < 1e-12) {
            Some(slot) => slot.1 += p,
            None => abs.push((a, p)),
        }
    }
    abs.sort_by(|x, y| x.0.total_cmp(&y.0));

    // On [a_k, a_{k+1}) the tail of |v_n| is constant and Phi decreases, so
    // the endpoints bound the gap; before the first positive atom the tail is 1.
    let mut tail: f64 = 0.0;
    let mut above: f64 = 1.0;
    if abs[0].0 > 0.0 {
        tail = tail.max(1.0 - gaussian_two_sided_tail(abs[0].0));
    }
    for (k, &(a, p)) in abs.iter().enumerate() {
        above -= p;
        let above = above.max(0.0);
        let next = abs.get(k + 1).map_or(f64::INFINITY, |x| x.0);
        let left_phi = if a == 0.0 { 1.0 } else { gaussian_two_sided_tail(a) };
        tail = tail
            .max((above - left_phi).abs())
            .max((above - gaussian_two_sided_tail(next)).abs());
    }

    let mut cdf: f64 = 0.0;
    let mut below = 0.0;
    for &(v, p) in &law {
        let g = gaussian_cdf(v);
        cdf = cdf.max((below - g).abs());
        below += p;
        cdf = cdf.max((below - g).abs());
    }
    Ok(CltDistance { n, tail, cdf })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_sums_to_one() {
        for n in [1, 2, 7, 64, 120] {
            let law = rademacher_sum_law(n).unwrap();
            let total: f64 = law.iter().map(|x| x.1).sum();
            assert!((total - 1.0).abs() < 1e-14);
            let var: f64 = law.iter().map(|(v, p)| v * v * p).sum();
            assert!((var - 1.0).abs() < 1e-12);
        }
        let two = rademacher_sum_law(2).unwrap();
        let expected = [(-2f64.sqrt(), 0.25), (0.0, 0.5), (2f64.sqrt(), 0.25)];
        for (got, want) in two.iter().zip(expected) {
            assert!((got.0 - want.0).abs() < 1e-15 && got.1 == want.1);
        }
        assert!(rademacher_sum_law(0).is_err());
    }

    #[test]
    fn distance_at_64() {
        let d = kolmogorov_distance(64).unwrap();
        // frozen from an independent scipy evaluation; the gap is the atom at 0
        assert!((d.tail - 0.09934675374796686).abs() < 1e-12);
        assert!(d.tail <= 0.1);
        assert!(d.cdf < d.tail);
    }

    #[test]
    fn distance_one_coordinate() {
        // |v_1| = 1 surely: the worst gap is 1 - Phi(1) just below z = 1.
        let d = kolmogorov_distance(1).unwrap();
        assert!((d.tail - (1.0 - gaussian_two_sided_tail(1.0))).abs() < 1e-15);
    }

    #[test]
    fn distance_shrinks() {
        let d: Vec<f64> = [4, 16, 64].iter().map(|&n| kolmogorov_distance(n).unwrap().tail).collect();
        assert!(d[0] > d[1] && d[1] > d[2]);
    }
}
