//! Rademacher and Walsh functions on dyadic cells, dyadic addition, and the
//! finite sign-vector sample spaces that every other module enumerates.
//!
//! Indexing follows `r_k(t) = sign sin(2^{k-1} pi t)`: `r_1` is identically
//! `+1` on `(0, 1)` and, for `k >= 2`, `r_k` is `+1` or `-1` according to the
//! binary digit `k - 1` of `t`. All evaluation happens on open dyadic cells,
//! never at breakpoints.
//!
//! Walsh functions use the 1-based recursion `w_1 = 1`,
//! `w_{2^i + j} = r_{i+2} w_j` for `j = 1..=2^i`. Written in terms of binary
//! digits this is the Paley ordering shifted by one: `w_j` is the product of
//! the digit signs selected by the set bits of `j - 1`.
//!
//! The sample spaces `{+-1}^n` are stored densely. A sign vector is a bitmask
//! where bit `i - 1` set means coordinate `i` equals `-1`; coordinate `i` of
//! the sign vector of a generation-`n` cell is the sign of its binary digit
//! `i`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::{self, Caps};
use crate::error::{ChaosError, Result};

/// Open dyadic cell `(k 2^{-m}, (k + 1) 2^{-m})`, stored as the cell index `k`
/// (its binary digits, most significant first) and the precision `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicPoint {
    index: u64,
    precision: u32,
}

impl DyadicPoint {
    pub const MAX_PRECISION: u32 = 63;

    /// Cell number `index` of generation `precision`.
    pub fn from_cell(index: u64, precision: u32) -> Result<Self> {
        if precision > Self::MAX_PRECISION {
            return Err(ChaosError::InvalidArgument(format!(
                "precision {precision} exceeds {}",
                Self::MAX_PRECISION
            )));
        }
        if precision < 64 && index >> precision != 0 {
            return Err(ChaosError::InvalidArgument(format!(
                "cell index {index} out of range for precision {precision}"
            )));
        }
        Ok(DyadicPoint { index, precision })
    }

    /// Digits `s_1 .. s_m`, most significant first.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let precision = u32::try_from(bits.len())
            .ok()
            .filter(|&p| p <= Self::MAX_PRECISION)
            .ok_or_else(|| ChaosError::InvalidArgument("too many digits".into()))?;
        let mut index = 0u64;
        for (pos, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(ChaosError::InvalidArgument(format!(
                    "digit {} is {b}, expected 0 or 1",
                    pos + 1
                )));
            }
            index = (index << 1) | u64::from(b);
        }
        Ok(DyadicPoint { index, precision })
    }

    /// The generation-`precision` cell containing `t`. Fails at breakpoints
    /// and outside `(0, 1)`.
    pub fn containing(t: f64, precision: u32) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(ChaosError::InvalidArgument(format!("{t} is not in (0, 1)")));
        }
        let scaled = t * (precision as f64).exp2();
        if scaled.fract() == 0.0 {
            return Err(ChaosError::InvalidArgument(format!(
                "{t} is a dyadic breakpoint of generation {precision}"
            )));
        }
        Self::from_cell(scaled.floor() as u64, precision)
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Binary digit `s_k` (1-based).
    pub fn bit(&self, k: u32) -> Result<u8> {
        if k == 0 || k > self.precision {
            return Err(ChaosError::InsufficientPrecision {
                needed: k,
                available: self.precision,
            });
        }
        Ok(((self.index >> (self.precision - k)) & 1) as u8)
    }

    pub fn left(&self) -> f64 {
        self.index as f64 * (-(self.precision as f64)).exp2()
    }

    pub fn midpoint(&self) -> f64 {
        (self.index as f64 + 0.5) * (-(self.precision as f64)).exp2()
    }

    /// Sign vector of the first `n` digits: coordinate `i` is `-1` iff `s_i = 1`.
    pub fn sign_vector(&self, n: u32) -> Result<SignVector> {
        if n > self.precision {
            return Err(ChaosError::InsufficientPrecision {
                needed: n,
                available: self.precision,
            });
        }
        let top = self.index >> (self.precision - n);
        let mut mask = 0u64;
        for i in 0..n {
            if (top >> (n - 1 - i)) & 1 == 1 {
                mask |= 1 << i;
            }
        }
        SignVector::from_mask(mask, n)
    }
}

/// `r_k` on the cell `p`.
pub fn rademacher(k: u32, p: &DyadicPoint) -> Result<i8> {
    match k {
        0 => Err(ChaosError::InvalidArgument("Rademacher index starts at 1".into())),
        1 => Ok(1),
        _ => {
            let digit = p.bit(k - 1).map_err(|_| ChaosError::InsufficientPrecision {
                needed: k - 1,
                available: p.precision(),
            })?;
            Ok(if digit == 0 { 1 } else { -1 })
        }
    }
}

/// `w_j` on the cell `p` (1-based, `w_1 = 1`).
pub fn walsh(j: u64, p: &DyadicPoint) -> Result<i8> {
    if j == 0 {
        return Err(ChaosError::InvalidArgument("Walsh index starts at 1".into()));
    }
    let mut rest = j - 1;
    let mut value = 1i8;
    while rest != 0 {
        let i = rest.trailing_zeros();
        value *= rademacher(i + 2, p)?;
        rest &= rest - 1;
    }
    Ok(value)
}

/// Digit-wise addition modulo 2.
pub fn dyadic_add(s: &DyadicPoint, u: &DyadicPoint) -> Result<DyadicPoint> {
    if s.precision != u.precision {
        return Err(ChaosError::PrecisionMismatch {
            left: s.precision,
            right: u.precision,
        });
    }
    Ok(DyadicPoint {
        index: s.index ^ u.index,
        precision: s.precision,
    })
}

/// A point of `{+-1}^n`; bit `i - 1` of the mask set means coordinate `i` is `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignVector {
    mask: u64,
    len: u32,
}

impl SignVector {
    pub fn from_mask(mask: u64, len: u32) -> Result<Self> {
        if len == 0 || len > 64 || (len < 64 && mask >> len != 0) {
            return Err(ChaosError::InvalidArgument(format!(
                "mask {mask:#x} does not fit a sign vector of length {len}"
            )));
        }
        Ok(SignVector { mask, len })
    }

    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        let mut mask = 0u64;
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => mask |= 1 << i,
                _ => {
                    return Err(ChaosError::InvalidArgument(format!(
                        "coordinate {} is {s}, expected +1 or -1",
                        i + 1
                    )))
                }
            }
        }
        Self::from_mask(mask, signs.len() as u32)
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate `i` (1-based).
    pub fn get(&self, i: u32) -> i8 {
        debug_assert!(i >= 1 && i <= self.len);
        sign_of(self.mask, (i - 1) as usize)
    }

    pub fn to_signs(&self) -> Vec<i8> {
        (1..=self.len).map(|i| self.get(i)).collect()
    }
}

#[inline]
pub(crate) fn sign_of(mask: u64, bit: usize) -> i8 {
    if (mask >> bit) & 1 == 1 {
        -1
    } else {
        1
    }
}

#[inline]
pub(crate) fn signf(mask: u64, bit: usize) -> f64 {
    if (mask >> bit) & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// A function of `n` independent signs, stored as one value per sign vector.
/// Each sign vector carries weight `2^{-n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction1D {
    n: u32,
    values: Vec<f64>,
}

impl StepFunction1D {
    pub fn new(n: u32, values: Vec<f64>) -> Result<Self> {
        if n >= 64 || values.len() as u64 != 1u64 << n {
            return Err(ChaosError::DimensionMismatch {
                expected: format!("2^{n} values"),
                got: values.len().to_string(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(ChaosError::InvalidArgument(format!("non-finite value {v}")));
        }
        Ok(StepFunction1D { n, values })
    }

    pub fn constant(n: u32, value: f64) -> Result<Self> {
        Self::new(n, vec![value; 1usize << n])
    }

    pub fn generation(&self) -> u32 {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weight(&self) -> f64 {
        (-(self.n as f64)).exp2()
    }

    pub fn total_weight(&self) -> f64 {
        self.values.len() as f64 * self.weight()
    }

    pub fn at(&self, eps: &SignVector) -> f64 {
        self.values[eps.mask() as usize]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        StepFunction1D {
            n: self.n,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// A function of two independent sign vectors `(eps, delta)` of lengths `n`
/// and `m`, stored at index `eps_mask | delta_mask << n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction2D {
    n: u32,
    m: u32,
    values: Vec<f64>,
}

impl StepFunction2D {
    pub fn new(n: u32, m: u32, values: Vec<f64>) -> Result<Self> {
        if n + m >= 64 || values.len() as u64 != 1u64 << (n + m) {
            return Err(ChaosError::DimensionMismatch {
                expected: format!("2^{} values", n + m),
                got: values.len().to_string(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(ChaosError::InvalidArgument(format!("non-finite value {v}")));
        }
        Ok(StepFunction2D { n, m, values })
    }

    pub fn constant(n: u32, m: u32, value: f64) -> Result<Self> {
        Self::new(n, m, vec![value; 1usize << (n + m)])
    }

    pub fn generations(&self) -> (u32, u32) {
        (self.n, self.m)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weight(&self) -> f64 {
        (-((self.n + self.m) as f64)).exp2()
    }

    pub fn total_weight(&self) -> f64 {
        self.values.len() as f64 * self.weight()
    }

    pub fn at(&self, eps: &SignVector, delta: &SignVector) -> f64 {
        self.values[(eps.mask() | delta.mask() << self.n) as usize]
    }

    /// Pointwise sum; both operands must live on the same sample space.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.n, self.m) != (other.n, other.m) {
            return Err(ChaosError::DimensionMismatch {
                expected: format!("{}x{}", self.n, self.m),
                got: format!("{}x{}", other.n, other.m),
            });
        }
        Ok(StepFunction2D {
            n: self.n,
            m: self.m,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        StepFunction2D {
            n: self.n,
            m: self.m,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Values of `sum_i c_i eps_i` for every sign vector, built by doubling:
/// flipping coordinate `i` subtracts `2 c_i`.
pub(crate) fn linear_form_table(coeffs: &[f64]) -> Vec<f64> {
    let mut table = Vec::with_capacity(1usize << coeffs.len());
    table.push(coeffs.iter().sum::<f64>());
    for &c in coeffs {
        let len = table.len();
        for idx in 0..len {
            let v = table[idx] - 2.0 * c;
            table.push(v);
        }
    }
    table
}

/// `sum_i c_i r_i` on `{+-1}^n`.
pub fn materialize_1d(coeffs: &[f64], caps: &Caps) -> Result<StepFunction1D> {
    if coeffs.is_empty() {
        return Err(ChaosError::InvalidArgument("need at least one coefficient".into()));
    }
    caps::check("materialize_1d", coeffs.len() as u32, caps.axis_bits)?;
    StepFunction1D::new(coeffs.len() as u32, linear_form_table(coeffs))
}

/// Splits `0..total` into fixed-size blocks whose boundaries depend only on
/// `total`, so reductions over them do not depend on the thread count.
pub(crate) fn blocks(total: u64, block_bits: u32) -> impl ParallelIterator<Item = (u64, u64)> {
    let size = 1u64 << block_bits;
    let count = total.div_ceil(size);
    (0..count).into_par_iter().map(move |b| {
        let start = b * size;
        (start, (start + size).min(total))
    })
}
