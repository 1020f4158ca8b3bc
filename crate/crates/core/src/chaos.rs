//! Degree-2 chaos polynomials: decoupled `sum a_ij r_i(s) r_j(t)` on the
//! square and undecoupled `sum_{i != j} b_ij r_i(t) r_j(t)` on the interval.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::{self, Caps};
use crate::dyadic::{linear_form_table, signf, StepFunction1D, StepFunction2D};
use crate::error::{ChaosError, Result};

/// Dense real matrix, row-major. Row `i` (0-based) multiplies `r_{i+1}` of the
/// first variable, column `j` multiplies `r_{j+1}` of the second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CoefficientMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(ChaosError::DimensionMismatch {
                expected: format!("{rows}x{cols} non-empty"),
                got: format!("{} entries", data.len()),
            });
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(ChaosError::InvalidArgument(format!("non-finite entry {v}")));
        }
        Ok(CoefficientMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(ChaosError::DimensionMismatch {
                expected: format!("{cols} columns"),
                got: bad.len().to_string(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Entry `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.get(i, j);
            }
        }
        CoefficientMatrix {
            rows: self.cols,
            cols: self.rows,
            data: out,
        }
    }

    /// Euclidean norm of the coefficient array.
    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        CoefficientMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Bilinear form `eps^T A delta` at one pair of sign masks.
    pub fn bilinear(&self, eps_mask: u64, delta_mask: u64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.rows {
            let mut row = 0.0;
            for j in 0..self.cols {
                row += self.get(i, j) * signf(delta_mask, j);
            }
            total += signf(eps_mask, i) * row;
        }
        total
    }

    /// Entries are all exactly `+1` or `-1`.
    pub fn is_sign_matrix(&self) -> bool {
        self.data.iter().all(|&v| v == 1.0 || v == -1.0)
    }

    fn require_zero_diagonal(&self) -> Result<()> {
        if !self.is_square() {
            return Err(ChaosError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        for i in 0..self.rows {
            let v = self.get(i, i);
            if v != 0.0 {
                return Err(ChaosError::NonzeroDiagonal { index: i + 1, value: v });
            }
        }
        Ok(())
    }
}

/// Matrix of signs `theta_ij`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i8>,
    symmetric: bool,
}

impl SignMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i8>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(ChaosError::DimensionMismatch {
                expected: format!("{rows}x{cols} non-empty"),
                got: format!("{} entries", data.len()),
            });
        }
        if let Some(pos) = data.iter().position(|&v| v != 1 && v != -1) {
            return Err(ChaosError::NotASign {
                row: pos / cols + 1,
                col: pos % cols + 1,
                value: f64::from(data[pos]),
            });
        }
        Ok(SignMatrix {
            rows,
            cols,
            data,
            symmetric: false,
        })
    }

    /// Builds a symmetric sign matrix; fails if `theta_ij != theta_ji` anywhere.
    pub fn new_symmetric(n: usize, data: Vec<i8>) -> Result<Self> {
        let mut m = Self::new(n, n, data)?;
        for i in 0..n {
            for j in 0..i {
                if m.get(i, j) != m.get(j, i) {
                    return Err(ChaosError::InvalidArgument(format!(
                        "not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        m.symmetric = true;
        Ok(m)
    }

    pub fn filled(rows: usize, cols: usize, sign: i8) -> Result<Self> {
        Self::new(rows, cols, vec![sign; rows * cols])
    }

    pub fn from_coefficients(a: &CoefficientMatrix) -> Result<Self> {
        let mut data = Vec::with_capacity(a.data().len());
        for (pos, &v) in a.data().iter().enumerate() {
            if v == 1.0 {
                data.push(1);
            } else if v == -1.0 {
                data.push(-1);
            } else {
                return Err(ChaosError::NotASign {
                    row: pos / a.cols() + 1,
                    col: pos % a.cols() + 1,
                    value: v,
                });
            }
        }
        Self::new(a.rows(), a.cols(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[i8] {
        &self.data
    }

    pub fn to_coefficients(&self) -> CoefficientMatrix {
        CoefficientMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f64::from(v)).collect(),
        }
    }

    /// One mask per column; bit `i` is set where `theta_{i+1, j+1} = -1`.
    pub fn column_masks(&self) -> Vec<u64> {
        (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .filter(|&i| self.get(i, j) == -1)
                    .fold(0u64, |m, i| m | 1 << i)
            })
            .collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i8>> {
        self.data.chunks(self.cols).map(<[i8]>::to_vec).collect()
    }
}

fn check_axes(rows: usize, cols: usize, caps: &Caps) -> Result<()> {
    caps::check("sign vectors (rows)", rows as u32, caps.axis_bits)?;
    caps::check("sign vectors (columns)", cols as u32, caps.axis_bits)?;
    caps::check("sign-vector pairs", (rows + cols) as u32, caps.total_bits)
}

/// `x(eps, delta) = sum_ij a_ij eps_i delta_j` over `{+-1}^n x {+-1}^m`.
pub fn eval_decoupled(a: &CoefficientMatrix, caps: &Caps) -> Result<StepFunction2D> {
    let (n, m) = (a.rows(), a.cols());
    check_axes(n, m, caps)?;
    let eps_count = 1usize << n;
    let mut values = vec![0.0; eps_count << m];
    values
        .par_chunks_mut(eps_count)
        .enumerate()
        .for_each(|(delta, out)| {
            // c = A delta, then every eps at once.
            let c: Vec<f64> = (0..n)
                .map(|i| (0..m).map(|j| a.get(i, j) * signf(delta as u64, j)).sum())
                .collect();
            out.copy_from_slice(&linear_form_table(&c));
        });
    StepFunction2D::new(n as u32, m as u32, values)
}

/// Quadratic form `eps^T B eps` (diagonal included) at one sign mask.
pub(crate) fn quadratic(b: &CoefficientMatrix, mask: u64) -> f64 {
    let n = b.rows();
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += b.get(i, j) * signf(mask, j);
        }
        total += signf(mask, i) * row;
    }
    total
}

/// `y(eps) = sum_{i != j} b_ij eps_i eps_j`; `b` must be square with a zero diagonal.
pub fn eval_undecoupled(b: &CoefficientMatrix, caps: &Caps) -> Result<StepFunction1D> {
    b.require_zero_diagonal()?;
    let n = b.rows();
    caps::check("sign vectors", n as u32, caps.axis_bits)?;
    let values = (0..1u64 << n)
        .into_par_iter()
        .map(|mask| quadratic(b, mask))
        .collect();
    StepFunction1D::new(n as u32, values)
}

/// Right-hand side of the decoupling identity,
/// `2^{1-N} sum_{D subset {1..N}} sum_{i in D, j not in D} a_ij r_i r_j`
/// with `a_ij = b_ij + b_ji`, summed literally over all `2^N` subsets.
pub fn decouple_identity_rhs(b: &CoefficientMatrix, big_n: usize, caps: &Caps) -> Result<StepFunction1D> {
    b.require_zero_diagonal()?;
    let n = b.rows();
    if big_n != n {
        return Err(ChaosError::DimensionMismatch {
            expected: format!("N = {n}"),
            got: big_n.to_string(),
        });
    }
    caps::check("subsets", n as u32, caps.subset_bits)?;
    caps::check("sign vectors", n as u32, caps.axis_bits)?;
    let sym: Vec<f64> = (0..n * n)
        .map(|p| {
            let (i, j) = (p / n, p % n);
            b.get(i, j) + b.get(j, i)
        })
        .collect();
    let outer = (1.0 - n as f64).exp2();
    let values = (0..1u64 << n)
        .into_par_iter()
        .map(|eps| {
            let mut total = 0.0;
            for subset in 0..1u64 << n {
                let mut inner = 0.0;
                for i in (0..n).filter(|&i| subset >> i & 1 == 1) {
                    for j in (0..n).filter(|&j| subset >> j & 1 == 0) {
                        inner += sym[i * n + j] * signf(eps, i) * signf(eps, j);
                    }
                }
                total += inner;
            }
            outer * total
        })
        .collect();
    StepFunction1D::new(n as u32, values)
}

/// Entrywise `theta_ij a_ij`.
pub fn apply_signs(a: &CoefficientMatrix, theta: &SignMatrix) -> Result<CoefficientMatrix> {
    if (a.rows(), a.cols()) != (theta.rows(), theta.cols()) {
        return Err(ChaosError::DimensionMismatch {
            expected: format!("{}x{}", a.rows(), a.cols()),
            got: format!("{}x{}", theta.rows(), theta.cols()),
        });
    }
    let data = a
        .data()
        .iter()
        .zip(theta.data())
        .map(|(&v, &s)| v * f64::from(s))
        .collect();
    CoefficientMatrix::new(a.rows(), a.cols(), data)
}

/// Projection coefficients `a_ij(x) = E[x(eps, delta) eps_i delta_j]` for
/// `i <= n`, `j <= m`.
pub fn chaos_coefficients(x: &StepFunction2D, n: usize, m: usize) -> Result<CoefficientMatrix> {
    let (gn, gm) = x.generations();
    if n == 0 || m == 0 || n > gn as usize || m > gm as usize {
        return Err(ChaosError::InvalidArgument(format!(
            "generation too small: function has {gn}x{gm}, asked for {n}x{m}"
        )));
    }
    let eps_bits = gn as usize;
    let weight = x.weight();
    let data = (0..n * m)
        .into_par_iter()
        .map(|p| {
            let (i, j) = (p / m, p % m);
            x.values()
                .iter()
                .enumerate()
                .map(|(idx, &v)| {
                    let idx = idx as u64;
                    v * signf(idx, i) * signf(idx >> eps_bits, j)
                })
                .sum::<f64>()
                * weight
        })
        .collect();
    CoefficientMatrix::new(n, m, data)
}

/// `b` of size `2n x 2n` with `b_{i, j+n} = a_ij`: the undecoupled polynomial
/// `sum a_ij r_i(t) r_{j+n}(t)` uses disjoint index blocks and is
/// equimeasurable with the decoupled one.
pub fn shift_map(a: &CoefficientMatrix, n: usize) -> Result<CoefficientMatrix> {
    if a.rows() != n || a.cols() != n {
        return Err(ChaosError::DimensionMismatch {
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    let mut b = CoefficientMatrix::zeros(2 * n, 2 * n)?;
    for i in 0..n {
        for j in 0..n {
            b.set(i, j + n, a.get(i, j));
        }
    }
    Ok(b)
}

/// Places `a` at rows `row_index` and columns `col_index` (0-based, distinct)
/// of a zero `rows x cols` matrix.
pub fn reindex(
    a: &CoefficientMatrix,
    row_index: &[usize],
    col_index: &[usize],
    rows: usize,
    cols: usize,
) -> Result<CoefficientMatrix> {
    if row_index.len() != a.rows() || col_index.len() != a.cols() {
        return Err(ChaosError::DimensionMismatch {
            expected: format!("{}x{} index lists", a.rows(), a.cols()),
            got: format!("{}x{}", row_index.len(), col_index.len()),
        });
    }
    let distinct = |idx: &[usize], bound: usize| {
        let mut seen = vec![false; bound];
        idx.iter().all(|&k| k < bound && !std::mem::replace(&mut seen[k], true))
    };
    if !distinct(row_index, rows) || !distinct(col_index, cols) {
        return Err(ChaosError::InvalidArgument(
            "index lists must be distinct and in range".into(),
        ));
    }
    let mut out = CoefficientMatrix::zeros(rows, cols)?;
    for (i, &ri) in row_index.iter().enumerate() {
        for (j, &cj) in col_index.iter().enumerate() {
            out.set(ri, cj, a.get(i, j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> Caps {
        Caps::default()
    }

    fn m(rows: &[&[f64]]) -> CoefficientMatrix {
        CoefficientMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn sorted(v: &[f64]) -> Vec<f64> {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn decoupled_examples() {
        let x = eval_decoupled(&m(&[&[1.0]]), &caps()).unwrap();
        assert_eq!(sorted(x.values()), vec![-1.0, -1.0, 1.0, 1.0]);

        let x = eval_decoupled(&CoefficientMatrix::filled(2, 2, 1.0).unwrap(), &caps()).unwrap();
        assert_eq!(x.values()[0], 4.0);

        let x = eval_decoupled(&m(&[&[1.0, 0.0], &[0.0, 1.0]]), &caps()).unwrap();
        let v = sorted(x.values());
        assert_eq!(v.iter().filter(|&&a| a == 2.0).count(), 4);
        assert_eq!(v.iter().filter(|&&a| a == 0.0).count(), 8);
        assert_eq!(v.iter().filter(|&&a| a == -2.0).count(), 4);
    }

    #[test]
    fn decoupled_matches_bilinear_pointwise() {
        let a = m(&[&[0.5, -1.25, 3.0], &[2.0, 0.0, -0.75]]);
        let x = eval_decoupled(&a, &caps()).unwrap();
        for eps in 0..4u64 {
            for delta in 0..8u64 {
                let v = x.values()[(eps | delta << 2) as usize];
                assert!((v - a.bilinear(eps, delta)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn undecoupled_examples() {
        let mut b = CoefficientMatrix::zeros(2, 2).unwrap();
        b.set(0, 1, 1.0);
        let y = eval_undecoupled(&b, &caps()).unwrap();
        assert_eq!(sorted(y.values()), vec![-1.0, -1.0, 1.0, 1.0]);

        let half = m(&[&[0.0, 0.5], &[0.5, 0.0]]);
        assert_eq!(eval_undecoupled(&half, &caps()).unwrap(), y);

        let mut ones = CoefficientMatrix::filled(3, 3, 1.0).unwrap();
        for i in 0..3 {
            ones.set(i, i, 0.0);
        }
        let y = eval_undecoupled(&ones, &caps()).unwrap();
        assert_eq!(y.values().iter().filter(|&&v| v == 6.0).count(), 2);
        assert_eq!(y.values().iter().filter(|&&v| v == -2.0).count(), 6);
    }

    #[test]
    fn undecoupled_rejects_diagonal() {
        let err = eval_undecoupled(&CoefficientMatrix::filled(2, 2, 1.0).unwrap(), &caps()).unwrap_err();
        assert!(err.to_string().contains("diagonal must vanish"));
        assert!(matches!(
            eval_undecoupled(&CoefficientMatrix::zeros(2, 3).unwrap(), &caps()),
            Err(ChaosError::NotSquare { .. })
        ));
    }

    #[test]
    fn decoupling_identity_small() {
        let mut b = CoefficientMatrix::zeros(2, 2).unwrap();
        b.set(0, 1, 1.0);
        let lhs = eval_undecoupled(&b, &caps()).unwrap();
        let rhs = decouple_identity_rhs(&b, 2, &caps()).unwrap();
        assert_eq!(lhs, rhs);

        let zero = CoefficientMatrix::zeros(4, 4).unwrap();
        let rhs = decouple_identity_rhs(&zero, 4, &caps()).unwrap();
        assert!(rhs.values().iter().all(|&v| v == 0.0));

        let tight = Caps {
            subset_bits: 3,
            ..Caps::default()
        };
        assert!(decouple_identity_rhs(&zero, 4, &tight).unwrap_err().is_resource_cap());
    }

    #[test]
    fn apply_signs_examples() {
        let a = m(&[&[1.0, -2.0], &[0.5, 3.0]]);
        let plus = SignMatrix::filled(2, 2, 1).unwrap();
        assert_eq!(apply_signs(&a, &plus).unwrap(), a);
        let minus = SignMatrix::filled(2, 2, -1).unwrap();
        assert_eq!(apply_signs(&a, &minus).unwrap(), a.scale(-1.0));
        let theta = SignMatrix::new(2, 2, vec![1, -1, -1, 1]).unwrap();
        assert_eq!(apply_signs(&apply_signs(&a, &theta).unwrap(), &theta).unwrap(), a);
        assert!(apply_signs(&a, &SignMatrix::filled(2, 3, 1).unwrap()).is_err());
    }

    #[test]
    fn coefficients_recovered() {
        let a = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let x = eval_decoupled(&a, &caps()).unwrap();
        assert_eq!(chaos_coefficients(&x, 2, 2).unwrap(), a);

        let one = StepFunction2D::constant(2, 3, 1.0).unwrap();
        let c = chaos_coefficients(&one, 2, 3).unwrap();
        assert!(c.data().iter().all(|&v| v == 0.0));
        assert!(chaos_coefficients(&one, 3, 3).is_err());
    }

    #[test]
    fn shift_map_layout() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = shift_map(&a, 2).unwrap();
        assert_eq!(b.get(0, 2), 1.0);
        assert_eq!(b.get(1, 3), 4.0);
        assert_eq!(b.l1_norm(), a.l1_norm());
        assert!(shift_map(&a, 3).is_err());
    }

    #[test]
    fn sign_matrix_validation() {
        assert!(matches!(
            SignMatrix::new(1, 2, vec![1, 0]),
            Err(ChaosError::NotASign { row: 1, col: 2, .. })
        ));
        assert!(SignMatrix::new_symmetric(2, vec![1, -1, 1, 1]).is_err());
        let s = SignMatrix::new_symmetric(2, vec![1, -1, -1, 1]).unwrap();
        assert!(s.is_symmetric());
        assert_eq!(s.column_masks(), vec![0b10, 0b01]);
    }

    #[test]
    fn reindex_places_block() {
        let a = m(&[&[1.0, 2.0]]);
        let r = reindex(&a, &[2], &[0, 3], 3, 4).unwrap();
        assert_eq!(r.get(2, 0), 1.0);
        assert_eq!(r.get(2, 3), 2.0);
        assert_eq!(r.l1_norm(), 3.0);
        assert!(reindex(&a, &[1], &[0, 0], 3, 4).is_err());
    }
}
