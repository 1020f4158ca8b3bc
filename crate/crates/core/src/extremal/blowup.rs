//! Block construction showing that sign changes of chaos coefficients can
//! carry a bounded function outside the Marcinkiewicz space `M(phi_eps)`.
//!
//! Block `k` lives on the index window `(2^k, 2^{k+1}]` in both variables.
//! Its signs come from the Walsh arrangement, so
//! `z_k = sum theta_ij r_i(s) r_j(t)` has `||z_k||_inf <= 2^{3k/2}`, and
//! `x = sum_k 2^{-(3+eps)k/2} z_k` is bounded. Applying the same signs again
//! turns every block into the all-ones block `y_k`, which equals `2^{2k}` on
//! a corner square; the partial sums of `y = T_theta x` then grow in the
//! `phi_eps` quasi-norm.

use serde::{Deserialize, Serialize};

use super::{sup_norm_signs, walsh_sign_arrangement};
use crate::caps::Caps;
use crate::chaos::{apply_signs, eval_decoupled, reindex, CoefficientMatrix, SignMatrix};
use crate::error::{ChaosError, Result};
use crate::rearrange::rearrangement;
use crate::spaces::{marcinkiewicz_norm, phi_eps, quasinorm_phi_eps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessMode {
    /// Exact rearrangements of every block and partial sum; blocks `k <= 2`.
    Full,
    /// Corner values and block sup norms only; blocks `k <= 4`.
    Corner,
}

impl WitnessMode {
    pub fn max_block(&self) -> u32 {
        match self {
            WitnessMode::Full => 2,
            WitnessMode::Corner => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub k: u32,
    /// 1-based index window `(first, last)`.
    pub window: (usize, usize),
    /// `2^{-(3+eps)k/2}`.
    pub coefficient: f64,
    pub z_sup: f64,
    pub z_bound: f64,
    /// `z_sup / 2^{3k/2}`.
    pub z_constant: f64,
    /// `y_k` at the all-plus pair of sign vectors.
    pub corner_value: f64,
    /// `2^{-2^{k+2}+1}`.
    pub u_k: f64,
    pub y_star_at_u_k: Option<f64>,
    /// Quasi-norm of `sum_{l <= k} 2^{-(3+eps)l/2} y_l`.
    pub partial_quasinorm: Option<f64>,
    /// Grid value of the `M(phi_eps)` norm of the same partial sum.
    pub partial_marcinkiewicz: Option<f64>,
    /// `2^{eps k/2 - 1}`.
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem7Report {
    pub eps: f64,
    pub max_block: u32,
    pub mode: WitnessMode,
    pub blocks: Vec<BlockReport>,
    /// `||x||_inf` of the partial sum up to `max_block`: the blocks use
    /// disjoint variables, so the block sup norms add.
    pub x_sup: f64,
    /// `sup_k z_constant * 2^{eps/2} / (2^{eps/2} - 1)`, bounding `||x||_inf`
    /// for every number of blocks.
    pub x_sup_bound: f64,
}

/// 0-based indices of block `k`.
fn window(k: u32) -> Vec<usize> {
    ((1usize << k)..(1usize << (k + 1))).collect()
}

pub fn theorem7_witness(eps: f64, max_block: u32, mode: WitnessMode, caps: &Caps) -> Result<Theorem7Report> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(ChaosError::InvalidArgument(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    crate::caps::check("witness blocks", max_block, mode.max_block())?;

    let size = 1usize << (max_block + 1);
    let mut x_full = CoefficientMatrix::zeros(size, size)?;
    let mut theta_full = vec![1i8; size * size];
    let mut blocks = Vec::new();
    let mut y_blocks = Vec::new();
    let mut x_sup = 0.0;
    let mut worst_constant: f64 = 0.0;

    for k in 0..=max_block {
        let theta = walsh_sign_arrangement(k)?;
        let coefficient = (-(3.0 + eps) * k as f64 / 2.0).exp2();
        let x_k = theta.to_coefficients().scale(coefficient);
        // T_theta on the unit-coefficient block; entries are exactly +1.
        let y_k = apply_signs(&theta.to_coefficients(), &theta)?;
        let idx = window(k);
        let placed = reindex(&x_k, &idx, &idx, size, size)?;
        for &i in &idx {
            for &j in &idx {
                x_full.set(i, j, placed.get(i, j));
                theta_full[i * size + j] = theta.get(i - idx[0], j - idx[0]);
            }
        }

        let z_sup = sup_norm_signs(&theta, caps)? as f64;
        let z_bound = (1.5 * k as f64).exp2();
        worst_constant = worst_constant.max(z_sup / z_bound);
        x_sup += coefficient * z_sup;
        y_blocks.push(reindex(&y_k, &idx, &idx, size, size)?);

        blocks.push(BlockReport {
            k,
            window: (idx[0] + 1, idx[idx.len() - 1] + 1),
            coefficient,
            z_sup,
            z_bound,
            z_constant: z_sup / z_bound,
            corner_value: y_k.bilinear(0, 0),
            u_k: (1.0 - (1u64 << (k + 2)) as f64).exp2(),
            y_star_at_u_k: None,
            partial_quasinorm: None,
            partial_marcinkiewicz: None,
            lower_bound: (eps * k as f64 / 2.0 - 1.0).exp2(),
        });
    }

    if mode == WitnessMode::Full {
        let theta_full = SignMatrix::new(size, size, theta_full)?;
        let y_full = apply_signs(&x_full, &theta_full)?;
        let phi = phi_eps(eps);
        for (k, block) in blocks.iter_mut().enumerate() {
            let yk = rearrangement(&eval_decoupled(&y_blocks[k], caps)?);
            block.y_star_at_u_k = Some(yk.value_at(block.u_k));

            let mut partial = y_full.clone();
            for i in (1usize << (k + 1))..size {
                for j in 0..size {
                    partial.set(i, j, 0.0);
                    partial.set(j, i, 0.0);
                }
            }
            let r = rearrangement(&eval_decoupled(&partial, caps)?);
            block.partial_quasinorm = Some(quasinorm_phi_eps(&r, eps)?);
            block.partial_marcinkiewicz = Some(marcinkiewicz_norm(&r, &phi).value);
        }
    }

    let growth = (eps / 2.0).exp2();
    Ok(Theorem7Report {
        eps,
        max_block,
        mode,
        blocks,
        x_sup,
        x_sup_bound: worst_constant * growth / (growth - 1.0),
    })
}
