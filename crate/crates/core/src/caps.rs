use serde::{Deserialize, Serialize};

use crate::error::{ChaosError, Result};

/// Size limits for every exhaustive enumeration in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Sign-vector bits per axis when materializing step functions.
    pub axis_bits: u32,
    /// Total bits (both axes) of a materialized two-variable step function.
    pub total_bits: u32,
    /// Largest N for the literal 2^N subset sum of the decoupling identity.
    pub subset_bits: u32,
    /// Largest row count for sup-norm scans (2^(n-1) sign vectors).
    pub sup_rows: u32,
    /// Largest n for exhaustive minimization over sign matrices.
    pub exhaustive_n: u32,
    /// Largest n for Monte-Carlo averaging of random sign matrices.
    pub monte_carlo_n: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            axis_bits: 24,
            total_bits: 26,
            subset_bits: 12,
            sup_rows: 30,
            exhaustive_n: 5,
            monte_carlo_n: 16,
        }
    }
}

pub(crate) fn check(what: &'static str, bits: u32, cap: u32) -> Result<()> {
    if bits > cap {
        Err(ChaosError::EnumerationTooLarge { what, bits, cap })
    } else {
        Ok(())
    }
}
