//! Distribution functions `n_x(z) = mu{|x| > z}`, decreasing rearrangements
//! `x*`, equimeasurability, and the logarithmic distribution
//! `L(z) = mu{(s, t) : ln(e/s) ln(e/t) > z}`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dyadic::{StepFunction1D, StepFunction2D};
use crate::error::{ChaosError, Result};
use crate::quadrature::{adaptive_simpson, Quadrature};

/// Values closer than this are treated as one level.
pub const SNAP: f64 = 1e-12;

/// Anything that is a finite list of equally weighted values.
pub trait WeightedSample {
    fn sample_values(&self) -> &[f64];
    fn sample_weight(&self) -> f64;
}

impl WeightedSample for StepFunction1D {
    fn sample_values(&self) -> &[f64] {
        self.values()
    }
    fn sample_weight(&self) -> f64 {
        self.weight()
    }
}

impl WeightedSample for StepFunction2D {
    fn sample_values(&self) -> &[f64] {
        self.values()
    }
    fn sample_weight(&self) -> f64 {
        self.weight()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub value: f64,
    pub mass: f64,
}

/// Decreasing, left-continuous step function on `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rearrangement {
    steps: Vec<Step>,
}

impl Rearrangement {
    /// Validates strictly decreasing non-negative values, positive masses
    /// and total mass 1.
    pub fn from_steps(steps: Vec<Step>) -> Result<Self> {
        if steps.is_empty() {
            return Err(ChaosError::InvalidArgument("rearrangement needs a step".into()));
        }
        for w in steps.windows(2) {
            if !(w[0].value > w[1].value) {
                return Err(ChaosError::InvalidArgument(format!(
                    "values must strictly decrease ({} then {})",
                    w[0].value, w[1].value
                )));
            }
        }
        if let Some(s) = steps.iter().find(|s| !(s.mass > 0.0) || !(s.value >= 0.0) || !s.value.is_finite()) {
            return Err(ChaosError::InvalidArgument(format!("bad step {s:?}")));
        }
        let total: f64 = steps.iter().map(|s| s.mass).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(ChaosError::InvalidArgument(format!("masses sum to {total}, expected 1")));
        }
        Ok(Rearrangement { steps })
    }

    /// Rearrangement of `|v|` where every value carries `weight`.
    pub fn from_uniform(values: &[f64], weight: f64) -> Self {
        let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        abs.sort_unstable_by(|a, b| b.total_cmp(a));
        let mut steps: Vec<Step> = Vec::new();
        let mut count = 0usize;
        let mut level = f64::NAN;
        for v in abs {
            if count > 0 && level - v <= SNAP {
                count += 1;
                continue;
            }
            if count > 0 {
                steps.push(Step {
                    value: level,
                    mass: count as f64 * weight,
                });
            }
            level = v;
            count = 1;
        }
        if count > 0 {
            steps.push(Step {
                value: level,
                mass: count as f64 * weight,
            });
        }
        Rearrangement { steps }
    }

    pub fn of<S: WeightedSample + ?Sized>(x: &S) -> Self {
        Self::from_uniform(x.sample_values(), x.sample_weight())
    }

    /// Indicator of `(0, t)` scaled by `height`.
    pub fn indicator(t: f64, height: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) || !(height > 0.0) {
            return Err(ChaosError::InvalidArgument(format!(
                "indicator needs 0 < t <= 1 and height > 0, got t={t}, height={height}"
            )));
        }
        let mut steps = vec![Step { value: height, mass: t }];
        if t < 1.0 {
            steps.push(Step {
                value: 0.0,
                mass: 1.0 - t,
            });
        }
        Self::from_steps(steps)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Right endpoints `t_k` of the steps (the last is 1 up to rounding).
    pub fn breakpoints(&self) -> Vec<f64> {
        self.steps
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s.mass;
                Some(*acc)
            })
            .collect()
    }

    pub fn sup(&self) -> f64 {
        self.steps[0].value
    }

    pub fn is_zero(&self) -> bool {
        self.sup() == 0.0
    }

    /// `x*(t)` for `t` in `(0, 1]`, left-continuous.
    pub fn value_at(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for s in &self.steps {
            acc += s.mass;
            if t <= acc + 1e-15 {
                return s.value;
            }
        }
        self.steps.last().map_or(0.0, |s| s.value)
    }

    /// `int_0^t x*(s) ds`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut total = 0.0;
        for s in &self.steps {
            if t <= acc + s.mass {
                return total + s.value * (t - acc).max(0.0);
            }
            acc += s.mass;
            total += s.value * s.mass;
        }
        total
    }

    pub fn integral(&self) -> f64 {
        self.steps.iter().map(|s| s.value * s.mass).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        assert!(factor > 0.0);
        Rearrangement {
            steps: self
                .steps
                .iter()
                .map(|s| Step {
                    value: s.value * factor,
                    mass: s.mass,
                })
                .collect(),
        }
    }

    pub fn distribution(&self) -> Distribution {
        let mut above = 0.0;
        let thresholds = self
            .steps
            .iter()
            .map(|s| {
                let t = Threshold {
                    z: s.value,
                    measure_above: above,
                };
                above += s.mass;
                t
            })
            .collect();
        Distribution { thresholds }
    }

    /// Same levels (within [`SNAP`]) with the same masses.
    pub fn same_law(&self, other: &Self) -> bool {
        self.steps.len() == other.steps.len()
            && self
                .steps
                .iter()
                .zip(&other.steps)
                .all(|(a, b)| (a.value - b.value).abs() <= SNAP && (a.mass - b.mass).abs() <= 1e-15)
    }

    /// Two-column CSV: value, cumulative measure at the right end of the step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,cumulative_measure\n");
        for (s, t) in self.steps.iter().zip(self.breakpoints()) {
            let _ = writeln!(out, "{},{}", s.value, t);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub z: f64,
    pub measure_above: f64,
}

/// `n_x(z)` sampled at every level of `|x|`: at `z = level_k` the measure
/// of `{|x| > z}` is the mass of all strictly higher levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    thresholds: Vec<Threshold>,
}

impl Distribution {
    pub fn thresholds(&self) -> &[Threshold] {
        &self.thresholds
    }

    /// `mu{|x| > z}` for any `z >= 0`.
    pub fn measure_above(&self, z: f64) -> f64 {
        self.thresholds
            .iter()
            .find(|t| t.z <= z + SNAP)
            .map_or(1.0, |t| t.measure_above)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.thresholds.len() == other.thresholds.len()
            && self
                .thresholds
                .iter()
                .zip(&other.thresholds)
                .all(|(a, b)| (a.z - b.z).abs() <= SNAP && (a.measure_above - b.measure_above).abs() <= 1e-15)
    }
}

pub fn distribution<S: WeightedSample + ?Sized>(x: &S) -> Distribution {
    Rearrangement::of(x).distribution()
}

pub fn rearrangement<S: WeightedSample + ?Sized>(x: &S) -> Rearrangement {
    Rearrangement::of(x)
}

/// Exact distributions of `|x|` and `|y|` coincide.
pub fn equimeasurable<A, B>(x: &A, y: &B) -> bool
where
    A: WeightedSample + ?Sized,
    B: WeightedSample + ?Sized,
{
    distribution(x).same_as(&distribution(y))
}

fn check_z(z: f64) -> Result<()> {
    if !(z >= 1.0) || !z.is_finite() {
        return Err(ChaosError::InvalidArgument(format!("L(z) is defined here for z >= 1, got {z}")));
    }
    Ok(())
}

/// `L(z)` for `z >= 1`. Substituting `u = ln(e/s)`, the inner measure is
/// `min(1, e^{1 - z/u})`, so
/// `L(z) = e^2 int_1^z exp(-u - z/u) du + e^{1-z}`;
/// the integral is taken by adaptive Simpson at `rel_tol`.
pub fn log_distribution_l(z: f64, rel_tol: f64) -> Result<f64> {
    check_z(z)?;
    let e2 = std::f64::consts::E.powi(2);
    let q = adaptive_simpson(|u| (-u - z / u).exp(), 1.0, z, rel_tol)?;
    Ok(e2 * q.value + (1.0 - z).exp())
}

/// The unclipped form `e^2 int_1^inf exp(-u - z/u) du`, which bounds `L(z)`
/// from above. Integrated on `[1, z + 60]`; `tail_bound` is `e^2 e^{-U}` for
/// the cut-off `U = z + 60`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnclippedL {
    pub value: f64,
    pub quadrature: Quadrature,
    pub tail_bound: f64,
}

pub fn log_distribution_unclipped(z: f64, rel_tol: f64) -> Result<UnclippedL> {
    check_z(z)?;
    let e2 = std::f64::consts::E.powi(2);
    let upper = z + 60.0;
    let quadrature = adaptive_simpson(|u| (-u - z / u).exp(), 1.0, upper, rel_tol)?;
    Ok(UnclippedL {
        value: e2 * quadrature.value,
        quadrature,
        tail_bound: e2 * (-upper).exp(),
    })
}

/// Lower and upper bracket `(1/2) e^{-2 sqrt z + 2}`, `2 e^{-sqrt z + 2}`.
pub fn lemma2_bracket(z: f64) -> (f64, f64) {
    let r = z.sqrt();
    (0.5 * (2.0 - 2.0 * r).exp(), 2.0 * (2.0 - r).exp())
}
