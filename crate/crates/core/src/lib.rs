//! Exact computations with degree-2 Rademacher chaos.
//!
//! Chaos polynomials in finitely many Rademacher functions are step
//! functions on the sign-vector spaces `{+-1}^n`, so their distributions,
//! rearrangements and norms are computed by full enumeration rather than
//! sampling. Sup norms use the closed-form inner maximum and popcount or
//! Gray-code kernels; Monte-Carlo is used only for averages over random sign
//! matrices, with a seeded counter-based generator.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod caps;
pub mod chaos;
pub mod clt;
pub mod dyadic;
pub mod error;
pub mod extremal;
pub mod io;
pub mod quadrature;
pub mod rearrange;
pub mod spaces;

pub use caps::Caps;
pub use chaos::{
    apply_signs, chaos_coefficients, decouple_identity_rhs, eval_decoupled, eval_undecoupled, reindex,
    shift_map, CoefficientMatrix, SignMatrix,
};
pub use dyadic::{
    dyadic_add, materialize_1d, rademacher, walsh, DyadicPoint, SignVector, StepFunction1D, StepFunction2D,
};
pub use error::{ChaosError, Result};
pub use extremal::{
    exact_average, exhaustive_inf, monte_carlo_average, sidon_defect, sup_norm_decoupled, sup_norm_signs,
    sup_norm_undecoupled, theorem7_witness, walsh_sign_arrangement, SearchMode, SearchReport, Theorem7Report,
    WitnessMode,
};
pub use rearrange::{
    distribution, equimeasurable, lemma2_bracket, log_distribution_l, rearrangement, Distribution,
    Rearrangement, Step,
};
pub use spaces::{
    exp_moment, lorentz_norm, lp_norm, marcinkiewicz_norm, orlicz_exp_norm, phi_eps, quasinorm_phi_eps,
    OrliczExp, SpaceSpec,
};
