//! Verification harness for degree-2 Rademacher chaos: named suites of
//! inequality checks at pinned scales, norms of user-supplied coefficient
//! matrices, and the `phi_n` scaling table, with CSV/JSON reports that carry
//! their seed and config snapshot.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod suites;

pub use commands::{cmd_norm, cmd_scaling, cmd_supnorm, cmd_verify, cmd_walsh, Mode, NormReport, Samples, SupnormReport};
pub use config::{ConfigFile, OutputFormat, RunConfig, DEFAULT_CONFIG};
pub use error::{CliError, Result};
pub use report::{Check, Relation, ScalingRow, ScalingTable, Status, SuiteResult};
pub use suites::{Selection, Suite};
