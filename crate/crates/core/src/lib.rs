//! Scenario-based risk measures on finite outcome spaces.
//!
//! * [`measure`]: empirical laws, VaR and ES, outcome tables and scenarios.
//! * [`scenario`]: MES, MVaR, AES, iMES, rMES and MINVAR over a scenario
//!   collection.
//! * [`choquet`] and [`axioms`]: distortions, set functions, Choquet
//!   integrals and brute-force axiom checks.
//! * [`representation`]: integral representations and ES mixtures.
//! * [`basel`]: stressed ES, stress ratio, risk-class sum and IMCC.
//! * [`market`]: price CSVs, returns, detrending and scenario construction.
//! * [`bundle`]: serializable table-plus-scenarios inputs.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axioms;
pub mod basel;
pub mod bundle;
pub mod choquet;
pub mod config;
pub mod error;
pub mod format;
pub mod market;
pub mod measure;
pub mod representation;
pub mod scenario;

pub use bundle::ScenarioBundle;
pub use error::{Result, RiskError};
pub use measure::{EmpiricalDistribution, OutcomeTable, Scenario, ScenarioSet, Variable};
pub use scenario::{minvar, NamedDistribution, ScenarioDistributions};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
