//! Preferential-attachment random simplicial complexes.
//!
//! A new vertex arrives at every step and glues itself to one existing
//! `k`-simplex, chosen with probability proportional to its `k`-degree plus
//! an offset `delta`. This crate grows such complexes, solves the recursions
//! for the limiting joint degree law, samples that law from its explicit
//! mixture construction, evaluates its regular-variation tail measure and the
//! birth-immigration coupling, and ships the statistics needed to check all of
//! these against each other.
//!
//! Module map:
//!
//! * [`model`]: the growing complex and its degree ledgers.
//! * [`recursion`]: the limiting joint pmf and the first-coordinate marginal.
//! * [`limitlaw`]: exact samplers for the limit law and its pgf.
//! * [`regvar`]: tail measure, Laplace transforms and the large-`z` limit.
//! * [`bicoupling`]: continuous-time birth-immigration representation.
//! * [`stats`]: distances, goodness-of-fit and tail-index estimators.
//! * [`validate`]: the acceptance suites shared by the test target and the CLI.

pub mod bicoupling;
pub mod error;
pub mod export;
pub mod limitlaw;
pub mod model;
pub mod par;
pub mod params;
pub mod quad;
pub mod recursion;
pub mod regvar;
pub mod rng;
pub mod stats;
pub mod validate;

pub use error::{Error, Result};
pub use params::ModelParams;

/// Schema tag written into every JSON report.
pub const SCHEMA: &str = "simplex-pa/1";
