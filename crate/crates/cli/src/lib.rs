//! Command-line front end for `pmaxent-core`: randomized verification
//! suites, entropy curves along the mean-preserving flow, and two small
//! experiments (law of small numbers, maximum entropy among Bernoulli sums).

pub mod commands;
pub mod error;
pub mod family;
pub mod report;
pub mod suites;

pub use error::{CliError, EXIT_PASS, EXIT_PRECONDITION, EXIT_PROPERTY, EXIT_USAGE};
