//! Discrete-distribution calculus around the Poisson maximum entropy property.
//!
//! The crate works with finite-support laws on the non-negative integers
//! ([`Pmf`]) and provides:
//!
//! - the maps of binomial thinning, Poisson addition and their
//!   mean-preserving combination `U_α` ([`transforms`]),
//! - log-concavity and ultra log-concavity predicates, the scaled score
//!   `ρ(i) = (i+1)P(i+1)/(λP(i)) − 1`, and samplers for class members
//!   ([`concavity`]),
//! - entropy, cross-entropy against the Poisson, relative entropy and
//!   Cramér–Rao type functionals ([`functionals`]),
//! - closed-form first and second α-derivatives of those functionals along
//!   `U_α`, heat-equation residuals and entropy curves ([`flow`]).
//!
//! Everything is computed in double precision; infinite-support laws are
//! truncated under a [`TruncationPolicy`] and the cut-off mass is carried as
//! an explicit deficit.

pub mod concavity;
pub mod error;
pub mod flow;
pub mod functionals;
pub mod pmf;
pub mod special;
pub mod transforms;

pub use error::{Error, Result};
pub use pmf::{Pmf, Support, TruncationPolicy};
