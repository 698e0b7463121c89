//! Learning approximately revenue-optimal single-parameter auctions from
//! samples.
//!
//! The library is organized around a small pipeline:
//!
//! * [`dist`] — value distributions (discrete and closed-form), their
//!   quantile calculus, sampling, and stochastic dominance;
//! * [`curve`] — revenue curves in quantile space, ironing (upper concave
//!   envelopes), and (ironed) virtual values;
//! * [`mech`] — Myerson mechanisms for single-item, k-unit, and matroid
//!   feasibility, with threshold payments;
//! * [`learn`] — empirical distributions, quantile shading, and the
//!   dominated empirical Myerson learner;
//! * [`eval`] — exact and Monte-Carlo revenue evaluation, Opt(D);
//! * [`xform`] — truncation operators and the surrogate construction;
//! * [`info`] — KL/SKL divergences, partition bounds, sample-scale
//!   estimates, and a revenue-based distinguisher;
//! * [`hardgen`] — generators and validators for the sample-complexity
//!   lower-bound instances;
//! * [`experiments`] — the convergence and rate-trend experiments behind
//!   the `convergence` and `trend` CLI subcommands.

pub mod curve;
pub mod dist;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod hardgen;
pub mod info;
pub mod learn;
pub mod mech;
pub mod rng;
pub mod xform;

pub use error::{Error, Result};
