//! Sequential Bayesian detection with quantized observations on finite
//! alphabets.
//!
//! A sequential test watches a stream of i.i.d. observations, pays `c` per
//! sample, and stops to declare one of two hypotheses; when the tester only
//! sees quantized observations, the choice of per-step quantizers becomes a
//! design problem. This crate provides:
//!
//! - exact optimal costs for stationary, periodic, and prefix-then-tail
//!   quantizer schedules, by value iteration on the posterior
//!   ([`dp`]);
//! - the small-cost asymptotics that rank designs: Wald's cost
//!   approximation, sequential cost coefficients, suboptimality intervals
//!   for alternating schedules, mixture rationalization, and the
//!   multi-sensor construction ([`asymptotics`]);
//! - Monte Carlo simulation of the underlying probability-ratio tests with
//!   reproducible, thread-count-independent results ([`sprt`]);
//! - a numerical verification suite for the structural facts the design
//!   theory rests on: quasiconcavity of the cost coefficient,
//!   threshold-rule optimality, and the reassignment inequalities
//!   ([`checks`]).
//!
//! The [`builtin`] module ships a small three-point problem on which a
//! non-stationary schedule strictly beats every stationary design; most
//! examples and tests use it.

pub mod asymptotics;
pub mod builtin;
pub mod checks;
pub mod divergence;
pub mod dp;
mod error;
pub mod models;
pub mod quantize;
pub mod sprt;

pub use error::{Error, Result};
pub use models::{
    induce, mix_channels, DeterministicQuantizer, HypothesisPair, InducedChannel, Priors,
    Quantizer, QuantizerSchedule,
};
