//! Sign-frozen training for dense feed-forward networks.
//!
//! This crate implements three related pieces:
//!
//! - **Training with fixed weight polarities.** A minimal dense network with
//!   reverse-mode gradients and Adam ([`nn`]), plus the sign machinery
//!   ([`polarity`]): polarity templates, the post-batch enforcement step with
//!   its four reset methods, polarity extraction/transfer, and sign-flip
//!   telemetry.
//! - **Exact representability bounds.** Arbitrary-precision counting of the
//!   probability that a randomly sign-configured single-hidden-layer network
//!   can still represent XOR ([`theory`]), validated by exhaustive
//!   enumeration and Monte Carlo oracles.
//! - **A controlled-experiment harness.** Seeded, condition-controlled XOR
//!   sweeps and polarity-vs-weight transfer experiments with percentile
//!   aggregation and rank-based significance tests ([`harness`], [`stats`]).
//!
//! The `examples/` directory holds one runnable example per capability; the
//! `freezenet` binary exposes the same operations as subcommands.

pub mod cli;
pub mod data;
pub mod harness;
pub mod nn;
pub mod polarity;
pub mod seeds;
pub mod stats;
pub mod theory;
