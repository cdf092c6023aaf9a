//! Multiplayer bilateral trade: n buyers and n sellers share one trade
//! decision `x`, one buyer payment `p` and one seller receipt `r`.
//!
//! This crate holds the algorithmic side and builds under `no_std` (it needs
//! `alloc`):
//!
//! - [`priors`]: bounded value/cost distributions on `[0, 1]`.
//! - [`mechanisms`]: the posted-mean forced-trade rule, the voting family of
//!   strongly budget-balanced IC mechanisms, Myerson payment synthesis and
//!   separable randomized allocations.
//! - [`verification`]: grid checkers for monotonicity, IC regret, the Myerson
//!   payment identity, budget balance, voting-structure conformance and
//!   separability.
//! - [`metrics`]: Monte Carlo estimators for gains-from-trade, first best and
//!   IR probability, plus the closed forms of the hardness instance.
//!
//! Every Monte Carlo routine draws trial `t` from its own ChaCha stream keyed
//! by `(seed, t)`, so results do not depend on how trials are scheduled.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
mod math;
pub mod mechanisms;
pub mod metrics;
pub mod priors;
pub mod rng;
pub mod verification;

pub use error::{Error, Result};
pub use mechanisms::{MechanismDef, MonotoneBoolFn, Outcome, Profile};
pub use metrics::SimReport;
pub use priors::{Family, Prior};
