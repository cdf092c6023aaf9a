//! Finite-grid checkers for the incentive and feasibility properties of MBT
//! mechanisms.
//!
//! Reports are evaluated on the grid `{0, 1/K, ..., 1}` for every agent.
//! Sweeps are exhaustive when the grid has at most
//! [`SweepOptions::exhaustive_limit`] profiles and fall back to a seeded
//! random subset otherwise; every report says which mode it used.

mod budget;
mod conformance;
mod dedekind;
mod ic;
mod monotone;
mod myerson_identity;
mod separability;

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::mechanisms::GridSpace;
use crate::rng::TrialStreams;

pub use crate::mechanisms::GridAllocation;
pub use budget::{check_budget, BudgetClass, BudgetReport, SBB_TOL};
pub use conformance::{
    check_two_sided_conformance, check_voting_conformance, ConformanceResult, ConformanceWitness, TwoSidedResult,
};
pub use dedekind::{enumerate_monotone_bool, DEDEKIND};
pub use ic::{check_ic, RegretReport, RegretWitness, REGRET_TOL};
pub use monotone::{check_monotone, MonotoneReport, MonotoneWitness};
pub use myerson_identity::{check_myerson_identity, MyersonReport};
pub use separability::{check_separability, SeparabilityOptions, SeparabilityReport};

/// Which side of the market an agent is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Buyer,
    Seller,
}

/// Exhaustive-versus-sampled policy for grid sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Sweep every profile when the grid has at most this many.
    pub exhaustive_limit: u64,
    /// Number of random profiles otherwise.
    pub samples: u64,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { exhaustive_limit: 1_000_000, samples: 100_000, seed: 0 }
    }
}

/// Profiles visited by a sweep, as coordinate vectors.
pub(crate) struct Sweep {
    space: GridSpace,
    sampled: bool,
    remaining: u64,
    coords: Vec<u32>,
    started: bool,
    rng: crate::rng::TrialRng,
}

impl Sweep {
    pub(crate) fn new(space: GridSpace, opts: &SweepOptions) -> Self {
        let sampled = space.profiles().map_or(true, |len| len > opts.exhaustive_limit);
        Self {
            space,
            sampled,
            remaining: if sampled { opts.samples } else { space.profiles().unwrap_or(0) },
            coords: alloc::vec![0; space.dims()],
            started: false,
            rng: TrialStreams::new(opts.seed).stream(0),
        }
    }

    pub(crate) fn sampled(&self) -> bool {
        self.sampled
    }

    /// Next profile, or `None` when the sweep is done.
    pub(crate) fn next_coords(&mut self) -> Option<&[u32]> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        if self.sampled {
            let k = self.space.k() as u32;
            for c in self.coords.iter_mut() {
                *c = self.rng.random_range(0..=k);
            }
        } else if self.started {
            self.space.advance(&mut self.coords);
        }
        self.started = true;
        Some(&self.coords)
    }
}
