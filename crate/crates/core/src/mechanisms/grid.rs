//! Allocations tabulated on the uniform report grid `{0, 1/K, ..., 1}^{2n}`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};

/// Largest table a [`GridAllocation`] will hold.
pub const MAX_GRID_POINTS: u64 = 1 << 24;

/// The grid of report profiles for `n` buyers and `n` sellers at
/// resolution `K`. Coordinate `d < n` is buyer `d`'s bid, `n + j` is seller
/// `j`'s ask; a coordinate `c` stands for the report `c / K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpace {
    n: usize,
    k: usize,
}

impl GridSpace {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            bail!(Usage, "grid needs n >= 1 and K >= 1, got n = {n}, K = {k}");
        }
        if k > u32::MAX as usize - 1 {
            bail!(Usage, "grid resolution {k} too large");
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dims(&self) -> usize {
        2 * self.n
    }

    /// `(K + 1)^{2n}`, or `None` when that overflows `u64`.
    pub fn profiles(&self) -> Option<u64> {
        (self.k as u64 + 1).checked_pow(self.dims() as u32)
    }

    pub fn point(&self, c: u32) -> f64 {
        c as f64 / self.k as f64
    }

    /// Nearest grid coordinate of a report in `[0, 1]`.
    pub fn coord(&self, z: f64) -> u32 {
        libm::round(z.clamp(0.0, 1.0) * self.k as f64) as u32
    }

    /// Mixed-radix index, coordinate 0 least significant.
    pub fn index(&self, coords: &[u32]) -> u64 {
        let base = self.k as u64 + 1;
        coords.iter().rev().fold(0u64, |acc, c| acc * base + *c as u64)
    }

    pub fn coords_of(&self, mut index: u64, out: &mut [u32]) {
        let base = self.k as u64 + 1;
        for c in out.iter_mut() {
            *c = (index % base) as u32;
            index /= base;
        }
    }

    /// Writes the reports of a coordinate vector into `bids` / `asks`.
    pub fn fill(&self, coords: &[u32], bids: &mut [f64], asks: &mut [f64]) {
        for (b, c) in bids.iter_mut().zip(&coords[..self.n]) {
            *b = self.point(*c);
        }
        for (a, c) in asks.iter_mut().zip(&coords[self.n..]) {
            *a = self.point(*c);
        }
    }

    /// Advances `coords` to the next profile; false after the last one.
    pub fn advance(&self, coords: &mut [u32]) -> bool {
        for c in coords.iter_mut() {
            if (*c as usize) < self.k {
                *c += 1;
                return true;
            }
            *c = 0;
        }
        false
    }
}

/// An allocation `x` stored for every grid profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridAllocationRepr", into = "GridAllocationRepr")]
pub struct GridAllocation {
    space: GridSpace,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridAllocationRepr {
    n: usize,
    k: usize,
    x: Vec<f64>,
}

impl TryFrom<GridAllocationRepr> for GridAllocation {
    type Error = crate::Error;

    fn try_from(r: GridAllocationRepr) -> Result<Self> {
        GridAllocation::from_values(r.n, r.k, r.x)
    }
}

impl From<GridAllocation> for GridAllocationRepr {
    fn from(g: GridAllocation) -> Self {
        Self { n: g.space.n, k: g.space.k, x: g.values }
    }
}

fn checked_len(space: &GridSpace) -> Result<usize> {
    match space.profiles() {
        Some(len) if len <= MAX_GRID_POINTS => Ok(len as usize),
        _ => bail!(Usage, "grid with n = {}, K = {} exceeds {MAX_GRID_POINTS} profiles", space.n, space.k),
    }
}

impl GridAllocation {
    pub fn from_values(n: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        let space = GridSpace::new(n, k)?;
        let len = checked_len(&space)?;
        if values.len() != len {
            bail!(Usage, "grid n = {n}, K = {k} needs {len} values, got {}", values.len());
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            bail!(Model, "allocation value {v} outside [0, 1]");
        }
        Ok(Self { space, values })
    }

    /// Tabulates `x(bids, asks)` over every grid profile.
    pub fn tabulate(n: usize, k: usize, mut x: impl FnMut(&[f64], &[f64]) -> f64) -> Result<Self> {
        let space = GridSpace::new(n, k)?;
        let len = checked_len(&space)?;
        let mut values = Vec::with_capacity(len);
        let mut coords = alloc::vec![0u32; space.dims()];
        let (mut bids, mut asks) = (alloc::vec![0.0; n], alloc::vec![0.0; n]);
        loop {
            space.fill(&coords, &mut bids, &mut asks);
            values.push(x(&bids, &asks));
            if !space.advance(&mut coords) {
                break;
            }
        }
        Self::from_values(n, k, values)
    }

    pub fn space(&self) -> GridSpace {
        self.space
    }

    pub fn n(&self) -> usize {
        self.space.n
    }

    pub fn k(&self) -> usize {
        self.space.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, coords: &[u32]) -> f64 {
        self.values[self.space.index(coords) as usize]
    }

    /// Value at the grid profile nearest to `(bids, asks)`.
    pub fn lookup(&self, bids: &[f64], asks: &[f64]) -> Result<f64> {
        Ok(self.values[self.lookup_index(bids, asks)?])
    }

    pub(crate) fn lookup_index(&self, bids: &[f64], asks: &[f64]) -> Result<usize> {
        let n = self.space.n;
        if bids.len() != n || asks.len() != n {
            bail!(Usage, "grid for n = {n} evaluated on {} bids / {} asks", bids.len(), asks.len());
        }
        let base = self.space.k as u64 + 1;
        let idx = bids
            .iter()
            .chain(asks)
            .rev()
            .fold(0u64, |acc, z| acc * base + self.space.coord(*z) as u64);
        Ok(idx as usize)
    }

    pub fn is_deterministic(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0 || *v == 1.0)
    }
}

/// Payments attached to a tabulated allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridPayments {
    /// `p = r = price · x`.
    Posted { posted: f64 },
    /// Explicit payment and receipt tables in grid index order.
    Tables { p: Vec<f64>, r: Vec<f64> },
}

impl GridPayments {
    pub(crate) fn validate(&self, len: usize) -> Result<()> {
        match self {
            GridPayments::Posted { posted } if !posted.is_finite() => bail!(Model, "posted price must be finite"),
            GridPayments::Tables { p, r } if p.len() != len || r.len() != len => {
                bail!(Usage, "payment tables need {len} entries, got {} and {}", p.len(), r.len())
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn at(&self, index: usize, x: f64) -> (f64, f64) {
        match self {
            GridPayments::Posted { posted } => (posted * x, posted * x),
            GridPayments::Tables { p, r } => (p[index], r[index]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip_and_enumeration_order() {
        let space = GridSpace::new(2, 3).unwrap();
        assert_eq!(space.profiles(), Some(256));
        let mut coords = [0u32; 4];
        let mut out = [0u32; 4];
        let mut seen = 0u64;
        loop {
            assert_eq!(space.index(&coords), seen);
            space.coords_of(seen, &mut out);
            assert_eq!(out, coords);
            seen += 1;
            if !space.advance(&mut coords) {
                break;
            }
        }
        assert_eq!(seen, 256);
    }

    #[test]
    fn tabulate_and_lookup() {
        let g = GridAllocation::tabulate(1, 4, |b, a| if b[0] >= a[0] { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(g.values().len(), 25);
        assert!(g.is_deterministic());
        assert_eq!(g.lookup(&[0.5], &[0.5]).unwrap(), 1.0);
        assert_eq!(g.lookup(&[0.24], &[0.5]).unwrap(), 0.0);
        assert!(g.lookup(&[0.5, 0.5], &[0.5]).is_err());
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(GridAllocation::from_values(1, 1, alloc::vec![0.0; 3]).is_err());
        assert!(GridAllocation::from_values(1, 1, alloc::vec![0.0, 0.0, 0.0, 2.0]).is_err());
        assert!(GridAllocation::tabulate(4, 64, |_, _| 0.0).is_err());
    }
}
