use alloc::{format, string::String, vec, vec::Vec};
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};

/// Largest arity stored as an explicit truth table (2^20 bits = 128 KiB).
pub const MAX_TABLE_ARITY: usize = 20;

/// A monotone Boolean function: flipping any input from 0 to 1 never turns
/// the output from 1 to 0.
///
/// Input bit `i` of a mask is argument `i`. In a voting mechanism over `n`
/// buyers and `n` sellers, bits `0..n` are the buyers' "bid ≥ τ" votes and
/// bits `n..2n` the sellers' "ask ≤ τ" votes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MonotoneBoolFn {
    repr: Repr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// Bit `mask` of `words` is `f(mask)`.
    Table { arity: usize, words: Vec<u64> },
    /// `f(e) = 1{popcount(e) >= m}`; the arity may be left open.
    Threshold { arity: Option<usize>, m: usize },
}

fn table_words(arity: usize) -> usize {
    (1usize << arity).div_ceil(64)
}

impl MonotoneBoolFn {
    /// `1{popcount(e) >= m}` on `arity` bits. `m = 0` is constant 1 and
    /// `m = arity + 1` constant 0.
    pub fn threshold(arity: usize, m: usize) -> Result<Self> {
        if m > arity + 1 {
            bail!(Usage, "threshold m = {m} out of range 0..={}", arity + 1);
        }
        Ok(Self { repr: Repr::Threshold { arity: Some(arity), m } })
    }

    /// Count threshold whose arity is fixed by the profile it is applied to.
    pub fn threshold_any_arity(m: usize) -> Self {
        Self { repr: Repr::Threshold { arity: None, m } }
    }

    /// Builds the truth table of `f` and checks monotonicity.
    pub fn from_fn(arity: usize, mut f: impl FnMut(u64) -> bool) -> Result<Self> {
        if arity > MAX_TABLE_ARITY {
            bail!(Usage, "truth tables are limited to arity {MAX_TABLE_ARITY}, got {arity}");
        }
        let mut words = vec![0u64; table_words(arity)];
        for mask in 0..(1u64 << arity) {
            if f(mask) {
                words[(mask / 64) as usize] |= 1 << (mask % 64);
            }
        }
        Self::from_words(arity, words)
    }

    /// Truth table given as little-endian 64-bit words.
    pub fn from_words(arity: usize, words: Vec<u64>) -> Result<Self> {
        if arity > MAX_TABLE_ARITY {
            bail!(Usage, "truth tables are limited to arity {MAX_TABLE_ARITY}, got {arity}");
        }
        if words.len() != table_words(arity) {
            bail!(Usage, "arity {arity} needs {} table words, got {}", table_words(arity), words.len());
        }
        if arity < 6 && words[0] >> (1u32 << arity) != 0 {
            bail!(Usage, "truth table has bits beyond 2^{arity} entries");
        }
        let f = Self { repr: Repr::Table { arity, words } };
        if let Some((lo, hi)) = f.monotonicity_violation() {
            bail!(Precondition, "not monotone: f({lo:#b}) = 1 but f({hi:#b}) = 0");
        }
        Ok(f)
    }

    pub(crate) fn from_word_unchecked(arity: usize, word: u64) -> Self {
        debug_assert!(arity <= 6);
        Self { repr: Repr::Table { arity, words: vec![word] } }
    }

    pub fn constant(arity: usize, value: bool) -> Self {
        // m = 0 → always 1, m = arity + 1 → always 0
        Self { repr: Repr::Threshold { arity: Some(arity), m: if value { 0 } else { arity + 1 } } }
    }

    /// Conjunction of all inputs.
    pub fn and(arity: usize) -> Self {
        Self { repr: Repr::Threshold { arity: Some(arity), m: arity } }
    }

    /// Disjunction of all inputs.
    pub fn or(arity: usize) -> Self {
        Self { repr: Repr::Threshold { arity: Some(arity), m: 1 } }
    }

    pub fn arity(&self) -> Option<usize> {
        match &self.repr {
            Repr::Table { arity, .. } => Some(*arity),
            Repr::Threshold { arity, .. } => *arity,
        }
    }

    /// Count threshold `m` when this is a threshold function.
    pub fn threshold_m(&self) -> Option<usize> {
        match &self.repr {
            Repr::Threshold { m, .. } => Some(*m),
            Repr::Table { .. } => None,
        }
    }

    pub fn truth_table(&self) -> Option<&[u64]> {
        match &self.repr {
            Repr::Table { words, .. } => Some(words),
            Repr::Threshold { .. } => None,
        }
    }

    /// Checks that this function accepts `arity` inputs.
    pub fn check_arity(&self, arity: usize) -> Result<()> {
        match &self.repr {
            Repr::Table { arity: a, .. } | Repr::Threshold { arity: Some(a), .. } if *a != arity => {
                bail!(Usage, "aggregator arity {a} does not match {arity} votes")
            }
            Repr::Threshold { arity: None, m } if *m > arity + 1 => {
                bail!(Usage, "threshold m = {m} out of range for {arity} votes")
            }
            _ => Ok(()),
        }
    }

    /// Evaluates on a bit mask (bit `i` = input `i`). Threshold functions
    /// accept any arity up to 64 here.
    pub fn eval_mask(&self, mask: u64) -> bool {
        match &self.repr {
            Repr::Table { words, .. } => (words[(mask / 64) as usize] >> (mask % 64)) & 1 == 1,
            Repr::Threshold { m, .. } => mask.count_ones() as usize >= *m,
        }
    }

    /// Evaluates on a popcount. Only meaningful for threshold functions;
    /// returns `None` for tables.
    pub fn eval_count(&self, ones: usize) -> Option<bool> {
        match &self.repr {
            Repr::Threshold { m, .. } => Some(ones >= *m),
            Repr::Table { .. } => None,
        }
    }

    /// Evaluates on an explicit input sequence. Table-backed functions need
    /// the sequence to have exactly the table's arity.
    pub fn eval_bits<I: IntoIterator<Item = bool>>(&self, bits: I) -> bool {
        match &self.repr {
            Repr::Threshold { m, .. } => bits.into_iter().filter(|b| *b).count() >= *m,
            Repr::Table { .. } => {
                let mask = bits.into_iter().enumerate().fold(0u64, |acc, (i, b)| acc | ((b as u64) << i));
                self.eval_mask(mask)
            }
        }
    }

    /// First pair `(lo, hi)` with `lo ⊂ hi` differing in one bit and
    /// `f(lo) = 1`, `f(hi) = 0`.
    pub fn monotonicity_violation(&self) -> Option<(u64, u64)> {
        let Repr::Table { arity, .. } = &self.repr else { return None };
        for bit in 0..*arity {
            let flip = 1u64 << bit;
            for lo in 0..(1u64 << arity) {
                if lo & flip == 0 && self.eval_mask(lo) && !self.eval_mask(lo | flip) {
                    return Some((lo, lo | flip));
                }
            }
        }
        None
    }

    /// Hex form of the truth table, most significant digit first: the table
    /// read as an integer whose bit `mask` is `f(mask)`. Threshold functions
    /// with a known arity are expanded.
    pub fn to_hex(&self) -> Option<String> {
        let (arity, words) = match &self.repr {
            Repr::Table { arity, words } => (*arity, words.clone()),
            Repr::Threshold { arity: Some(arity), .. } if *arity <= MAX_TABLE_ARITY => {
                let t = Self::from_fn(*arity, |mask| self.eval_mask(mask)).ok()?;
                return t.to_hex();
            }
            Repr::Threshold { .. } => return None,
        };
        let digits = ((1usize << arity) / 4).max(1);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d * 4;
            let nibble = (words[bit / 64] >> (bit % 64)) & 0xf;
            write!(out, "{nibble:x}").ok()?;
        }
        Some(out)
    }

    pub fn from_hex(arity: usize, hex: &str) -> Result<Self> {
        if arity > MAX_TABLE_ARITY {
            bail!(Usage, "truth tables are limited to arity {MAX_TABLE_ARITY}, got {arity}");
        }
        let hex = hex.strip_prefix("0x").unwrap_or(hex);
        let mut words = vec![0u64; table_words(arity)];
        let entries = 1usize << arity;
        for (d, ch) in hex.chars().rev().enumerate() {
            let nibble = ch.to_digit(16).ok_or_else(|| Error::Usage(format!("invalid hex digit {ch:?}")))? as u64;
            if nibble == 0 {
                continue;
            }
            let bit = d * 4;
            if bit + (64 - nibble.leading_zeros() as usize) > entries {
                bail!(Usage, "truth table {hex:?} has bits beyond 2^{arity} entries");
            }
            words[bit / 64] |= nibble << (bit % 64);
        }
        Self::from_words(arity, words)
    }
}

/// `1{popcount(e) >= m}` on `arity` bits, the optimal aggregator shape for the
/// hardness instance.
pub fn threshold_count_f(arity: usize, m: usize) -> Result<MonotoneBoolFn> {
    MonotoneBoolFn::threshold(arity, m)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BoolFnSpec {
    Threshold {
        threshold_m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arity: Option<usize>,
    },
    Table {
        truth_table: String,
        arity: usize,
    },
}

impl Serialize for MonotoneBoolFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        let spec = match &self.repr {
            Repr::Threshold { arity, m } => BoolFnSpec::Threshold { threshold_m: *m, arity: *arity },
            Repr::Table { arity, .. } => BoolFnSpec::Table {
                truth_table: self.to_hex().expect("tables always have a hex form"),
                arity: *arity,
            },
        };
        spec.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MonotoneBoolFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let f = match BoolFnSpec::deserialize(d)? {
            BoolFnSpec::Threshold { threshold_m, arity: Some(a) } => MonotoneBoolFn::threshold(a, threshold_m),
            BoolFnSpec::Threshold { threshold_m, arity: None } => Ok(MonotoneBoolFn::threshold_any_arity(threshold_m)),
            BoolFnSpec::Table { truth_table, arity } => MonotoneBoolFn::from_hex(arity, &truth_table),
        };
        f.map_err(serde::de::Error::custom)
    }
}
