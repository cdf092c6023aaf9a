use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::mechanisms::MonotoneBoolFn;

/// Number of monotone Boolean functions on `k` inputs, `k = 0..=6`.
pub const DEDEKIND: [u64; 7] = [2, 3, 6, 20, 168, 7581, 7828354];

/// Truth-table words of every monotone function on `k ≤ 6` inputs.
///
/// A function splits on its top input into halves `f0` (input 0) and `f1`
/// (input 1); it is monotone iff both halves are and `f0 ≤ f1` pointwise.
pub(crate) fn monotone_words(k: usize) -> Result<Vec<u64>> {
    if k > 6 {
        bail!(Usage, "monotone enumeration is limited to k <= 6, got {k}");
    }
    let mut words = alloc::vec![0u64, 1];
    for (arity, &count) in DEDEKIND.iter().enumerate().take(k + 1).skip(1) {
        let half = 1u32 << (arity - 1);
        let mut next = Vec::with_capacity(count as usize);
        for &f0 in &words {
            for &f1 in &words {
                if f0 & !f1 == 0 {
                    next.push(f0 | (f1 << half));
                }
            }
        }
        words = next;
    }
    Ok(words)
}

/// Every monotone Boolean function on `k ≤ 6` inputs.
pub fn enumerate_monotone_bool(k: usize) -> Result<Vec<MonotoneBoolFn>> {
    Ok(monotone_words(k)?.into_iter().map(|w| MonotoneBoolFn::from_word_unchecked(k, w)).collect())
}
