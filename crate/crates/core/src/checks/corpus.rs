//! Seeded random sets for property batteries.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::set::IntSet;

pub type CorpusRng = ChaCha8Rng;

pub fn corpus_rng(seed: u64) -> CorpusRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A set with size drawn from `size` and distinct elements from `values`.
/// `exclude_zero` drops 0 from the value range.
pub fn random_set(
    rng: &mut CorpusRng,
    size: RangeInclusive<usize>,
    values: RangeInclusive<i64>,
    exclude_zero: bool,
) -> IntSet {
    let width = (values.end() - values.start() + 1) as usize - usize::from(exclude_zero && values.contains(&0));
    let want = rng.gen_range(size).min(width);
    let mut out = BTreeSet::new();
    while out.len() < want {
        let x = rng.gen_range(values.clone());
        if exclude_zero && x == 0 {
            continue;
        }
        out.insert(x);
    }
    IntSet::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_sized() {
        let a = random_set(&mut corpus_rng(3), 5..=5, -10..=10, true);
        let b = random_set(&mut corpus_rng(3), 5..=5, -10..=10, true);
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert!(!a.contains_zero());
        assert_eq!(random_set(&mut corpus_rng(1), 9..=9, 0..=2, false).len(), 3);
    }
}
