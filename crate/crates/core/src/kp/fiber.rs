//! Unions of complete constant-sum fibers `{y ∈ A^t : Σy = σ}`.

use std::collections::BTreeMap;

use rug::Integer;

use crate::energy::RepFunction;
use crate::error::{Error, Result};
use crate::set::IntSet;

/// A subset of `A^t` stored by the sums of its tuples, each weighted by the
/// size of its (complete) fiber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberSet {
    arity: u32,
    weights: BTreeMap<Integer, u64>,
}

impl FiberSet {
    /// The union of the fibers over `sums`; every sum must be represented.
    pub fn from_sums<'a, I>(r_t: &RepFunction, sums: I) -> Result<FiberSet>
    where
        I: IntoIterator<Item = &'a Integer>,
    {
        let mut weights = BTreeMap::new();
        for s in sums {
            let w = r_t.get(s);
            if w == 0 {
                return Err(Error::Invariant(format!("{s} is not a sum of {} elements", r_t.arity)));
            }
            weights.insert(s.clone(), w);
        }
        Ok(FiberSet { arity: r_t.arity, weights })
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    /// Number of tuples represented.
    pub fn cardinality(&self) -> u64 {
        self.weights.values().sum()
    }

    pub fn sums(&self) -> IntSet {
        IntSet::new(self.weights.keys().cloned())
    }

    pub fn fiber_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, sum: &Integer) -> u64 {
        self.weights.get(sum).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Integer, u64)> {
        self.weights.iter().map(|(k, v)| (k, *v))
    }

    /// Sub-union of the fibers whose sum satisfies `keep`.
    pub fn retain(&self, keep: impl Fn(&Integer, u64) -> bool) -> FiberSet {
        FiberSet {
            arity: self.arity,
            weights: self.weights.iter().filter(|(k, v)| keep(k, **v)).map(|(k, v)| (k.clone(), *v)).collect(),
        }
    }

    /// Every stored fiber is complete with respect to `r_t`.
    pub fn is_complete(&self, r_t: &RepFunction) -> bool {
        r_t.arity == self.arity && self.weights.iter().all(|(k, v)| r_t.get(k) == *v)
    }
}
