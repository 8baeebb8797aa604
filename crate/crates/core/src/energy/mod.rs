//! Representation functions and energies, computed by sparse convolution.

pub mod oracle;

use std::collections::BTreeMap;

use rug::{Complete, Float, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::IntSet;

pub use oracle::{energy_oracle, DEFAULT_MAX_TUPLES};

/// Which group operation the tuples are combined with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Additive,
    Multiplicative,
}

impl Mode {
    pub fn combine(self, a: &Integer, b: &Integer) -> Integer {
        match self {
            Mode::Additive => (a + b).complete(),
            Mode::Multiplicative => (a * b).complete(),
        }
    }

    pub fn identity(self) -> Integer {
        match self {
            Mode::Additive => Integer::ZERO,
            Mode::Multiplicative => Integer::from(1),
        }
    }

    /// `A ∘ B`.
    pub fn combine_sets(self, a: &IntSet, b: &IntSet) -> IntSet {
        a.combine(b, |x, y| self.combine(x, y))
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Additive => "additive",
            Mode::Multiplicative => "multiplicative",
        }
    }
}

/// Sparse `n ↦ r(n)`: number of ordered tuples combining to `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepFunction {
    pub mode: Mode,
    pub arity: u32,
    support: BTreeMap<Integer, u64>,
}

impl RepFunction {
    pub fn indicator(a: &IntSet, mode: Mode) -> Self {
        RepFunction { mode, arity: 1, support: a.iter().map(|x| (x.clone(), 1)).collect() }
    }

    pub fn get(&self, n: &Integer) -> u64 {
        self.support.get(n).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Integer, u64)> {
        self.support.iter().map(|(k, v)| (k, *v))
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn support_set(&self) -> IntSet {
        IntSet::from_sorted(self.support.keys().cloned().collect())
    }

    /// `Σ r(n)`.
    pub fn total(&self) -> Integer {
        self.support.values().map(|&v| Integer::from(v)).sum()
    }

    /// `Σ r(n)²`.
    pub fn sum_squares(&self) -> Integer {
        self.support.values().map(|&v| Integer::from(v) * v).sum()
    }

    pub fn max(&self) -> u64 {
        self.support.values().copied().max().unwrap_or(0)
    }

    /// Convolution `(f ∗ g)(n) = Σ_{x∘y=n} f(x)g(y)`.
    pub fn convolve(&self, other: &RepFunction) -> Result<RepFunction> {
        assert_eq!(self.mode, other.mode);
        let mut terms: Vec<(Integer, u64)> =
            Vec::with_capacity(self.support.len() * other.support.len());
        for (x, cx) in &self.support {
            for (y, cy) in &other.support {
                let c = cx
                    .checked_mul(*cy)
                    .ok_or_else(|| Error::Overflow("multiplicity exceeds 64 bits".into()))?;
                terms.push((self.mode.combine(x, y), c));
            }
        }
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut support = BTreeMap::new();
        let mut it = terms.into_iter().peekable();
        while let Some((k, mut c)) = it.next() {
            while it.peek().is_some_and(|(k2, _)| *k2 == k) {
                let (_, c2) = it.next().unwrap();
                c = c
                    .checked_add(c2)
                    .ok_or_else(|| Error::Overflow("multiplicity exceeds 64 bits".into()))?;
            }
            support.insert(k, c);
        }
        Ok(RepFunction { mode: self.mode, arity: self.arity + other.arity, support })
    }
}

/// Rejects `size^s ≥ 2^63`, the point where counts could leave 64 bits.
pub(crate) fn guard_power(size: usize, s: u32) -> Result<()> {
    let mut acc: u128 = 1;
    for _ in 0..s {
        acc = acc.saturating_mul(size as u128);
        if acc >= 1u128 << 63 {
            return Err(Error::Overflow(format!("|A|^s = {size}^{s} reaches 2^63")));
        }
    }
    Ok(())
}

/// `r_s` (additive) or `q_s` (multiplicative) by binary powering.
pub fn rep_function(a: &IntSet, s: u32, mode: Mode) -> Result<RepFunction> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if s == 0 {
        return Err(Error::ZeroArity);
    }
    guard_power(a.len(), s)?;
    let mut base = RepFunction::indicator(a, mode);
    let mut acc: Option<RepFunction> = None;
    let mut e = s;
    loop {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(f) => f.convolve(&base)?,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = base.convolve(&base)?;
    }
    Ok(acc.expect("s >= 1"))
}

/// An energy count together with its size exponent `log_|A| count`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyValue {
    pub count: Integer,
    pub arity: u32,
    pub mode: Mode,
    /// True for energies of several (possibly different) sets.
    pub mixed: bool,
    pub exponent: Option<Float>,
}

pub const EXPONENT_PREC: u32 = 128;

impl EnergyValue {
    pub fn new(count: Integer, arity: u32, mode: Mode, set_size: Option<usize>) -> Self {
        let exponent = set_size.filter(|&n| n >= 2 && count > 0).map(|n| {
            let c = Float::with_val(EXPONENT_PREC, &count).log2();
            c / Float::with_val(EXPONENT_PREC, n).log2()
        });
        EnergyValue { count, arity, mode, mixed: set_size.is_none(), exponent }
    }
}

/// `E_s(A)` or `M_s(A)`.
pub fn energy(a: &IntSet, s: u32, mode: Mode) -> Result<EnergyValue> {
    let r = rep_function(a, s, mode)?;
    Ok(EnergyValue::new(r.sum_squares(), s, mode, Some(a.len())))
}

/// Energy of `2s` sets: tuples with `a₁∘…∘a_s = a_{s+1}∘…∘a_{2s}`.
pub fn mixed_energy(sets: &[IntSet], mode: Mode) -> Result<EnergyValue> {
    if sets.is_empty() || sets.len() % 2 == 1 {
        return Err(Error::BadArity(format!("need an even, positive number of sets, got {}", sets.len())));
    }
    if sets.iter().any(IntSet::is_empty) {
        return Err(Error::EmptySet);
    }
    let s = sets.len() / 2;
    let half = |part: &[IntSet]| -> Result<RepFunction> {
        let mut size: u128 = 1;
        for p in part {
            size = size.saturating_mul(p.len() as u128);
        }
        if size >= 1u128 << 63 {
            return Err(Error::Overflow("product of set sizes reaches 2^63".into()));
        }
        let mut f = RepFunction::indicator(&part[0], mode);
        for p in &part[1..] {
            f = f.convolve(&RepFunction::indicator(p, mode))?;
        }
        Ok(f)
    };
    let left = half(&sets[..s])?;
    let right = half(&sets[s..])?;
    let count = left
        .iter()
        .map(|(n, c)| Integer::from(c) * right.get(n))
        .sum::<Integer>();
    Ok(EnergyValue::new(count, s as u32, mode, None))
}

/// `max_n r_s(n)`.
pub fn sup_rep(a: &IntSet, s: u32, mode: Mode) -> Result<u64> {
    Ok(rep_function(a, s, mode)?.max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rug::ops::Pow;

    fn set(v: &[i64]) -> IntSet {
        IntSet::new(v.iter().copied())
    }

    fn pairs(r: &RepFunction) -> Vec<(i64, u64)> {
        r.iter().map(|(k, v)| (k.to_i64().unwrap(), v)).collect()
    }

    #[test]
    fn rep_function_examples() {
        let r = rep_function(&set(&[1, 2, 3]), 2, Mode::Additive).unwrap();
        assert_eq!(pairs(&r), vec![(2, 1), (3, 2), (4, 3), (5, 2), (6, 1)]);
        let q = rep_function(&set(&[1, 2, 4]), 2, Mode::Multiplicative).unwrap();
        assert_eq!(pairs(&q), vec![(1, 1), (2, 2), (4, 3), (8, 2), (16, 1)]);
        let single = rep_function(&set(&[7]), 5, Mode::Additive).unwrap();
        assert_eq!(pairs(&single), vec![(35, 1)]);
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy(&set(&[1, 2, 3]), 2, Mode::Additive).unwrap().count, 19);
        assert_eq!(energy(&set(&[2, 3, 5]), 2, Mode::Multiplicative).unwrap().count, 15);
        assert_eq!(energy(&set(&[1, 2, 4]), 2, Mode::Multiplicative).unwrap().count, 19);
        assert_eq!(energy(&set(&[0, 1]), 2, Mode::Additive).unwrap().count, 6);
        let e = energy(&set(&[1, 2, 3, 4]), 2, Mode::Additive).unwrap();
        assert_eq!(e.count, 44);
        assert!(e.exponent.is_some());
    }

    #[test]
    fn sup_rep_examples() {
        assert_eq!(sup_rep(&set(&[1, 2, 3]), 2, Mode::Additive).unwrap(), 3);
        assert_eq!(sup_rep(&set(&[9]), 4, Mode::Additive).unwrap(), 1);
        assert_eq!(sup_rep(&set(&[1, 2, 5, 11]), 2, Mode::Additive).unwrap(), 2);
    }

    #[test]
    fn mixed_energy_examples() {
        let b = set(&[1, 2, 3]);
        let c = set(&[2, 3, 4]);
        assert_eq!(mixed_energy(&[b.clone(), c], Mode::Additive).unwrap().count, 2);
        let four = vec![b.clone(); 4];
        assert_eq!(
            mixed_energy(&four, Mode::Additive).unwrap().count,
            energy(&b, 2, Mode::Additive).unwrap().count
        );
        let z = IntSet::new(0..=10);
        let m = mixed_energy(&vec![z; 4], Mode::Multiplicative).unwrap();
        assert!(m.count >= 121);
        assert!(matches!(mixed_energy(&[b.clone(), b.clone(), b], Mode::Additive), Err(Error::BadArity(_))));
    }

    #[test]
    fn guards() {
        let a = IntSet::new(0..100);
        assert!(matches!(rep_function(&a, 10, Mode::Additive), Err(Error::Overflow(_))));
        assert_eq!(rep_function(&IntSet::empty(), 2, Mode::Additive), Err(Error::EmptySet));
        assert_eq!(rep_function(&a, 0, Mode::Additive), Err(Error::ZeroArity));
    }

    #[test]
    fn counterexample_sets_have_large_energy() {
        use crate::set::Generator;
        for n in 4..=8 {
            let a = Generator::Mixed { n }.generate().unwrap();
            let cube = Integer::from(a.len()).pow(3);
            let e = energy(&a, 2, Mode::Additive).unwrap().count;
            let m = energy(&a, 2, Mode::Multiplicative).unwrap().count;
            assert!(Integer::from(16) * &e >= cube, "N={n}");
            assert!(Integer::from(32) * &m >= cube, "N={n}");
        }
    }

    fn small_set() -> impl Strategy<Value = IntSet> {
        prop::collection::vec(-60i64..60, 1..9).prop_map(IntSet::new)
    }

    proptest! {
        #[test]
        fn rep_identities(a in small_set(), s in 1u32..5, mul in any::<bool>()) {
            let mode = if mul { Mode::Multiplicative } else { Mode::Additive };
            let r = rep_function(&a, s, mode).unwrap();
            prop_assert_eq!(r.total(), Integer::from(a.len()).pow(s));
            prop_assert!(r.iter().all(|(_, c)| c >= 1));
            prop_assert_eq!(r.sum_squares(), energy(&a, s, mode).unwrap().count);
            if mode == Mode::Additive {
                prop_assert_eq!(r.support_set(), crate::set::iterated_sumset(&a, s, 0).unwrap());
            }
        }

        #[test]
        fn convolution_recursion(a in small_set(), s in 2u32..5) {
            let r = rep_function(&a, s, Mode::Additive).unwrap();
            let prev = rep_function(&a, s - 1, Mode::Additive).unwrap();
            for (n, c) in r.iter() {
                let direct: u64 = prev.iter().map(|(m, c)| if a.contains(&(n - m).complete()) { c } else { 0 }).sum();
                prop_assert_eq!(c, direct);
            }
        }

        #[test]
        fn energy_bounds(a in small_set(), s in 1u32..4) {
            let n = Integer::from(a.len());
            for mode in [Mode::Additive, Mode::Multiplicative] {
                let e = energy(&a, s, mode).unwrap().count;
                prop_assert!(e >= n.clone().pow(s));
                // zero breaks the trivial bound: 0·x = 0·y for all x, y
                if mode == Mode::Additive || !a.contains_zero() {
                    prop_assert!(e <= n.clone().pow(2 * s - 1));
                }
            }
        }

        #[test]
        fn affine_invariance(a in small_set(), c in -9i64..9, d in -50i64..50, s in 1u32..4) {
            prop_assume!(c != 0);
            let b = a.affine(&Integer::from(c), &Integer::from(d)).unwrap();
            prop_assert_eq!(energy(&a, s, Mode::Additive).unwrap().count, energy(&b, s, Mode::Additive).unwrap().count);
        }

        #[test]
        fn sidon_identity(v in prop::collection::btree_set(0u32..20, 1..7)) {
            // powers of two are Sidon: every sum a+b determines {a,b}
            let a = IntSet::new(v.iter().map(|&i| Integer::from(1) << i));
            let n = Integer::from(a.len());
            let expected = Integer::from(2) * n.clone() * &n - n;
            prop_assert_eq!(energy(&a, 2, Mode::Additive).unwrap().count, expected);
        }

        #[test]
        fn mixed_energy_of_two_sets_is_intersection(b in small_set(), c in small_set()) {
            let e = mixed_energy(&[b.clone(), c.clone()], Mode::Additive).unwrap().count;
            prop_assert_eq!(e, Integer::from(b.intersection(&c).len()));
        }
    }
}
