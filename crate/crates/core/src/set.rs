//! Finite sets of exact integers and rationals, iterated sum/product sets and
//! the generators used throughout the experiments.

use std::fmt;

use rug::ops::Pow;
use rug::{Complete, Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Sorted, duplicate-free set of integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntSet(Vec<Integer>);

/// Sorted, duplicate-free set of rationals (rug keeps them reduced).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RatSet(Vec<Rational>);

impl IntSet {
    pub fn new<I, T>(values: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<Integer>,
    {
        let mut v: Vec<Integer> = values.into_iter().map(Into::into).collect();
        v.sort_unstable();
        v.dedup();
        IntSet(v)
    }

    /// Wraps an already sorted, deduplicated vector.
    pub(crate) fn from_sorted(v: Vec<Integer>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        IntSet(v)
    }

    pub fn empty() -> Self {
        IntSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Integer> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Integer] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Integer> {
        self.0
    }

    pub fn contains(&self, x: &Integer) -> bool {
        self.0.binary_search(x).is_ok()
    }

    pub fn index_of(&self, x: &Integer) -> Option<usize> {
        self.0.binary_search(x).ok()
    }

    pub fn min(&self) -> Option<&Integer> {
        self.0.first()
    }

    pub fn max(&self) -> Option<&Integer> {
        self.0.last()
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Integer::ZERO)
    }

    pub fn union(&self, other: &IntSet) -> IntSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.0, &other.0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        IntSet(out)
    }

    pub fn intersection(&self, other: &IntSet) -> IntSet {
        IntSet(self.0.iter().filter(|x| other.contains(x)).cloned().collect())
    }

    pub fn difference(&self, other: &IntSet) -> IntSet {
        IntSet(self.0.iter().filter(|x| !other.contains(x)).cloned().collect())
    }

    pub fn is_disjoint(&self, other: &IntSet) -> bool {
        self.0.iter().all(|x| !other.contains(x))
    }

    pub fn is_subset(&self, other: &IntSet) -> bool {
        self.0.iter().all(|x| other.contains(x))
    }

    /// `{c·a + d : a ∈ A}`; `c` must be non-zero.
    pub fn affine(&self, c: &Integer, d: &Integer) -> Result<IntSet> {
        if *c == 0 {
            return Err(Error::BadParams("dilation factor must be non-zero".into()));
        }
        Ok(IntSet::new(self.0.iter().map(|a| (c * a).complete() + d)))
    }

    pub fn negate(&self) -> IntSet {
        IntSet(self.0.iter().rev().map(|a| (-a).complete()).collect())
    }

    /// Splits into (positive, negative, zero) parts.
    pub fn sign_split(&self) -> (IntSet, IntSet, IntSet) {
        let neg = self.0.iter().filter(|a| **a < 0).cloned().collect();
        let zero = self.0.iter().filter(|a| **a == 0).cloned().collect();
        let pos = self.0.iter().filter(|a| **a > 0).cloned().collect();
        (IntSet(pos), IntSet(neg), IntSet(zero))
    }

    /// `A ⊕ B` for an arbitrary binary operation.
    pub fn combine<F>(&self, other: &IntSet, op: F) -> IntSet
    where
        F: Fn(&Integer, &Integer) -> Integer,
    {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.0 {
            for b in &other.0 {
                out.push(op(a, b));
            }
        }
        IntSet::new(out)
    }

    pub fn sumset(&self, other: &IntSet) -> IntSet {
        self.combine(other, |a, b| (a + b).complete())
    }

    pub fn product_set(&self, other: &IntSet) -> IntSet {
        self.combine(other, |a, b| (a * b).complete())
    }

    /// Canonical text form, used for digests.
    pub fn canonical(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        format!("{{{}}}", parts.join(","))
    }
}

impl fmt::Display for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl<'a> IntoIterator for &'a IntSet {
    type Item = &'a Integer;
    type IntoIter = std::slice::Iter<'a, Integer>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl FromIterator<Integer> for IntSet {
    fn from_iter<T: IntoIterator<Item = Integer>>(iter: T) -> Self {
        IntSet::new(iter)
    }
}

impl Serialize for IntSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|x| x.to_string()))
    }
}

impl<'de> Deserialize<'de> for IntSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        let mut v = Vec::with_capacity(raw.len());
        for s in raw {
            let x = Integer::from_str_radix(s.trim(), 10).map_err(serde::de::Error::custom)?;
            v.push(x);
        }
        Ok(IntSet::new(v))
    }
}

impl RatSet {
    pub fn new<I: IntoIterator<Item = Rational>>(values: I) -> Self {
        let mut v: Vec<Rational> = values.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        RatSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.0.binary_search(x).is_ok()
    }
}

impl fmt::Display for RatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for RatSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|x| x.to_string()))
    }
}

fn check_arities(a: &IntSet, m: u32, n: u32) -> Result<()> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if m == 0 && n == 0 {
        return Err(Error::ZeroArity);
    }
    Ok(())
}

fn fold(a: &IntSet, times: u32, identity: i64, op: fn(&Integer, &Integer) -> Integer) -> IntSet {
    let mut acc = IntSet::new([identity]);
    for _ in 0..times {
        acc = acc.combine(a, op);
    }
    acc
}

/// `mA − nA`.
pub fn iterated_sumset(a: &IntSet, m: u32, n: u32) -> Result<IntSet> {
    check_arities(a, m, n)?;
    let plus = fold(a, m, 0, |x, y| (x + y).complete());
    let minus = fold(a, n, 0, |x, y| (x + y).complete());
    Ok(plus.combine(&minus, |x, y| (x - y).complete()))
}

/// `A^(m) / A^(n)` as exact rationals.
pub fn iterated_product_set(a: &IntSet, m: u32, n: u32) -> Result<RatSet> {
    check_arities(a, m, n)?;
    if n > 0 && a.contains_zero() {
        return Err(Error::DivisionByZeroElement);
    }
    let num = fold(a, m, 1, |x, y| (x * y).complete());
    if n == 0 {
        return Ok(RatSet::new(num.iter().map(Rational::from)));
    }
    let den = fold(a, n, 1, |x, y| (x * y).complete());
    let mut out = Vec::with_capacity(num.len() * den.len());
    for p in &num {
        for q in &den {
            out.push(Rational::from((p, q)));
        }
    }
    Ok(RatSet::new(out))
}

/// Canonical example sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Ap { start: i64, step: i64, n: u32 },
    Gp { start: i64, ratio: i64, n: u32 },
    /// `{1, 2^k, …, N^k}`
    Powers { k: u32, n: u32 },
    /// `{1..N} ∪ {N^2, …, N^N}`
    Mixed { n: u32 },
    Interval { n: u32 },
    /// `{p(i) : i ∈ I}`, coefficients in increasing degree.
    PolyImage { coeffs: Vec<i64>, domain: IntSet },
}

impl Generator {
    pub fn generate(&self) -> Result<IntSet> {
        let positive = |n: u32| {
            if n == 0 {
                Err(Error::BadParams("N must be positive".into()))
            } else {
                Ok(())
            }
        };
        match self {
            Generator::Ap { start, step, n } => {
                positive(*n)?;
                if *step == 0 {
                    return Err(Error::BadParams("step must be non-zero".into()));
                }
                Ok(IntSet::new(
                    (0..*n).map(|i| Integer::from(*start) + Integer::from(*step) * i),
                ))
            }
            Generator::Gp { start, ratio, n } => {
                positive(*n)?;
                if *ratio == 0 {
                    return Err(Error::BadParams("ratio must be non-zero".into()));
                }
                Ok(IntSet::new(
                    (0..*n).map(|i| Integer::from(*start) * Integer::from(*ratio).pow(i)),
                ))
            }
            Generator::Powers { k, n } => {
                positive(*n)?;
                if *k == 0 {
                    return Err(Error::BadParams("exponent must be positive".into()));
                }
                Ok(IntSet::new((1..=*n).map(|i| Integer::from(i).pow(*k))))
            }
            Generator::Mixed { n } => {
                positive(*n)?;
                let base = Integer::from(*n);
                let ap = (1..=*n).map(Integer::from);
                let gp = (2..=*n).map(|j| base.clone().pow(j));
                Ok(IntSet::new(ap.chain(gp)))
            }
            Generator::Interval { n } => {
                positive(*n)?;
                Ok(IntSet::new((1..=*n).map(Integer::from)))
            }
            Generator::PolyImage { coeffs, domain } => {
                if coeffs.is_empty() {
                    return Err(Error::BadParams("polynomial needs coefficients".into()));
                }
                if domain.is_empty() {
                    return Err(Error::EmptySet);
                }
                Ok(IntSet::new(domain.iter().map(|x| {
                    // Horner
                    coeffs
                        .iter()
                        .rev()
                        .fold(Integer::new(), |acc, c| acc * x + Integer::from(*c))
                })))
            }
        }
    }
}
