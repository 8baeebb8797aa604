//! Exact comparisons of products of rational powers, plus outward-rounded
//! intervals for the handful of quantities that are genuinely irrational.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rug::float::Round;
use rug::ops::{AssignRound, Pow};
use rug::{Complete, Float, Integer, Rational};

use crate::error::{Error, Result};

pub const DEFAULT_PREC: u32 = 256;

/// Exact integers above this many bits are refused instead of materialised.
pub const MAX_EXACT_BITS: u64 = 1 << 28;

/// `coeff · Π baseᵢ^{expᵢ}` with positive integer bases and rational
/// exponents. Comparisons clear the exponent denominators by raising both
/// sides to a common power, so they are exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerProduct {
    coeff: Rational,
    factors: BTreeMap<Integer, Rational>,
}

impl PowerProduct {
    pub fn new(coeff: impl Into<Rational>) -> Self {
        let coeff = coeff.into();
        assert!(coeff >= 0, "power products are non-negative");
        PowerProduct { coeff, factors: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::new(1)
    }

    /// Multiplies in `base^exp`.
    pub fn pow(mut self, base: impl Into<Integer>, exp: impl Into<Rational>) -> Self {
        let base = base.into();
        let exp = exp.into();
        assert!(base > 0, "bases must be positive");
        if base == 1 || exp == 0 {
            return self;
        }
        let e = self.factors.entry(base.clone()).or_default();
        *e += exp;
        if *e == 0 {
            self.factors.remove(&base);
        }
        self
    }

    pub fn scale(mut self, c: impl Into<Rational>) -> Self {
        let c = c.into();
        assert!(c >= 0);
        self.coeff *= c;
        self
    }

    pub fn mul(mut self, other: &PowerProduct) -> Self {
        self.coeff *= &other.coeff;
        for (b, e) in &other.factors {
            self = self.pow(b.clone(), e.clone());
        }
        self
    }

    pub fn recip(&self) -> Self {
        assert!(self.coeff != 0);
        let mut out = PowerProduct::new(Rational::from(self.coeff.recip_ref()));
        for (b, e) in &self.factors {
            out = out.pow(b.clone(), Rational::from(-e));
        }
        out
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    /// The exact value when every exponent is an integer.
    pub fn exact(&self) -> Option<Rational> {
        let mut v = self.coeff.clone();
        for (b, e) in &self.factors {
            if *e.denom() != 1 {
                return None;
            }
            let n = e.numer().to_i64()?;
            if (n.unsigned_abs()).saturating_mul(u64::from(b.significant_bits())) > MAX_EXACT_BITS {
                return None;
            }
            let p = Rational::from(b.clone().pow(n.unsigned_abs() as u32));
            if n >= 0 {
                v *= p;
            } else {
                v /= p;
            }
        }
        Some(v)
    }

    /// Exact three-way comparison.
    pub fn cmp_exact(&self, other: &PowerProduct) -> Result<Ordering> {
        match (self.coeff == 0, other.coeff == 0) {
            (true, true) => return Ok(Ordering::Equal),
            (true, false) => return Ok(Ordering::Less),
            (false, true) => return Ok(Ordering::Greater),
            _ => {}
        }
        let ratio = self.clone().mul(&other.recip());
        let mut d = Integer::from(1);
        for e in ratio.factors.values() {
            d.lcm_mut(e.denom());
        }
        let d_u = d
            .to_u32()
            .ok_or_else(|| Error::ParameterTooLarge("exponent denominators".into()))?;
        let mut bits = u64::from(ratio.coeff.numer().significant_bits())
            .max(u64::from(ratio.coeff.denom().significant_bits()))
            * u64::from(d_u);
        let mut left = Integer::from(1);
        let mut right = Integer::from(1);
        let mut scaled = Vec::new();
        for (b, e) in &ratio.factors {
            let k = (e * &d).complete();
            debug_assert_eq!(*k.denom(), 1);
            let k = k.numer().clone();
            let mag = k.clone().abs();
            let mag = mag
                .to_u64()
                .ok_or_else(|| Error::ParameterTooLarge("exponent".into()))?;
            bits = bits.saturating_add(mag.saturating_mul(u64::from(b.significant_bits())));
            scaled.push((b, k.cmp0(), mag));
        }
        if bits > MAX_EXACT_BITS {
            return Err(Error::ParameterTooLarge(format!("exact comparison needs ~{bits} bits")));
        }
        for (b, sign, mag) in scaled {
            let p = b.clone().pow(mag as u32);
            if sign == Ordering::Greater {
                left *= p;
            } else {
                right *= p;
            }
        }
        // c^d · left  vs  right   with c = p/q  ⇔  p^d · left  vs  q^d · right
        left *= ratio.coeff.numer().clone().pow(d_u);
        right *= ratio.coeff.denom().clone().pow(d_u);
        Ok(left.cmp(&right))
    }

    /// Smallest integer not below the value, decided exactly.
    pub fn ceil_int(&self) -> Result<Integer> {
        let mut m = self.enclose(DEFAULT_PREC)?.mid().floor().to_integer().expect("finite");
        let at_least = |m: &Integer| -> Result<bool> {
            Ok(PowerProduct::new(m.clone()).cmp_exact(self)? != Ordering::Less)
        };
        while !at_least(&m)? {
            m += 1;
        }
        while m > 0 && at_least(&Integer::from(&m - 1))? {
            m -= 1;
        }
        Ok(m)
    }

    /// Outward-rounded enclosure.
    pub fn enclose(&self, prec: u32) -> Result<Interval> {
        if self.coeff == 0 {
            return Ok(Interval::from_int(prec, &Integer::ZERO));
        }
        let mut log = Interval::from_rational(prec, &self.coeff).log2()?;
        for (b, e) in &self.factors {
            let lb = Interval::from_int(prec, b).log2()?;
            log = log.add(&lb.mul(&Interval::from_rational(prec, e)));
        }
        log.exp2()
    }
}

impl fmt::Display for PowerProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.exact() {
            return write!(f, "{v}");
        }
        write!(f, "{}", self.coeff)?;
        for (b, e) in &self.factors {
            write!(f, "·{b}^({e})")?;
        }
        Ok(())
    }
}

impl From<Integer> for PowerProduct {
    fn from(x: Integer) -> Self {
        PowerProduct::new(x)
    }
}

impl From<Rational> for PowerProduct {
    fn from(x: Rational) -> Self {
        PowerProduct::new(x)
    }
}

/// Closed interval `[lo, hi]` with directed rounding on every operation.
#[derive(Clone, Debug)]
pub struct Interval {
    pub lo: Float,
    pub hi: Float,
}

fn down<T>(prec: u32, v: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Down).0
}

fn up<T>(prec: u32, v: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Up).0
}

impl Interval {
    pub fn from_int(prec: u32, x: &Integer) -> Self {
        Interval { lo: down(prec, x), hi: up(prec, x) }
    }

    pub fn from_rational(prec: u32, x: &Rational) -> Self {
        Interval { lo: down(prec, x), hi: up(prec, x) }
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn add(&self, o: &Interval) -> Interval {
        let p = self.prec().max(o.prec());
        Interval { lo: down(p, &self.lo + &o.lo), hi: up(p, &self.hi + &o.hi) }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        let p = self.prec().max(o.prec());
        Interval { lo: down(p, &self.lo - &o.hi), hi: up(p, &self.hi - &o.lo) }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: Float::with_val(self.prec(), -&self.hi), hi: Float::with_val(self.prec(), -&self.lo) }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let p = self.prec().max(o.prec());
        let pairs = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let lo = pairs.iter().map(|(a, b)| down(p, *a * *b)).reduce(|x, y| x.min(&y)).unwrap();
        let hi = pairs.iter().map(|(a, b)| up(p, *a * *b)).reduce(|x, y| x.max(&y)).unwrap();
        Interval { lo, hi }
    }

    /// Division by an interval that excludes zero.
    pub fn div(&self, o: &Interval) -> Result<Interval> {
        if o.lo <= 0 && o.hi >= 0 {
            return Err(Error::BadParams("interval division by a range containing 0".into()));
        }
        let p = self.prec().max(o.prec());
        let inv = Interval { lo: down(p, 1 / &o.hi), hi: up(p, 1 / &o.lo) };
        Ok(self.mul(&inv))
    }

    pub fn log2(&self) -> Result<Interval> {
        if self.lo <= 0 {
            return Err(Error::BadParams("logarithm of a non-positive value".into()));
        }
        let p = self.prec();
        Ok(Interval { lo: down(p, self.lo.log2_ref()), hi: up(p, self.hi.log2_ref()) })
    }

    pub fn ln(&self) -> Result<Interval> {
        if self.lo <= 0 {
            return Err(Error::BadParams("logarithm of a non-positive value".into()));
        }
        let p = self.prec();
        Ok(Interval { lo: down(p, self.lo.ln_ref()), hi: up(p, self.hi.ln_ref()) })
    }

    pub fn exp2(&self) -> Result<Interval> {
        let p = self.prec();
        let out = Interval { lo: down(p, self.lo.exp2_ref()), hi: up(p, self.hi.exp2_ref()) };
        if out.hi.is_infinite() || out.lo.is_infinite() {
            return Err(Error::ParameterTooLarge("2^x exceeds the float exponent range".into()));
        }
        Ok(out)
    }

    /// `self^e` for a positive base.
    pub fn pow_rational(&self, e: &Rational) -> Result<Interval> {
        self.log2()?.mul(&Interval::from_rational(self.prec(), e)).exp2()
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        self.lo <= *x && self.hi >= *x
    }

    /// `None` when the intervals overlap.
    pub fn cmp(&self, o: &Interval) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if self.lo > o.hi {
            Some(Ordering::Greater)
        } else if self.lo == self.hi && o.lo == o.hi && self.lo == o.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn cmp_rational(&self, x: &Rational) -> Option<Ordering> {
        self.cmp(&Interval::from_rational(self.prec(), x))
    }

    pub fn ceil(&self) -> Result<Integer> {
        let lo = self.lo.clone().ceil();
        let hi = self.hi.clone().ceil();
        if lo != hi {
            return Err(Error::Undecided(self.prec()));
        }
        Ok(lo.to_integer().expect("finite"))
    }

    pub fn floor(&self) -> Result<Integer> {
        let lo = self.lo.clone().floor();
        let hi = self.hi.clone().floor();
        if lo != hi {
            return Err(Error::Undecided(self.prec()));
        }
        Ok(lo.to_integer().expect("finite"))
    }

    pub fn mid(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, &self.lo + &self.hi) / 2
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid().to_f64()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_float(&self.mid(), 30))
    }
}

/// Decimal rendering with `digits` significant digits.
pub fn format_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    x.to_string_radix(10, Some(digits))
}

/// Parses `"3"`, `"-7/4"` or a plain decimal like `"0.05"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::BadParams(format!("not a number: `{text}`"));
    if t.contains('/') {
        return Rational::from_str_radix(t, 10).map_err(|_| bad());
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num = Integer::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10).map_err(|_| bad())?;
    let den = Integer::from(10).pow(frac.len() as u32);
    let r = Rational::from((num, den));
    Ok(if neg { -r } else { r })
}

/// `a/b` as a rational exponent; panics on `b = 0`.
pub fn ratio(a: i64, b: i64) -> Rational {
    Rational::from((a, b))
}
