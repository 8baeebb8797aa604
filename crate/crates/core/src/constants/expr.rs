//! Expression trees for tower-sized parameters. A node evaluates to an exact
//! rational when that stays below a configured width, and always to a
//! certified interval (itself possibly huge, but inside the float range).

use std::cmp::Ordering;
use std::fmt;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::exact::{format_float, Interval, DEFAULT_PREC, MAX_EXACT_BITS};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExponentExpr {
    Int(Integer),
    Rat(Rational),
    Add(Vec<ExponentExpr>),
    Mul(Vec<ExponentExpr>),
    Ceil(Box<ExponentExpr>),
    Log2(Box<ExponentExpr>),
    /// Natural log, only for the alternative reading of `log q`.
    Ln(Box<ExponentExpr>),
    Pow2(Box<ExponentExpr>),
}

use ExponentExpr as E;

impl ExponentExpr {
    pub fn int(x: impl Into<Integer>) -> Self {
        E::Int(x.into())
    }
    pub fn rat(x: Rational) -> Self {
        E::Rat(x)
    }
    pub fn add(terms: Vec<ExponentExpr>) -> Self {
        E::Add(terms)
    }
    pub fn mul(terms: Vec<ExponentExpr>) -> Self {
        E::Mul(terms)
    }
    pub fn ceil(self) -> Self {
        E::Ceil(Box::new(self))
    }
    pub fn log2(self) -> Self {
        E::Log2(Box::new(self))
    }
    pub fn ln(self) -> Self {
        E::Ln(Box::new(self))
    }
    pub fn pow2(self) -> Self {
        E::Pow2(Box::new(self))
    }

    pub fn eval(&self, ctx: &EvalCtx) -> Result<Value> {
        let p = ctx.prec;
        Ok(match self {
            E::Int(x) => Value { exact: Some(Rational::from(x)), iv: Interval::from_int(p, x) },
            E::Rat(x) => Value { exact: Some(x.clone()), iv: Interval::from_rational(p, x) },
            E::Add(ts) | E::Mul(ts) => {
                let is_add = matches!(self, E::Add(_));
                let mut vals = ts.iter().map(|t| t.eval(ctx));
                let first = vals.next().ok_or_else(|| Error::BadParams("empty expression".into()))??;
                let mut exact = first.exact;
                let mut iv = first.iv;
                for v in vals {
                    let v = v?;
                    exact = match (exact, v.exact) {
                        (Some(a), Some(b)) if is_add => Some(a + b),
                        (Some(a), Some(b)) => {
                            let bits = a.numer().significant_bits() as u64 + b.numer().significant_bits() as u64;
                            (bits <= ctx.exact_bits).then(|| a * b)
                        }
                        _ => None,
                    };
                    iv = if is_add { iv.add(&v.iv) } else { iv.mul(&v.iv) };
                }
                Value { exact, iv }
            }
            E::Ceil(x) => {
                let v = x.eval(ctx)?;
                let n = match &v.exact {
                    Some(r) => r.clone().ceil().numer().clone(),
                    None => v.iv.ceil()?,
                };
                integer_value(p, n)
            }
            E::Log2(x) => {
                let v = x.eval(ctx)?;
                if let Some(k) = v.exact.as_ref().and_then(exact_log2) {
                    integer_value(p, Integer::from(k))
                } else {
                    Value { exact: None, iv: v.iv.log2()? }
                }
            }
            E::Ln(x) => {
                let v = x.eval(ctx)?;
                if v.exact.as_ref().is_some_and(|r| *r == 1) {
                    integer_value(p, Integer::ZERO)
                } else {
                    Value { exact: None, iv: v.iv.ln()? }
                }
            }
            E::Pow2(x) => {
                let v = x.eval(ctx)?;
                let iv = v.iv.exp2()?;
                let exact = v.exact.as_ref().and_then(|r| {
                    if *r.denom() != 1 {
                        return None;
                    }
                    let n = r.numer().to_i64()?;
                    if n.unsigned_abs() > ctx.exact_bits {
                        return None;
                    }
                    let pow = Integer::from(1) << (n.unsigned_abs() as u32);
                    Some(if n >= 0 { Rational::from(pow) } else { Rational::from((1, pow)) })
                });
                Value { exact, iv }
            }
        })
    }

    /// Exact where possible, certified-interval otherwise.
    pub fn compare(&self, other: &ExponentExpr, ctx: &EvalCtx) -> Result<Ordering> {
        self.eval(ctx)?.compare(&other.eval(ctx)?, ctx.prec)
    }
}

fn integer_value(prec: u32, n: Integer) -> Value {
    Value { iv: Interval::from_int(prec, &n), exact: Some(Rational::from(n)) }
}

/// `log₂ r` when `r` is an exact power of two.
fn exact_log2(r: &Rational) -> Option<i64> {
    let is_pow2 = |x: &Integer| *x > 0 && x.is_power_of_two();
    if *r.denom() == 1 && is_pow2(r.numer()) {
        Some(i64::from(r.numer().significant_bits()) - 1)
    } else if *r.numer() == 1 && is_pow2(r.denom()) {
        Some(1 - i64::from(r.denom().significant_bits()))
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EvalCtx {
    pub prec: u32,
    pub exact_bits: u64,
}

impl Default for EvalCtx {
    fn default() -> Self {
        EvalCtx { prec: DEFAULT_PREC, exact_bits: MAX_EXACT_BITS }
    }
}

#[derive(Clone, Debug)]
pub struct Value {
    pub exact: Option<Rational>,
    pub iv: Interval,
}

impl Value {
    pub fn compare(&self, other: &Value, prec: u32) -> Result<Ordering> {
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            return Ok(a.cmp(b));
        }
        self.iv.cmp(&other.iv).ok_or(Error::Undecided(prec))
    }

    /// Decimal digits when the exact value is at most 512 bits, otherwise a
    /// high-precision approximation.
    pub fn render(&self) -> String {
        match &self.exact {
            Some(r) if r.numer().significant_bits() <= 512 && r.denom().significant_bits() <= 512 => r.to_string(),
            _ => format!("~{}", format_float(&self.iv.mid(), 25)),
        }
    }

    /// `log₂` of the value, for reports on tower-sized numbers.
    pub fn render_log2(&self) -> String {
        match self.iv.log2() {
            Ok(l) => format_float(&l.mid(), 25),
            Err(_) => "-".into(),
        }
    }
}

impl fmt::Display for ExponentExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, ts: &[ExponentExpr], sep: &str| -> fmt::Result {
            f.write_str("(")?;
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")
        };
        match self {
            E::Int(x) => write!(f, "{x}"),
            E::Rat(x) => write!(f, "{x}"),
            E::Add(ts) => join(f, ts, " + "),
            E::Mul(ts) => join(f, ts, "·"),
            E::Ceil(x) => write!(f, "ceil({x})"),
            E::Log2(x) => write!(f, "log2({x})"),
            E::Ln(x) => write!(f, "ln({x})"),
            E::Pow2(x) => write!(f, "2^{x}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_logs_and_ceils() {
        let ctx = EvalCtx::default();
        let v = E::int(1024).log2().eval(&ctx).unwrap();
        assert_eq!(v.exact.unwrap(), 10);
        let v = E::rat(Rational::from((1, 8))).log2().eval(&ctx).unwrap();
        assert_eq!(v.exact.unwrap(), -3);
        let v = E::int(3).log2().ceil().eval(&ctx).unwrap();
        assert_eq!(v.exact.unwrap(), 2);
        let v = E::int(30).log2().eval(&ctx).unwrap();
        assert!(v.exact.is_none());
        assert!(v.iv.lo < 4.907 && v.iv.hi > 4.906);
    }

    #[test]
    fn towers_fall_back_to_intervals() {
        let ctx = EvalCtx { prec: 128, exact_bits: 1000 };
        let big = E::int(5000).pow2();
        let v = big.eval(&ctx).unwrap();
        assert!(v.exact.is_none());
        let bigger = E::add(vec![big.clone(), E::int(1)]);
        assert_eq!(bigger.compare(&big, &ctx), Err(Error::Undecided(128)));
        let much = E::int(5001).pow2();
        assert_eq!(much.compare(&big, &ctx).unwrap(), Ordering::Greater);
        // beyond the float exponent range
        assert!(matches!(E::int(1i64 << 40).pow2().eval(&ctx), Err(Error::ParameterTooLarge(_))));
    }

    fn leaf() -> impl Strategy<Value = ExponentExpr> {
        prop_oneof![
            (1i64..200).prop_map(E::int),
            (1i64..50, 1i64..20).prop_map(|(a, b)| E::rat(Rational::from((a, b)))),
        ]
    }

    fn tree() -> impl Strategy<Value = ExponentExpr> {
        leaf().prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..3).prop_map(E::add),
                prop::collection::vec(inner.clone(), 1..3).prop_map(E::mul),
                inner.clone().prop_map(|x| E::add(vec![x, E::int(1)]).log2()),
                inner.clone().prop_map(ExponentExpr::ceil),
                (0i64..40).prop_map(|n| E::int(n).pow2()),
            ]
        })
    }

    proptest! {
        #[test]
        fn exact_value_lies_in_enclosure(e in tree()) {
            let ctx = EvalCtx::default();
            let v = e.eval(&ctx).unwrap();
            if let Some(x) = &v.exact {
                if x.numer().significant_bits() <= 512 {
                    prop_assert!(v.iv.contains_rational(x));
                }
            }
            prop_assert!(v.iv.lo <= v.iv.hi);
        }
    }
}
