use std::cmp::Ordering;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use super::expr::{EvalCtx, ExponentExpr as E};
use crate::error::{Error, Result};
use crate::exact::Interval;

/// Base of the logarithm in `Λ = 6 + 25 log q`; every other log is base 2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LogBase {
    #[default]
    Two,
    Natural,
}

/// One line of a derivation trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub name: String,
    pub formula: String,
    pub value: String,
    pub log2: String,
}

fn entry(name: &str, e: &E, ctx: &EvalCtx) -> Result<TraceEntry> {
    let v = e.eval(ctx)?;
    Ok(TraceEntry { name: name.into(), formula: e.to_string(), value: v.render(), log2: v.render_log2() })
}

#[derive(Clone, Debug)]
pub struct GemnParams {
    pub lambda: E,
    pub l: E,
    pub log2_m: E,
    pub log2_u: E,
    pub log2_s: E,
}

/// `Λ = 6 + 25 log q`, `l = ⌈600qkΛ⌉`, `m = 2^l`, `U = 120m`,
/// `s = 2^{5 + (1+U)(⌈log₂ k⌉+1)}`, all as log₂-space trees.
pub fn gemn_params(k: &Rational, q: u32, base: LogBase) -> Result<GemnParams> {
    if *k < 1 {
        return Err(Error::BadParams("k must be at least 1".into()));
    }
    if q < 2 || q % 2 == 1 {
        return Err(Error::BadParams("q must be even and at least 2".into()));
    }
    let log_q = match base {
        LogBase::Two => E::int(q).log2(),
        LogBase::Natural => E::int(q).ln(),
    };
    let lambda = E::add(vec![E::int(6), E::mul(vec![E::int(25), log_q])]);
    let l = E::mul(vec![E::int(600), E::int(q), E::rat(k.clone()), lambda.clone()]).ceil();
    let log2_m = l.clone();
    let log2_u = E::add(vec![E::int(120).log2(), l.clone()]);
    let u = E::mul(vec![E::int(120), l.clone().pow2()]);
    let log2_s = tower_exponent(u, k);
    Ok(GemnParams { lambda, l, log2_m, log2_u, log2_s })
}

/// `5 + (1 + u)(⌈log₂ k⌉ + 1)`
fn tower_exponent(u: E, k: &Rational) -> E {
    let tail = E::add(vec![E::rat(k.clone()).log2().ceil(), E::int(1)]);
    E::add(vec![E::int(5), E::mul(vec![E::add(vec![E::int(1), u]), tail])])
}

impl GemnParams {
    pub fn trace(&self, ctx: &EvalCtx) -> Result<Vec<TraceEntry>> {
        Ok(vec![
            entry("Lambda", &self.lambda, ctx)?,
            entry("l", &self.l, ctx)?,
            entry("log2_m", &self.log2_m, ctx)?,
            entry("log2_U", &self.log2_u, ctx)?,
            entry("log2_s", &self.log2_s, ctx)?,
        ])
    }
}

#[derive(Clone, Debug)]
pub struct EricParams {
    pub k: Rational,
    pub log2_s2: E,
    pub log2_u1: E,
    pub log2_s1: E,
}

/// `k = b/30`, `s₂ = 2^{5+(1+120m)(⌈log₂k⌉+1)}`, `U₁ = 500⌈k⌉s₂`,
/// `s₁ = 2^{5+(1+U₁)(⌈log₂k⌉+1)}`.
pub fn eric_params(b: &Rational, m: u32) -> Result<EricParams> {
    if *b < 30 {
        return Err(Error::BadParams("b must be at least 30".into()));
    }
    if m == 0 {
        return Err(Error::BadParams("m must be positive".into()));
    }
    let k = Rational::from(b / 30u32);
    let log2_s2 = tower_exponent(E::int(120u64 * u64::from(m)), &k);
    let coeff = E::mul(vec![E::int(500), E::rat(k.clone()).ceil()]);
    let log2_u1 = E::add(vec![coeff.clone().log2(), log2_s2.clone()]);
    let u1 = E::mul(vec![coeff, log2_s2.clone().pow2()]);
    let log2_s1 = tower_exponent(u1, &k);
    Ok(EricParams { k, log2_s2, log2_u1, log2_s1 })
}

impl EricParams {
    pub fn trace(&self, ctx: &EvalCtx) -> Result<Vec<TraceEntry>> {
        Ok(vec![
            entry("k", &E::rat(self.k.clone()), ctx)?,
            entry("log2_s2", &self.log2_s2, ctx)?,
            entry("log2_U1", &self.log2_u1, ctx)?,
            entry("log2_s1", &self.log2_s1, ctx)?,
        ])
    }
}

#[derive(Clone, Debug)]
pub struct RtpConstants {
    pub t_k: Integer,
    /// `log₂(1 + 1/T_k)`
    pub eta_k: Interval,
}

/// `T_k = 2(82k + 82(2^k − k − 1) + 240·2^k)` and `η_k = log₂(1 + 1/T_k)`.
pub fn rtp_constants(k: u32, prec: u32) -> Result<RtpConstants> {
    if k < 2 {
        return Err(Error::BadParams("k must be at least 2".into()));
    }
    let two_k: Integer = Integer::from(1) << k;
    let middle: Integer = Integer::from(82) * (two_k.clone() - k - 1u32);
    let sum: Integer = Integer::from(82 * k) + middle + Integer::from(240) * two_k;
    let t_k: Integer = sum * 2u32;
    // log1p keeps full relative precision for tiny 1/T
    let x = Rational::from((Integer::from(1), t_k.clone()));
    let xi = Interval::from_rational(prec, &x);
    let ln1p = Interval {
        lo: Float::with_val_round(prec, xi.lo.ln_1p_ref(), Round::Down).0,
        hi: Float::with_val_round(prec, xi.hi.ln_1p_ref(), Round::Up).0,
    };
    let ln2 = Interval::from_int(prec, &Integer::from(2)).ln()?;
    Ok(RtpConstants { t_k, eta_k: ln1p.div(&ln2)? })
}

/// `2s − k + (4k−4)·s^{−η_k}`.
pub fn rtp_exponent_bound(k: u32, s: &Integer, prec: u32) -> Result<Interval> {
    if k < 2 || *s < 4 {
        return Err(Error::BadParams("need k >= 2 and s >= 4".into()));
    }
    let eta = rtp_constants(k, prec)?.eta_k;
    let log_s = Interval::from_int(prec, s).log2()?;
    let decay = log_s.mul(&eta).neg().exp2()?;
    let coeff = Interval::from_int(prec, &Integer::from(4 * k - 4));
    let base = Interval::from_int(prec, &(Integer::from(2) * s - k));
    Ok(base.add(&coeff.mul(&decay)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThrtTrace {
    pub r: u32,
    pub growth: Rational,
    pub values: Vec<Rational>,
    /// First index whose value reaches `k − 1`.
    pub crossing: Option<usize>,
}

/// The sequence `Λ₀(1 + 1/T_k)^i`, `i = 0..=r`, for `s = 2^{r+1}`.
pub fn thrt_trace(k: u32, lambda0: &Rational, s: &Integer) -> Result<ThrtTrace> {
    if *s < 8 || !s.is_power_of_two() {
        return Err(Error::BadParams("s must be a power of two, at least 8".into()));
    }
    if *lambda0 <= 0 {
        return Err(Error::BadParams("Lambda0 must be positive".into()));
    }
    let r = s.significant_bits() - 2;
    let t = rtp_constants(k, 64)?.t_k;
    let growth = Rational::from((t.clone() + 1u32, t));
    let target = Rational::from(k - 1);
    let mut values = Vec::with_capacity(r as usize + 1);
    let mut v = lambda0.clone();
    for _ in 0..=r {
        values.push(v.clone());
        v *= &growth;
    }
    let crossing = values.iter().position(|x| *x >= target);
    Ok(ThrtTrace { r, growth, values, crossing })
}

#[derive(Clone, Debug)]
pub struct BtaResult {
    pub k: Rational,
    pub q: u32,
    pub certificate: Vec<TraceEntry>,
}

const BISECTION_STEPS: usize = 64;

/// Largest `k ≥ 4` (to 64 bisection steps) whose gemn chain with
/// `q = 10⌈k⌉` has `log₂ s` not exceeding `target`.
pub fn bta_eta(target: &E, ctx: &EvalCtx) -> Result<BtaResult> {
    let goal = target.eval(ctx)?;
    let fits = |k: &Rational| -> Result<bool> {
        let q = q_for(k)?;
        let p = gemn_params(k, q, LogBase::Two)?;
        Ok(p.log2_s.eval(ctx)?.compare(&goal, ctx.prec)? != Ordering::Greater)
    };
    let mut lo = Rational::from(4);
    if !fits(&lo)? {
        return Err(Error::TooSmall);
    }
    let mut hi = Rational::from(8);
    while fits(&hi)? {
        lo = hi.clone();
        hi *= 2;
    }
    for _ in 0..BISECTION_STEPS {
        let mid = Rational::from(&lo + &hi) / 2u32;
        if fits(&mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = q_for(&lo)?;
    let mut certificate = vec![TraceEntry {
        name: "q".into(),
        formula: "10·ceil(k)".into(),
        value: q.to_string(),
        log2: "-".into(),
    }];
    certificate.extend(gemn_params(&lo, q, LogBase::Two)?.trace(ctx)?);
    Ok(BtaResult { k: lo, q, certificate })
}

fn q_for(k: &Rational) -> Result<u32> {
    let c = k.clone().ceil();
    c.numer()
        .to_u32()
        .and_then(|x| x.checked_mul(10))
        .ok_or_else(|| Error::ParameterTooLarge(format!("q = 10·ceil({k})")))
}

/// `2^j` for any integer `j`.
pub fn pow2_rational(j: i32) -> Rational {
    let p = Integer::from(2).pow(j.unsigned_abs());
    if j >= 0 {
        Rational::from(p)
    } else {
        Rational::from((1, p))
    }
}
