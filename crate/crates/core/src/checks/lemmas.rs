//! The inequality lemmas as executable checks.

use rug::{Integer, Rational};

use super::{CheckReport, Relation, Side};
use crate::energy::{energy, mixed_energy, sup_rep, Mode};
use crate::error::{Error, Result};
use crate::exact::{Interval, PowerProduct, DEFAULT_PREC};
use crate::set::{iterated_product_set, iterated_sumset, Generator, IntSet};

fn sets_key(sets: &[IntSet]) -> String {
    sets.iter().map(IntSet::canonical).collect::<Vec<_>>().join(";")
}

/// `|A^{(s)}|` or `|sA|`.
fn s_fold_size(a: &IntSet, s: u32, mode: Mode) -> Result<usize> {
    Ok(match mode {
        Mode::Additive => iterated_sumset(a, s, 0)?.len(),
        Mode::Multiplicative => iterated_product_set(a, s, 0)?.len(),
    })
}

/// `sup r_s ≤ E_{s/2}` and `E_s ≤ |A|^{2s-2l} E_l`.
pub fn check_young(a: &IntSet, s: u32, l: u32) -> Result<[CheckReport; 2]> {
    if s == 0 || s % 2 == 1 {
        return Err(Error::BadArity(format!("s = {s} must be even")));
    }
    if l == 0 || l >= s {
        return Err(Error::BadParams(format!("need 1 <= l < s, got l = {l}")));
    }
    let key = format!("{}|s={s}|l={l}", a.canonical());
    let sup = sup_rep(a, s, Mode::Additive)?;
    let half = energy(a, s / 2, Mode::Additive)?.count;
    let first = CheckReport::evaluate("young-sup", Side::int(sup), Relation::Le, Side::int(half), &key)?;
    let es = energy(a, s, Mode::Additive)?.count;
    let el = energy(a, l, Mode::Additive)?.count;
    let rhs = PowerProduct::new(el).pow(a.len(), 2 * (s - l));
    let second = CheckReport::evaluate("young-energy", Side::int(es), Relation::Le, Side::Exact(rhs), &key)?;
    Ok([first, second])
}

/// Geometric-mean bound for mixed energies; the multiplicative version
/// carries the extra `2^{2s}` and excludes 0.
pub fn check_holder_mixed(sets: &[IntSet], mode: Mode) -> Result<CheckReport> {
    if mode == Mode::Multiplicative && sets.iter().any(IntSet::contains_zero) {
        return Err(Error::ZeroElement);
    }
    let mixed = mixed_energy(sets, mode)?;
    let s = mixed.arity;
    let e = Rational::from((1, 2 * s));
    let mut rhs = PowerProduct::one();
    for a in sets {
        rhs = rhs.pow(energy(a, s, mode)?.count, e.clone());
    }
    let name = match mode {
        Mode::Additive => "holder-additive",
        Mode::Multiplicative => {
            rhs = rhs.pow(2, 2 * s);
            "holder-multiplicative"
        }
    };
    CheckReport::evaluate(name, Side::int(mixed.count), Relation::Le, Side::Exact(rhs), &sets_key(sets))
}

/// `E_s(∪A_i) ≤ n^{2s-1} Σ E_s(A_i)`, times `2^{2s}` multiplicatively.
pub fn check_union_bound(parts: &[IntSet], s: u32, mode: Mode) -> Result<CheckReport> {
    if parts.is_empty() || parts.iter().any(IntSet::is_empty) {
        return Err(Error::EmptySet);
    }
    for (i, p) in parts.iter().enumerate() {
        if parts[i + 1..].iter().any(|q| !p.is_disjoint(q)) {
            return Err(Error::NotDisjoint);
        }
    }
    if mode == Mode::Multiplicative && parts.iter().any(IntSet::contains_zero) {
        return Err(Error::ZeroElement);
    }
    let union = parts.iter().fold(IntSet::empty(), |acc, p| acc.union(p));
    let lhs = energy(&union, s, mode)?.count;
    let mut total = Integer::new();
    for p in parts {
        total += energy(p, s, mode)?.count;
    }
    let mut rhs = PowerProduct::new(total).pow(parts.len(), 2 * s - 1);
    if mode == Mode::Multiplicative {
        rhs = rhs.pow(2, 2 * s);
    }
    let key = format!("{}|s={s}|{}", sets_key(parts), mode.name());
    CheckReport::evaluate("union-bound", Side::int(lhs), Relation::Le, Side::Exact(rhs), &key)
}

/// Cauchy–Schwarz: `E_s(B,C)² ≤ E_s(B)·E_s(C)`.
pub fn check_mixed_cs(b: &IntSet, c: &IntSet, s: u32, mode: Mode) -> Result<CheckReport> {
    if s == 0 {
        return Err(Error::ZeroArity);
    }
    let mut sets = vec![b.clone(); s as usize];
    sets.extend(std::iter::repeat_n(c.clone(), s as usize));
    let lhs = mixed_energy(&sets, mode)?.count;
    let half = Rational::from((1, 2));
    let rhs = PowerProduct::one()
        .pow(energy(b, s, mode)?.count, half.clone())
        .pow(energy(c, s, mode)?.count, half);
    let key = format!("{}|{}|s={s}|{}", b.canonical(), c.canonical(), mode.name());
    CheckReport::evaluate("mixed-cauchy-schwarz", Side::int(lhs), Relation::Le, Side::Exact(rhs), &key)
}

/// Plünnecke–Ruzsa: `|mA − nA| ≤ K^{m+n}|A|` with `K = |A+A|/|A|`.
pub fn check_plunnecke(a: &IntSet, m: u32, n: u32) -> Result<CheckReport> {
    let lhs = iterated_sumset(a, m, n)?.len();
    let doubled = iterated_sumset(a, 2, 0)?.len();
    let k = i64::from(m + n);
    let rhs = PowerProduct::one().pow(doubled, k).pow(a.len(), Rational::from(1 - k));
    let key = format!("{}|m={m}|n={n}", a.canonical());
    CheckReport::evaluate("plunnecke", Side::int(lhs), Relation::Le, Side::Exact(rhs), &key)
}

/// `E_s(A)·|sA| ≥ |A|^{2s}` (products in multiplicative mode).
pub fn check_csref(a: &IntSet, s: u32, mode: Mode) -> Result<CheckReport> {
    let e = energy(a, s, mode)?.count;
    let size = s_fold_size(a, s, mode)?;
    let lhs = PowerProduct::new(e).pow(size, 1);
    let rhs = PowerProduct::one().pow(a.len(), 2 * s);
    let key = format!("{}|s={s}|{}", a.canonical(), mode.name());
    CheckReport::evaluate("csref", Side::Exact(lhs), Relation::Ge, Side::Exact(rhs), &key)
}

/// `E_s(𝒩_k)·|s𝒩_k| ≥ N^{2s}` for `𝒩_k = {1, 2^k, …, N^k}`.
pub fn check_war2(k: u32, s: u32, n: u32, max_tuples: u64) -> Result<CheckReport> {
    let set = Generator::Powers { k, n }.generate()?;
    let work = (set.len() as u128).checked_pow(2 * s);
    if work.is_none_or(|w| w > u128::from(max_tuples)) {
        return Err(Error::TooLarge(format!("{n}^{} exceeds the guard {max_tuples}", 2 * s)));
    }
    let e = energy(&set, s, Mode::Additive)?.count;
    let size = iterated_sumset(&set, s, 0)?.len();
    let lhs = PowerProduct::new(e).pow(size, 1);
    let rhs = PowerProduct::one().pow(n, 2 * s);
    CheckReport::evaluate("war2", Side::Exact(lhs), Relation::Ge, Side::Exact(rhs), &format!("k={k}|s={s}|N={n}"))
}

/// Threshold configuration for the convex-growth measurement.
#[derive(Clone, Debug)]
pub struct ConvexConfig {
    pub ratio_min: Rational,
    /// Exponent of the `(log₂|A|)^{-e}` factor; `None` means `2^{k+1}+k+3`.
    pub log_exponent: Option<Rational>,
    /// Refuse sumset steps that would enumerate more pairs than this.
    pub size_cap: u64,
}

impl Default for ConvexConfig {
    fn default() -> Self {
        ConvexConfig { ratio_min: Rational::from((1, 100)), log_exponent: None, size_cap: 100_000_000 }
    }
}

/// Measures `|2^{k-1}A − (2^{k-1}−1)A|` against
/// `ratio_min·|A|^k·K^{-2^k+k+1}·(log₂|A|)^{-e}`. Informational only.
pub fn check_convex_growth(a: &IntSet, k: u32, doubling: &Rational, cfg: &ConvexConfig) -> Result<CheckReport> {
    if a.len() < 4 {
        return Err(Error::BadParams("need |A| >= 4".into()));
    }
    if !(2..=3).contains(&k) {
        return Err(Error::BadParams("k must be 2 or 3".into()));
    }
    if *doubling <= 0 {
        return Err(Error::BadParams("K must be positive".into()));
    }
    let plus = 1u32 << (k - 1);
    let minus = plus - 1;
    let mut acc = IntSet::new([0]);
    for step in 0..plus + minus {
        let work = acc.len() as u64 * a.len() as u64;
        if work > cfg.size_cap {
            return Err(Error::TooLarge(format!("{work} pairs in the iterated sumset")));
        }
        acc = if step < plus { acc.sumset(a) } else { acc.combine(a, |x, y| Integer::from(x - y)) };
    }
    let size = acc.len();
    let prec = DEFAULT_PREC;
    let e = cfg.log_exponent.clone().unwrap_or_else(|| Rational::from((1i64 << (k + 1)) + i64::from(k) + 3));
    let base = PowerProduct::new(cfg.ratio_min.clone())
        .pow(a.len(), k)
        .scale(doubling.clone().pow_ratio(-(1i64 << k) + i64::from(k) + 1));
    let logf = Interval::from_int(prec, &Integer::from(a.len())).log2()?.pow_rational(&Rational::from(-&e))?;
    let rhs = Side::Approx(base.enclose(prec)?.mul(&logf));
    let key = format!("{}|k={k}|K={doubling}", a.canonical());
    Ok(CheckReport::evaluate_prec("convex-growth", Side::int(size), Relation::Ge, rhs, &key, prec)?
        .informational())
}

trait PowRatio {
    fn pow_ratio(self, e: i64) -> Rational;
}

impl PowRatio for Rational {
    fn pow_ratio(self, e: i64) -> Rational {
        use rug::ops::Pow;
        let p = self.pow(e.unsigned_abs() as u32);
        if e >= 0 {
            p
        } else {
            p.recip()
        }
    }
}
