use rug::{Integer, Rational};

use crate::checks::{CheckReport, Relation, Side};
use crate::energy::{energy, Mode};
use crate::error::{Error, Result};
use crate::exact::PowerProduct;
use crate::kp::{kp_pipeline, Branch, KpMode, KpParams, EXHAUSTIVE_LIMIT};
use crate::set::{iterated_product_set, IntSet};

use super::Extractor;

#[derive(Clone, Debug)]
pub enum Dichotomy {
    /// `M_s(A) < |A|^{2s−k}`.
    SmallEnergy(CheckReport),
    /// A subset found by the multiplicative structured-subset pipeline, with
    /// `|B^{(m)}|` measured against `|A|^{3k}`.
    StructuredSubset { b: IntSet, product_report: CheckReport },
    /// The pipeline took its energy branch: `M_{s/2}` is large as well, and
    /// the arity cannot be halved below 4.
    EnergyBranch(Vec<CheckReport>),
}

/// Either certifies small multiplicative energy or returns a subset with a
/// small iterated product set.
pub fn mult_dichotomy(a: &IntSet, k: &Rational, s: u32, m: u32, mode: KpMode, delta: &Rational) -> Result<Dichotomy> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.min().is_some_and(|x| *x <= 0) {
        return Err(Error::BadParams("positive integers required".into()));
    }
    if s < 2 || s % 2 == 1 {
        return Err(Error::BadArity(format!("s must be even and at least 2, got {s}")));
    }
    if m == 0 {
        return Err(Error::ZeroArity);
    }
    let key = format!("{}|k={k}|s={s}|m={m}", a.canonical());
    let n = Integer::from(a.len());
    let product_report = |b: &IntSet| -> Result<CheckReport> {
        let size = iterated_product_set(b, m, 0)?.len();
        let bound = PowerProduct::one().pow(n.clone(), Rational::from(3 * k));
        Ok(CheckReport::evaluate("product-set", Side::int(size), Relation::Le, Side::Exact(bound), &key)?
            .informational()
            .with_note("the constant C_m is unspecified; measured against |A|^(3k)"))
    };
    if a.len() == 1 {
        return Ok(Dichotomy::StructuredSubset { b: a.clone(), product_report: product_report(a)? });
    }
    let e = energy(a, s, Mode::Multiplicative)?.count;
    let bound = PowerProduct::one().pow(n.clone(), Rational::from(2 * s) - k);
    let report = CheckReport::evaluate("multiplicative-energy", Side::int(e), Relation::Lt, Side::Exact(bound), &key)?;
    if report.holds {
        return Ok(Dichotomy::SmallEnergy(report));
    }
    let params = KpParams::new(s.max(4), delta.clone(), mode).with_op(Mode::Multiplicative);
    let res = kp_pipeline(a, &params)?;
    match (res.branch, res.a_prime) {
        (Branch::Subset, Some(b)) => {
            let product_report = product_report(&b)?;
            Ok(Dichotomy::StructuredSubset { b, product_report })
        }
        _ => Ok(Dichotomy::EnergyBranch(res.checks)),
    }
}

/// Additive structured subset for the dual loop.
pub(crate) fn additive_subset(a: &IntSet, s: u32, mode: KpMode, delta: &Rational) -> Result<Option<IntSet>> {
    if a.len() < 2 {
        return Ok(None);
    }
    let res = kp_pipeline(a, &KpParams::new(s.max(4), delta.clone(), mode))?;
    Ok(match res.branch {
        Branch::Subset => res.a_prime,
        Branch::Energy => None,
    })
}

type Candidate<'a> = &'a dyn Fn() -> Result<Option<IntSet>>;

/// Tries the configured strategies in order and returns the first certified
/// piece.
pub(crate) fn run_strategies(
    extractor: Extractor,
    residual: &IntSet,
    accept: &dyn Fn(&IntSet) -> Result<Option<CheckReport>>,
    kp: (&'static str, Candidate<'_>),
    exhaustive: Candidate<'_>,
) -> Result<Option<(IntSet, &'static str, CheckReport)>> {
    let whole = || Ok(Some(residual.clone()));
    let plan: Vec<(&'static str, Candidate<'_>)> = match extractor {
        Extractor::Auto => vec![("whole", &whole), kp, ("exhaustive", exhaustive)],
        Extractor::KpMultiplicative => vec![kp],
        Extractor::Exhaustive => vec![("exhaustive", exhaustive)],
    };
    for (name, make) in plan {
        let candidate = match make() {
            Ok(c) => c,
            // a collapsed pipeline or an undecidable threshold just yields no candidate
            Err(Error::StageCollapse(_) | Error::Undecided(_) | Error::EmptyResult) => None,
            Err(e) => return Err(e),
        };
        if let Some(d) = candidate {
            if let Some(report) = accept(&d)? {
                return Ok(Some((d, name, report)));
            }
        }
    }
    Ok(None)
}

/// Largest integer `x` with `x ≤ |X|^e` (or `x < |X|^e`).
fn integer_cap(size: usize, e: &Rational, rel: Relation) -> Result<Integer> {
    let p = PowerProduct::one().pow(Integer::from(size), e.clone());
    let c = p.ceil_int()?;
    let exact = PowerProduct::new(c.clone()).cmp_exact(&p)? == std::cmp::Ordering::Equal;
    Ok(match rel {
        Relation::Le if exact => c,
        _ => c - 1,
    })
}

/// The largest subset (of size at least `min_size`) whose energy passes the
/// bound; ties go to the smaller energy, then the first subset in index
/// order. Only for residuals with at most 16 elements.
pub(crate) fn exhaustive(
    a: &IntSet,
    min_size: u64,
    arity: u32,
    mode: Mode,
    e: &Rational,
    rel: Relation,
) -> Result<Option<IntSet>> {
    let n = a.len();
    if n > EXHAUSTIVE_LIMIT || n == 0 {
        return Ok(None);
    }
    let elems = a.as_slice();
    let lo = (min_size as usize).max(1);
    for size in (lo..=n).rev() {
        let cap = integer_cap(size, e, rel)?;
        let mut best: Option<(Integer, u32)> = None;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let sub = IntSet::new((0..n).filter(|i| mask >> i & 1 == 1).map(|i| elems[i].clone()));
            let en = energy(&sub, arity, mode)?.count;
            if en <= cap && best.as_ref().is_none_or(|(b, _)| en < *b) {
                best = Some((en, mask));
            }
        }
        if let Some((_, mask)) = best {
            return Ok(Some(IntSet::new((0..n).filter(|i| mask >> i & 1 == 1).map(|i| elems[i].clone()))));
        }
    }
    Ok(None)
}
