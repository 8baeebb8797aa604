//! Greedy low-energy decompositions `A = B ⊔ C`.
//!
//! Two loops share one engine. The sum/product loop peels off pieces `D_i`
//! with small additive energy while the residual has large multiplicative
//! energy; the dual loop peels off multiplicatively small pieces while the
//! residual has large additive energy. Extractors replace the analytic
//! existence step: every accepted piece carries an exact energy certificate.

mod com2;
mod extract;

pub use com2::{com2_budget, com2_simulate, min_deletion, Adversary};
pub use extract::{mult_dichotomy, Dichotomy};

use std::str::FromStr;

use rug::{Integer, Rational};

use crate::checks::{CheckReport, Relation, Side};
use crate::energy::{energy, Mode};
use crate::error::{Error, Result};
use crate::exact::PowerProduct;
use crate::kp::KpMode;
use crate::set::IntSet;

/// Largest arity accepted at execution time.
pub const MAX_ARITY: u32 = 32;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Extractor {
    /// The whole residual, then the structured-subset pipeline, then
    /// exhaustive search for small residuals.
    #[default]
    Auto,
    /// The structured-subset pipeline in the opposite operation.
    KpMultiplicative,
    /// Largest passing subset of a residual with at most 16 elements.
    Exhaustive,
}

impl Extractor {
    pub fn name(self) -> &'static str {
        match self {
            Extractor::Auto => "auto",
            Extractor::KpMultiplicative => "kp-multiplicative",
            Extractor::Exhaustive => "exhaustive",
        }
    }
}

impl FromStr for Extractor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Extractor::Auto),
            "kp-multiplicative" | "kp" => Ok(Extractor::KpMultiplicative),
            "exhaustive" => Ok(Extractor::Exhaustive),
            _ => Err(Error::BadParams(format!("unknown extractor {s:?}"))),
        }
    }
}

/// Parameters of the sum/product loop.
#[derive(Clone, Debug)]
pub struct DecomposeConfig {
    pub k: Rational,
    /// Multiplicative energy arity `s` of the stopping rule.
    pub s: u32,
    /// Additive energies are `E_{q/2}`.
    pub q: u32,
    pub mode: KpMode,
    pub extractor: Extractor,
    /// Piece bound `E_{q/2}(D_i) ≤ |D_i|^e`; default `q − q/4` (paper) or
    /// `q − k` (calibrated).
    pub piece_exponent: Option<Rational>,
    /// Final bound `E_{q/2}(B) ≤ |B|^e`; default `q − q/5` (paper) or `q − k`
    /// (calibrated).
    pub final_exponent: Option<Rational>,
    /// Pieces have at least `⌈Cc·|A_i|^{1−c}⌉` elements.
    pub c: Rational,
    pub cc: Rational,
    /// `δ` handed to the structured-subset pipeline.
    pub delta: Rational,
    /// `m` in the reported `|B^{(m)}|`.
    pub m: u32,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig {
            k: Rational::from(1),
            s: 2,
            q: 4,
            mode: KpMode::Calibrated,
            extractor: Extractor::Auto,
            piece_exponent: None,
            final_exponent: None,
            c: Rational::from((1, 2)),
            cc: Rational::from(1),
            delta: Rational::from((1, 20)),
            m: 2,
        }
    }
}

impl DecomposeConfig {
    pub fn piece_exp(&self) -> Rational {
        self.piece_exponent.clone().unwrap_or_else(|| match self.mode {
            KpMode::Paper => Rational::from(self.q) * Rational::from((3, 4)),
            KpMode::Calibrated => Rational::from(self.q) - &self.k,
        })
    }

    pub fn final_exp(&self) -> Rational {
        self.final_exponent.clone().unwrap_or_else(|| match self.mode {
            KpMode::Paper => Rational::from(self.q) * Rational::from((4, 5)),
            KpMode::Calibrated => Rational::from(self.q) - &self.k,
        })
    }

    fn validate(&self) -> Result<()> {
        check_k(&self.k)?;
        check_arity(self.s, "s")?;
        check_arity(self.q, "q")?;
        check_exponent(&(Rational::from(2 * self.s) - &self.k), 2 * self.s)?;
        check_exponent(&self.piece_exp(), self.q)?;
        check_exponent(&self.final_exp(), self.q)?;
        check_fraction(&self.c, &self.cc)
    }
}

/// Parameters of the dual loop: pieces satisfy `M_{s₂}(D_i) < |D_i|^{2s₂−k}`;
/// the loop stops once `E_{s₁}(A_i) < |A_i|^{2s₁−k}` or `|A_i| ≤ 𝒞`.
#[derive(Clone, Debug)]
pub struct EricConfig {
    pub k: Rational,
    pub s1: u32,
    pub s2: u32,
    /// `𝒞`, the small-set constant.
    pub small_set: usize,
    pub mode: KpMode,
    pub extractor: Extractor,
    pub c: Rational,
    pub cc: Rational,
    pub delta: Rational,
}

impl Default for EricConfig {
    fn default() -> Self {
        EricConfig {
            k: Rational::from(1),
            s1: 2,
            s2: 2,
            small_set: 4,
            mode: KpMode::Calibrated,
            extractor: Extractor::Auto,
            c: Rational::from((1, 2)),
            cc: Rational::from(1),
            delta: Rational::from((1, 20)),
        }
    }
}

impl EricConfig {
    fn validate(&self) -> Result<()> {
        check_k(&self.k)?;
        check_arity(self.s1, "s1")?;
        check_arity(self.s2, "s2")?;
        check_exponent(&(Rational::from(2 * self.s1) - &self.k), 2 * self.s1)?;
        check_exponent(&(Rational::from(2 * self.s2) - &self.k), 2 * self.s2)?;
        check_fraction(&self.c, &self.cc)
    }
}

fn check_k(k: &Rational) -> Result<()> {
    if *k < 1 {
        return Err(Error::BadParams(format!("k must be at least 1, got {k}")));
    }
    Ok(())
}

fn check_arity(s: u32, name: &str) -> Result<()> {
    if s > MAX_ARITY {
        return Err(Error::ParameterTooLarge(format!("{name} = {s} exceeds {MAX_ARITY}")));
    }
    if s < 2 || s % 2 == 1 {
        return Err(Error::BadArity(format!("{name} must be even and at least 2, got {s}")));
    }
    Ok(())
}

fn check_exponent(e: &Rational, bound: u32) -> Result<()> {
    if *e <= 0 || *e >= bound {
        return Err(Error::BadParams(format!("threshold exponent {e} outside (0, {bound})")));
    }
    Ok(())
}

fn check_fraction(c: &Rational, cc: &Rational) -> Result<()> {
    if *c <= 0 || *c >= 1 || *cc <= 0 {
        return Err(Error::BadParams(format!("need 0 < c < 1 and Cc > 0, got c = {c}, Cc = {cc}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn name(self) -> &'static str {
        match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
        }
    }
}

/// One removed piece.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub branch: Sign,
    pub iteration: u64,
    pub piece: IntSet,
    pub strategy: &'static str,
    pub min_size: u64,
    pub report: CheckReport,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub b: IntSet,
    pub c: IntSet,
    pub trace: Vec<Extraction>,
    /// Sum of the per-branch iteration budgets.
    pub budget: u64,
    pub iterations_used: u64,
    /// Some branch stopped because no extractor produced a certified piece.
    pub extractor_failed: bool,
    /// The stopping certificate of each sign branch.
    pub stop_reports: Vec<CheckReport>,
    /// Certificates for the recombined `B` and `C`.
    pub final_reports: Vec<CheckReport>,
}

/// `energy ≤ |X|^e` (or `<`), with the empty set counted as `0 ≤ 0`.
pub(crate) fn energy_report(
    name: &str,
    x: &IntSet,
    arity: u32,
    mode: Mode,
    exponent: &Rational,
    rel: Relation,
    key: &str,
) -> Result<CheckReport> {
    if x.is_empty() {
        return CheckReport::evaluate(name, Side::int(0), Relation::Le, Side::int(0), key);
    }
    let e = energy(x, arity, mode)?.count;
    let bound = PowerProduct::one().pow(Integer::from(x.len()), exponent.clone());
    let inputs = format!("{}|{}|{arity}|{exponent}|{key}", x.canonical(), mode.name());
    CheckReport::evaluate(name, Side::int(e), rel, Side::Exact(bound), &inputs)
}

/// How one loop decides to stop and which pieces it accepts.
pub(crate) trait LoopRule {
    /// `Some(certificate)` once the residual is small.
    fn stop(&self, residual: &IntSet) -> Result<Option<CheckReport>>;
    /// A certified piece of at least `min_size` elements.
    fn extract(&self, residual: &IntSet, min_size: u64) -> Result<Option<(IntSet, &'static str, CheckReport)>>;
}

struct BranchOutcome {
    pieces: Vec<Extraction>,
    residual: IntSet,
    stop: Option<CheckReport>,
    failed: bool,
    budget: u64,
}

fn run_branch(set: &IntSet, sign: Sign, rule: &dyn LoopRule, c: &Rational, cc: &Rational) -> Result<BranchOutcome> {
    let budget = com2_budget(set.len() as u64, c, cc)?;
    let mut residual = set.clone();
    let mut pieces = Vec::new();
    loop {
        if let Some(report) = rule.stop(&residual)? {
            if !report.holds {
                return Err(Error::Invariant(format!("stop certificate {} does not hold", report.name)));
            }
            return Ok(BranchOutcome { pieces, residual, stop: Some(report), failed: false, budget });
        }
        let min_size = min_deletion(residual.len() as u64, c, cc)?;
        let Some((piece, strategy, report)) = rule.extract(&residual, min_size)? else {
            return Ok(BranchOutcome { pieces, residual, stop: None, failed: true, budget });
        };
        if !report.holds || (piece.len() as u64) < min_size || !piece.is_subset(&residual) || piece.is_empty() {
            return Err(Error::Invariant(format!("extractor {strategy} returned an uncertified piece")));
        }
        residual = residual.difference(&piece);
        pieces.push(Extraction { branch: sign, iteration: pieces.len() as u64 + 1, piece, strategy, min_size, report });
        if pieces.len() as u64 > budget {
            return Err(Error::Invariant(format!("{} iterations exceed the budget {budget}", pieces.len())));
        }
    }
}

struct Merged {
    extracted: IntSet,
    residual: IntSet,
    trace: Vec<Extraction>,
    budget: u64,
    used: u64,
    failed: bool,
    stops: Vec<CheckReport>,
    single_sign: bool,
}

/// Runs `rule` on the positive part and on the negated negative part; `0`
/// joins `zero_side`.
fn run_signed(a: &IntSet, rule: &dyn LoopRule, c: &Rational, cc: &Rational) -> Result<(Merged, IntSet)> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let (pos, neg, zero) = a.sign_split();
    let mut m = Merged {
        extracted: IntSet::empty(),
        residual: IntSet::empty(),
        trace: Vec::new(),
        budget: 0,
        used: 0,
        failed: false,
        stops: Vec::new(),
        single_sign: zero.is_empty() && (pos.is_empty() || neg.is_empty()),
    };
    for (sign, part) in [(Sign::Positive, pos), (Sign::Negative, neg.negate())] {
        if part.is_empty() {
            continue;
        }
        let out = run_branch(&part, sign, rule, c, cc)?;
        let back = |x: IntSet| if sign == Sign::Negative { x.negate() } else { x };
        m.budget += out.budget;
        m.used += out.pieces.len() as u64;
        m.failed |= out.failed;
        if let Some(r) = out.stop {
            m.stops.push(r.with_note(format!("{} branch", sign.name())));
        }
        for mut piece in out.pieces {
            piece.piece = back(piece.piece);
            m.extracted = m.extracted.union(&piece.piece);
            m.trace.push(piece);
        }
        m.residual = m.residual.union(&back(out.residual));
    }
    Ok((m, zero))
}

fn assert_partition(a: &IntSet, b: &IntSet, c: &IntSet) -> Result<()> {
    if !b.is_disjoint(c) || b.union(c) != *a {
        return Err(Error::Invariant("B and C do not partition A".into()));
    }
    Ok(())
}

fn mark(report: CheckReport, mandatory: bool) -> CheckReport {
    if mandatory {
        report
    } else {
        report.informational().with_note("union of sign branches; the union-bound constant is not included")
    }
}

struct SumProductRule<'a> {
    cfg: &'a DecomposeConfig,
    stop_exp: Rational,
    piece_exp: Rational,
}

impl LoopRule for SumProductRule<'_> {
    fn stop(&self, residual: &IntSet) -> Result<Option<CheckReport>> {
        let key = format!("k={}", self.cfg.k);
        let r = energy_report("stop-multiplicative", residual, self.cfg.s, Mode::Multiplicative, &self.stop_exp, Relation::Le, &key)?;
        Ok(r.holds.then_some(r))
    }

    fn extract(&self, residual: &IntSet, min_size: u64) -> Result<Option<(IntSet, &'static str, CheckReport)>> {
        let cfg = self.cfg;
        let accept = |d: &IntSet| -> Result<Option<CheckReport>> {
            if (d.len() as u64) < min_size {
                return Ok(None);
            }
            let r = energy_report("piece-additive", d, cfg.q / 2, Mode::Additive, &self.piece_exp, Relation::Le, "piece")?;
            Ok(r.holds.then_some(r))
        };
        let kp = || -> Result<Option<IntSet>> {
            match mult_dichotomy(residual, &cfg.k, cfg.s, cfg.m, cfg.mode, &cfg.delta)? {
                Dichotomy::StructuredSubset { b, .. } => Ok(Some(b)),
                _ => Ok(None),
            }
        };
        let exhaustive = || {
            extract::exhaustive(residual, min_size, cfg.q / 2, Mode::Additive, &self.piece_exp, Relation::Le)
        };
        extract::run_strategies(cfg.extractor, residual, &accept, ("kp-multiplicative", &kp), &exhaustive)
    }
}

/// Splits `A` into `B` (small additive energy `E_{q/2}`) and `C` (small
/// multiplicative energy `M_s`). Each sign class is processed separately and
/// `0` joins `B`.
pub fn decompose(a: &IntSet, cfg: &DecomposeConfig) -> Result<Decomposition> {
    cfg.validate()?;
    let rule = SumProductRule {
        cfg,
        stop_exp: Rational::from(2 * cfg.s) - &cfg.k,
        piece_exp: cfg.piece_exp(),
    };
    let (m, zero) = run_signed(a, &rule, &cfg.c, &cfg.cc)?;
    let b = m.extracted.union(&zero);
    let c = m.residual;
    assert_partition(a, &b, &c)?;
    let key = format!("{}|k={}|s={}|q={}", a.canonical(), cfg.k, cfg.s, cfg.q);
    let final_reports = vec![
        mark(energy_report("B-additive-energy", &b, cfg.q / 2, Mode::Additive, &cfg.final_exp(), Relation::Le, &key)?, m.single_sign),
        mark(
            energy_report("C-multiplicative-energy", &c, cfg.s, Mode::Multiplicative, &rule.stop_exp, Relation::Le, &key)?,
            m.single_sign && !m.failed,
        ),
    ];
    Ok(Decomposition {
        b,
        c,
        trace: m.trace,
        budget: m.budget,
        iterations_used: m.used,
        extractor_failed: m.failed,
        stop_reports: m.stops,
        final_reports,
    })
}

struct DualRule<'a> {
    cfg: &'a EricConfig,
    stop_exp: Rational,
    piece_exp: Rational,
}

impl LoopRule for DualRule<'_> {
    fn stop(&self, residual: &IntSet) -> Result<Option<CheckReport>> {
        if residual.len() <= self.cfg.small_set {
            let r = CheckReport::evaluate(
                "stop-small-set",
                Side::int(residual.len()),
                Relation::Le,
                Side::int(self.cfg.small_set),
                &residual.canonical(),
            )?;
            return Ok(Some(r));
        }
        let key = format!("k={}", self.cfg.k);
        let r = energy_report("stop-additive", residual, self.cfg.s1, Mode::Additive, &self.stop_exp, Relation::Lt, &key)?;
        Ok(r.holds.then_some(r))
    }

    fn extract(&self, residual: &IntSet, min_size: u64) -> Result<Option<(IntSet, &'static str, CheckReport)>> {
        let cfg = self.cfg;
        let accept = |d: &IntSet| -> Result<Option<CheckReport>> {
            if (d.len() as u64) < min_size {
                return Ok(None);
            }
            let r = energy_report("piece-multiplicative", d, cfg.s2, Mode::Multiplicative, &self.piece_exp, Relation::Lt, "piece")?;
            Ok(r.holds.then_some(r))
        };
        let kp = || extract::additive_subset(residual, cfg.s1, cfg.mode, &cfg.delta);
        let exhaustive =
            || extract::exhaustive(residual, min_size, cfg.s2, Mode::Multiplicative, &self.piece_exp, Relation::Lt);
        extract::run_strategies(cfg.extractor, residual, &accept, ("kp-additive", &kp), &exhaustive)
    }
}

/// The dual loop. Following the loop's own bookkeeping, `B = ∪D_i` collects
/// the multiplicatively small pieces and `C` is the residual, whose additive
/// energy `E_{s₁}` is small (or which has at most `𝒞` elements). `0` joins `C`.
pub fn decompose_eric(a: &IntSet, cfg: &EricConfig) -> Result<Decomposition> {
    cfg.validate()?;
    let rule = DualRule {
        cfg,
        stop_exp: Rational::from(2 * cfg.s1) - &cfg.k,
        piece_exp: Rational::from(2 * cfg.s2) - &cfg.k,
    };
    let (m, zero) = run_signed(a, &rule, &cfg.c, &cfg.cc)?;
    let b = m.extracted;
    let c = m.residual.union(&zero);
    assert_partition(a, &b, &c)?;
    let key = format!("{}|k={}|s1={}|s2={}", a.canonical(), cfg.k, cfg.s1, cfg.s2);
    let b_exp = Rational::from(2 * cfg.s2 + 1) - &cfg.k;
    let mut final_reports =
        vec![mark(energy_report("B-multiplicative-energy", &b, cfg.s2, Mode::Multiplicative, &b_exp, Relation::Le, &key)?, m.single_sign)];
    let c_report = if c.len() <= cfg.small_set {
        CheckReport::evaluate("C-small-set", Side::int(c.len()), Relation::Le, Side::int(cfg.small_set), &key)?
    } else {
        mark(
            energy_report("C-additive-energy", &c, cfg.s1, Mode::Additive, &rule.stop_exp, Relation::Lt, &key)?,
            m.single_sign && !m.failed,
        )
    };
    final_reports.push(c_report);
    Ok(Decomposition {
        b,
        c,
        trace: m.trace,
        budget: m.budget,
        iterations_used: m.used,
        extractor_failed: m.failed,
        stop_reports: m.stops,
        final_reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_rational;
    use rug::ops::Pow;

    fn gp(n: u32) -> IntSet {
        IntSet::new((0..n).map(|i| Integer::from(3).pow(i)))
    }

    fn cfg(k: &str) -> DecomposeConfig {
        DecomposeConfig { k: parse_rational(k).unwrap(), ..DecomposeConfig::default() }
    }

    fn check_all(d: &Decomposition) {
        assert!(d.iterations_used <= d.budget);
        for x in &d.trace {
            assert!(x.report.holds);
        }
        for r in d.stop_reports.iter().chain(&d.final_reports) {
            assert!(!r.is_violation(), "{r:?}");
        }
    }

    #[test]
    fn sign_split_examples() {
        let (p, n, z) = IntSet::new([-2, 0, 3]).sign_split();
        assert_eq!((p, n, z), (IntSet::new([3]), IntSet::new([-2]), IntSet::new([0])));
    }

    #[test]
    fn progression_needs_no_iteration() {
        let a = IntSet::new(1..=16);
        let d = decompose(&a, &cfg("1.2")).unwrap();
        assert!(d.b.is_empty());
        assert_eq!(d.c, a);
        assert_eq!(d.iterations_used, 0);
        check_all(&d);
    }

    #[test]
    fn geometric_progression_is_taken_whole() {
        let a = gp(16);
        let d = decompose(&a, &cfg("1.2")).unwrap();
        assert_eq!(d.iterations_used, 1);
        assert_eq!(d.b, a);
        assert!(d.c.is_empty());
        assert_eq!(d.trace[0].report.lhs, "496");
        check_all(&d);
    }

    #[test]
    fn mixed_set_with_a_strict_exponent() {
        let a = IntSet::new(1..=32).union(&gp(16));
        let d = decompose(&a, &cfg("1.2")).unwrap();
        check_all(&d);
        let a = IntSet::new(1..=20).union(&gp(12));
        let d = decompose(&a, &cfg("1.6")).unwrap();
        assert_eq!(d.trace[0].strategy, "kp-multiplicative");
        assert!(!d.extractor_failed);
        check_all(&d);
    }

    #[test]
    fn every_strategy_partitions() {
        let a = IntSet::new(1..=10).union(&gp(8));
        for extractor in [Extractor::Auto, Extractor::KpMultiplicative, Extractor::Exhaustive] {
            let d = decompose(&a, &DecomposeConfig { extractor, ..cfg("1.5") }).unwrap();
            assert!(d.b.is_disjoint(&d.c));
            assert_eq!(d.b.union(&d.c), a);
            assert!(d.iterations_used <= d.budget);
        }
    }

    #[test]
    fn mixed_signs_and_zero() {
        let a = IntSet::new([-27, -9, -3, -1, 0, 1, 2, 3, 4, 5, 6]);
        let d = decompose(&a, &cfg("1.5")).unwrap();
        assert!(d.b.contains(&Integer::ZERO));
        assert_eq!(d.b.union(&d.c), a);
        let e = decompose_eric(&a, &EricConfig::default()).unwrap();
        assert!(e.c.contains(&Integer::ZERO));
        assert_eq!(e.b.union(&e.c), a);
    }

    #[test]
    fn dilation_keeps_certificates() {
        let a = IntSet::new(1..=12).union(&gp(7));
        let b = a.affine(&Integer::from(5), &Integer::ZERO).unwrap();
        let (x, y) = (decompose(&a, &cfg("1.5")).unwrap(), decompose(&b, &cfg("1.5")).unwrap());
        let lhs = |d: &Decomposition| d.final_reports.iter().map(|r| r.lhs.clone()).collect::<Vec<_>>();
        assert_eq!(lhs(&x), lhs(&y));
        assert_eq!(x.iterations_used, y.iterations_used);
    }

    #[test]
    fn dual_loop_examples() {
        let one = EricConfig::default();
        let d = decompose_eric(&IntSet::new([5]), &one).unwrap();
        assert_eq!(d.iterations_used, 0);
        assert_eq!(d.stop_reports[0].name, "stop-small-set");

        let d = decompose_eric(&gp(16), &one).unwrap();
        assert_eq!(d.iterations_used, 0);
        assert!(d.b.is_empty());

        let ap = IntSet::new(1..=16);
        let d = decompose_eric(&ap, &one).unwrap();
        assert_eq!(d.iterations_used, 0);
        let strict = EricConfig { k: parse_rational("1.5").unwrap(), ..EricConfig::default() };
        let d = decompose_eric(&ap, &strict).unwrap();
        assert!(d.iterations_used >= 1);
        check_all(&d);
    }

    #[test]
    fn invalid_configs() {
        assert!(matches!(decompose(&IntSet::new([1]), &cfg("0.5")), Err(Error::BadParams(_))));
        let odd = DecomposeConfig { s: 3, ..cfg("1") };
        assert!(matches!(decompose(&IntSet::new([1]), &odd), Err(Error::BadArity(_))));
        let huge = DecomposeConfig { s: 1 << 20, ..cfg("1") };
        assert!(matches!(decompose(&IntSet::new([1]), &huge), Err(Error::ParameterTooLarge(_))));
        assert_eq!(decompose(&IntSet::empty(), &cfg("1")).unwrap_err(), Error::EmptySet);
    }
}
