//! The pipeline on sum-value fibers of `A^t`, `t = s/2`.
//!
//! Every intermediate subset of `A^t` (the neighbourhoods `R_G(x)`, `Y`,
//! `Y₁`, `Y₂`, `Y₃`) is a union of complete fibers `{y : Σy = σ}`, because
//! membership only ever depends on `Σy`. Fibers are indexed by the sorted
//! support of `r_t`, and `R(σ) = {τ : σ∘τ ∈ S}` is the fiber-level form of
//! `R_G`.

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::{Integer, Rational};

use super::graph::{bsg_extract, BsgTargets, PopularSumGraph};
use super::{upper_half_threshold, Branch, KpMode, KpParams, KpResult, StageRecord, StageStats};
use crate::checks::{CheckReport, Relation, Side};
use crate::constants::LogBase;
use crate::energy::{guard_power, rep_function, Mode, RepFunction};
use crate::error::{Error, Result};
use crate::exact::{Interval, PowerProduct, DEFAULT_PREC};
use crate::set::IntSet;

/// `{n : r(n) ≥ threshold}`.
pub fn popular_sums(r: &RepFunction, threshold: &Rational) -> Result<IntSet> {
    let s = IntSet::new(r.iter().filter(|(_, c)| *threshold <= *c).map(|(n, _)| n.clone()));
    if s.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(s)
}

fn collapse(stage: &str) -> Error {
    Error::StageCollapse(stage.to_string())
}

struct Ctx<'a> {
    a: &'a IntSet,
    p: &'a KpParams,
    n: Integer,
    key: String,
    checks: Vec<CheckReport>,
    trace: Vec<StageRecord>,
}

impl Ctx<'_> {
    fn paper(&self) -> bool {
        self.p.mode == KpMode::Paper
    }

    /// `c·|A|^e`
    fn size_power(&self, c: Rational, e: Rational) -> PowerProduct {
        PowerProduct::new(c).pow(self.n.clone(), e)
    }

    fn check(&mut self, name: &str, lhs: Side, rel: Relation, rhs: Side, mandatory: bool) -> Result<()> {
        let r = CheckReport::evaluate(name, lhs, rel, rhs, &self.key)?;
        self.checks.push(if mandatory { r } else { r.informational() });
        Ok(())
    }

    fn record(&mut self, stage: &'static str, cardinality: u128, threshold: Option<String>) {
        self.trace.push(StageRecord { stage, cardinality, threshold });
    }
}

struct Built {
    a_prime: IntSet,
    anchor: Integer,
    z: Integer,
    shift: Integer,
    u_prime: IntSet,
    stats: StageStats,
}

/// Runs the pipeline. The energy branch is taken when
/// `E_{s/2}(A) > |A|^{s−ν+δ}`, i.e. `E_{s/2}(A)·|A|^s > E_s(A)·|A|^δ`.
///
/// Paper mode stops there. Calibrated mode always attempts the construction;
/// when the energy condition holds it only reports the subset branch if the
/// extracted set carries a structure certificate (`|A'∘A'| ≤ 4|A'|` and
/// `|A'| ≥ ⌈|A|/8⌉`), and a stage collapse falls back to the energy branch.
pub fn kp_pipeline(a: &IntSet, p: &KpParams) -> Result<KpResult> {
    if a.len() < 2 {
        return Err(Error::TooSmall);
    }
    if p.arity < 4 || p.arity % 2 == 1 {
        return Err(Error::BadArity(format!("arity must be even and at least 4, got {}", p.arity)));
    }
    if p.delta <= 0 {
        return Err(Error::BadParams("delta must be positive".into()));
    }
    if p.op == Mode::Multiplicative && a.contains_zero() {
        return Err(Error::ZeroElement);
    }
    guard_power(a.len(), p.arity)?;
    let t = p.arity / 2;
    let r_t = rep_function(a, t, p.op)?;
    let r_s = r_t.convolve(&r_t)?;
    let e_s = r_s.sum_squares();
    let e_t = r_t.sum_squares();
    let n = Integer::from(a.len());

    let prec = DEFAULT_PREC;
    let nu = Interval::from_int(prec, &Integer::from(2 * p.arity))
        .sub(&Interval::from_int(prec, &e_s).log2()?.div(&Interval::from_int(prec, &n).log2()?)?);

    let mut ctx = Ctx {
        a,
        p,
        n: n.clone(),
        key: format!("{}|s={}|delta={}|{}|{}", a.canonical(), p.arity, p.delta, p.mode.name(), p.op.name()),
        checks: Vec::new(),
        trace: Vec::new(),
    };
    // |A|^{s−ν+δ} = E_s·|A|^{δ−s}
    let energy_rhs = PowerProduct::new(e_s.clone()).pow(n.clone(), Rational::from(&p.delta - p.arity));
    let cond_report = CheckReport::evaluate("energy-branch", Side::int(e_t.clone()), Relation::Gt, Side::Exact(energy_rhs), &ctx.key)?
        .informational()
        .with_note("E_{s/2}(A) > |A|^{s-nu+delta} selects the energy branch");
    let cond = cond_report.holds;
    ctx.checks.push(cond_report);
    if nu.cmp_rational(&Rational::from(1)) == Some(std::cmp::Ordering::Less) {
        ctx.checks.last_mut().expect("pushed").note = Some("nu < 1: outside the intended hypothesis".into());
    }

    let mut result = KpResult {
        branch: Branch::Energy,
        mode: p.mode,
        op: p.op,
        arity: p.arity,
        delta: p.delta.clone(),
        nu,
        set_size: a.len(),
        energy_s: e_s.clone(),
        energy_half: e_t,
        energy_condition: cond,
        a_prime: None,
        anchor_sum: None,
        z_sum: None,
        shift: None,
        u_prime: None,
        stats: StageStats::default(),
        trace: Vec::new(),
        checks: Vec::new(),
    };
    if cond && p.mode == KpMode::Paper {
        result.checks = ctx.checks;
        return Ok(result);
    }
    match build(&mut ctx, &r_t, &r_s, &e_s) {
        Ok(b) => {
            let subset = if cond {
                let doubled = p.op.combine_sets(&b.a_prime, &b.a_prime).len();
                let min = a.len().div_ceil(8);
                let certified = doubled <= 4 * b.a_prime.len() && b.a_prime.len() >= min;
                let note = format!("|A'∘A'| = {doubled}, |A'| = {}, required <= 4|A'| and >= {min}", b.a_prime.len());
                let report = CheckReport::evaluate(
                    "structure-certificate",
                    Side::int(doubled),
                    Relation::Le,
                    Side::int(4 * b.a_prime.len()),
                    &ctx.key,
                )?;
                let mut report = report.informational().with_note(note);
                report.holds = certified;
                ctx.checks.push(report);
                certified
            } else {
                true
            };
            if subset {
                result.branch = Branch::Subset;
                result.a_prime = Some(b.a_prime);
                result.anchor_sum = Some(b.anchor);
                result.z_sum = Some(b.z);
                result.shift = Some(b.shift);
                result.u_prime = Some(b.u_prime);
            }
            result.stats = b.stats;
        }
        Err(Error::StageCollapse(stage)) if cond => {
            ctx.record("collapse", 0, Some(stage));
        }
        Err(e) => return Err(e),
    }
    result.checks = ctx.checks;
    result.trace = ctx.trace;
    Ok(result)
}

fn build(ctx: &mut Ctx<'_>, r_t: &RepFunction, r_s: &RepFunction, e_s: &Integer) -> Result<Built> {
    let p = ctx.p;
    let op = p.op;
    let t = p.arity / 2;
    let s_exp = Rational::from(p.arity);
    let t_exp = Rational::from(t);
    let delta = p.delta.clone();
    let n_pow_s = ctx.n.clone().pow(p.arity);
    // M = 4|A|^ν = 4|A|^{2s}/E_s
    let m_bound = Rational::from((Integer::from(4) * n_pow_s.clone().square(), e_s.clone()));
    let mut stats = StageStats::default();

    // popular sums S and the hypergraph G
    let (threshold, label) = if ctx.paper() {
        let th = Rational::from((e_s.clone(), Integer::from(2) * &n_pow_s));
        (th.clone(), format!("r_s >= E_s/(2|A|^s) = {th}"))
    } else {
        let items: Vec<(u128, u128)> = r_s.iter().map(|(_, c)| (c as u128, c as u128)).collect();
        let th = upper_half_threshold(&items).expect("non-empty");
        (Rational::from(th), format!("r_s >= {th} (half mass)"))
    };
    let s_set = popular_sums(r_s, &threshold).map_err(|_| collapse("S"))?;
    let g: u64 = s_set.iter().map(|x| r_s.get(x)).sum();
    stats.s = s_set.len() as u64;
    stats.g = g;
    ctx.record("S", s_set.len() as u128, Some(label));
    ctx.record("G", g as u128, None);
    let half = Rational::from((1, 2));
    ctx.check(
        "popular-mass",
        Side::int(g),
        Relation::Ge,
        Side::Exact(ctx.size_power(half.clone(), &s_exp - delta.clone())),
        ctx.paper(),
    )?;
    ctx.check("popular-count", Side::int(s_set.len()), Relation::Le, Side::rational(m_bound.clone()), ctx.paper())?;

    // fibers of A^t and the fiber neighbourhoods R(σ)
    let keys: Vec<Integer> = r_t.iter().map(|(k, _)| k.clone()).collect();
    let w: Vec<u128> = r_t.iter().map(|(_, c)| c as u128).collect();
    let len = keys.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); len];
    for i in 0..len {
        for j in i..len {
            if s_set.contains(&op.combine(&keys[i], &keys[j])) {
                adj[i].push(j);
                if i != j {
                    adj[j].push(i);
                }
            }
        }
    }
    for row in &mut adj {
        row.sort_unstable();
    }
    let d: Vec<u128> = adj.iter().map(|row| row.iter().map(|&j| w[j]).sum()).collect();
    let score: Vec<u128> = adj.iter().map(|row| row.iter().map(|&j| w[j] * d[j]).sum()).collect();
    let x = argmax(&score);
    stats.anchor_score = score[x];
    ctx.record("anchor", score[x], Some(format!("sigma_x = {}", keys[x])));
    ctx.check(
        "anchor-score",
        Side::int(Integer::from(score[x])),
        Relation::Gt,
        Side::Exact(ctx.size_power(Rational::from((1, 4)), &s_exp - Rational::from(2 * &delta))),
        ctx.paper(),
    )?;

    let mut in_rx = vec![false; len];
    for &j in &adj[x] {
        in_rx[j] = true;
    }
    let c: Vec<u128> = adj.iter().map(|row| row.iter().filter(|&&j| in_rx[j]).map(|&j| w[j]).sum()).collect();
    let g1: u128 = (0..len).map(|i| w[i] * c[i]).sum();
    stats.g1 = g1;
    let sigma_g1 = IntSet::new(adj[x].iter().flat_map(|&j| adj[j].iter().map(|&i| op.combine(&keys[i], &keys[j])).collect::<Vec<_>>()));
    stats.sigma_g1 = sigma_g1.len() as u64;
    ctx.record("G1", g1, None);

    // Y: fibers with a large common neighbourhood with the anchor
    let y_bound = ctx.size_power(Rational::from((1, 8)), &t_exp - Rational::from(2 * &delta));
    let (y_min, label) = if ctx.paper() {
        let th = y_bound.ceil_int()?;
        let label = format!("c >= 2^-3 |A|^(t-2delta), i.e. c >= {th}");
        (th, label)
    } else {
        let items: Vec<(u128, u128)> = (0..len).map(|i| (c[i], w[i])).collect();
        let th = upper_half_threshold(&items).ok_or_else(|| collapse("Y"))?;
        (Integer::from(th), format!("c >= {th} (half mass)"))
    };
    let in_y: Vec<bool> = (0..len).map(|i| c[i] > 0 && c[i] >= y_min).collect();
    let y: u128 = (0..len).filter(|&i| in_y[i]).map(|i| w[i]).sum();
    stats.y = y as u64;
    ctx.record("Y", y, Some(label));
    if y == 0 {
        return Err(collapse("Y"));
    }
    ctx.check("Y-size", Side::int(Integer::from(y)), Relation::Gt, Side::Exact(y_bound.clone()), ctx.paper())?;

    // z ∈ R_G(x) maximising |Y₁|
    let mut best: Option<(usize, u128)> = None;
    for &j in &adj[x] {
        let mass: u128 = adj[j].iter().filter(|&&i| in_y[i]).map(|&i| w[i]).sum();
        if best.is_none_or(|(_, m)| mass > m) {
            best = Some((j, mass));
        }
    }
    let (z, y1) = best.ok_or_else(|| collapse("Y1"))?;
    if y1 == 0 {
        return Err(collapse("Y1"));
    }
    let mut in_y1 = vec![false; len];
    for &i in &adj[z] {
        in_y1[i] = in_y[i];
    }
    let sigma_y1 = in_y1.iter().filter(|&&b| b).count() as u128;
    stats.y1 = y1 as u64;
    stats.sigma_y1 = sigma_y1 as u64;
    ctx.record("Y1", y1, Some(format!("sigma_z = {}", keys[z])));
    ctx.check("Y1-size", Side::int(Integer::from(y1)), Relation::Gt, Side::Exact(y_bound), ctx.paper())?;

    // S₁ and Y₂: fibers heavier than half the average
    let in_y2: Vec<bool> = (0..len).map(|i| in_y1[i] && 2 * w[i] * sigma_y1 > y1).collect();
    let y2: u128 = (0..len).filter(|&i| in_y2[i]).map(|i| w[i]).sum();
    let u_set = IntSet::new((0..len).filter(|&i| in_y2[i]).map(|i| keys[i].clone()));
    stats.y2 = y2 as u64;
    stats.sigma_y2 = u_set.len() as u64;
    ctx.record("Y2", y2, Some(format!("r(Y1;n) > {y1}/(2*{sigma_y1})")));
    if y2 == 0 {
        return Err(collapse("Y2"));
    }
    ctx.check("Y2-half", Side::int(Integer::from(2 * y2)), Relation::Ge, Side::int(Integer::from(y1)), true)?;
    ctx.check("sigma-chain-Y2", Side::int(u_set.len()), Relation::Le, Side::int(sigma_y1 as u64), true)?;
    ctx.check("sigma-chain-Y1", Side::int(sigma_y1 as u64), Relation::Le, Side::int(sigma_g1.len()), true)?;

    // the popular-sum graph between U = Σ(Y₂) and V = Σ(R_G(x))
    let v_set = IntSet::new(adj[x].iter().map(|&j| keys[j].clone()));
    stats.u = u_set.len() as u64;
    stats.v = v_set.len() as u64;
    ctx.record("U", u_set.len() as u128, None);
    ctx.record("V", v_set.len() as u128, None);
    let mut r_uv: BTreeMap<Integer, u64> = BTreeMap::new();
    for u in u_set.iter() {
        for v in v_set.iter() {
            *r_uv.entry(op.combine(u, v)).or_default() += 1;
        }
    }
    // alpha = 2^-37 |A|^(-20 delta)
    let alpha = ctx.size_power(Rational::from((1, Integer::from(1) << 37u32)), Rational::from(-20 * &delta));
    let (filter, label) = if ctx.paper() {
        let th = alpha.clone().scale(m_bound.clone()).ceil_int()?;
        let mut kept: Vec<(&Integer, u64)> = r_uv.iter().filter(|(_, &r)| r >= th).map(|(k, &r)| (k, r)).collect();
        let cap = m_bound.clone().floor().numer().to_usize().unwrap_or(usize::MAX);
        if kept.len() > cap {
            kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
            kept.truncate(cap);
        }
        (IntSet::new(kept.into_iter().map(|(k, _)| k.clone())), format!("r(U,V;n) >= alpha*M, i.e. >= {th}, at most floor(M)"))
    } else {
        let items: Vec<(u128, u128)> = r_uv.values().map(|&r| (r as u128, r as u128)).collect();
        let th = upper_half_threshold(&items).expect("U and V are non-empty");
        let kept = r_uv.iter().filter(|(_, &r)| r as u128 >= th).map(|(k, _)| k.clone());
        (IntSet::new(kept), format!("r(U,V;n) >= {th} (half mass)"))
    };
    stats.s_prime = filter.len() as u64;
    ctx.record("S'", filter.len() as u128, Some(label));
    if filter.is_empty() {
        return Err(collapse("S'"));
    }
    let graph = PopularSumGraph::new(u_set.clone(), v_set, filter, op)?;
    stats.graph_edges = graph.edges;
    ctx.record("graph", graph.edges as u128, Some(format!("alpha = {}, N = {}", graph.alpha, graph.n)));
    let targets = (!ctx.paper()).then(BsgTargets::default);
    let (u_prime, report) = bsg_extract(&graph, targets.as_ref(), LogBase::Two)?;
    ctx.checks.push(report);
    stats.u_prime = u_prime.len() as u64;
    ctx.record("U'", u_prime.len() as u128, None);
    let alpha4 = alpha.clone().mul(&alpha).mul(&alpha).mul(&alpha);
    ctx.check(
        "U'-size",
        Side::int(u_prime.len()),
        Relation::Ge,
        Side::Exact(alpha4.clone().scale(Rational::from((1, 1 << 20))).scale(m_bound.clone())),
        false,
    )?;

    // Y₃ and the final shift
    let y3: u128 = (0..len).filter(|&i| in_y1[i] && u_prime.contains(&keys[i])).map(|i| w[i]).sum();
    stats.y3 = y3 as u64;
    ctx.record("Y3", y3, None);
    ctx.check(
        "Y3-size",
        Side::int(Integer::from(y3)),
        Relation::Ge,
        Side::Exact(alpha4.clone().scale(Rational::from((1, 1 << 21))).scale(Integer::from(y1))),
        false,
    )?;
    let shifts = rep_function(ctx.a, t - 1, op)?.support_set();
    let mut best: Option<(usize, Vec<Integer>)> = None;
    for (k, sw) in shifts.iter().enumerate() {
        let members: Vec<Integer> = ctx.a.iter().filter(|a| u_prime.contains(&op.combine(sw, a))).cloned().collect();
        if best.as_ref().is_none_or(|(_, m)| members.len() > m.len()) {
            best = Some((k, members));
        }
    }
    let (k, members) = best.expect("the shift set is non-empty");
    let shift = shifts.as_slice()[k].clone();
    let a_prime = IntSet::new(members);
    if a_prime.is_empty() {
        return Err(Error::Invariant("U' contains no shifted element of A".into()));
    }
    stats.a_prime = a_prime.len() as u64;
    ctx.record("A'", a_prime.len() as u128, Some(format!("sigma_w = {shift}")));
    // |A'| ≥ |Y₃| / |A|^{t−1}
    ctx.check(
        "A'-pigeonhole",
        Side::int(a_prime.len()),
        Relation::Ge,
        Side::Exact(PowerProduct::new(Integer::from(y3)).pow(ctx.n.clone(), Rational::from(1) - &t_exp)),
        true,
    )?;
    ctx.check(
        "A'-size",
        Side::int(a_prime.len()),
        Relation::Ge,
        Side::Exact(alpha4.scale(Rational::from((1, 1 << 24))).pow(ctx.n.clone(), Rational::from(1) - Rational::from(2 * &delta))),
        false,
    )?;
    Ok(Built { a_prime, anchor: keys[x].clone(), z: keys[z].clone(), shift, u_prime, stats })
}

/// First index of the maximum.
fn argmax(v: &[u128]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::{corpus_rng, random_set};
    use crate::exact::parse_rational;

    fn params(mode: KpMode) -> KpParams {
        KpParams::new(4, parse_rational("0.05").unwrap(), mode)
    }

    #[test]
    fn popular_sums_examples() {
        let r = rep_function(&IntSet::new([1, 2, 3]), 2, Mode::Additive).unwrap();
        assert_eq!(popular_sums(&r, &Rational::from(3)).unwrap(), IntSet::new([4]));
        assert_eq!(popular_sums(&r, &Rational::from(1)).unwrap(), IntSet::new(2..=6));
        assert_eq!(popular_sums(&r, &Rational::from(10)), Err(Error::EmptyResult));
    }

    #[test]
    fn progression_gives_structured_subset() {
        let a = IntSet::new(1..=16);
        let res = kp_pipeline(&a, &params(KpMode::Calibrated)).unwrap();
        assert_eq!(res.branch, Branch::Subset);
        let ap = res.a_prime.as_ref().unwrap();
        assert!(ap.is_subset(&a));
        assert!(ap.len() >= 8, "{ap}");
        assert!(ap.sumset(ap).len() <= 4 * ap.len());
        assert!(res.checks.iter().all(|c| !c.is_violation()), "{:#?}", res.checks);
    }

    #[test]
    fn paper_mode_on_progression_takes_energy_branch() {
        let a = IntSet::new(1..=16);
        let res = kp_pipeline(&a, &params(KpMode::Paper)).unwrap();
        assert!(res.energy_condition);
        assert_eq!(res.branch, Branch::Energy);
    }

    #[test]
    fn sidon_like_set_has_nothing_to_extract() {
        let mut rng = corpus_rng(7);
        let a = random_set(&mut rng, 16..=16, 1..=1_000_000, false);
        let res = kp_pipeline(&a, &params(KpMode::Calibrated)).unwrap();
        assert_eq!(res.branch, Branch::Energy);
    }

    #[test]
    fn huge_delta_forces_the_construction() {
        let a = IntSet::new([1, 2, 3, 5, 8, 13]);
        for mode in [KpMode::Paper, KpMode::Calibrated] {
            let p = KpParams::new(4, Rational::from(8), mode);
            match kp_pipeline(&a, &p) {
                Ok(res) => {
                    assert!(!res.energy_condition);
                    assert_eq!(res.branch, Branch::Subset);
                    assert!(res.checks.iter().all(|c| !c.is_violation()), "{:#?}", res.checks);
                }
                Err(Error::StageCollapse(_)) => assert_eq!(mode, KpMode::Paper),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn multiplicative_pipeline_on_a_progression_of_powers() {
        let a = IntSet::new((0..12).map(|i| Integer::from(3).pow(i)));
        let p = params(KpMode::Calibrated).with_op(Mode::Multiplicative);
        let res = kp_pipeline(&a, &p).unwrap();
        assert_eq!(res.branch, Branch::Subset);
        let ap = res.a_prime.unwrap();
        assert!(ap.product_set(&ap).len() <= 4 * ap.len());
    }

    #[test]
    fn rejected_inputs() {
        let p = params(KpMode::Calibrated);
        assert_eq!(kp_pipeline(&IntSet::new([1]), &p).unwrap_err(), Error::TooSmall);
        let bad = KpParams::new(3, Rational::from(1), KpMode::Paper);
        assert!(matches!(kp_pipeline(&IntSet::new([1, 2]), &bad), Err(Error::BadArity(_))));
        let mult = p.with_op(Mode::Multiplicative);
        assert_eq!(kp_pipeline(&IntSet::new([0, 1]), &mult).unwrap_err(), Error::ZeroElement);
    }
}
