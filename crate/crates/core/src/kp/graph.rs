//! Popular-sum graphs and a constructive Balog–Szemerédi–Gowers extraction.

use std::cmp::Ordering;

use rug::{Integer, Rational};

use crate::checks::{CheckReport, Relation, Side};
use crate::constants::LogBase;
use crate::energy::Mode;
use crate::error::{Error, Result};
use crate::exact::{Interval, PowerProduct, DEFAULT_PREC};
use crate::set::IntSet;

/// Bipartite graph on `U × V` with an edge `(u, v)` iff `u∘v` lies in the
/// admissible-sum filter.
#[derive(Clone, Debug)]
pub struct PopularSumGraph {
    pub left: IntSet,
    pub right: IntSet,
    pub filter: IntSet,
    pub op: Mode,
    rows: Vec<Vec<u64>>,
    pub edges: u64,
    /// `max(|U|, |V|, |Σ(𝒢)|)`
    pub n: usize,
    /// `|𝒢| / N²`
    pub alpha: Rational,
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

fn bit(row: &[u64], j: usize) -> bool {
    row[j / 64] >> (j % 64) & 1 == 1
}

fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

impl PopularSumGraph {
    pub fn new(left: IntSet, right: IntSet, filter: IntSet, op: Mode) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::EmptySet);
        }
        let w = words(right.len());
        let mut rows = vec![vec![0u64; w]; left.len()];
        let mut edges = 0u64;
        let mut realised = Vec::new();
        for (i, u) in left.iter().enumerate() {
            for (j, v) in right.iter().enumerate() {
                let n = op.combine(u, v);
                if filter.contains(&n) {
                    rows[i][j / 64] |= 1 << (j % 64);
                    edges += 1;
                    realised.push(n);
                }
            }
        }
        let sums = IntSet::new(realised).len();
        let n = left.len().max(right.len()).max(sums);
        let alpha = Rational::from((edges, (n * n) as u64));
        Ok(PopularSumGraph { left, right, filter, op, rows, edges, n, alpha })
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        bit(&self.rows[i], j)
    }

    pub fn left_degree(&self, i: usize) -> u32 {
        self.rows[i].iter().map(|x| x.count_ones()).sum()
    }

    pub fn right_degree(&self, j: usize) -> u32 {
        (0..self.left.len()).filter(|&i| self.has_edge(i, j)).count() as u32
    }
}

/// Optional practical goals steering the choice among valid candidates.
#[derive(Clone, Debug)]
pub struct BsgTargets {
    /// `|A'∘A'| ≤ max_doubling · |A'|`
    pub max_doubling: Rational,
    /// `|A'| ≥ min_fraction · |U|`
    pub min_fraction: Rational,
}

impl Default for BsgTargets {
    fn default() -> Self {
        BsgTargets { max_doubling: Rational::from(4), min_fraction: Rational::from((1, 8)) }
    }
}

/// The two explicit conclusions of the BSG lemma for a candidate `A' ⊆ U`:
/// `|A'+A'| ≤ (2^38/3)·L·α^{-7}·N` and `|A'| ≥ (3/2^16)·α³·N / L`, with
/// `L = log(32/α)`.
pub fn bsg_lemma_reports(g: &PopularSumGraph, a_prime: &IntSet, base: LogBase) -> Result<[CheckReport; 2]> {
    if g.edges == 0 {
        return Err(Error::EmptyGraph);
    }
    let prec = DEFAULT_PREC;
    let doubled = g.op.combine_sets(a_prime, a_prime).len();
    let ratio = Rational::from(32) / &g.alpha;
    let arg = Interval::from_rational(prec, &ratio);
    let log = match base {
        LogBase::Two => arg.log2()?,
        LogBase::Natural => arg.ln()?,
    };
    let n = Integer::from(g.n);
    let upper = PowerProduct::new(Rational::from((Integer::from(1) << 38u32, 3)))
        .scale(g.alpha.clone().recip().pow_i(7))
        .scale(n.clone());
    let lower = PowerProduct::new(Rational::from((3, Integer::from(1) << 16u32)))
        .scale(g.alpha.clone().pow_i(3))
        .scale(n);
    let rhs_up = Side::Approx(upper.enclose(prec)?.mul(&log));
    let rhs_low = Side::Approx(lower.enclose(prec)?.div(&log)?);
    let key = format!("{}|{}|{}|{}", g.left.canonical(), g.right.canonical(), g.filter.canonical(), a_prime.canonical());
    Ok([
        CheckReport::evaluate("bsg-doubling", Side::int(doubled), Relation::Le, rhs_up, &key)?,
        CheckReport::evaluate("bsg-size", Side::int(a_prime.len()), Relation::Ge, rhs_low, &key)?,
    ])
}

trait PowI {
    fn pow_i(self, e: u32) -> Rational;
}

impl PowI for Rational {
    fn pow_i(self, e: u32) -> Rational {
        use rug::ops::Pow;
        self.pow(e)
    }
}

fn merged(reports: &[CheckReport; 2]) -> CheckReport {
    let [d, s] = reports;
    let mut out = d.clone();
    out.name = "bsg-lemma".into();
    out.lhs = format!("|A'+A'| = {}; |A'| = {}", d.lhs, s.lhs);
    out.rhs = format!("<= {}; >= {}", d.rhs, s.rhs);
    out.holds = d.holds && s.holds;
    out.slack = if d.slack_f64() <= s.slack_f64() { d.slack.clone() } else { s.slack.clone() };
    out.inputs_digest = crate::checks::digest(&format!("{}{}", d.inputs_digest, s.inputs_digest));
    out
}

struct Candidate {
    members: Vec<usize>,
    doubled: usize,
    meets_targets: bool,
    order: usize,
}

impl Candidate {
    // larger is better
    fn rank(&self, other: &Candidate) -> Ordering {
        self.meets_targets
            .cmp(&other.meets_targets)
            .then(self.members.len().cmp(&other.members.len()))
            .then(other.doubled.cmp(&self.doubled))
            .then(other.order.cmp(&self.order))
    }
}

/// Exhaustive subset search is used only for `|U|` up to this size.
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Extracts `A' ⊆ U` with small doubling from a dense popular-sum graph.
///
/// Seeds are right vertices by decreasing degree. For each seed the
/// neighbourhood among popular left vertices is pruned to vertices with many
/// common neighbours to most of the neighbourhood (paths of length three
/// through the seed). Candidates are checked against the lemma's constants;
/// the practical targets only rank valid candidates. Small `U` falls back to
/// exhaustive search when no candidate meets the targets.
pub fn bsg_extract(g: &PopularSumGraph, targets: Option<&BsgTargets>, base: LogBase) -> Result<(IntSet, CheckReport)> {
    if g.edges == 0 {
        return Err(Error::EmptyGraph);
    }
    let nu = g.left.len();
    let values = |m: &[usize]| IntSet::new(m.iter().map(|&i| g.left.as_slice()[i].clone()));
    let assess = |members: Vec<usize>, order: usize| -> Candidate {
        let set = values(&members);
        let doubled = g.op.combine_sets(&set, &set).len();
        let meets_targets = targets.is_some_and(|t| {
            doubled <= Rational::from(&t.max_doubling * members.len() as u64)
                && members.len() as u64 >= Rational::from(&t.min_fraction * nu as u64)
        });
        Candidate { members, doubled, meets_targets, order }
    };

    let degrees: Vec<u32> = (0..nu).map(|i| g.left_degree(i)).collect();
    // popular: at least half the average degree
    let popular: Vec<bool> = degrees.iter().map(|&d| u64::from(d) * 2 * nu as u64 >= g.edges).collect();
    let mut seeds: Vec<(u32, usize)> =
        (0..g.right.len()).map(|j| (g.right_degree(j), j)).filter(|(d, _)| *d > 0).collect();
    seeds.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let nv = g.right.len() as f64;
    let alpha = g.alpha.to_f64();
    let tau = ((alpha * alpha * nv / 8.0).ceil() as u32).max(1);

    let mut pool: Vec<Candidate> = Vec::new();
    for (order, &(_, j)) in seeds.iter().enumerate() {
        let hood: Vec<usize> = (0..nu).filter(|&i| popular[i] && g.has_edge(i, j)).collect();
        if hood.is_empty() {
            continue;
        }
        let pruned: Vec<usize> = hood
            .iter()
            .copied()
            .filter(|&i| {
                let good = hood.iter().filter(|&&k| popcount_and(&g.rows[i], &g.rows[k]) >= tau).count();
                2 * good >= hood.len()
            })
            .collect();
        if !pruned.is_empty() && pruned.len() < hood.len() {
            pool.push(assess(pruned, 2 * order));
        }
        pool.push(assess(hood, 2 * order + 1));
    }
    pool.sort_by(|a, b| b.rank(a));

    let mut chosen = None;
    for c in &pool {
        let set = values(&c.members);
        let reports = bsg_lemma_reports(g, &set, base)?;
        if reports.iter().all(|r| r.holds) {
            chosen = Some((c.meets_targets, set, reports));
            break;
        }
    }
    if targets.is_some() && !chosen.as_ref().is_some_and(|c| c.0) && nu <= EXHAUSTIVE_LIMIT {
        if let Some(best) = exhaustive(nu, &assess) {
            let set = values(&best.members);
            let reports = bsg_lemma_reports(g, &set, base)?;
            if reports.iter().all(|r| r.holds) {
                chosen = Some((best.meets_targets, set, reports));
            }
        }
    }
    if chosen.is_none() {
        // a single vertex of maximal degree
        let best = (0..nu).max_by(|&a, &b| degrees[a].cmp(&degrees[b]).then(b.cmp(&a))).expect("non-empty");
        let set = values(&[best]);
        let reports = bsg_lemma_reports(g, &set, base)?;
        chosen = Some((false, set, reports));
    }
    let (_, set, reports) = chosen.expect("set above");
    let report = merged(&reports);
    if !report.holds {
        return Err(Error::Invariant("no BSG candidate satisfies the lemma bounds".into()));
    }
    Ok((set, report))
}

fn exhaustive(nu: usize, assess: &dyn Fn(Vec<usize>, usize) -> Candidate) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for mask in 1u32..(1u32 << nu) {
        let members: Vec<usize> = (0..nu).filter(|i| mask >> i & 1 == 1).collect();
        let c = assess(members, mask as usize);
        if best.as_ref().is_none_or(|b| c.rank(b) == Ordering::Greater) {
            best = Some(c);
        }
    }
    best
}
