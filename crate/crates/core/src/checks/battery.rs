//! Randomised batteries: one seeded corpus per suite.

use std::str::FromStr;

use rand::Rng;
use rug::Rational;

use super::corpus::{corpus_rng, random_set, CorpusRng};
use super::lemmas::*;
use super::CheckReport;
use crate::energy::Mode;
use crate::error::{Error, Result};
use crate::set::{iterated_sumset, Generator, IntSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Young,
    Holder,
    Mlpain,
    Union,
    Plunnecke,
    Csref,
    MixedCs,
    War2,
    Convex,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Young,
        Suite::Holder,
        Suite::Mlpain,
        Suite::Union,
        Suite::Plunnecke,
        Suite::Csref,
        Suite::MixedCs,
        Suite::War2,
        Suite::Convex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Young => "young",
            Suite::Holder => "holder",
            Suite::Mlpain => "mlpain",
            Suite::Union => "union",
            Suite::Plunnecke => "plunnecke",
            Suite::Csref => "csref",
            Suite::MixedCs => "mixed-cs",
            Suite::War2 => "war2",
            Suite::Convex => "convex",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::BadParams(format!("unknown suite `{s}`")))
    }
}

const VALUES: std::ops::RangeInclusive<i64> = -1000..=1000;

fn pick(rng: &mut CorpusRng, zero_free: bool) -> IntSet {
    random_set(rng, 2..=10, VALUES, zero_free)
}

fn mode(rng: &mut CorpusRng) -> Mode {
    if rng.gen_bool(0.5) {
        Mode::Additive
    } else {
        Mode::Multiplicative
    }
}

/// Splits `a` into `n` non-empty parts (fewer if `a` is small).
fn split(rng: &mut CorpusRng, a: &IntSet, n: usize) -> Vec<IntSet> {
    let n = n.min(a.len()).max(1);
    let mut parts = vec![Vec::new(); n];
    for (i, x) in a.iter().enumerate() {
        let slot = if i < n { i } else { rng.gen_range(0..n) };
        parts[slot].push(x.clone());
    }
    parts.into_iter().map(IntSet::new).collect()
}

fn one_case(suite: Suite, rng: &mut CorpusRng, max_tuples: u64) -> Result<Vec<CheckReport>> {
    let s: u32 = rng.gen_range(1..=3);
    Ok(match suite {
        Suite::Young => {
            let a = pick(rng, false);
            check_young(&a, 2, 1)?.to_vec()
        }
        Suite::Holder => {
            let sets: Vec<IntSet> = (0..2 * s).map(|_| pick(rng, false)).collect();
            vec![check_holder_mixed(&sets, Mode::Additive)?]
        }
        Suite::Mlpain => {
            let sets: Vec<IntSet> = (0..2 * s).map(|_| pick(rng, true)).collect();
            vec![check_holder_mixed(&sets, Mode::Multiplicative)?]
        }
        Suite::Union => {
            let m = mode(rng);
            let a = pick(rng, m == Mode::Multiplicative);
            let n = rng.gen_range(1..=3);
            vec![check_union_bound(&split(rng, &a, n), s, m)?]
        }
        Suite::Plunnecke => {
            let a = pick(rng, false);
            let total = rng.gen_range(1..=4);
            let m = rng.gen_range(0..=total);
            vec![check_plunnecke(&a, m, total - m)?]
        }
        Suite::Csref => {
            let m = mode(rng);
            let a = pick(rng, false);
            vec![check_csref(&a, s, m)?]
        }
        Suite::MixedCs => {
            let m = mode(rng);
            let (b, c) = (pick(rng, false), pick(rng, false));
            vec![check_mixed_cs(&b, &c, s, m)?]
        }
        Suite::War2 => {
            let k = rng.gen_range(1..=3);
            let n = rng.gen_range(2..=10);
            vec![check_war2(k, s, n, max_tuples)?]
        }
        Suite::Convex => {
            let k: u32 = rng.gen_range(2..=3);
            let n: u32 = rng.gen_range(4..=10);
            let interval = Generator::Interval { n }.generate()?;
            let mut coeffs: Vec<i64> = (0..k).map(|_| rng.gen_range(-5..=5)).collect();
            coeffs.push(rng.gen_range(1..=5));
            let a = Generator::PolyImage { coeffs, domain: interval.clone() }.generate()?;
            if a.len() < 4 {
                return Ok(Vec::new());
            }
            let doubling = Rational::from((iterated_sumset(&interval, 2, 1)?.len(), interval.len()));
            vec![check_convex_growth(&a, k, &doubling, &ConvexConfig::default())?]
        }
    })
}

/// Runs `cases` seeded cases of one suite.
pub fn run_suite(suite: Suite, cases: usize, seed: u64, max_tuples: u64) -> Result<Vec<CheckReport>> {
    // independent stream per suite so suites can be run alone
    let salt = suite.name().bytes().fold(0u64, |h, b| h.rotate_left(7) ^ u64::from(b));
    let mut rng = corpus_rng(seed ^ salt);
    let mut out = Vec::with_capacity(cases);
    for _ in 0..cases {
        out.extend(one_case(suite, &mut rng, max_tuples)?);
    }
    Ok(out)
}
