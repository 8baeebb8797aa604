//! Tuple-level brute force for the structured-subset pipeline. Every stage is
//! computed on explicit tuples of `A^t`, never on sum fibers.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use energia_core::exact::parse_rational;
use energia_core::kp::{kp_pipeline, KpMode, KpParams, KpResult, StageStats};
use energia_core::{Error, IntSet};

pub type Tuple = Vec<i64>;

pub fn tuples(a: &[i64], t: usize) -> Vec<Tuple> {
    let mut out: Vec<Tuple> = vec![Vec::new()];
    for _ in 0..t {
        out = out
            .into_iter()
            .flat_map(|p| a.iter().map(move |&x| {
                let mut q = p.clone();
                q.push(x);
                q
            }))
            .collect();
    }
    out
}

fn sum(t: &[i64]) -> i64 {
    t.iter().sum()
}

/// Largest key whose upper set carries at least half the mass, over
/// unit-mass items.
fn half_mass_key(mut keys: Vec<u64>) -> Option<u64> {
    keys.sort_unstable_by(|a, b| b.cmp(a));
    let total = keys.len();
    (0..total).find(|&i| keys.get(i + 1) != Some(&keys[i]) && 2 * (i + 1) >= total).map(|i| keys[i])
}

#[derive(Debug)]
pub enum Outcome {
    Stats(StageStats),
    Collapse(&'static str),
}

/// Calibrated-mode stage cardinalities for even arity `s`. `u_prime` is the
/// extracted vertex set; when it is `None` the run stops after `S'`.
pub fn brute_stages(a: &[i64], s: usize, u_prime: Option<&BTreeSet<i64>>) -> Outcome {
    let t = s / 2;
    let half: Vec<Tuple> = tuples(a, t);
    let full: Vec<Tuple> = tuples(a, s);
    let mut r_s: BTreeMap<i64, u64> = BTreeMap::new();
    for y in &full {
        *r_s.entry(sum(y)).or_default() += 1;
    }
    let mut st = StageStats::default();

    // popular sums: half of the s-tuples, ranked by the popularity of their sum
    let th = half_mass_key(full.iter().map(|y| r_s[&sum(y)]).collect()).unwrap();
    let popular: BTreeSet<i64> = r_s.iter().filter(|(_, &c)| c >= th).map(|(&n, _)| n).collect();
    st.s = popular.len() as u64;
    st.g = full.iter().filter(|y| popular.contains(&sum(y))).count() as u64;

    let n = half.len();
    let nbr: Vec<Vec<usize>> =
        (0..n).map(|i| (0..n).filter(|&j| popular.contains(&(sum(&half[i]) + sum(&half[j])))).collect()).collect();
    let deg: Vec<u128> = nbr.iter().map(|r| r.len() as u128).collect();
    // anchor: most paths of length two, ties to the smallest sum
    let score: Vec<u128> = nbr.iter().map(|r| r.iter().map(|&j| deg[j]).sum()).collect();
    let x = (0..n)
        .max_by(|&i, &j| score[i].cmp(&score[j]).then(sum(&half[j]).cmp(&sum(&half[i]))))
        .unwrap();
    st.anchor_score = score[x];
    let rx: BTreeSet<usize> = nbr[x].iter().copied().collect();
    let common: Vec<u64> = nbr.iter().map(|r| r.iter().filter(|j| rx.contains(j)).count() as u64).collect();
    st.g1 = common.iter().map(|&c| c as u128).sum();
    let sg1: BTreeSet<i64> =
        rx.iter().flat_map(|&j| nbr[j].iter().map(move |&i| (i, j))).map(|(i, j)| sum(&half[i]) + sum(&half[j])).collect();
    st.sigma_g1 = sg1.len() as u64;

    let Some(cth) = half_mass_key(common.clone()) else { return Outcome::Collapse("Y") };
    let y: Vec<usize> = (0..n).filter(|&i| common[i] > 0 && common[i] >= cth).collect();
    st.y = y.len() as u64;
    if y.is_empty() {
        return Outcome::Collapse("Y");
    }
    let yset: BTreeSet<usize> = y.iter().copied().collect();
    let z = rx
        .iter()
        .copied()
        .max_by(|&i, &j| {
            let ci = nbr[i].iter().filter(|k| yset.contains(k)).count();
            let cj = nbr[j].iter().filter(|k| yset.contains(k)).count();
            ci.cmp(&cj).then(sum(&half[j]).cmp(&sum(&half[i])))
        })
        .unwrap();
    let y1: Vec<usize> = nbr[z].iter().copied().filter(|k| yset.contains(k)).collect();
    if y1.is_empty() {
        return Outcome::Collapse("Y1");
    }
    st.y1 = y1.len() as u64;
    let mut r_y1: BTreeMap<i64, u64> = BTreeMap::new();
    for &i in &y1 {
        *r_y1.entry(sum(&half[i])).or_default() += 1;
    }
    st.sigma_y1 = r_y1.len() as u64;
    let y2: Vec<usize> = y1.iter().copied().filter(|&i| 2 * r_y1[&sum(&half[i])] * st.sigma_y1 > st.y1).collect();
    st.y2 = y2.len() as u64;
    let u: BTreeSet<i64> = y2.iter().map(|&i| sum(&half[i])).collect();
    st.sigma_y2 = u.len() as u64;
    if y2.is_empty() {
        return Outcome::Collapse("Y2");
    }
    let v: BTreeSet<i64> = rx.iter().map(|&j| sum(&half[j])).collect();
    st.u = u.len() as u64;
    st.v = v.len() as u64;

    let mut r_uv: BTreeMap<i64, u64> = BTreeMap::new();
    for p in &u {
        for q in &v {
            *r_uv.entry(p + q).or_default() += 1;
        }
    }
    // half of the pairs of U × V, ranked by the popularity of their sum
    let r_uv = &r_uv;
    let pairs: Vec<u64> = u.iter().flat_map(|p| v.iter().map(move |q| r_uv[&(p + q)])).collect();
    let th = half_mass_key(pairs).unwrap();
    let filter: BTreeSet<i64> = r_uv.iter().filter(|(_, &c)| c >= th).map(|(&n, _)| n).collect();
    st.s_prime = filter.len() as u64;
    st.graph_edges = u.iter().flat_map(|p| v.iter().map(move |q| p + q)).filter(|n| filter.contains(n)).count() as u64;

    let Some(up) = u_prime else { return Outcome::Stats(st) };
    st.u_prime = up.len() as u64;
    st.y3 = y1.iter().filter(|&&i| up.contains(&sum(&half[i]))).count() as u64;
    let shifts: BTreeSet<i64> = tuples(a, t - 1).iter().map(|w| sum(w)).collect();
    st.a_prime = shifts.iter().map(|w| a.iter().filter(|&&x| up.contains(&(w + x))).count()).max().unwrap() as u64;
    Outcome::Stats(st)
}

pub fn to_i64(a: &IntSet) -> Vec<i64> {
    a.iter().map(|x| x.to_i64().expect("small test values")).collect()
}

/// Pipeline outcome in the oracle's terms.
fn observed(a: &IntSet) -> Result<(Option<KpResult>, Option<String>), Error> {
    let p = KpParams::new(4, parse_rational("0.05").unwrap(), KpMode::Calibrated);
    match kp_pipeline(a, &p) {
        Ok(res) => {
            let collapsed = res.trace.iter().find(|r| r.stage == "collapse").and_then(|r| r.threshold.clone());
            Ok((Some(res), collapsed))
        }
        Err(Error::StageCollapse(stage)) => Ok((None, Some(stage))),
        Err(e) => Err(e),
    }
}

/// Checks the calibrated `s = 4` pipeline on `a` against [`brute_stages`].
pub fn compare(a: &IntSet) -> Result<(), String> {
    let (res, collapsed) = observed(a).map_err(|e| format!("{a:?}: {e}"))?;
    let u_prime: Option<BTreeSet<i64>> =
        res.as_ref().and_then(|r| r.u_prime.as_ref()).map(|u| to_i64(u).into_iter().collect());
    let elems = to_i64(a);
    match (brute_stages(&elems, 4, u_prime.as_ref()), collapsed) {
        (Outcome::Collapse(stage), Some(got)) if stage == got => Ok(()),
        (Outcome::Stats(want), None) => {
            let got = &res.expect("no collapse").stats;
            if *got == want {
                Ok(())
            } else {
                Err(format!("{elems:?}: pipeline {got:?} vs tuples {want:?}"))
            }
        }
        (want, got) => Err(format!("{elems:?}: tuples {want:?} vs pipeline collapse {got:?}")),
    }
}

