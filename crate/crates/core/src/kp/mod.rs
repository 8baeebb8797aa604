//! The structured-subset pipeline: from a set whose half-arity energy is not
//! too large, extract a large subset with small iterated sumsets.

mod fiber;
mod graph;
mod pipeline;
mod verify;

pub use fiber::FiberSet;
pub use graph::{bsg_extract, bsg_lemma_reports, BsgTargets, PopularSumGraph, EXHAUSTIVE_LIMIT};
pub use pipeline::{kp_pipeline, popular_sums};
pub use verify::kp_verify;

use rug::{Integer, Rational};

use crate::checks::CheckReport;
use crate::energy::Mode;
use crate::exact::Interval;
use crate::set::IntSet;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum KpMode {
    /// Absolute thresholds with the proof's constants.
    Paper,
    /// Each absolute threshold replaced by the top half of the relevant mass.
    #[default]
    Calibrated,
}

impl KpMode {
    pub fn name(self) -> &'static str {
        match self {
            KpMode::Paper => "paper",
            KpMode::Calibrated => "calibrated",
        }
    }
}

impl std::str::FromStr for KpMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "paper" => Ok(KpMode::Paper),
            "calibrated" => Ok(KpMode::Calibrated),
            _ => Err(crate::Error::BadParams(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KpParams {
    /// Energy arity `s`, even and at least 4.
    pub arity: u32,
    pub delta: Rational,
    pub mode: KpMode,
    /// Sums for the additive pipeline, products for the multiplicative one.
    pub op: Mode,
}

impl KpParams {
    pub fn new(arity: u32, delta: Rational, mode: KpMode) -> Self {
        KpParams { arity, delta, mode, op: Mode::Additive }
    }

    pub fn with_op(mut self, op: Mode) -> Self {
        self.op = op;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `E_{s/2}(A) > |A|^{s−ν+δ}` holds.
    Energy,
    Subset,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Energy => "EnergyBranch",
            Branch::Subset => "SubsetBranch",
        }
    }
}

/// Cardinalities of every stage; tuple counts for subsets of `A^t`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StageStats {
    pub s: u64,
    pub g: u64,
    pub anchor_score: u128,
    pub g1: u128,
    pub y: u64,
    pub y1: u64,
    pub y2: u64,
    pub sigma_y1: u64,
    pub sigma_y2: u64,
    pub sigma_g1: u64,
    pub u: u64,
    pub v: u64,
    pub s_prime: u64,
    pub graph_edges: u64,
    pub u_prime: u64,
    pub y3: u64,
    pub a_prime: u64,
}

/// One exported stage: name, cardinality and the threshold that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageRecord {
    pub stage: &'static str,
    pub cardinality: u128,
    pub threshold: Option<String>,
}

#[derive(Clone, Debug)]
pub struct KpResult {
    pub branch: Branch,
    pub mode: KpMode,
    pub op: Mode,
    pub arity: u32,
    pub delta: Rational,
    /// Enclosure of `ν` defined by `E_s(A) = |A|^{2s−ν}`.
    pub nu: Interval,
    pub set_size: usize,
    pub energy_s: Integer,
    pub energy_half: Integer,
    pub energy_condition: bool,
    pub a_prime: Option<IntSet>,
    pub anchor_sum: Option<Integer>,
    pub z_sum: Option<Integer>,
    pub shift: Option<Integer>,
    pub u_prime: Option<IntSet>,
    pub stats: StageStats,
    pub trace: Vec<StageRecord>,
    pub checks: Vec<CheckReport>,
}

/// The largest key `τ` such that items with key `≥ τ` carry at least half the
/// total mass. `None` when the total mass is zero.
pub fn upper_half_threshold(items: &[(u128, u128)]) -> Option<u128> {
    let total: u128 = items.iter().map(|x| x.1).sum();
    if total == 0 {
        return None;
    }
    let mut sorted: Vec<(u128, u128)> = items.to_vec();
    sorted.sort_by_key(|x| std::cmp::Reverse(x.0));
    let mut acc = 0u128;
    let mut i = 0;
    while i < sorted.len() {
        let key = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == key {
            acc += sorted[i].1;
            i += 1;
        }
        if 2 * acc >= total {
            return Some(key);
        }
    }
    unreachable!("the full mass is reached")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_mass_threshold() {
        assert_eq!(upper_half_threshold(&[(1, 1), (2, 2), (3, 3)]), Some(3));
        assert_eq!(upper_half_threshold(&[(1, 5), (2, 2), (3, 3)]), Some(2));
        assert_eq!(upper_half_threshold(&[(4, 0)]), None);
        assert_eq!(upper_half_threshold(&[(7, 1), (7, 1)]), Some(7));
    }
}
