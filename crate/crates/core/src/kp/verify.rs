use rug::ops::Pow;
use rug::{Integer, Rational};

use super::{Branch, KpResult};
use crate::checks::{CheckReport, Relation, Side};
use crate::energy::Mode;
use crate::error::{Error, Result};
use crate::exact::PowerProduct;
use crate::set::{iterated_product_set, iterated_sumset, IntSet};

/// `|mA' − nA'|` against `2^{506(m+n)+2}·|A|^{ν+240(m+n)δ}` and, if given,
/// against `practical·|A'|`. In multiplicative mode the quotient set
/// `A'^(m)/A'^(n)` is measured instead.
pub fn kp_verify(res: &KpResult, a: &IntSet, pairs: &[(u32, u32)], practical: Option<&Rational>) -> Result<Vec<CheckReport>> {
    if res.branch != Branch::Subset {
        return Err(Error::WrongBranch);
    }
    let ap = res.a_prime.as_ref().ok_or(Error::WrongBranch)?;
    if a.len() != res.set_size {
        return Err(Error::BadParams("result was computed for a different set".into()));
    }
    let n = Integer::from(a.len());
    // |A|^ν = |A|^{2s} / E_s
    let a_nu = Rational::from((n.clone().pow(2 * res.arity), res.energy_s.clone()));
    let mut out = Vec::new();
    for &(m, k) in pairs {
        let size = match res.op {
            Mode::Additive => iterated_sumset(ap, m, k)?.len(),
            Mode::Multiplicative => iterated_product_set(ap, m, k)?.len(),
        };
        let total = m + k;
        let bound = PowerProduct::new(a_nu.clone())
            .pow(2, 506 * total + 2)
            .pow(n.clone(), Rational::from(240 * total) * &res.delta);
        let key = format!("{}|{}|m={m}|n={k}", a.canonical(), ap.canonical());
        let name = format!("kp-bound-{m}-{k}");
        out.push(CheckReport::evaluate(&name, Side::int(size), Relation::Le, Side::Exact(bound), &key)?);
        if let Some(c) = practical {
            let rhs = Rational::from(c * Integer::from(ap.len()));
            let name = format!("kp-practical-{m}-{k}");
            out.push(CheckReport::evaluate(&name, Side::int(size), Relation::Le, Side::rational(rhs), &key)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_rational;
    use crate::kp::{kp_pipeline, KpMode, KpParams};

    #[test]
    fn progression_output_meets_both_bounds() {
        let a = IntSet::new(1..=16);
        let res = kp_pipeline(&a, &KpParams::new(4, parse_rational("0.05").unwrap(), KpMode::Calibrated)).unwrap();
        let ten = Rational::from(10);
        let reports = kp_verify(&res, &a, &[(1, 0), (1, 1), (2, 1), (2, 2)], Some(&ten)).unwrap();
        assert_eq!(reports.len(), 8);
        assert!(reports.iter().all(|r| r.holds), "{reports:#?}");
        let ap = res.a_prime.unwrap();
        assert_eq!(reports[0].lhs, ap.len().to_string());
        assert_eq!(reports[4].lhs, (3 * ap.len() - 2).to_string());
    }

    #[test]
    fn energy_branch_is_rejected() {
        let a = IntSet::new(1..=16);
        let res = kp_pipeline(&a, &KpParams::new(4, parse_rational("0.05").unwrap(), KpMode::Paper)).unwrap();
        assert_eq!(kp_verify(&res, &a, &[(1, 1)], None).unwrap_err(), Error::WrongBranch);
    }
}
