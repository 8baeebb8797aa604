//! Iteration budget for greedy deletion loops.

use std::fmt;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::exact::{Interval, PowerProduct, DEFAULT_PREC};

fn validate(c: &Rational, cc: &Rational) -> Result<()> {
    if *c <= 0 || *c >= 1 {
        return Err(Error::BadParams(format!("c must lie in (0,1), got {c}")));
    }
    if *cc <= 0 {
        return Err(Error::BadParams(format!("the deletion constant must be positive, got {cc}")));
    }
    Ok(())
}

/// `⌊2(log₂ n + 2) + Cc⁻¹·n^c/(2^c − 1)⌋`: a loop deleting at least
/// `Cc·|A_{i−1}|^{1−c}` elements per step reaches `|A_r| ≤ 1` within this many
/// steps.
pub fn com2_budget(n: u64, c: &Rational, cc: &Rational) -> Result<u64> {
    validate(c, cc)?;
    if n == 0 {
        return Err(Error::BadParams("n must be at least 1".into()));
    }
    let p = DEFAULT_PREC;
    let n_iv = Interval::from_int(p, &Integer::from(n));
    let log = n_iv.log2()?;
    let two = Interval::from_int(p, &Integer::from(2));
    let head = two.mul(&log.add(&two));
    let n_c = PowerProduct::one().pow(n, c.clone()).enclose(p)?;
    let two_c = PowerProduct::one().pow(2, c.clone()).enclose(p)?;
    let one = Interval::from_int(p, &Integer::from(1));
    let tail = n_c.div(&Interval::from_rational(p, cc).mul(&two_c.sub(&one)))?;
    let total = head.add(&tail).floor()?;
    total.to_u64().ok_or_else(|| Error::ParameterTooLarge("budget exceeds u64".into()))
}

/// `⌈Cc·m^{1−c}⌉`, the least admissible deletion from a set of size `m`.
pub fn min_deletion(m: u64, c: &Rational, cc: &Rational) -> Result<u64> {
    validate(c, cc)?;
    if m == 0 {
        return Ok(0);
    }
    let v = PowerProduct::new(cc.clone()).pow(m, Rational::from(1) - c).ceil_int()?;
    Ok(v.to_u64().expect("at most Cc·m"))
}

/// Deletion rule used by [`com2_simulate`]; receives the current size.
#[derive(Clone, Copy)]
pub enum Adversary {
    /// Always the least admissible deletion.
    Minimal,
    /// Everything at once.
    All,
    Custom(fn(u64) -> u64),
}

impl fmt::Debug for Adversary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Adversary::Minimal => write!(f, "Minimal"),
            Adversary::All => write!(f, "All"),
            Adversary::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Runs the deletion loop from size `n` until at most one element remains and
/// returns the number of steps.
pub fn com2_simulate(n: u64, c: &Rational, cc: &Rational, adversary: Adversary) -> Result<u64> {
    validate(c, cc)?;
    let mut size = n;
    let mut steps = 0;
    while size > 1 {
        let required = min_deletion(size, c, cc)?;
        let removed = match adversary {
            Adversary::Minimal => required,
            Adversary::All => size,
            Adversary::Custom(f) => f(size),
        };
        if removed < required {
            return Err(Error::BadAdversary { removed, required });
        }
        size -= removed.min(size);
        steps += 1;
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> Rational {
        Rational::from((1, 2))
    }

    #[test]
    fn budget_examples() {
        let one = Rational::from(1);
        assert_eq!(com2_budget(16, &half(), &one).unwrap(), 21);
        assert_eq!(com2_budget(256, &half(), &one).unwrap(), 58);
        assert!(com2_budget(1, &half(), &one).unwrap() >= 4);
        assert!(com2_budget(0, &half(), &one).is_err());
        assert!(com2_budget(4, &Rational::from(1), &one).is_err());
        assert!(com2_budget(4, &half(), &Rational::from(0)).is_err());
    }

    #[test]
    fn simulation_examples() {
        let one = Rational::from(1);
        assert!(com2_simulate(16, &half(), &one, Adversary::Minimal).unwrap() <= 21);
        assert!(com2_simulate(256, &half(), &one, Adversary::Minimal).unwrap() <= 58);
        assert_eq!(com2_simulate(100, &half(), &one, Adversary::All).unwrap(), 1);
        assert_eq!(com2_simulate(1, &half(), &one, Adversary::Minimal).unwrap(), 0);
        assert_eq!(
            com2_simulate(16, &half(), &one, Adversary::Custom(|_| 1)),
            Err(Error::BadAdversary { removed: 1, required: 4 })
        );
    }

    #[test]
    fn minimal_deletion_is_a_ceiling() {
        let one = Rational::from(1);
        assert_eq!(min_deletion(16, &half(), &one).unwrap(), 4);
        assert_eq!(min_deletion(17, &half(), &one).unwrap(), 5);
        assert_eq!(min_deletion(1, &half(), &one).unwrap(), 1);
    }
}
