//! Literal enumeration of all 2s-tuples. Deliberately naive: it shares no
//! code with the convolution path so the two can check each other.

use rug::Integer;

use super::{EnergyValue, Mode};
use crate::error::{Error, Result};
use crate::set::IntSet;

pub const DEFAULT_MAX_TUPLES: u64 = 100_000_000;

/// Energy by brute force; refuses inputs with `|A|^{2s} > max_tuples`.
pub fn energy_oracle(a: &IntSet, s: u32, mode: Mode, max_tuples: u64) -> Result<EnergyValue> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if s == 0 {
        return Err(Error::ZeroArity);
    }
    let tuples = (a.len() as u128).checked_pow(2 * s);
    if tuples.is_none_or(|t| t > u128::from(max_tuples)) {
        return Err(Error::TooLarge(format!(
            "{}^{} tuples exceed the oracle guard of {max_tuples}",
            a.len(),
            2 * s
        )));
    }
    let widest = a.iter().map(|x| x.significant_bits()).max().unwrap_or(0);
    let fits = match mode {
        Mode::Additive => widest + 8 < 120,
        Mode::Multiplicative => u64::from(widest) * u64::from(s) < 120,
    };
    let count = if fits {
        let vals: Vec<i128> = a.iter().map(|x| x.to_i128().expect("fits")).collect();
        let count = match mode {
            Mode::Additive => walk(&vals, s, 0i128, &|x, y| x + y),
            Mode::Multiplicative => walk(&vals, s, 1i128, &|x, y| x * y),
        };
        Integer::from(count)
    } else {
        let vals: Vec<Integer> = a.iter().cloned().collect();
        let count = match mode {
            Mode::Additive => walk(&vals, s, Integer::ZERO, &|x, y| Integer::from(x + y)),
            Mode::Multiplicative => walk(&vals, s, Integer::from(1), &|x, y| Integer::from(x * y)),
        };
        Integer::from(count)
    };
    Ok(EnergyValue::new(count, s, mode, Some(a.len())))
}

struct Walk<'a, T> {
    vals: &'a [T],
    s: u32,
    op: &'a dyn Fn(&T, &T) -> T,
    count: u64,
}

fn walk<T: Clone + PartialEq>(vals: &[T], s: u32, id: T, op: &dyn Fn(&T, &T) -> T) -> u64 {
    let mut w = Walk { vals, s, op, count: 0 };
    w.left(s, id.clone(), &id);
    w.count
}

impl<T: Clone + PartialEq> Walk<'_, T> {
    // first s coordinates
    fn left(&mut self, k: u32, acc: T, id: &T) {
        if k == 0 {
            self.right(self.s, id.clone(), &acc);
            return;
        }
        for v in self.vals {
            let next = (self.op)(&acc, v);
            self.left(k - 1, next, id);
        }
    }

    // last s coordinates, compared against the left total
    fn right(&mut self, k: u32, acc: T, target: &T) {
        if k == 0 {
            if acc == *target {
                self.count += 1;
            }
            return;
        }
        for v in self.vals {
            let next = (self.op)(&acc, v);
            self.right(k - 1, next, target);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy;

    fn set(v: &[i64]) -> IntSet {
        IntSet::new(v.iter().copied())
    }

    #[test]
    fn oracle_examples() {
        let g = DEFAULT_MAX_TUPLES;
        assert_eq!(energy_oracle(&set(&[0, 1]), 2, Mode::Additive, g).unwrap().count, 6);
        assert_eq!(energy_oracle(&set(&[0]), 2, Mode::Additive, g).unwrap().count, 1);
        assert_eq!(energy_oracle(&set(&[1, 2, 4]), 2, Mode::Multiplicative, g).unwrap().count, 19);
        assert_eq!(energy_oracle(&set(&[1, 2, 3]), 2, Mode::Additive, g).unwrap().count, 19);
    }

    #[test]
    fn oracle_guard() {
        let a = IntSet::new(0..20);
        assert!(matches!(energy_oracle(&a, 4, Mode::Additive, DEFAULT_MAX_TUPLES), Err(Error::TooLarge(_))));
    }

    #[test]
    fn big_integer_path_agrees() {
        let a = crate::set::Generator::Mixed { n: 6 }.generate().unwrap();
        let a = a.affine(&(Integer::from(1) << 200), &Integer::from(3)).unwrap();
        for mode in [Mode::Additive, Mode::Multiplicative] {
            let want = energy(&a, 2, mode).unwrap().count;
            assert_eq!(energy_oracle(&a, 2, mode, DEFAULT_MAX_TUPLES).unwrap().count, want);
        }
    }
}
