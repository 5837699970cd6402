//! Exact lattice generator of a set of rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::DifferenceSet;
use crate::error::{Error, Result};

/// `gcd(a, b)` for rationals: gcd of numerators over lcm of denominators;
/// always non-negative.
pub fn gcd_rational(a: &BigRational, b: &BigRational) -> BigRational {
    let num: BigInt = a.numer().gcd(b.numer());
    let den: BigInt = a.denom().lcm(b.denom());
    BigRational::new(num, den)
}

/// Largest `g > 0` with every `δ/g ∈ ℤ`; `None` when every `δ` is zero.
pub fn lattice_generator(values: &[BigRational]) -> Option<BigRational> {
    values.iter().filter(|d| !d.is_zero()).map(|d| d.abs()).reduce(|g, d| gcd_rational(&g, &d))
}

pub fn commensurability_exact(deltas: &DifferenceSet) -> Result<Option<BigRational>> {
    match deltas {
        DifferenceSet::Exact(values) => Ok(lattice_generator(values)),
        other => Err(Error::WrongKind { expected: "exact-rational", found: other.kind() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd_rational(&rational(1, 2), &rational(3, 4)), rational(1, 4));
        assert_eq!(gcd_rational(&rational(2, 3), &rational(4, 9)), rational(2, 9));
        assert_eq!(gcd_rational(&rational(0, 1), &rational(5, 7)), rational(5, 7));
        assert_eq!(gcd_rational(&rational(-6, 1), &rational(4, 1)), rational(2, 1));
    }

    #[test]
    fn generator_examples() {
        let set = |v: &[(i64, i64)]| DifferenceSet::Exact(v.iter().map(|&(a, b)| rational(a, b)).collect());
        assert_eq!(commensurability_exact(&set(&[(-1, 1), (0, 1), (1, 1)])).unwrap(), Some(rational(1, 1)));
        let quarter = set(&[(-3, 4), (-1, 2), (0, 1), (1, 2), (3, 4)]);
        assert_eq!(commensurability_exact(&quarter).unwrap(), Some(rational(1, 4)));
        assert_eq!(commensurability_exact(&set(&[(0, 1)])).unwrap(), None);
        assert!(matches!(
            commensurability_exact(&DifferenceSet::Float(vec![0.0])),
            Err(Error::WrongKind { expected: "exact-rational", .. })
        ));
    }
}
