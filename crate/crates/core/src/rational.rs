//! Exact rationals backed by `malachite`, which keeps small values inline
//! and is far faster than a heap-only big rational for the short fractions
//! series arithmetic produces. The wrapper speaks the `num-traits`
//! vocabulary (`zero`, `one`, `recip`, `numer`, …) used across the crate.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use malachite_base::num::arithmetic::traits::{Abs, CheckedRoot, Reciprocal, Sign};
use malachite_q::Rational as Q;

/// Arbitrary-precision integer.
pub type BigInt = malachite_nz::integer::Integer;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(Q);

impl Rational {
    /// `n/d` in lowest terms. Panics when `d = 0`.
    pub fn new(n: BigInt, d: BigInt) -> Self {
        assert!(d != BigInt::from(0), "zero denominator");
        Rational(Q::from_integers(n, d))
    }

    pub fn from_integer(n: BigInt) -> Self {
        Rational(Q::from(n))
    }

    pub fn numer(&self) -> BigInt {
        BigInt::from_sign_and_abs(self.0 >= 0u32, self.0.to_numerator())
    }

    /// Always positive.
    pub fn denom(&self) -> BigInt {
        BigInt::from(self.0.to_denominator())
    }

    pub fn recip(&self) -> Self {
        Rational((&self.0).reciprocal())
    }

    pub fn is_integer(&self) -> bool {
        self.0.to_denominator() == 1u32
    }

    pub fn is_negative(&self) -> bool {
        self.0.sign() == std::cmp::Ordering::Less
    }

    pub fn abs(&self) -> Self {
        Rational((&self.0).abs())
    }

    /// The exact `e`-th root, when it is rational.
    pub fn checked_root(&self, e: u64) -> Option<Self> {
        let n = (&self.numer()).checked_root(e)?;
        let d = (&self.denom()).checked_root(e)?;
        Some(Rational::new(n, d))
    }
}

impl num_traits::Zero for Rational {
    fn zero() -> Self {
        Rational(Q::from(0u32))
    }
    fn is_zero(&self) -> bool {
        self.0 == 0u32
    }
}

impl num_traits::One for Rational {
    fn one() -> Self {
        Rational(Q::from(1u32))
    }
    fn is_one(&self) -> bool {
        self.0 == 1u32
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational(Q::from(n))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, o: Rational) -> Rational {
                Rational($tr::$m(self.0, o.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, o: &Rational) -> Rational {
                Rational($tr::$m(self.0, &o.0))
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $m(self, o: Rational) -> Rational {
                Rational($tr::$m(&self.0, o.0))
            }
        }
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, o: &Rational) -> Rational {
                Rational($tr::$m(&self.0, &o.0))
            }
        }
        impl $atr<Rational> for Rational {
            fn $am(&mut self, o: Rational) {
                $atr::$am(&mut self.0, o.0)
            }
        }
        impl $atr<&Rational> for Rational {
            fn $am(&mut self, o: &Rational) {
                $atr::$am(&mut self.0, &o.0)
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(it: I) -> Rational {
        it.fold(num_traits::Zero::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(it: I) -> Rational {
        it.fold(num_traits::Zero::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    #[test]
    fn arithmetic_and_parts() {
        let a = Rational::new(BigInt::from(6), BigInt::from(-4));
        assert_eq!(a.numer(), BigInt::from(-3));
        assert_eq!(a.denom(), BigInt::from(2));
        assert_eq!(&a * &a.recip(), Rational::one());
        assert!((&a - &a).is_zero());
        assert!(a.is_negative() && !a.abs().is_negative());
        assert_eq!(format!("{a}"), "-3/2");
        assert_eq!(Rational::new(BigInt::from(4), BigInt::from(9)).checked_root(2), Some(Rational::new(BigInt::from(2), BigInt::from(3))));
        assert_eq!(Rational::from(2).checked_root(2), None);
    }
}
