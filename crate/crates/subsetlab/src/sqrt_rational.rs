//! Exact scalars of the form `q·√r` with rational `q` and square-free
//! integer `r >= 1`.
//!
//! Moment-matrix entries in the type basis are rational multiples of
//! `1/√(f! products)`, so a single radical term is closed under the products
//! and same-radicand sums the crate performs.  The canonical form (square
//! part extracted, zero stored as `0·√1`) makes equality bit-exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SqrtRational {
    coeff: BigRational,
    radicand: BigInt,
}

/// Splits `n >= 1` as `outer^2 * free` with `free` square-free.
fn extract_square(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.clone();
    let mut outer = BigInt::one();
    let mut d = BigInt::from(2u32);
    while &d * &d <= rest {
        let dd = &d * &d;
        while (&rest % &dd).is_zero() {
            rest /= &dd;
            outer *= &d;
        }
        d += 1;
    }
    (outer, rest)
}

impl SqrtRational {
    pub fn zero() -> Self {
        SqrtRational {
            coeff: BigRational::zero(),
            radicand: BigInt::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_rational(q: BigRational) -> Self {
        SqrtRational {
            coeff: q,
            radicand: BigInt::one(),
        }
        .canonical()
    }

    /// `coeff * sqrt(radicand)`, canonicalised.  `radicand` must be >= 1.
    pub fn new(coeff: BigRational, radicand: BigInt) -> Self {
        assert!(
            radicand >= BigInt::one(),
            "radicand must be a positive integer"
        );
        SqrtRational { coeff, radicand }.canonical()
    }

    /// `q / sqrt(radicand)` as an exact value.
    pub fn ratio_over_sqrt(q: BigRational, radicand: BigInt) -> Self {
        assert!(radicand >= BigInt::one());
        // q / sqrt(r) = (q / r) * sqrt(r)
        let coeff = q / BigRational::from(radicand.clone());
        SqrtRational { coeff, radicand }.canonical()
    }

    fn canonical(mut self) -> Self {
        if self.coeff.is_zero() {
            self.radicand = BigInt::one();
            return self;
        }
        if self.radicand.is_one() {
            return self;
        }
        let (outer, free) = extract_square(&self.radicand);
        self.coeff *= BigRational::from(outer);
        self.radicand = free;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn radicand(&self) -> &BigInt {
        &self.radicand
    }

    /// Exact rational value when the radical part is trivial.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.radicand.is_one() {
            Some(self.coeff.clone())
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        if self.radicand.is_one() {
            c
        } else {
            c * self.radicand.to_f64().unwrap_or(f64::NAN).sqrt()
        }
    }

    /// Sum that insists both operands share a radicand (or are zero).
    pub fn checked_add(&self, other: &SqrtRational) -> Option<SqrtRational> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        if self.radicand != other.radicand {
            return None;
        }
        Some(
            SqrtRational {
                coeff: &self.coeff + &other.coeff,
                radicand: self.radicand.clone(),
            }
            .canonical(),
        )
    }
}

impl Add for &SqrtRational {
    type Output = SqrtRational;

    /// Panics when the radicands are incommensurable; entries combined by
    /// this crate always share one.
    fn add(self, rhs: &SqrtRational) -> SqrtRational {
        self.checked_add(rhs)
            .expect("cannot add radicals with different square-free parts")
    }
}

impl AddAssign<&SqrtRational> for SqrtRational {
    fn add_assign(&mut self, rhs: &SqrtRational) {
        *self = &*self + rhs;
    }
}

impl Sub for &SqrtRational {
    type Output = SqrtRational;

    fn sub(self, rhs: &SqrtRational) -> SqrtRational {
        self + &(-rhs.clone())
    }
}

impl Neg for SqrtRational {
    type Output = SqrtRational;

    fn neg(mut self) -> SqrtRational {
        self.coeff = -self.coeff;
        self
    }
}

impl Mul for &SqrtRational {
    type Output = SqrtRational;

    fn mul(self, rhs: &SqrtRational) -> SqrtRational {
        if self.is_zero() || rhs.is_zero() {
            return SqrtRational::zero();
        }
        // sqrt(a)·sqrt(b) = g·sqrt((a/g)(b/g)) with g = gcd(a, b); both
        // factors square-free keeps the product square-free.
        let g = num_integer::Integer::gcd(&self.radicand, &rhs.radicand);
        let coeff = &self.coeff * &rhs.coeff * BigRational::from(g.clone());
        let radicand = (&self.radicand / &g) * (&rhs.radicand / &g);
        SqrtRational { coeff, radicand }
    }
}

impl Mul<&BigRational> for &SqrtRational {
    type Output = SqrtRational;

    fn mul(self, rhs: &BigRational) -> SqrtRational {
        SqrtRational {
            coeff: &self.coeff * rhs,
            radicand: self.radicand.clone(),
        }
        .canonical()
    }
}

impl fmt::Display for SqrtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand.is_one() {
            write!(f, "{}", self.coeff)
        } else {
            write!(f, "{}*sqrt({})", self.coeff, self.radicand)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn canonicalises_square_factors() {
        let x = SqrtRational::new(rat(1, 1), BigInt::from(8));
        assert_eq!(x.coeff(), &rat(2, 1));
        assert_eq!(x.radicand(), &BigInt::from(2));

        let y = SqrtRational::new(rat(3, 5), BigInt::from(36));
        assert_eq!(y.to_rational().unwrap(), rat(18, 5));
    }

    #[test]
    fn ratio_over_sqrt_matches_value() {
        // 1/sqrt(8) = (1/4)·sqrt(2)
        let x = SqrtRational::ratio_over_sqrt(rat(1, 1), BigInt::from(8));
        assert_eq!(x.coeff(), &rat(1, 4));
        assert_eq!(x.radicand(), &BigInt::from(2));
        assert!((x.to_f64() - 1.0 / 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn products_stay_canonical() {
        let a = SqrtRational::new(rat(1, 2), BigInt::from(6));
        let b = SqrtRational::new(rat(3, 1), BigInt::from(10));
        let p = &a * &b;
        // sqrt(6)*sqrt(10) = 2*sqrt(15)
        assert_eq!(p.coeff(), &rat(3, 1));
        assert_eq!(p.radicand(), &BigInt::from(15));

        let sq = &a * &a;
        assert_eq!(sq.to_rational().unwrap(), rat(3, 2));
    }

    #[test]
    fn addition_requires_matching_radicand() {
        let a = SqrtRational::new(rat(1, 3), BigInt::from(2));
        let b = SqrtRational::new(rat(1, 6), BigInt::from(2));
        assert_eq!((&a + &b).coeff(), &rat(1, 2));

        let c = SqrtRational::new(rat(1, 1), BigInt::from(3));
        assert!(a.checked_add(&c).is_none());
        assert!(a.checked_add(&SqrtRational::zero()).is_some());
    }

    #[test]
    fn zero_is_absorbing_and_canonical() {
        let z = SqrtRational::zero();
        let a = SqrtRational::new(rat(7, 2), BigInt::from(5));
        assert!((&z * &a).is_zero());
        assert_eq!(&z + &a, a);
        let diff = &a - &a;
        assert!(diff.is_zero());
        assert_eq!(diff.radicand(), &BigInt::one());
    }
}
