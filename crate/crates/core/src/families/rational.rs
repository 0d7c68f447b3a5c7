use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact fraction in lowest terms with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidInput("rational with zero denominator".into()));
        }
        Ok(Rational(BigRational::new(numer.into(), denom.into())))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Denominator as a machine integer, when it fits.
    pub fn denom_usize(&self) -> Option<usize> {
        self.0.denom().to_usize()
    }

    /// The value as a machine integer, when it is one and fits.
    pub fn to_usize(&self) -> Option<usize> {
        if self.is_integer() {
            self.0.numer().to_usize()
        } else {
            None
        }
    }

    pub fn to_pair(&self) -> Option<(i64, i64)> {
        Some((self.0.numer().to_i64()?, self.0.denom().to_i64()?))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidInput("reciprocal of zero".into()));
        }
        Ok(Rational(self.0.recip()))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `a/b` or a plain integer.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse {s:?} as a fraction"));
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s.trim(), "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Rational(BigRational::new(num, den)))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

/// Serialized as `[numerator, denominator]`.
impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (n, d) = self
            .to_pair()
            .ok_or_else(|| serde::ser::Error::custom("fraction does not fit in 64-bit integers"))?;
        [n, d].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [n, den] = <[i64; 2]>::deserialize(d)?;
        Rational::new(n, den).map_err(serde::de::Error::custom)
    }
}
