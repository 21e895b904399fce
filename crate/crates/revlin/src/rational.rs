//! Exact arbitrary-precision rational scalar.
//!
//! Every cell of the reversible store holds one of these. The engine
//! depends on exact arithmetic: forward-then-backward execution must
//! restore state bit-for-bit, which floating point cannot offer. Values
//! stay in canonical form (gcd(|p|, q) = 1, q >= 1, zero as 0/1); the
//! canonicalization is delegated to `num-rational`.
//!
//! Text forms accepted everywhere: integer ("7"), fraction ("7/3"), or
//! finite decimal ("1.25" parses exactly to 5/4). The emitted form is
//! "p/q" with "/q" omitted when q = 1.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Result, RevError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_usize(n: usize) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `num/den` in canonical form. Rejects a zero denominator.
    pub fn new(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(RevError::Parse("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(num, den)))
    }

    /// Shorthand for small literals, mostly used by tests.
    pub fn ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den)).expect("nonzero denominator")
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    /// Larger of the numerator/denominator magnitude bit-lengths.
    /// This is the quantity the arena's `max_bits` metric aggregates.
    pub fn bits(&self) -> u64 {
        self.0.numer().magnitude().bits().max(self.0.denom().magnitude().bits())
    }

    /// True when gcd(|p|, q) = 1 and q >= 1. `num-rational` maintains
    /// this for every operation; the arena double-checks after each step
    /// in debug builds.
    pub fn is_canonical(&self) -> bool {
        let num = self.0.numer();
        let den = self.0.denom();
        if !den.is_positive() {
            return false;
        }
        num.magnitude().gcd(den.magnitude()) == BigUint::one()
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    pub fn square(&self) -> Rational {
        Rational(&self.0 * &self.0)
    }

    pub fn recip(&self) -> Result<Rational> {
        if self.is_zero() {
            return Err(RevError::Parse("reciprocal of zero".into()));
        }
        Ok(Rational(self.0.recip()))
    }

    /// Exact quotient; `None` when `rhs` is zero.
    pub fn checked_div(&self, rhs: &Rational) -> Option<Rational> {
        if rhs.is_zero() {
            None
        } else {
            Some(Rational(&self.0 / &rhs.0))
        }
    }

    /// Rounded decimal rendering, used by the CLI's `--decimal` flag.
    /// The result is approximate and labeled as such by the caller.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scale = BigInt::from(10u32).pow(digits);
        let scaled = &self.0 * BigRational::from_integer(scale.clone());
        // round half away from zero
        let twice = scaled.numer() * BigInt::from(2) + scaled.denom() * scaled.numer().signum();
        let rounded = twice / (scaled.denom() * BigInt::from(2));
        let negative = rounded.is_negative();
        let mag = rounded.magnitude().to_string();
        let mut digits_str = if mag.len() as u32 <= digits {
            format!("{}{}", "0".repeat(digits as usize + 1 - mag.len()), mag)
        } else {
            mag
        };
        if digits > 0 {
            digits_str.insert(digits_str.len() - digits as usize, '.');
        }
        if negative {
            format!("-{digits_str}")
        } else {
            digits_str
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = RevError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(RevError::Parse("empty rational".into()));
        }
        if let Some((num, den)) = s.split_once('/') {
            let num: BigInt = num
                .parse()
                .map_err(|_| RevError::Parse(format!("bad numerator in {s:?}")))?;
            if den.is_empty() || !den.bytes().all(|b| b.is_ascii_digit()) {
                return Err(RevError::Parse(format!(
                    "denominator must be a positive integer in {s:?}"
                )));
            }
            let den: BigInt = den
                .parse()
                .map_err(|_| RevError::Parse(format!("bad denominator in {s:?}")))?;
            return Rational::new(num, den);
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            let (sign, int_digits) = match int_part.strip_prefix('-') {
                Some(rest) => (-1, rest),
                None => (1, int_part.strip_prefix('+').unwrap_or(int_part)),
            };
            let digits_ok = |d: &str| d.bytes().all(|b| b.is_ascii_digit());
            if (int_digits.is_empty() && frac_part.is_empty())
                || !digits_ok(int_digits)
                || !digits_ok(frac_part)
            {
                return Err(RevError::Parse(format!("bad decimal {s:?}")));
            }
            let joined = format!(
                "{}{}",
                if int_digits.is_empty() { "0" } else { int_digits },
                frac_part
            );
            let num: BigInt = joined
                .parse()
                .map_err(|_| RevError::Parse(format!("bad decimal {s:?}")))?;
            let den = BigInt::from(10u32).pow(frac_part.len() as u32);
            return Rational::new(num * sign, den);
        }
        let num: BigInt = s
            .parse()
            .map_err(|_| RevError::Parse(format!("bad integer {s:?}")))?;
        Ok(Rational(BigRational::from_integer(num)))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);

impl Div for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}
