//! Arithmetic regimes.
//!
//! Every space evaluates its ternary distance in one scalar type. `f64` is the
//! float regime, where strict comparisons are decided with a slack derived from
//! a [`Tolerance`]. [`Rational`] is the exact regime: the slack is always zero
//! and every comparison is a true comparison.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};
use core::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, Zero};

/// Slack policy for float comparisons: `abs + rel * magnitude`.
///
/// Ignored entirely by exact scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-12,
        }
    }
}

impl Tolerance {
    /// No slack at all, even in float mode.
    pub const ZERO: Tolerance = Tolerance { abs: 0.0, rel: 0.0 };

    /// A purely absolute tolerance.
    pub fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    pub fn slack_for(&self, magnitude: f64) -> f64 {
        self.abs + self.rel * magnitude
    }
}

/// Values a G-metric can take.
pub trait Scalar:
    Copy
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True for the exact-rational regime.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;

    /// Comparison slack for the pair `(a, b)`.
    fn slack(a: Self, b: Self, tol: &Tolerance) -> Self;

    fn sup(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn inf(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn is_zero(self) -> bool {
        self == Self::zero()
    }

    /// Total order used for canonical sorting; NaN sorts last.
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

/// `a < b` by more than the slack.
pub fn definitely_lt<S: Scalar>(a: S, b: S, tol: &Tolerance) -> bool {
    a < b - S::slack(a, b, tol)
}

/// `a > b` by more than the slack.
pub fn definitely_gt<S: Scalar>(a: S, b: S, tol: &Tolerance) -> bool {
    a > b + S::slack(a, b, tol)
}

/// `a <= b` up to the slack.
pub fn approx_le<S: Scalar>(a: S, b: S, tol: &Tolerance) -> bool {
    !definitely_gt(a, b, tol)
}

/// `|a - b|` within the slack.
pub fn approx_eq<S: Scalar>(a: S, b: S, tol: &Tolerance) -> bool {
    (a - b).abs() <= S::slack(a, b, tol)
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        libm::fabs(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn slack(a: Self, b: Self, tol: &Tolerance) -> Self {
        tol.slack_for(libm::fabs(a) + libm::fabs(b))
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
}

/// Exact rational number over `i64`, displayed and parsed as `p/q` (or `p`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(Ratio<i64>);

impl Rational {
    /// Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        Rational(Ratio::new(num, den))
    }

    pub fn integer(n: i64) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    /// Nearest rational with a bounded denominator; `None` for non-finite input.
    pub fn approximate(x: f64) -> Option<Self> {
        Ratio::<i64>::approximate_float(x).map(Rational)
    }

    pub fn recip(self) -> Self {
        Rational(self.0.recip())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal")]
pub struct ParseRationalError;

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| ParseRationalError)?;
                let d: i64 = d.trim().parse().map_err(|_| ParseRationalError)?;
                if d == 0 {
                    return Err(ParseRationalError);
                }
                Ok(Rational::new(n, d))
            }
            None => s
                .parse::<i64>()
                .map(Rational::integer)
                .map_err(|_| ParseRationalError),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Rational(Ratio::zero())
    }
    fn one() -> Self {
        Rational::integer(1)
    }
    fn from_int(n: i64) -> Self {
        Rational::integer(n)
    }
    fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
    fn abs(self) -> Self {
        Rational(self.0.abs())
    }
    fn is_finite(self) -> bool {
        true
    }
    fn slack(_: Self, _: Self, _: &Tolerance) -> Self {
        Self::zero()
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::string::String as serde::Deserialize>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_slack_scales_with_magnitude() {
        let tol = Tolerance::default();
        assert!(approx_eq(1e6, 1e6 + 1e-7, &tol));
        assert!(!approx_eq(1.0, 1.0 + 1e-9, &tol));
        assert!(definitely_lt(1.0, 1.0 + 1e-9, &tol));
        assert!(!definitely_lt(1.0, 1.0 + 1e-13, &tol));
    }

    #[test]
    fn rational_comparisons_are_exact() {
        let a = Rational::new(1, 3);
        let b = Rational::new(2, 6);
        let tol = Tolerance::absolute(1.0);
        assert!(approx_eq(a, b, &tol));
        assert!(definitely_lt(a, a + Rational::new(1, 1_000_000_000), &tol));
        assert!(!definitely_lt(a, b, &tol));
    }

    #[test]
    fn rational_round_trips_through_text() {
        for s in ["3/4", "-2/5", "7", "0"] {
            let r: Rational = s.parse().unwrap();
            assert_eq!(alloc::format!("{r}"), s);
        }
        assert_eq!("6/8".parse::<Rational>().unwrap(), Rational::new(3, 4));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
    }
}
