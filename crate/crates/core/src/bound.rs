//! Certified lower bounds for quantities involving square roots.
//!
//! Irrational square roots are replaced by rational enclosures at a chosen
//! binary precision, and every operation rounds toward zero-side safety: the
//! stored value never exceeds the true real number.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::rational::{self, Rational};

pub const DEFAULT_PRECISION: u32 = 128;

/// A rational number guaranteed to be `<=` some real quantity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBound {
    value: Rational,
    exact: bool,
    precision: u32,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// `floor(sqrt(x) * 2^bits) / 2^bits` scaled through the denominator, plus
/// whether the root was exact.
pub fn sqrt_down(x: &Rational, bits: u32) -> (Rational, bool) {
    sqrt_directed(x, bits, false)
}

/// Smallest enclosure from above, counterpart of [`sqrt_down`].
pub fn sqrt_up(x: &Rational, bits: u32) -> (Rational, bool) {
    sqrt_directed(x, bits, true)
}

fn sqrt_directed(x: &Rational, bits: u32, up: bool) -> (Rational, bool) {
    assert!(!x.is_negative(), "square root of a negative rational");
    if x.is_zero() {
        return (Rational::zero(), true);
    }
    // sqrt(n/d) = sqrt(n d) / d
    let nd = x.numer() * x.denom();
    let r = nd.sqrt();
    if &r * &r == nd {
        return (Rational::new(r, x.denom().clone()), true);
    }
    let scale = pow2(bits);
    let scaled = &nd * &scale * &scale;
    let mut s = scaled.sqrt();
    if up {
        s += 1;
    }
    (Rational::new(s, x.denom() * scale), false)
}

pub fn sqrt_uint_up(p: &BigUint, bits: u32) -> (Rational, bool) {
    sqrt_up(&Rational::from_integer(BigInt::from(p.clone())), bits)
}

impl LowerBound {
    pub fn exact(value: Rational, precision: u32) -> Self {
        LowerBound {
            value,
            exact: true,
            precision,
        }
    }

    /// `(1 - sqrt(kappa_sq)) / (3 + sqrt(p))`, rounded down.
    pub fn stability_quotient(kappa_sq: &Rational, p: &BigUint, precision: u32) -> Self {
        let (kappa_hi, kappa_exact) = sqrt_up(kappa_sq, precision);
        let (root_p_hi, p_exact) = sqrt_uint_up(p, precision);
        let num = Rational::one() - kappa_hi;
        if !num.is_positive() {
            return LowerBound {
                value: Rational::zero(),
                exact: false,
                precision,
            };
        }
        let value = num / (rational::int(3) + root_p_hi);
        let exact = kappa_exact && p_exact;
        let value = if exact { value } else { round_down(&value, precision) };
        LowerBound {
            value,
            exact,
            precision,
        }
    }

    /// `sqrt(x)`, rounded down unless the root is rational.
    pub fn sqrt(x: &Rational, precision: u32) -> Self {
        let (root, exact) = sqrt_down(x, precision);
        let value = if exact { root } else { round_down(&root, precision) };
        LowerBound {
            value,
            exact,
            precision,
        }
    }

    pub fn zero(precision: u32) -> Self {
        Self::exact(Rational::zero(), precision)
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Multiplies by a positive rational. Exact, so the bound stays certified.
    pub fn scale(&self, c: &Rational) -> Self {
        assert!(c.is_positive(), "bounds scale only by positive factors");
        LowerBound {
            value: &self.value * c,
            exact: self.exact,
            precision: self.precision,
        }
    }

    pub fn half(&self) -> Self {
        self.scale(&rational::ratio(1, 2))
    }

    pub fn min(self, other: Self) -> Self {
        if other.value < self.value {
            other
        } else {
            self
        }
    }

    /// `x < bound` implies `x <` the true quantity.
    pub fn exceeds(&self, x: &Rational) -> bool {
        x < &self.value
    }

    pub fn to_f64(&self) -> f64 {
        rational::to_f64(&self.value)
    }

    /// Decimal digits that the binary precision supports.
    pub fn decimal_digits(&self) -> usize {
        (self.precision as usize * 30103) / 100_000
    }

    pub fn to_decimal(&self) -> String {
        rational::to_decimal_floor(&self.value, self.decimal_digits())
    }
}

impl PartialOrd for LowerBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl fmt::Display for LowerBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exact {
            write!(f, "{}", self.value)
        } else {
            write!(f, "{}", self.to_decimal())
        }
    }
}

/// Largest multiple of `2^-bits` not above `x`.
pub fn round_down(x: &Rational, bits: u32) -> Rational {
    let scale = pow2(bits);
    let n = (x * Rational::from_integer(scale.clone())).floor().to_integer();
    Rational::new(n, scale)
}

/// Wire form: decimal digits rounded down, the exact dyadic or rational
/// value, and the rounding metadata needed to reproduce it.
#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq)]
pub struct BoundReport {
    pub decimal: String,
    pub value: String,
    pub exact: bool,
    pub rounding: String,
    pub precision_bits: u32,
}

impl From<&LowerBound> for BoundReport {
    fn from(b: &LowerBound) -> Self {
        BoundReport {
            decimal: b.to_decimal(),
            value: b.value.to_string(),
            exact: b.exact,
            rounding: "down".to_string(),
            precision_bits: b.precision,
        }
    }
}

impl Serialize for LowerBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BoundReport::from(self).serialize(s)
    }
}
