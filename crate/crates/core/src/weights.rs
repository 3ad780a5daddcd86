//! Weight expansions of ellipsoids.
//!
//! `E(1, a)` for rational `a >= 1` embeds wherever the balls `B(wᵢ(a))`
//! embed, where `w(a)` comes from running Euclid's algorithm on `(a, 1)` by
//! repeated subtraction. A partial quotient `q` of the continued fraction of
//! `a` contributes a block of `q` equal weights, so the sequence is stored
//! run-length encoded and only expanded on demand.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Non-increasing weights `scale · w(source)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSequence {
    source: Rational,
    scale: Rational,
    blocks: Vec<(Rational, u64)>,
}

impl WeightSequence {
    /// The ratio `a >= 1` that was expanded.
    pub fn source(&self) -> &Rational {
        &self.source
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    /// `(weight, multiplicity)` runs, largest weight first.
    pub fn blocks(&self) -> &[(Rational, u64)] {
        &self.blocks
    }

    pub fn len(&self) -> u64 {
        self.blocks.iter().map(|(_, m)| m).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rational> + '_ {
        self.blocks
            .iter()
            .flat_map(|(w, m)| std::iter::repeat_n(w, *m as usize))
    }

    pub fn to_vec(&self) -> Vec<Rational> {
        self.iter().cloned().collect()
    }

    pub fn sum(&self) -> Rational {
        self.blocks
            .iter()
            .map(|(w, m)| w * Rational::from_integer((*m).into()))
            .sum()
    }

    pub fn sum_of_squares(&self) -> Rational {
        self.blocks
            .iter()
            .map(|(w, m)| w * w * Rational::from_integer((*m).into()))
            .sum()
    }
}

fn check_normalized(a: &Rational) -> Result<()> {
    if a < &Rational::one() {
        return Err(Error::NotNormalized(a.clone()));
    }
    Ok(())
}

/// Partial quotients of the (finite) continued fraction of `a > 0`.
pub fn continued_fraction(a: &Rational) -> Vec<BigUint> {
    assert!(a.is_positive(), "continued fraction of a non-positive rational");
    let mut n = a.numer().magnitude().clone();
    let mut d = a.denom().magnitude().clone();
    let mut out = Vec::new();
    while !d.is_zero() {
        let (q, r) = n.div_rem(&d);
        out.push(q);
        n = d;
        d = r;
    }
    out
}

/// `p(a)` as an unbounded integer: the sum of the partial quotients.
pub fn partial_quotient_sum(a: &Rational) -> Result<BigUint> {
    check_normalized(a)?;
    Ok(continued_fraction(a).into_iter().sum())
}

/// `p(a)`, the length of `w(a)`.
pub fn weight_count(a: &Rational) -> Result<u64> {
    partial_quotient_sum(a)?
        .to_u64()
        .ok_or_else(|| Error::InvalidInput(format!("weight count of {a} exceeds 64 bits")))
}

/// `w(a)` for rational `a >= 1`.
///
/// Same output as the subtraction loop `x ← a, y ← 1; repeat { if x < y
/// swap; emit y; x ← x − y } until x = 0`, with each run of equal
/// subtractions done by one division.
pub fn weight_sequence(a: &Rational) -> Result<WeightSequence> {
    check_normalized(a)?;
    let mut x = a.clone();
    let mut y = Rational::one();
    let mut blocks = Vec::new();
    while !x.is_zero() {
        if x < y {
            std::mem::swap(&mut x, &mut y);
        }
        let q = (&x / &y).floor();
        let count = q
            .to_integer()
            .to_u64()
            .ok_or_else(|| Error::InvalidInput(format!("partial quotient of {a} exceeds 64 bits")))?;
        x -= &y * q;
        blocks.push((y.clone(), count));
    }
    Ok(WeightSequence {
        source: a.clone(),
        scale: Rational::one(),
        blocks,
    })
}

/// Weights of `E(a, b)`: `min(a,b) · w(max/min)`. Their squares sum to `ab`.
pub fn ellipsoid_weights(a: &Rational, b: &Rational) -> Result<WeightSequence> {
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::InvalidInput(format!(
            "ellipsoid sides must be positive, got ({a}, {b})"
        )));
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let base = weight_sequence(&(hi / lo))?;
    Ok(WeightSequence {
        blocks: base.blocks.into_iter().map(|(w, m)| (w * lo, m)).collect(),
        source: base.source,
        scale: lo.clone(),
    })
}
