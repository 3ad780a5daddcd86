//! Ball packings of `P²(μ)` decided by Cremona reduction.
//!
//! A packing vector `(μ; λ₁..λₙ)` is repeatedly sorted and hit with the
//! Cremona move `δ = μ − λ₁ − λ₂ − λ₃`, `(μ; λ) ↦ (μ+δ; λ₁+δ, λ₂+δ, λ₃+δ, λ₄..)`
//! until `δ >= 0`. The open balls `B(λᵢ)` pack `P²(μ)` iff the reduced vector
//! has no negative entry and `Σλᵢ² <= μ²`.
//!
//! Decisions run on integer vectors (everything multiplied by the common
//! denominator), which is exact because the reduction is scale invariant.

use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::rational::{self, Rational};

/// Whether the final volume comparison is `<=` (open balls, very full
/// fillings allowed) or `<` (closed balls).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BallSemantics {
    #[default]
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct PackingVector {
    #[serde(with = "rational::serde_str")]
    pub mu: Rational,
    #[serde(with = "rational::serde_str::vec")]
    pub lambdas: Vec<Rational>,
}

impl PackingVector {
    pub fn new(mu: Rational, lambdas: Vec<Rational>) -> Self {
        PackingVector { mu, lambdas }
    }

    /// Sorted non-increasing and zero-padded to at least three entries.
    pub fn normalized(&self) -> PackingVector {
        let mut lambdas = self.lambdas.clone();
        lambdas.sort_unstable_by(|a, b| b.cmp(a));
        while lambdas.len() < 3 {
            lambdas.push(Rational::zero());
        }
        PackingVector {
            mu: self.mu.clone(),
            lambdas,
        }
    }

    pub fn defect(&self) -> Rational {
        let v = self.normalized();
        &v.mu - &v.lambdas[0] - &v.lambdas[1] - &v.lambdas[2]
    }

    /// Same vector with zero entries removed, for reporting.
    pub fn without_zeros(&self) -> PackingVector {
        PackingVector {
            mu: self.mu.clone(),
            lambdas: self.lambdas.iter().filter(|l| !l.is_zero()).cloned().collect(),
        }
    }

    pub fn sum_of_squares(&self) -> Rational {
        self.lambdas.iter().map(|l| l * l).sum()
    }
}

/// One Cremona move, or the vector itself (sorted, padded) at a fixed point.
pub fn cremona_step(v: &PackingVector) -> PackingVector {
    let mut v = v.normalized();
    let delta = &v.mu - &v.lambdas[0] - &v.lambdas[1] - &v.lambdas[2];
    if !delta.is_negative() {
        return v;
    }
    v.mu += &delta;
    for l in &mut v.lambdas[..3] {
        *l += &delta;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NegativeEntry,
    MuExhausted,
    Volume,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RejectReason::NegativeEntry => "negative entry",
            RejectReason::MuExhausted => "mu exhausted",
            RejectReason::Volume => "volume",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "reason")]
pub enum Verdict {
    Accepted,
    Rejected(RejectReason),
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionStep {
    pub before: PackingVector,
    #[serde(with = "rational::serde_str")]
    pub defect: Rational,
    pub after: PackingVector,
}

/// Every application of [`cremona_step`], including the final fixed-point
/// check when the reduction gets that far.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionTrace {
    pub input: PackingVector,
    pub steps: Vec<ReductionStep>,
    #[serde(flatten)]
    pub verdict: Verdict,
    /// `Σλᵢ² <= μ²` (or `<` for closed balls) on the terminal vector.
    pub volume_check: bool,
}

impl ReductionTrace {
    /// Steps with negative defect.
    pub fn moves(&self) -> usize {
        self.steps.iter().filter(|s| s.defect.is_negative()).count()
    }

    pub fn terminal(&self) -> &PackingVector {
        self.steps.last().map(|s| &s.after).unwrap_or(&self.input)
    }
}

trait Int: Clone + Ord + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Into<BigInt> {}
impl Int for i128 {}
impl Int for BigInt {}

struct Outcome {
    verdict: Verdict,
    volume_ok: bool,
}

/// The reduction loop on integer vectors. `on_step(before_mu, before, defect,
/// after_mu, after)` sees sorted, padded vectors.
fn reduce_int<T: Int>(
    mut mu: T,
    mut lams: Vec<T>,
    semantics: BallSemantics,
    mut on_step: impl FnMut(&T, &[T], &T, &T, &[T]),
) -> Outcome {
    while lams.len() < 3 {
        lams.push(T::zero());
    }
    loop {
        lams.sort_unstable_by(|a, b| b.cmp(a));
        if lams.last().is_some_and(|l| *l < T::zero()) {
            return Outcome {
                verdict: Verdict::Rejected(RejectReason::NegativeEntry),
                volume_ok: false,
            };
        }
        if mu <= T::zero() && lams[0] > T::zero() {
            return Outcome {
                verdict: Verdict::Rejected(RejectReason::MuExhausted),
                volume_ok: false,
            };
        }
        let delta = mu.clone() - lams[0].clone() - lams[1].clone() - lams[2].clone();
        if delta >= T::zero() {
            on_step(&mu, &lams, &delta, &mu, &lams);
            let sum_sq = lams.iter().fold(T::zero(), |acc, l| acc + l.clone() * l.clone());
            let mu_sq = mu.clone() * mu.clone();
            let volume_ok = match semantics {
                BallSemantics::Open => sum_sq <= mu_sq,
                BallSemantics::Closed => sum_sq < mu_sq,
            };
            let verdict = if volume_ok {
                Verdict::Accepted
            } else {
                Verdict::Rejected(RejectReason::Volume)
            };
            return Outcome { verdict, volume_ok };
        }
        let before_mu = mu.clone();
        let before = lams.clone();
        mu = mu + delta.clone();
        for l in &mut lams[..3] {
            *l = l.clone() + delta.clone();
        }
        on_step(&before_mu, &before, &delta, &mu, &lams);
    }
}

struct Scaled {
    denom: BigInt,
    mu: BigInt,
    lams: Vec<BigInt>,
}

fn scale(v: &PackingVector) -> Scaled {
    let denom = v.lambdas.iter().fold(v.mu.denom().clone(), |acc, l| acc.lcm(l.denom()));
    let to_int = |x: &Rational| x.numer() * (&denom / x.denom());
    Scaled {
        mu: to_int(&v.mu),
        lams: v.lambdas.iter().map(to_int).collect(),
        denom,
    }
}

fn fits_i128(s: &Scaled) -> bool {
    // |x| < 2^55 and n < 2^12 keep every Σλ² below 2^122.
    let limit = BigInt::one() << 55;
    s.lams.len() < 4096 && s.mu.abs() < limit && s.lams.iter().all(|l| l.abs() < limit)
}

fn run(v: &PackingVector, semantics: BallSemantics, record: bool) -> (Outcome, Vec<ReductionStep>) {
    let s = scale(v);
    let denom = s.denom.clone();
    let mut steps = Vec::new();
    let to_vec = |mu: BigInt, lams: Vec<BigInt>| PackingVector {
        mu: Rational::new(mu, denom.clone()),
        lambdas: lams.into_iter().map(|l| Rational::new(l, denom.clone())).collect(),
    };
    let outcome = if fits_i128(&s) {
        let mu = s.mu.to_i128().expect("checked");
        let lams: Vec<i128> = s.lams.iter().map(|l| l.to_i128().expect("checked")).collect();
        reduce_int(mu, lams, semantics, |bm, b, d, am, a| {
            if record {
                steps.push(ReductionStep {
                    before: to_vec((*bm).into(), b.iter().map(|&x| x.into()).collect()).without_zeros(),
                    defect: Rational::new((*d).into(), denom.clone()),
                    after: to_vec((*am).into(), a.iter().map(|&x| x.into()).collect()).without_zeros(),
                });
            }
        })
    } else {
        reduce_int(s.mu, s.lams, semantics, |bm, b, d, am, a| {
            if record {
                steps.push(ReductionStep {
                    before: to_vec(bm.clone(), b.to_vec()).without_zeros(),
                    defect: Rational::new(d.clone(), denom.clone()),
                    after: to_vec(am.clone(), a.to_vec()).without_zeros(),
                });
            }
        })
    };
    (outcome, steps)
}

pub fn reduce(v: &PackingVector) -> ReductionTrace {
    reduce_with(v, BallSemantics::Open)
}

pub fn reduce_with(v: &PackingVector, semantics: BallSemantics) -> ReductionTrace {
    let (outcome, steps) = run(v, semantics, true);
    ReductionTrace {
        input: v.clone(),
        steps,
        verdict: outcome.verdict,
        volume_check: outcome.volume_ok,
    }
}

/// Whether the open balls `B(λᵢ)` embed in `P²(μ)`.
pub fn decide_ball_packing(mu: &Rational, lambdas: &[Rational]) -> bool {
    decide_with(mu, lambdas, BallSemantics::Open).is_accepted()
}

pub fn decide_with(mu: &Rational, lambdas: &[Rational], semantics: BallSemantics) -> Verdict {
    let v = PackingVector::new(mu.clone(), lambdas.to_vec());
    run(&v, semantics, false).0.verdict
}

/// Largest `λ` (up to `tol`) such that `N` equal open balls `B(λ)` pack
/// `P²(1)`, by bisection on the monotone acceptance predicate. The result is
/// accepted and `result + tol` is rejected.
pub fn max_equal_ball(n: usize, tol: &Rational) -> Rational {
    assert!(n >= 1, "need at least one ball");
    assert!(tol.is_positive(), "tolerance must be positive");
    let one = Rational::one();
    let accepts = |x: &Rational| decide_ball_packing(&one, &vec![x.clone(); n]);
    if accepts(&one) {
        return one;
    }
    let mut lo = Rational::zero();
    let mut hi = Rational::one();
    let two = rational::int(2);
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / &two;
        if accepts(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
