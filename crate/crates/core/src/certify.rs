//! Certified packing-stability thresholds and packing certificates.
//!
//! Every target is reduced to a blow-up of a scaled `P²`:
//!
//! * a blow-up `(1; λ)` directly, with threshold `d_Ω >= (1 − κ)/(3 + √p)`;
//! * `E(1, c)` as the complement of `E(c−1, c)` in `P²(c)`, whose weights
//!   `(c−1)·w(c/(c−1))` are blown up;
//! * `T(a, b, α, β)` as the complement of `E(α+β−a, α) ⊔ E(α+β−b, β)` in
//!   `P²(α+β)`.
//!
//! Below the threshold, open balls pack the target iff they pass the volume
//! test. A certificate is one-sided: failing it says nothing about existence.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::bound::LowerBound;
use crate::cremona::{self, BallSemantics, PackingVector, ReductionTrace};
use crate::error::{Error, Result};
use crate::lattice::BlowupForm;
use crate::rational::{self, Rational};
use crate::toric::{self, ToricDomain};
use crate::weights::{self, ellipsoid_weights, partial_quotient_sum};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    BlowupOfP2(BlowupForm),
    Ellipsoid {
        a: Rational,
        b: Rational,
    },
    PseudoBall {
        a: Rational,
        b: Rational,
        alpha: Rational,
        beta: Rational,
    },
}

impl Target {
    /// A blow-up of `P²(1)` at closed balls of sizes `λ`. The balls must
    /// actually embed, otherwise there is no such symplectic form.
    pub fn blowup(lambdas: Vec<Rational>) -> Result<Self> {
        let form = BlowupForm::new(lambdas)?;
        let verdict = cremona::decide_with(&Rational::one(), form.lambdas(), BallSemantics::Closed);
        if !verdict.is_accepted() {
            return Err(Error::InvalidInput(
                "blow-up sizes do not embed as closed balls in P2(1)".into(),
            ));
        }
        Ok(Target::BlowupOfP2(form))
    }

    pub fn ellipsoid(a: Rational, b: Rational) -> Result<Self> {
        ToricDomain::ellipsoid(a.clone(), b.clone())?;
        Ok(Target::Ellipsoid { a, b })
    }

    pub fn pseudo_ball(a: Rational, b: Rational, alpha: Rational, beta: Rational) -> Result<Self> {
        toric::validate_pseudo_ball(&a, &b, &alpha, &beta)?;
        Ok(Target::PseudoBall { a, b, alpha, beta })
    }

    pub fn volume(&self) -> Rational {
        let two = rational::int(2);
        match self {
            Target::BlowupOfP2(f) => f.volume(),
            Target::Ellipsoid { a, b } => a * b / two,
            Target::PseudoBall { a, b, alpha, beta } => (a * alpha + b * beta) / two,
        }
    }

    /// `c · X` for the open targets; blow-ups are normalized and cannot scale.
    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::InvalidInput(format!("scale factor must be positive, got {c}")));
        }
        match self {
            Target::BlowupOfP2(_) => Err(Error::InvalidInput(
                "blow-ups of P2 are normalized to lines of area 1".into(),
            )),
            Target::Ellipsoid { a, b } => Ok(Target::Ellipsoid { a: a * c, b: b * c }),
            Target::PseudoBall { a, b, alpha, beta } => Ok(Target::PseudoBall {
                a: a * c,
                b: b * c,
                alpha: alpha * c,
                beta: beta * c,
            }),
        }
    }
}

impl TryFrom<ToricDomain> for Target {
    type Error = Error;

    fn try_from(d: ToricDomain) -> Result<Self> {
        match d {
            ToricDomain::Ball { capacity } => Target::ellipsoid(capacity.clone(), capacity),
            ToricDomain::Ellipsoid { a, b } => Target::ellipsoid(a, b),
            ToricDomain::PseudoBall { a, b, alpha, beta } => Target::pseudo_ball(a, b, alpha, beta),
            ToricDomain::ProjectivePlane { .. } => Err(Error::InvalidInput(
                "P2(mu) is not a certifier target; use Blowup() with no sizes after rescaling".into(),
            )),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::BlowupOfP2(form) => {
                let ls: Vec<String> = form.lambdas().iter().map(ToString::to_string).collect();
                write!(f, "Blowup({})", ls.join(","))
            }
            Target::Ellipsoid { a, b } => write!(f, "E({a},{b})"),
            Target::PseudoBall { a, b, alpha, beta } => write!(f, "T({a},{b},{alpha},{beta})"),
        }
    }
}

/// Accepts the domain grammar (`B(c)`, `E(a,b)`, `T(a,b,α,β)`) plus
/// `Blowup(λ₁,…,λₚ)` for a blow-up of `P²(1)`.
impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix("Blowup(") {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::MalformedDomain(s.to_string()))?;
            let lambdas = if inner.trim().is_empty() {
                Vec::new()
            } else {
                rational::parse_list(inner)?
            };
            return Target::blowup(lambdas);
        }
        t.parse::<ToricDomain>()?.try_into()
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Half the constructed bound.
    #[default]
    Conservative,
    Optimistic,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conservative" => Ok(Mode::Conservative),
            "optimistic" => Ok(Mode::Optimistic),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Conservative => "conservative",
            Mode::Optimistic => "optimistic",
        })
    }
}

/// The threshold together with the blow-up data it came from.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityBound {
    pub bound: LowerBound,
    pub mode: Mode,
    /// Line area of the ambient `P²`.
    #[serde(with = "rational::serde_str")]
    pub scale: Rational,
    /// `κ²` of the normalized blow-up.
    #[serde(with = "rational::serde_str")]
    pub kappa_sq: Rational,
    /// Number of blown-up balls.
    #[serde(serialize_with = "ser_biguint")]
    pub p: BigUint,
}

fn ser_biguint<S: Serializer>(p: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(p)
}

fn ellipsoid_count(x: &Rational, y: &Rational) -> Result<BigUint> {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    partial_quotient_sum(&(hi / lo))
}

pub fn lambda_bound(t: &Target, mode: Mode, precision: u32) -> Result<StabilityBound> {
    let (scale, kappa_sq, p) = match t {
        Target::BlowupOfP2(form) => (Rational::one(), form.kappa_sq().clone(), BigUint::from(form.p())),
        Target::Ellipsoid { a, b } => {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let c = hi / lo;
            if c.is_one() {
                // complement of a ball in P²(a) is a line: κ = 0, p = 0
                (lo.clone(), Rational::zero(), BigUint::zero())
            } else {
                let one = Rational::one();
                let kappa_sq = (&c - &one) / &c;
                let p = partial_quotient_sum(&(&c / (&c - &one)))?;
                (lo * c, kappa_sq, p)
            }
        }
        Target::PseudoBall { a, b, alpha, beta } => {
            let mu = alpha + beta;
            let first = &mu - a;
            let second = &mu - b;
            let kappa_sq = (&first * alpha + &second * beta) / (&mu * &mu);
            let p = ellipsoid_count(&first, alpha)? + ellipsoid_count(&second, beta)?;
            (mu, kappa_sq, p)
        }
    };
    let unit = LowerBound::stability_quotient(&kappa_sq, &p, precision);
    let full = unit.scale(&scale);
    let bound = match mode {
        Mode::Conservative => full.half(),
        Mode::Optimistic => full,
    };
    Ok(StabilityBound {
        bound,
        mode,
        scale,
        kappa_sq,
        p,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Failure {
    BallAboveThreshold {
        index: usize,
        #[serde(with = "rational::serde_str")]
        capacity: Rational,
    },
    VolumeExceeded {
        #[serde(with = "rational::serde_str")]
        slack: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE", tag = "status", content = "reasons")]
pub enum CertVerdict {
    Certified,
    NotCertified(Vec<Failure>),
}

#[derive(Debug, Clone, Serialize)]
pub struct BallCheck {
    #[serde(with = "rational::serde_str")]
    pub capacity: Rational,
    pub below_threshold: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub target: Target,
    pub lambda_threshold: LowerBound,
    pub mode: Mode,
    pub ball_count: usize,
    pub checks: Vec<BallCheck>,
    /// `Vol(target) − ½Σλᵢ²`.
    #[serde(with = "rational::serde_str")]
    pub volume_slack: Rational,
    pub verdict: CertVerdict,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == CertVerdict::Certified
    }
}

fn check_balls(balls: &[Rational]) -> Result<()> {
    match balls.iter().find(|b| b.is_negative()) {
        Some(b) => Err(Error::InvalidInput(format!("ball capacity {b} is negative"))),
        None => Ok(()),
    }
}

/// CERTIFIED iff every `λᵢ` is below the threshold and `½Σλᵢ² <= Vol(target)`.
pub fn certify_packing(t: &Target, balls: &[Rational], mode: Mode, precision: u32) -> Result<Certificate> {
    check_balls(balls)?;
    let threshold = lambda_bound(t, mode, precision)?.bound;
    let checks: Vec<BallCheck> = balls
        .iter()
        .map(|c| BallCheck {
            capacity: c.clone(),
            below_threshold: threshold.exceeds(c),
        })
        .collect();
    let ball_volume: Rational = balls.iter().map(|c| c * c).sum::<Rational>() / rational::int(2);
    let volume_slack = t.volume() - ball_volume;
    let mut failures: Vec<Failure> = checks
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.below_threshold)
        .map(|(index, c)| Failure::BallAboveThreshold {
            index,
            capacity: c.capacity.clone(),
        })
        .collect();
    if volume_slack.is_negative() {
        failures.push(Failure::VolumeExceeded {
            slack: volume_slack.clone(),
        });
    }
    let verdict = if failures.is_empty() {
        CertVerdict::Certified
    } else {
        CertVerdict::NotCertified(failures)
    };
    Ok(Certificate {
        target: t.clone(),
        lambda_threshold: threshold,
        mode,
        ball_count: balls.len(),
        checks,
        volume_slack,
        verdict,
    })
}

/// Balls into `E(1, a)`, `a > 1`: pack `P²(a)` with `E(a−1, a)` (via its
/// weights) and the balls, normalized to `P²(1)`, and reduce.
pub fn decide_balls_into_ellipsoid(a: &Rational, balls: &[Rational]) -> Result<ReductionTrace> {
    if a <= &Rational::one() {
        return Err(Error::InvalidInput(format!("ellipsoid ratio must exceed 1, got {a}")));
    }
    check_balls(balls)?;
    let complement = ellipsoid_weights(&(a - Rational::one()), a)?;
    let lambdas: Vec<Rational> = complement.iter().chain(balls).map(|x| x / a).collect();
    Ok(cremona::reduce(&PackingVector::new(Rational::one(), lambdas)))
}

/// Exact decision for balls into an ellipsoid target `E(a, b)` of any shape.
pub fn decide_balls_into(t: &Target, balls: &[Rational]) -> Result<bool> {
    match t {
        Target::Ellipsoid { a, b } => {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let scaled: Vec<Rational> = balls.iter().map(|x| x / lo).collect();
            if hi == lo {
                check_balls(balls)?;
                return Ok(cremona::decide_ball_packing(&Rational::one(), &scaled));
            }
            Ok(decide_balls_into_ellipsoid(&(hi / lo), &scaled)?.verdict.is_accepted())
        }
        Target::BlowupOfP2(form) => {
            check_balls(balls)?;
            let all: Vec<Rational> = form.lambdas().iter().chain(balls).cloned().collect();
            Ok(cremona::decide_ball_packing(&Rational::one(), &all))
        }
        Target::PseudoBall { .. } => Err(Error::InvalidInput("no exact reduction for pseudo-ball targets".into())),
    }
}

/// The two axes `(a, b)` of an ellipsoid `E(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Axes {
    #[serde(with = "rational::serde_str")]
    pub a: Rational,
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
}

/// A local branch of a component of `C` through a self-intersection point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Branch {
    pub component: usize,
    #[serde(default)]
    pub branch: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Assignment {
    /// `E(a, b)` meets the component along its first axis; charges `a`.
    FirstAxis { ellipsoid: Axes, component: usize },
    /// Charges `b`.
    SecondAxis { ellipsoid: Axes, component: usize },
    /// Sits on a double point: charges `a` to the first branch's component
    /// and `b` to the second's.
    Cross {
        ellipsoid: Axes,
        first: Branch,
        second: Branch,
    },
    /// Avoids the curve.
    Free { ellipsoid: Axes },
}

impl Assignment {
    fn ellipsoid(&self) -> &Axes {
        match self {
            Assignment::FirstAxis { ellipsoid, .. }
            | Assignment::SecondAxis { ellipsoid, .. }
            | Assignment::Cross { ellipsoid, .. }
            | Assignment::Free { ellipsoid } => ellipsoid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DirectedCheck {
    pub satisfied: bool,
    /// `area − charged` per component; all must be strictly positive.
    #[serde(with = "rational::serde_str::vec")]
    pub slacks: Vec<Rational>,
}

/// Each component's area must strictly exceed everything charged to it.
pub fn check_directed_hypotheses(components: &[Rational], assignments: &[Assignment]) -> Result<DirectedCheck> {
    if let Some(a) = components.iter().find(|a| !a.is_positive()) {
        return Err(Error::InvalidInput(format!("component area {a} is not positive")));
    }
    let mut charged = vec![Rational::zero(); components.len()];
    let component = |c: usize| -> Result<usize> {
        if c < components.len() {
            Ok(c)
        } else {
            Err(Error::InvalidAssignment(format!(
                "component {c} out of range ({} components)",
                components.len()
            )))
        }
    };
    for asg in assignments {
        let e = asg.ellipsoid();
        if !e.a.is_positive() || !e.b.is_positive() {
            return Err(Error::InvalidInput(format!(
                "ellipsoid E({},{}) is degenerate",
                e.a, e.b
            )));
        }
        match asg {
            Assignment::FirstAxis {
                ellipsoid,
                component: c,
            } => charged[component(*c)?] += &ellipsoid.a,
            Assignment::SecondAxis {
                ellipsoid,
                component: c,
            } => charged[component(*c)?] += &ellipsoid.b,
            Assignment::Cross {
                ellipsoid,
                first,
                second,
            } => {
                if first == second {
                    return Err(Error::InvalidAssignment(format!(
                        "cross E({},{}) assigned twice to branch {} of component {}",
                        ellipsoid.a, ellipsoid.b, first.branch, first.component
                    )));
                }
                charged[component(first.component)?] += &ellipsoid.a;
                charged[component(second.component)?] += &ellipsoid.b;
            }
            Assignment::Free { .. } => {}
        }
    }
    let slacks: Vec<Rational> = components.iter().zip(&charged).map(|(a, c)| a - c).collect();
    Ok(DirectedCheck {
        satisfied: slacks.iter().all(Signed::is_positive),
        slacks,
    })
}

/// One row of the `Λ(E(1, a))` atlas.
#[derive(Debug, Clone, Serialize)]
pub struct AtlasRow {
    #[serde(with = "rational::serde_str")]
    pub a: Rational,
    pub conservative: LowerBound,
    pub optimistic: LowerBound,
    /// `p(a/(a−1))`
    #[serde(serialize_with = "ser_biguint")]
    pub p: BigUint,
    #[serde(with = "rational::serde_str")]
    pub kappa_sq: Rational,
}

/// Bounds for `E(1, a)` on the grid `amin, amin+step, …, <= amax`.
pub fn atlas(amin: &Rational, amax: &Rational, step: &Rational, precision: u32) -> Result<Vec<AtlasRow>> {
    if amin <= &Rational::one() {
        return Err(Error::InvalidInput(format!("atlas needs amin > 1, got {amin}")));
    }
    if !step.is_positive() {
        return Err(Error::InvalidInput(format!("atlas step must be positive, got {step}")));
    }
    if amin > amax {
        return Err(Error::Empty("atlas grid"));
    }
    let mut rows = Vec::new();
    let mut a = amin.clone();
    while &a <= amax {
        let t = Target::ellipsoid(Rational::one(), a.clone())?;
        let opt = lambda_bound(&t, Mode::Optimistic, precision)?;
        let cons = lambda_bound(&t, Mode::Conservative, precision)?;
        rows.push(AtlasRow {
            a: a.clone(),
            conservative: cons.bound,
            optimistic: opt.bound,
            p: opt.p,
            kappa_sq: opt.kappa_sq,
        });
        a += step;
    }
    Ok(rows)
}

/// `p` of the complement weights of `E(1, a)`.
pub fn complement_weight_count(a: &Rational) -> Result<u64> {
    weights::weight_count(&(a / (a - Rational::one())))
}
