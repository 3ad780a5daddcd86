//! Decomposition of a closed symplectic 4-manifold along a singular
//! polarization into ellipsoids and pseudo-balls, and the resulting
//! stability constant `Λ′ = min(Λ_pieces, √(2δ))`.
//!
//! Curves `Σ₁ … Σₗ` meet cyclically: `xᵢ ∈ Σᵢ ∩ Σᵢ₊₁`. Each curve carries a
//! central disc of area `Aᵢ` and two cross discs `A_{i,i−1}`, `A_{i,i+1}`
//! around its intersection points. The basin of the central disc is
//! `E(Aᵢ, αᵢ)`; the basin of the cross at `xᵢ` is the convex hull of
//! `(0,0), (A_{i,i+1}, 0), (0, A_{i+1,i}), (αᵢ₊₁, αᵢ)`, that is
//! `T(A_{i+1,i}, A_{i,i+1}, αᵢ₊₁, αᵢ)`, of volume
//! `½(A_{i,i+1}αᵢ + A_{i+1,i}αᵢ₊₁)`. Each disc is paired with its own
//! curve's residue, so the piece volumes add up to `½Σαᵢ·area(Σᵢ)` exactly.
//!
//! A single curve has no crosses and one piece.

use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::LowerBound;
use crate::certify::{self, Certificate, Mode, Target};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::toric::{self, MomentPolytope, ToricDomain};

/// Recorded in every plan so consumers know how crosses were read.
pub const CROSS_CONVENTION: &str =
    "cross at x_i = hull{(0,0),(A_{i,i+1},0),(0,A_{i+1,i}),(alpha_{i+1},alpha_i)} = T(A_{i+1,i},A_{i,i+1},alpha_{i+1},alpha_i); \
     cross discs A_{i,i+-1} in ]alpha_i, alpha_i+alpha_{i+-1}[";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curve {
    #[serde(with = "rational::serde_str")]
    pub area: Rational,
    #[serde(with = "rational::serde_str")]
    pub residue: Rational,
}

impl Curve {
    pub fn new(area: Rational, residue: Rational) -> Self {
        Curve { area, residue }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polarization {
    pub curves: Vec<Curve>,
    #[serde(
        default,
        rename = "volume",
        alias = "total_volume",
        with = "rational::serde_str::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub total_volume: Option<Rational>,
}

impl Polarization {
    pub fn new(curves: Vec<Curve>) -> Self {
        Polarization {
            curves,
            total_volume: None,
        }
    }

    pub fn with_volume(mut self, v: Rational) -> Self {
        self.total_volume = Some(v);
        self
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// `½ Σ αᵢ·area(Σᵢ)`.
    pub fn implied_volume(&self) -> Rational {
        self.curves.iter().map(|c| &c.area * &c.residue).sum::<Rational>() / rational::int(2)
    }

    fn residue(&self, i: usize) -> &Rational {
        &self.curves[i % self.len()].residue
    }

    fn has_crosses(&self) -> bool {
        self.len() > 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Violation {
    NoCurves,
    NonPositiveArea {
        curve: usize,
    },
    NonPositiveResidue {
        curve: usize,
    },
    /// `area(Σᵢ) >= 10 αⱼ` fails for the largest residue `αⱼ`.
    AreaBelowTenResidues {
        curve: usize,
        #[serde(with = "rational::serde_str")]
        max_residue: Rational,
    },
    VolumeMismatch {
        #[serde(with = "rational::serde_str")]
        given: Rational,
        #[serde(with = "rational::serde_str")]
        implied: Rational,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoCurves => write!(f, "no curves"),
            Violation::NonPositiveArea { curve } => write!(f, "curve {curve}: area must be positive"),
            Violation::NonPositiveResidue { curve } => write!(f, "curve {curve}: residue must be positive"),
            Violation::AreaBelowTenResidues { curve, max_residue } => {
                write!(f, "curve {curve}: area below 10 x max residue {max_residue}")
            }
            Violation::VolumeMismatch { given, implied } => {
                write!(f, "volume {given} differs from 1/2 sum residue*area = {implied}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolarizationReport {
    pub curves: usize,
    #[serde(with = "rational::serde_str")]
    pub implied_volume: Rational,
    pub violations: Vec<Violation>,
    pub cross_convention: &'static str,
}

impl PolarizationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.is_valid() {
            Ok(self)
        } else {
            Err(Error::Polarization(
                self.violations.iter().map(ToString::to_string).collect(),
            ))
        }
    }
}

/// Collects every violated condition; never fails early.
pub fn validate_polarization(p: &Polarization) -> PolarizationReport {
    let mut violations = Vec::new();
    if p.is_empty() {
        violations.push(Violation::NoCurves);
    }
    for (i, c) in p.curves.iter().enumerate() {
        if !c.area.is_positive() {
            violations.push(Violation::NonPositiveArea { curve: i });
        }
        if !c.residue.is_positive() {
            violations.push(Violation::NonPositiveResidue { curve: i });
        }
    }
    if let Some(max_residue) = p.curves.iter().map(|c| &c.residue).max() {
        let ten = rational::int(10) * max_residue;
        for (i, c) in p.curves.iter().enumerate() {
            if c.area < ten {
                violations.push(Violation::AreaBelowTenResidues {
                    curve: i,
                    max_residue: max_residue.clone(),
                });
            }
        }
    }
    let implied = p.implied_volume();
    if let Some(given) = &p.total_volume {
        if *given != implied {
            violations.push(Violation::VolumeMismatch {
                given: given.clone(),
                implied: implied.clone(),
            });
        }
    }
    PolarizationReport {
        curves: p.len(),
        implied_volume: implied,
        violations,
        cross_convention: CROSS_CONVENTION,
    }
}

pub type FlowState = (f64, f64, f64, f64);

/// Flow of the Liouville field with fixed point `(αⱼ, αᵢ)` in action-angle
/// coordinates `(R₁, θ₁, R₂, θ₂)`.
pub fn liouville_flow(fixed: (f64, f64), state: FlowState, t: f64) -> FlowState {
    let s = (-t).exp();
    (
        fixed.0 + (state.0 - fixed.0) * s,
        state.1,
        fixed.1 + (state.2 - fixed.1) * s,
        state.3,
    )
}

/// Basin of a disc of area `a` on a curve with residue `α`: `E(a, α)`.
pub fn basin_of_disc(a: &Rational, alpha: &Rational) -> Result<ToricDomain> {
    ToricDomain::ellipsoid(a.clone(), alpha.clone())
}

/// Basin of the cross formed by a disc of area `aᵢ` on `Σᵢ` and one of
/// area `aⱼ` on `Σⱼ`: `T(aⱼ, aᵢ, αⱼ, αᵢ)`.
pub fn basin_of_cross(a_i: &Rational, alpha_i: &Rational, a_j: &Rational, alpha_j: &Rational) -> Result<ToricDomain> {
    ToricDomain::pseudo_ball(a_j.clone(), a_i.clone(), alpha_j.clone(), alpha_i.clone())
}

/// Fixed point and axis discs of a basin, for numerical flow checks.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinModel {
    pub fixed: (f64, f64),
    /// Disc `[0, first_axis]` on `{R₂ = 0}`.
    pub first_axis: f64,
    /// Disc `[0, second_axis]` on `{R₁ = 0}`; zero for a disc basin.
    pub second_axis: f64,
    polytope: MomentPolytope,
}

impl BasinModel {
    pub fn disc(a: &Rational, alpha: &Rational) -> Result<Self> {
        let polytope = basin_of_disc(a, alpha)?.moment_polytope();
        Ok(BasinModel {
            fixed: (0.0, rational::to_f64(alpha)),
            first_axis: rational::to_f64(a),
            second_axis: 0.0,
            polytope,
        })
    }

    pub fn cross(a_i: &Rational, alpha_i: &Rational, a_j: &Rational, alpha_j: &Rational) -> Result<Self> {
        let polytope = basin_of_cross(a_i, alpha_i, a_j, alpha_j)?.moment_polytope();
        Ok(BasinModel {
            fixed: (rational::to_f64(alpha_j), rational::to_f64(alpha_i)),
            first_axis: rational::to_f64(a_i),
            second_axis: rational::to_f64(a_j),
            polytope,
        })
    }

    pub fn polytope(&self) -> &MomentPolytope {
        &self.polytope
    }

    /// Exact membership of the closed basin polytope.
    pub fn contains(&self, point: &toric::Point) -> bool {
        self.polytope.contains(point)
    }

    /// Euclidean distance to the polytope boundary.
    pub fn boundary_distance(&self, point: (f64, f64)) -> f64 {
        let vs: Vec<(f64, f64)> = self
            .polytope
            .vertices()
            .iter()
            .map(|(x, y)| (rational::to_f64(x), rational::to_f64(y)))
            .collect();
        (0..vs.len())
            .map(|i| segment_distance(point, vs[i], vs[(i + 1) % vs.len()]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Runs the flow backward from `point` until it reaches an axis, and
    /// reports whether it lands on one of the basin's discs. A trajectory
    /// that never reaches an axis is outside.
    pub fn flows_from_disc(&self, point: (f64, f64), tol: f64) -> bool {
        let start: FlowState = (point.0, 0.0, point.1, 0.0);
        let hit = |s: &FlowState| s.0 <= 0.0 || s.2 <= 0.0;
        if hit(&start) {
            return self.on_disc(start, tol);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while !hit(&liouville_flow(self.fixed, start, -hi)) {
            lo = hi;
            hi *= 2.0;
            if hi > 64.0 {
                return false;
            }
        }
        while hi - lo > tol * tol.max(1e-3) {
            let mid = 0.5 * (lo + hi);
            if hit(&liouville_flow(self.fixed, start, -mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        self.on_disc(liouville_flow(self.fixed, start, -hi), tol)
    }

    fn on_disc(&self, s: FlowState, tol: f64) -> bool {
        let (r1, r2) = (s.0, s.2);
        if r2 <= tol && r1 >= -tol && r1 <= self.first_axis + tol {
            return true;
        }
        self.second_axis > 0.0 && r1 <= tol && r2 >= -tol && r2 <= self.second_axis + tol
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

/// Disc areas on one curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurveDiscs {
    /// `Aᵢ`.
    #[serde(with = "rational::serde_str")]
    pub own: Rational,
    /// `A_{i,i−1}`, around `xᵢ₋₁`. Zero when there are no crosses.
    #[serde(with = "rational::serde_str")]
    pub prev: Rational,
    /// `A_{i,i+1}`, around `xᵢ`.
    #[serde(with = "rational::serde_str")]
    pub next: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscAllocation {
    pub discs: Vec<CurveDiscs>,
}

impl DiscAllocation {
    /// `(A₁, A_{1,2}, A_{2,1}, A₂, A_{2,3}, …, Aₗ, A_{l,1}, A_{1,l})`, the order
    /// in which the cascade fixes them.
    pub fn cascade_order(&self) -> Vec<Rational> {
        let l = self.discs.len();
        let mut out = Vec::with_capacity(3 * l);
        for i in 0..l {
            out.push(self.discs[i].own.clone());
            out.push(self.discs[i].next.clone());
            out.push(self.discs[(i + 1) % l].prev.clone());
        }
        out
    }
}

fn cross_interval(p: &Polarization, own: usize, other: usize) -> (Rational, Rational) {
    let a = p.residue(own).clone();
    let b = &a + p.residue(other);
    (a, b)
}

fn in_open(x: &Rational, (lo, hi): &(Rational, Rational)) -> bool {
    lo < x && x < hi
}

/// Checks row sums, positivity and the open cross intervals.
pub fn validate_allocation(p: &Polarization, alloc: &DiscAllocation) -> Result<()> {
    let l = p.len();
    if alloc.discs.len() != l {
        return Err(Error::Allocation(format!(
            "{} disc rows for {l} curves",
            alloc.discs.len()
        )));
    }
    for (i, (d, c)) in alloc.discs.iter().zip(&p.curves).enumerate() {
        if &d.own + &d.prev + &d.next != c.area {
            return Err(Error::Allocation(format!(
                "curve {i}: disc areas do not sum to {}",
                c.area
            )));
        }
        if !d.own.is_positive() {
            return Err(Error::Allocation(format!(
                "curve {i}: central disc area {} is not positive",
                d.own
            )));
        }
        if !p.has_crosses() {
            if !d.prev.is_zero() || !d.next.is_zero() {
                return Err(Error::Allocation("a single curve has no cross discs".into()));
            }
            continue;
        }
        let prev = cross_interval(p, i, (i + l - 1) % l);
        let next = cross_interval(p, i, (i + 1) % l);
        if !in_open(&d.prev, &prev) {
            return Err(Error::Allocation(format!(
                "curve {i}: A_(i,i-1) = {} outside ]{}, {}[",
                d.prev, prev.0, prev.1
            )));
        }
        if !in_open(&d.next, &next) {
            return Err(Error::Allocation(format!(
                "curve {i}: A_(i,i+1) = {} outside ]{}, {}[",
                d.next, next.0, next.1
            )));
        }
    }
    Ok(())
}

/// Default allocation: every cross disc at the midpoint `αᵢ + αᵢ±₁/2` of its
/// interval, the rest of the curve to the central disc.
pub fn plan_discs(p: &Polarization) -> Result<DiscAllocation> {
    validate_polarization(p).into_result()?;
    let l = p.len();
    let half = rational::ratio(1, 2);
    let discs = (0..l)
        .map(|i| {
            let (prev, next) = if p.has_crosses() {
                (
                    p.residue(i) + p.residue(i + l - 1) * &half,
                    p.residue(i) + p.residue(i + 1) * &half,
                )
            } else {
                (Rational::zero(), Rational::zero())
            };
            CurveDiscs {
                own: &p.curves[i].area - &prev - &next,
                prev,
                next,
            }
        })
        .collect();
    let alloc = DiscAllocation { discs };
    validate_allocation(p, &alloc)?;
    Ok(alloc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PieceKind {
    Ellipsoid {
        curve: usize,
    },
    /// The cross at `x_first ∈ Σ_first ∩ Σ_second`.
    Cross {
        first: usize,
        second: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub label: String,
    pub kind: PieceKind,
    pub domain: ToricDomain,
    #[serde(with = "rational::serde_str")]
    pub volume: Rational,
}

impl Piece {
    pub fn target(&self) -> Result<Target> {
        self.domain.clone().try_into()
    }
}

/// Pieces in cascade order `E₁, T₁₂, E₂, …, Eₗ, T_{l,1}`.
pub fn pieces(p: &Polarization, alloc: &DiscAllocation) -> Result<Vec<Piece>> {
    validate_allocation(p, alloc)?;
    let l = p.len();
    let mut out = Vec::with_capacity(2 * l);
    for i in 0..l {
        let d = &alloc.discs[i];
        let domain = basin_of_disc(&d.own, p.residue(i))?;
        out.push(Piece {
            label: format!("E{}", i + 1),
            kind: PieceKind::Ellipsoid { curve: i },
            volume: domain.volume()?,
            domain,
        });
        if p.has_crosses() {
            let j = (i + 1) % l;
            let domain = basin_of_cross(&d.next, p.residue(i), &alloc.discs[j].prev, p.residue(j))?;
            out.push(Piece {
                label: format!("T{},{}", i + 1, j + 1),
                kind: PieceKind::Cross { first: i, second: j },
                volume: domain.volume()?,
                domain,
            });
        }
    }
    Ok(out)
}

/// Re-solves the disc areas so that the pieces get exactly the `targets`
/// volumes (cascade order). `A_{1,l}` stays fixed; the last cross closes
/// by the closure condition.
pub fn perturb_allocation(p: &Polarization, alloc: &DiscAllocation, targets: &[Rational]) -> Result<DiscAllocation> {
    let current = pieces(p, alloc)?;
    if targets.len() != current.len() {
        return Err(Error::Allocation(format!(
            "{} targets for {} pieces",
            targets.len(),
            current.len()
        )));
    }
    let total_targets: Rational = targets.iter().sum();
    let total_pieces: Rational = current.iter().map(|x| &x.volume).sum();
    if total_targets != total_pieces {
        return Err(Error::Closure {
            targets: Box::new(total_targets),
            pieces: Box::new(total_pieces),
        });
    }
    let l = p.len();
    let two = rational::int(2);
    let mut discs = alloc.discs.clone();
    if !p.has_crosses() {
        return Ok(DiscAllocation { discs });
    }
    for i in 0..l {
        let alpha = p.residue(i);
        discs[i].own = &two * &targets[2 * i] / alpha;
        discs[i].next = &p.curves[i].area - &discs[i].prev - &discs[i].own;
        let j = (i + 1) % l;
        let prev = (&two * &targets[2 * i + 1] - &discs[i].next * alpha) / p.residue(j);
        if j == 0 {
            debug_assert_eq!(prev, discs[0].prev, "closure forces the last cross");
        }
        discs[j].prev = prev;
    }
    let out = DiscAllocation { discs };
    validate_allocation(p, &out)?;
    Ok(out)
}

/// Largest `δ/2` such that retargeting every piece by at most `δ` (with the
/// total preserved) keeps every disc inside its interval. `None` when the
/// plan has a single piece.
///
/// With target errors `eₖ` and partial sums `Sₖ`, the cascade moves
/// `Aᵢ` by `2e/αᵢ`, `A_{i,i+1}` by `−2S_{2i−1}/αᵢ` and `A_{i+1,i}` by
/// `2S_{2i}/αᵢ₊₁`, and `|Sₖ| <= min(k, 2l−k)·δ` because `S_{2l} = 0`.
pub fn retarget_slack(p: &Polarization, alloc: &DiscAllocation) -> Result<Option<Rational>> {
    validate_allocation(p, alloc)?;
    if !p.has_crosses() {
        return Ok(None);
    }
    let l = p.len();
    let n = 2 * l;
    let two = rational::int(2);
    let coef = |k: usize, alpha: &Rational| &two * rational::int(k.min(n - k) as i64) / alpha;
    let gap = |x: &Rational, (lo, hi): (Rational, Rational)| (x - lo).min(hi - x);
    let mut ratios = Vec::with_capacity(3 * l);
    for i in 0..l {
        let d = &alloc.discs[i];
        let alpha = p.residue(i);
        ratios.push(&d.own / (&two / alpha));
        ratios.push(gap(&d.next, cross_interval(p, i, i + 1)) / coef(2 * i + 1, alpha));
        if i + 1 < l {
            let prev = &alloc.discs[i + 1].prev;
            ratios.push(gap(prev, cross_interval(p, i + 1, i)) / coef(2 * i + 2, p.residue(i + 1)));
        }
    }
    let sup = ratios.into_iter().min().expect("at least one disc");
    Ok(Some(sup / two))
}

#[derive(Debug, Clone, Serialize)]
pub struct PieceBound {
    pub label: String,
    pub bound: LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    Pieces,
    Slack,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub mode: Mode,
    pub pieces: Vec<PieceBound>,
    pub lambda_pieces: LowerBound,
    /// `None` stands for an unbounded slack.
    #[serde(with = "rational::serde_str::option")]
    pub delta: Option<Rational>,
    pub sqrt_two_delta: Option<LowerBound>,
    pub lambda_prime: LowerBound,
    pub limited_by: Limit,
}

pub fn stability_constant(
    p: &Polarization,
    alloc: &DiscAllocation,
    mode: Mode,
    precision: u32,
) -> Result<StabilityReport> {
    let ps = pieces(p, alloc)?;
    if ps.is_empty() {
        return Err(Error::Empty("plan"));
    }
    let bounds = ps
        .par_iter()
        .map(|piece| {
            let b = certify::lambda_bound(&piece.target()?, mode, precision)?;
            Ok(PieceBound {
                label: piece.label.clone(),
                bound: b.bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lambda_pieces = bounds
        .iter()
        .map(|b| b.bound.clone())
        .reduce(LowerBound::min)
        .expect("non-empty");
    let delta = retarget_slack(p, alloc)?;
    let sqrt_two_delta = delta
        .as_ref()
        .map(|d| LowerBound::sqrt(&(rational::int(2) * d), precision));
    let (lambda_prime, limited_by) = match &sqrt_two_delta {
        Some(s) if s.value() < lambda_pieces.value() => (s.clone(), Limit::Slack),
        _ => (lambda_pieces.clone(), Limit::Pieces),
    };
    Ok(StabilityReport {
        mode,
        pieces: bounds,
        lambda_pieces,
        delta,
        sqrt_two_delta,
        lambda_prime,
        limited_by,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionPlan {
    pub convention: &'static str,
    #[serde(with = "rational::serde_str")]
    pub total_volume: Rational,
    pub allocation: DiscAllocation,
    pub pieces: Vec<Piece>,
    pub stability: StabilityReport,
}

impl DecompositionPlan {
    pub fn delta(&self) -> Option<&Rational> {
        self.stability.delta.as_ref()
    }

    pub fn lambda_prime(&self) -> &LowerBound {
        &self.stability.lambda_prime
    }
}

pub fn plan(p: &Polarization, mode: Mode, precision: u32) -> Result<DecompositionPlan> {
    let allocation = plan_discs(p)?;
    let pieces = pieces(p, &allocation)?;
    let stability = stability_constant(p, &allocation, mode, precision)?;
    Ok(DecompositionPlan {
        convention: CROSS_CONVENTION,
        total_volume: p.implied_volume(),
        allocation,
        pieces,
        stability,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    /// Item indices per piece.
    pub subsets: Vec<Vec<usize>>,
    /// Filler items per piece.
    pub fillers: Vec<usize>,
    #[serde(with = "rational::serde_str")]
    pub filler_volume: Rational,
    /// Items plus fillers per piece.
    #[serde(with = "rational::serde_str::vec")]
    pub subset_volumes: Vec<Rational>,
}

/// Greedy partition of item volumes: largest first, each into the piece
/// with the largest remaining deficit (lowest index on ties). With `pad`,
/// the shortfall is split into equal fillers of volume `< δ` first, which
/// makes the totals agree and every subset land within `δ` of its piece.
/// `δ = None` means unbounded.
pub fn partition_balls(
    volumes: &[Rational],
    piece_volumes: &[Rational],
    delta: Option<&Rational>,
    pad: bool,
) -> Result<Partition> {
    if piece_volumes.is_empty() {
        return Err(Error::Empty("piece list"));
    }
    if let Some(v) = volumes.iter().find(|v| v.is_negative()) {
        return Err(Error::InvalidInput(format!("ball volume {v} is negative")));
    }
    let total: Rational = volumes.iter().sum();
    let capacity: Rational = piece_volumes.iter().sum();
    if total > capacity {
        return Err(Error::Partition(format!(
            "balls need volume {total}, pieces hold {capacity}"
        )));
    }
    if let Some(d) = delta {
        let largest = piece_volumes.iter().max().expect("non-empty");
        if let Some(v) = volumes.iter().find(|v| *v > &(largest + d)) {
            return Err(Error::Partition(format!(
                "ball volume {v} exceeds every piece volume + delta"
            )));
        }
    }

    let shortfall = &capacity - &total;
    let (filler_count, filler_volume) = if pad && shortfall.is_positive() {
        let n = match delta {
            Some(d) => {
                (&shortfall / d)
                    .floor()
                    .to_integer()
                    .to_usize()
                    .unwrap_or(usize::MAX - 1)
                    + 1
            }
            None => 1,
        };
        (n, &shortfall / rational::int(n as i64))
    } else {
        (0, Rational::zero())
    };

    // balls before fillers on equal volume
    let mut order: Vec<usize> = (0..volumes.len()).collect();
    order.sort_by(|&a, &b| volumes[b].cmp(&volumes[a]));
    let first_smaller = order.partition_point(|&i| volumes[i] >= filler_volume);

    let m = piece_volumes.len();
    let mut deficit: Vec<Rational> = piece_volumes.to_vec();
    let mut subsets = vec![Vec::new(); m];
    let mut fillers = vec![0usize; m];
    let neediest = |deficit: &[Rational]| (1..m).fold(0, |best, k| if deficit[k] > deficit[best] { k } else { best });
    let place_fillers = |deficit: &mut Vec<Rational>, fillers: &mut Vec<usize>| {
        for _ in 0..filler_count {
            let k = neediest(deficit);
            deficit[k] -= &filler_volume;
            fillers[k] += 1;
        }
    };
    for (pos, &i) in order.iter().enumerate() {
        if pos == first_smaller {
            place_fillers(&mut deficit, &mut fillers);
        }
        let k = neediest(&deficit);
        deficit[k] -= &volumes[i];
        subsets[k].push(i);
    }
    if first_smaller == order.len() {
        place_fillers(&mut deficit, &mut fillers);
    }

    let subset_volumes: Vec<Rational> = piece_volumes.iter().zip(&deficit).map(|(v, d)| v - d).collect();
    if let Some(d) = delta {
        if let Some(k) = deficit.iter().position(|x| &x.abs() > d) {
            return Err(Error::Partition(format!(
                "piece {k}: subset volume {} is more than delta = {d} away from {}",
                subset_volumes[k], piece_volumes[k]
            )));
        }
    }
    Ok(Partition {
        subsets,
        fillers,
        filler_volume,
        subset_volumes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BallPlacement {
    pub partition: Partition,
    pub allocation: DiscAllocation,
    pub pieces: Vec<Piece>,
    pub certificates: Vec<Certificate>,
    pub all_certified: bool,
}

/// Partitions the balls over the pieces, retargets the pieces to the subset
/// volumes and certifies every subset in its perturbed piece.
pub fn place_balls(
    p: &Polarization,
    plan: &DecompositionPlan,
    balls: &[Rational],
    mode: Mode,
    precision: u32,
) -> Result<BallPlacement> {
    if let Some(b) = balls.iter().find(|b| b.is_negative()) {
        return Err(Error::InvalidInput(format!("ball capacity {b} is negative")));
    }
    let two = rational::int(2);
    let volumes: Vec<Rational> = balls.iter().map(|b| b * b / &two).collect();
    let nominal: Vec<Rational> = plan.pieces.iter().map(|x| x.volume.clone()).collect();
    let partition = partition_balls(&volumes, &nominal, plan.delta(), true)?;
    let allocation = perturb_allocation(p, &plan.allocation, &partition.subset_volumes)?;
    let pieces = pieces(p, &allocation)?;
    let certificates = pieces
        .par_iter()
        .zip(&partition.subsets)
        .map(|(piece, subset)| {
            let caps: Vec<Rational> = subset.iter().map(|&i| balls[i].clone()).collect();
            certify::certify_packing(&piece.target()?, &caps, mode, precision)
        })
        .collect::<Result<Vec<_>>>()?;
    let all_certified = certificates.iter().all(Certificate::is_certified);
    Ok(BallPlacement {
        partition,
        allocation,
        pieces,
        certificates,
        all_certified,
    })
}
