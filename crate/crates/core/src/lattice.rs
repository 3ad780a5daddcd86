//! Biran's constant `d_Ω` of a blow-up of `P²`.
//!
//! `d_Ω = inf Ω(B)/c₁(B)` over classes `B = kL − Σ mᵢEᵢ` with `B² >= 0`,
//! `Ω(B) > 0` and `c₁(B) >= 2`. The infimum need not be attained, so it is
//! only ever reported as a bracket: the closed-form lower bound
//! `(1 − κ)/(3 + √p)` from below, and an exhaustive search over
//! `1 <= k <= k_max` from above.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bound::LowerBound;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// `kL − Σ mᵢEᵢ` in `H₂` of the `p`-fold blow-up.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub struct HomologyClass {
    pub k: i64,
    pub m: Vec<i64>,
}

impl HomologyClass {
    pub fn new(k: i64, m: Vec<i64>) -> Self {
        HomologyClass { k, m }
    }
}

impl std::fmt::Display for HomologyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ms: Vec<String> = self.m.iter().map(ToString::to_string).collect();
        write!(f, "({}; {})", self.k, ms.join(","))
    }
}

/// Cohomology class `(1; λ₁..λ_p)` of a blow-up, lines of area 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowupForm {
    lambdas: Vec<Rational>,
    kappa_sq: Rational,
}

impl BlowupForm {
    /// Requires every `λᵢ ∈ (0, 1)` and `Σλᵢ² < 1`.
    pub fn new(lambdas: Vec<Rational>) -> Result<Self> {
        if let Some(bad) = lambdas.iter().find(|l| !l.is_positive() || **l >= Rational::one()) {
            return Err(Error::InvalidInput(format!(
                "blow-up sizes must lie in (0, 1), got {bad}"
            )));
        }
        let kappa_sq: Rational = lambdas.iter().map(|l| l * l).sum();
        if kappa_sq >= Rational::one() {
            return Err(Error::Infeasible(kappa_sq));
        }
        Ok(BlowupForm { lambdas, kappa_sq })
    }

    pub fn lambdas(&self) -> &[Rational] {
        &self.lambdas
    }

    pub fn p(&self) -> usize {
        self.lambdas.len()
    }

    /// `κ² = Σλᵢ²`, kept exact.
    pub fn kappa_sq(&self) -> &Rational {
        &self.kappa_sq
    }

    /// `(1 − κ²)/2`.
    pub fn volume(&self) -> Rational {
        (Rational::one() - &self.kappa_sq) / rational::int(2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassInvariants {
    pub self_intersection: i64,
    pub chern: i64,
    #[serde(with = "rational::serde_str")]
    pub area: Rational,
}

/// `(B², c₁(B), Ω(B)) = (k² − Σmᵢ², 3k − Σmᵢ, k − Σmᵢλᵢ)`.
pub fn class_invariants(class: &HomologyClass, form: &BlowupForm) -> Result<ClassInvariants> {
    if class.m.len() != form.p() {
        return Err(Error::DimensionMismatch {
            class: class.m.len(),
            form: form.p(),
        });
    }
    let k = class.k;
    let self_intersection = k * k - class.m.iter().map(|m| m * m).sum::<i64>();
    let chern = 3 * k - class.m.iter().sum::<i64>();
    let area = rational::int(k)
        - class
            .m
            .iter()
            .zip(form.lambdas())
            .map(|(m, l)| rational::int(*m) * l)
            .sum::<Rational>();
    Ok(ClassInvariants {
        self_intersection,
        chern,
        area,
    })
}

/// `(1 − κ)/(3 + √p)`, rounded down at `precision` bits.
pub fn d_omega_bound(form: &BlowupForm, precision: u32) -> LowerBound {
    LowerBound::stability_quotient(form.kappa_sq(), &BigUint::from(form.p()), precision)
}

/// `(1 − √(1 − 2·vol))/(3 + √p)`, the same bound expressed through the volume.
pub fn volume_form_bound(vol: &Rational, p: u64, precision: u32) -> Result<LowerBound> {
    let half = rational::ratio(1, 2);
    if !vol.is_positive() || vol > &half {
        return Err(Error::VolumeOutOfRange(vol.clone()));
    }
    let kappa_sq = Rational::one() - vol * rational::int(2);
    Ok(LowerBound::stability_quotient(&kappa_sq, &BigUint::from(p), precision))
}

/// Upper end of the `d_Ω` bracket from a finite search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
    pub witness: HomologyClass,
    pub k_max: i64,
    /// Classes with `B² >= 0`, `Ω(B) > 0` (any `c₁`) that were enumerated.
    pub admissible_classes: u64,
    /// Classes breaking `Ω(B) > k(1−κ)` (or `>=` when `B² = 0`); always
    /// empty unless the Cauchy-Schwarz step is wrong.
    pub proof_step_violations: Vec<HomologyClass>,
}

/// Integer arithmetic used by the enumeration. All quantities are scaled by
/// the common denominator `D` of the `λᵢ`.
trait Scalar: Clone + Ord + Zero + One + From<i64> + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {}
impl Scalar for i128 {}
impl Scalar for BigInt {}

struct Scaled<T> {
    denom: T,
    numers: Vec<T>,
    /// `Σ nᵢ² = D² κ²`
    numer_sq: T,
}

#[derive(Clone)]
struct Best<T> {
    // ratio = area_scaled / (denom * chern)
    area_scaled: T,
    chern: i64,
    witness: HomologyClass,
}

struct Local<T> {
    best: Option<Best<T>>,
    admissible: u64,
    violations: Vec<HomologyClass>,
}

fn better<T: Scalar>(cand_area: &T, cand_chern: i64, best: &Best<T>) -> bool {
    // cand_area / cand_chern < best.area / best.chern, both cherns positive
    cand_area.clone() * T::from(best.chern) < best.area_scaled.clone() * T::from(cand_chern)
}

fn combine<T: Scalar>(a: Local<T>, b: Local<T>) -> Local<T> {
    let best = match (a.best, b.best) {
        (Some(x), Some(y)) => {
            if better(&y.area_scaled, y.chern, &x) {
                Some(y)
            } else {
                Some(x)
            }
        }
        (x, None) => x,
        (None, y) => y,
    };
    let mut violations = a.violations;
    violations.extend(b.violations);
    Local {
        best,
        admissible: a.admissible + b.admissible,
        violations,
    }
}

struct Enumerator<'a, T> {
    scaled: &'a Scaled<T>,
    k: i64,
    m: Vec<i64>,
    out: Local<T>,
}

impl<T: Scalar> Enumerator<'_, T> {
    fn visit(&mut self, i: usize, budget: i64, sum_m: i64, sum_mn: T) {
        if i == self.m.len() {
            self.leaf(budget, sum_m, sum_mn);
            return;
        }
        let r = budget.sqrt();
        let mut mi = r;
        while mi >= -r {
            self.m[i] = mi;
            let next = sum_mn.clone() + T::from(mi) * self.scaled.numers[i].clone();
            self.visit(i + 1, budget - mi * mi, sum_m + mi, next);
            mi -= 1;
        }
    }

    fn leaf(&mut self, budget: i64, sum_m: i64, sum_mn: T) {
        let k = T::from(self.k);
        let area_scaled = k.clone() * self.scaled.denom.clone() - sum_mn.clone();
        if area_scaled <= T::zero() {
            return;
        }
        self.out.admissible += 1;
        // Ω(B) > k(1 − κ)  <=>  Σ mᵢλᵢ < kκ, compared exactly through squares
        let holds = if sum_mn < T::zero() {
            true
        } else {
            let lhs = sum_mn.clone() * sum_mn;
            let rhs = k.clone() * k * self.scaled.numer_sq.clone();
            if budget > 0 {
                lhs < rhs
            } else {
                lhs <= rhs
            }
        };
        if !holds {
            self.out.violations.push(HomologyClass::new(self.k, self.m.clone()));
        }
        let chern = 3 * self.k - sum_m;
        if chern < 2 {
            return;
        }
        let improves = match &self.out.best {
            None => true,
            Some(b) => better(&area_scaled, chern, b),
        };
        if improves {
            self.out.best = Some(Best {
                area_scaled,
                chern,
                witness: HomologyClass::new(self.k, self.m.clone()),
            });
        }
    }
}

fn search_k<T: Scalar>(scaled: &Scaled<T>, k: i64) -> Local<T> {
    let mut e = Enumerator {
        scaled,
        k,
        m: vec![0; scaled.numers.len()],
        out: Local {
            best: None,
            admissible: 0,
            violations: Vec::new(),
        },
    };
    e.visit(0, k * k, 0, T::zero());
    e.out
}

fn scale_form(form: &BlowupForm) -> Scaled<BigInt> {
    let denom = form.lambdas().iter().fold(BigInt::one(), |acc, l| acc.lcm(l.denom()));
    let numers: Vec<BigInt> = form
        .lambdas()
        .iter()
        .map(|l| l.numer() * (&denom / l.denom()))
        .collect();
    let numer_sq = numers.iter().map(|n| n * n).sum();
    Scaled {
        denom,
        numers,
        numer_sq,
    }
}

fn narrow(s: &Scaled<BigInt>, k_max: i64) -> Option<Scaled<i128>> {
    // Products stay below ~2^(2·40 + 2·11 + 3) when D < 2^40 and k < 2^10.
    let limit = BigInt::one() << 40;
    if s.denom >= limit || k_max >= 1 << 10 || s.numers.len() > 64 {
        return None;
    }
    Some(Scaled {
        denom: s.denom.to_i128()?,
        numers: s.numers.iter().map(|n| n.to_i128()).collect::<Option<_>>()?,
        numer_sq: s.numer_sq.to_i128()?,
    })
}

fn finish<T: Scalar + Into<BigInt>>(local: Local<T>, denom: T, k_max: i64) -> SearchResult {
    let best = local.best.expect("the class L is always admissible");
    let value = Rational::new(best.area_scaled.into(), denom.into() * BigInt::from(best.chern));
    SearchResult {
        value,
        witness: best.witness,
        k_max,
        admissible_classes: local.admissible,
        proof_step_violations: local.violations,
    }
}

fn run<T: Scalar + Send + Sync + Into<BigInt>>(scaled: Scaled<T>, k_max: i64, parallel: bool) -> SearchResult {
    let empty = || Local {
        best: None,
        admissible: 0,
        violations: Vec::new(),
    };
    let local = if parallel {
        (1..=k_max)
            .into_par_iter()
            .map(|k| search_k(&scaled, k))
            .reduce(empty, combine)
    } else {
        (1..=k_max).map(|k| search_k(&scaled, k)).fold(empty(), combine)
    };
    finish(local, scaled.denom, k_max)
}

fn search(form: &BlowupForm, k_max: i64, parallel: bool) -> Result<SearchResult> {
    if k_max < 1 {
        return Err(Error::InvalidInput(format!("k_max must be >= 1, got {k_max}")));
    }
    let big = scale_form(form);
    Ok(match narrow(&big, k_max) {
        Some(small) => run(small, k_max, parallel),
        None => run(big, k_max, parallel),
    })
}

/// Exact minimum of `Ω(B)/c₁(B)` over admissible classes with `1 <= k <= k_max`.
///
/// Negative `mᵢ` are enumerated; pruning is by `Σmᵢ² <= k²` only. Ties keep
/// the smallest `k`, then the first class in descending lexicographic order
/// of `m`.
pub fn d_omega_search(form: &BlowupForm, k_max: i64) -> Result<SearchResult> {
    search(form, k_max, false)
}

/// [`d_omega_search`] with the `k`-range split across worker threads. The
/// per-`k` minima combine by an associative min, so the result is identical.
pub fn d_omega_search_parallel(form: &BlowupForm, k_max: i64) -> Result<SearchResult> {
    search(form, k_max, true)
}

/// `d_Ω` is only known to lie in `[lower, upper]`.
#[derive(Debug, Clone, Serialize)]
pub struct DOmegaBracket {
    pub lower: LowerBound,
    pub upper: Option<SearchResult>,
}

pub fn d_omega_bracket(form: &BlowupForm, k_max: Option<i64>, precision: u32) -> Result<DOmegaBracket> {
    let lower = d_omega_bound(form, precision);
    let upper = k_max.map(|k| d_omega_search_parallel(form, k)).transpose()?;
    if let Some(u) = &upper {
        debug_assert!(
            lower.value().cmp(&u.value) != Ordering::Greater,
            "search value below the certified bound"
        );
    }
    Ok(DOmegaBracket { lower, upper })
}
