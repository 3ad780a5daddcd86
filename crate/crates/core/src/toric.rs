//! First-quadrant toric domains: balls, ellipsoids, pseudo-balls and scaled
//! projective planes, described by their moment polytopes.
//!
//! A domain is the preimage of a region `P` of the first quadrant under
//! `(z, w) ↦ (π|z|², π|w|²)`, so its symplectic volume is the Euclidean
//! area of `P`.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, PseudoBallViolation, Result};
use crate::rational::{self, Rational};

pub type Point = (Rational, Rational);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentPolytope {
    vertices: Vec<Point>,
}

impl MomentPolytope {
    /// Vertices are expected counter-clockwise; every coordinate must be `>= 0`.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.iter().any(|(x, y)| x.is_negative() || y.is_negative()) {
            return Err(Error::InvalidInput(
                "moment polytope must lie in the closed first quadrant".into(),
            ));
        }
        Ok(MomentPolytope { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Shoelace sum. Positive for counter-clockwise order, zero when degenerate.
    pub fn signed_area(&self) -> Rational {
        let n = self.vertices.len();
        if n < 3 {
            return Rational::zero();
        }
        let mut twice = Rational::zero();
        for i in 0..n {
            let (x0, y0) = &self.vertices[i];
            let (x1, y1) = &self.vertices[(i + 1) % n];
            twice += x0 * y1 - x1 * y0;
        }
        twice / rational::int(2)
    }

    pub fn area(&self) -> Rational {
        self.signed_area().abs()
    }

    /// Drops repeated and collinear vertices.
    pub fn simplified(&self) -> MomentPolytope {
        let mut vs: Vec<Point> = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            if vs.last() != Some(v) {
                vs.push(v.clone());
            }
        }
        while vs.len() > 1 && vs.first() == vs.last() {
            vs.pop();
        }
        let mut changed = true;
        while changed && vs.len() >= 3 {
            changed = false;
            let n = vs.len();
            for i in 0..n {
                let a = &vs[(i + n - 1) % n];
                let b = &vs[i];
                let c = &vs[(i + 1) % n];
                let cross = (&b.0 - &a.0) * (&c.1 - &a.1) - (&b.1 - &a.1) * (&c.0 - &a.0);
                if cross.is_zero() {
                    vs.remove(i);
                    changed = true;
                    break;
                }
            }
        }
        MomentPolytope { vertices: vs }
    }

    /// Point membership for a convex counter-clockwise polygon, boundary included.
    pub fn contains(&self, p: &Point) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        (0..n).all(|i| {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            let cross = (&b.0 - &a.0) * (&p.1 - &a.1) - (&b.1 - &a.1) * (&p.0 - &a.0);
            !cross.is_negative()
        })
    }
}

pub fn polytope_area(p: &MomentPolytope) -> Rational {
    p.area()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ToricDomain {
    Ball {
        capacity: Rational,
    },
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
    ProjectivePlane {
        scale: Rational,
    },
}

fn positive(name: &str, x: &Rational) -> Result<()> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive, got {x}")))
    }
}

impl ToricDomain {
    pub fn ball(capacity: Rational) -> Result<Self> {
        positive("capacity", &capacity)?;
        Ok(ToricDomain::Ball { capacity })
    }

    pub fn ellipsoid(a: Rational, b: Rational) -> Result<Self> {
        positive("a", &a)?;
        positive("b", &b)?;
        Ok(ToricDomain::Ellipsoid { a, b })
    }

    pub fn pseudo_ball(a: Rational, b: Rational, alpha: Rational, beta: Rational) -> Result<Self> {
        validate_pseudo_ball(&a, &b, &alpha, &beta)?;
        Ok(ToricDomain::PseudoBall { a, b, alpha, beta })
    }

    pub fn projective_plane(scale: Rational) -> Result<Self> {
        positive("scale", &scale)?;
        Ok(ToricDomain::ProjectivePlane { scale })
    }

    /// Re-checks the invariants of a value that may have been built directly.
    pub fn validate(&self) -> Result<()> {
        match self {
            ToricDomain::Ball { capacity } => positive("capacity", capacity),
            ToricDomain::Ellipsoid { a, b } => positive("a", a).and(positive("b", b)),
            ToricDomain::PseudoBall { a, b, alpha, beta } => validate_pseudo_ball(a, b, alpha, beta),
            ToricDomain::ProjectivePlane { scale } => positive("scale", scale),
        }
    }

    pub fn moment_polytope(&self) -> MomentPolytope {
        let z = Rational::zero;
        let vertices = match self {
            ToricDomain::Ball { capacity: c } | ToricDomain::ProjectivePlane { scale: c } => {
                vec![(z(), z()), (c.clone(), z()), (z(), c.clone())]
            }
            ToricDomain::Ellipsoid { a, b } => vec![(z(), z()), (a.clone(), z()), (z(), b.clone())],
            ToricDomain::PseudoBall { a, b, alpha, beta } => vec![
                (z(), z()),
                (b.clone(), z()),
                (alpha.clone(), beta.clone()),
                (z(), a.clone()),
            ],
        };
        MomentPolytope { vertices }
    }

    /// Closed-form volume; agrees with the polytope area.
    pub fn volume(&self) -> Result<Rational> {
        self.validate()?;
        let two = rational::int(2);
        Ok(match self {
            ToricDomain::Ball { capacity: c } | ToricDomain::ProjectivePlane { scale: c } => c * c / two,
            ToricDomain::Ellipsoid { a, b } => a * b / two,
            ToricDomain::PseudoBall { a, b, alpha, beta } => (a * alpha + b * beta) / two,
        })
    }

    /// `c · X`, i.e. every parameter multiplied by `c > 0`.
    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        positive("scale factor", c)?;
        Ok(match self {
            ToricDomain::Ball { capacity } => ToricDomain::Ball { capacity: capacity * c },
            ToricDomain::Ellipsoid { a, b } => ToricDomain::Ellipsoid { a: a * c, b: b * c },
            ToricDomain::PseudoBall { a, b, alpha, beta } => ToricDomain::PseudoBall {
                a: a * c,
                b: b * c,
                alpha: alpha * c,
                beta: beta * c,
            },
            ToricDomain::ProjectivePlane { scale } => ToricDomain::ProjectivePlane { scale: scale * c },
        })
    }
}

/// Checks the strict inequalities `a > α`, `b > β`, `a < α+β`, `b < α+β`.
///
/// Non-positive parameters are an [`Error::InvalidInput`]; failed
/// inequalities are all collected into [`Error::PseudoBall`].
pub fn validate_pseudo_ball(a: &Rational, b: &Rational, alpha: &Rational, beta: &Rational) -> Result<()> {
    positive("a", a)?;
    positive("b", b)?;
    positive("alpha", alpha)?;
    positive("beta", beta)?;
    let sum = alpha + beta;
    let mut violations = Vec::new();
    if a <= alpha {
        violations.push(PseudoBallViolation::AAboveAlpha);
    }
    if b <= beta {
        violations.push(PseudoBallViolation::BAboveBeta);
    }
    if a >= &sum {
        violations.push(PseudoBallViolation::ABelowSum);
    }
    if b >= &sum {
        violations.push(PseudoBallViolation::BBelowSum);
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::PseudoBall(violations))
    }
}

/// `T(a,b,α,β) = P²(α+β) \ (E ∪ E′)` with `E = E(α+β−a, α)` and
/// `E′ = E(α+β−b, β)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoBallComplement {
    pub scale: Rational,
    pub first: (Rational, Rational),
    pub second: (Rational, Rational),
}

impl PseudoBallComplement {
    pub fn first_ellipsoid(&self) -> ToricDomain {
        ToricDomain::Ellipsoid {
            a: self.first.0.clone(),
            b: self.first.1.clone(),
        }
    }

    pub fn second_ellipsoid(&self) -> ToricDomain {
        ToricDomain::Ellipsoid {
            a: self.second.0.clone(),
            b: self.second.1.clone(),
        }
    }
}

pub fn pseudo_ball_complement(
    a: &Rational,
    b: &Rational,
    alpha: &Rational,
    beta: &Rational,
) -> Result<PseudoBallComplement> {
    validate_pseudo_ball(a, b, alpha, beta)?;
    let scale = alpha + beta;
    Ok(PseudoBallComplement {
        first: (&scale - a, alpha.clone()),
        second: (&scale - b, beta.clone()),
        scale,
    })
}

impl fmt::Display for ToricDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ToricDomain::Ball { capacity } => write!(f, "B({capacity})"),
            ToricDomain::Ellipsoid { a, b } => write!(f, "E({a},{b})"),
            ToricDomain::PseudoBall { a, b, alpha, beta } => write!(f, "T({a},{b},{alpha},{beta})"),
            ToricDomain::ProjectivePlane { scale } => write!(f, "P2({scale})"),
        }
    }
}

impl FromStr for ToricDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::MalformedDomain(s.to_string());
        let t = s.trim();
        let open = t.find('(').ok_or_else(bad)?;
        let inner = t[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args = inner.split(',').map(rational::parse).collect::<Result<Vec<_>>>()?;
        let mut args = args.into_iter();
        let mut next = || args.next().ok_or_else(bad);
        let dom = match t[..open].trim() {
            "B" => ToricDomain::ball(next()?)?,
            "E" => ToricDomain::ellipsoid(next()?, next()?)?,
            "T" => ToricDomain::pseudo_ball(next()?, next()?, next()?, next()?)?,
            "P2" | "CP2" => ToricDomain::projective_plane(next()?)?,
            _ => return Err(bad()),
        };
        if next().is_ok() {
            return Err(bad());
        }
        Ok(dom)
    }
}

impl Serialize for ToricDomain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for ToricDomain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn pt(x: Rational, y: Rational) -> Point {
        (x, y)
    }

    #[test]
    fn shoelace_examples() {
        let tri = MomentPolytope::new(vec![pt(int(0), int(0)), pt(int(1), int(0)), pt(int(0), int(1))]).unwrap();
        assert_eq!(polytope_area(&tri), ratio(1, 2));

        let q = MomentPolytope::new(vec![
            pt(int(0), int(0)),
            pt(ratio(3, 2), int(0)),
            pt(int(1), int(1)),
            pt(int(0), ratio(3, 2)),
        ])
        .unwrap();
        assert_eq!(polytope_area(&q), ratio(3, 2));

        let line = MomentPolytope::new(vec![pt(int(0), int(0)), pt(int(1), int(0)), pt(int(2), int(0))]).unwrap();
        assert_eq!(polytope_area(&line), int(0));
        assert!(line.simplified().vertices().len() < 3);

        let two = MomentPolytope::new(vec![pt(int(0), int(0)), pt(int(1), int(0))]).unwrap();
        assert_eq!(polytope_area(&two), int(0));
        assert!(MomentPolytope::new(vec![pt(int(-1), int(0))]).is_err());
    }

    #[test]
    fn volumes() {
        assert_eq!(
            ToricDomain::ellipsoid(int(1), int(2)).unwrap().volume().unwrap(),
            int(1)
        );
        let t: ToricDomain = "T(3/2,3/2,1,1)".parse().unwrap();
        assert_eq!(t.volume().unwrap(), ratio(3, 2));
        assert_eq!(t.moment_polytope().area(), ratio(3, 2));
        assert_eq!(ToricDomain::projective_plane(int(2)).unwrap().volume().unwrap(), int(2));
        assert_eq!(ToricDomain::ball(ratio(3, 2)).unwrap().volume().unwrap(), ratio(9, 8));
        let bad = ToricDomain::PseudoBall {
            a: int(2),
            b: int(2),
            alpha: int(1),
            beta: int(1),
        };
        assert!(matches!(bad.volume(), Err(Error::PseudoBall(_))));
    }

    #[test]
    fn pseudo_ball_validation() {
        assert!(validate_pseudo_ball(&ratio(3, 2), &ratio(3, 2), &int(1), &int(1)).is_ok());
        assert_eq!(
            validate_pseudo_ball(&int(2), &int(2), &int(1), &int(1)),
            Err(Error::PseudoBall(vec![
                PseudoBallViolation::ABelowSum,
                PseudoBallViolation::BBelowSum
            ]))
        );
        assert_eq!(
            validate_pseudo_ball(&int(1), &ratio(3, 2), &int(1), &int(1)),
            Err(Error::PseudoBall(vec![PseudoBallViolation::AAboveAlpha]))
        );
        assert!(matches!(
            validate_pseudo_ball(&int(0), &int(1), &int(1), &int(1)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn complement_examples() {
        let c = pseudo_ball_complement(&ratio(3, 2), &ratio(3, 2), &int(1), &int(1)).unwrap();
        assert_eq!(c.scale, int(2));
        assert_eq!(c.first, (ratio(1, 2), int(1)));
        assert_eq!(c.second, (ratio(1, 2), int(1)));
        assert_eq!(c.first, c.second);

        let c = pseudo_ball_complement(&ratio(5, 4), &ratio(6, 5), &int(1), &ratio(1, 2)).unwrap();
        assert_eq!(c.scale, ratio(3, 2));
        assert_eq!(c.first, (ratio(1, 4), int(1)));
        assert_eq!(c.second, (ratio(3, 10), ratio(1, 2)));
        let p2 = ToricDomain::projective_plane(c.scale.clone())
            .unwrap()
            .volume()
            .unwrap();
        let lhs = p2 - c.first_ellipsoid().volume().unwrap() - c.second_ellipsoid().volume().unwrap();
        assert_eq!(lhs, ratio(37, 40));
        assert_eq!(
            ToricDomain::pseudo_ball(ratio(5, 4), ratio(6, 5), int(1), ratio(1, 2))
                .unwrap()
                .volume()
                .unwrap(),
            ratio(37, 40)
        );
    }

    #[test]
    fn grammar() {
        for s in ["B(3/2)", "E(1,5/2)", "T(3/2,3/2,1,1)", "P2(2)"] {
            let d: ToricDomain = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!(matches!("E(1)".parse::<ToricDomain>(), Err(Error::MalformedDomain(_))));
        assert!(matches!(
            "E(1,2,3)".parse::<ToricDomain>(),
            Err(Error::MalformedDomain(_))
        ));
        assert!(matches!("Q(1)".parse::<ToricDomain>(), Err(Error::MalformedDomain(_))));
        assert!(matches!(
            "E(1,sqrt(2))".parse::<ToricDomain>(),
            Err(Error::ApproximationRequired(_))
        ));
        assert!(matches!("T(2,2,1,1)".parse::<ToricDomain>(), Err(Error::PseudoBall(_))));
    }

    #[test]
    fn contains_boundary_and_interior() {
        let p = ToricDomain::ellipsoid(int(2), int(1)).unwrap().moment_polytope();
        assert!(p.contains(&(ratio(1, 2), ratio(1, 4))));
        assert!(p.contains(&(int(2), int(0))));
        assert!(!p.contains(&(int(2), ratio(1, 100))));
    }

    use proptest::prelude::*;

    fn pos() -> impl Strategy<Value = Rational> {
        (1i64..200, 1i64..50).prop_map(|(n, d)| ratio(n, d))
    }

    // a, b strictly inside (max(α,β)-ish, α+β) by construction.
    fn pseudo_ball_params() -> impl Strategy<Value = (Rational, Rational, Rational, Rational)> {
        (pos(), pos(), 1i64..99, 1i64..99).prop_map(|(alpha, beta, s, t)| {
            let sum = &alpha + &beta;
            let a = &alpha + &beta * ratio(s, 100);
            let b = &beta + &alpha * ratio(t, 100);
            assert!(a < sum && b < sum);
            (a, b, alpha, beta)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn complement_volume_identity((a, b, alpha, beta) in pseudo_ball_params()) {
            let t = ToricDomain::pseudo_ball(a.clone(), b.clone(), alpha.clone(), beta.clone()).unwrap();
            let c = pseudo_ball_complement(&a, &b, &alpha, &beta).unwrap();
            let whole = ToricDomain::projective_plane(c.scale.clone()).unwrap().volume().unwrap();
            let rest = whole - c.first_ellipsoid().volume().unwrap() - c.second_ellipsoid().volume().unwrap();
            prop_assert_eq!(&rest, &t.volume().unwrap());
            prop_assert_eq!(&rest, &t.moment_polytope().area());
            let swapped = ToricDomain::pseudo_ball(b, a, beta, alpha).unwrap();
            prop_assert_eq!(swapped.volume().unwrap(), rest);
        }

        #[test]
        fn area_rotation_and_reversal((a, b, alpha, beta) in pseudo_ball_params(), k in 0usize..4) {
            let t = ToricDomain::pseudo_ball(a, b, alpha, beta).unwrap();
            let mut vs = t.moment_polytope().vertices().to_vec();
            let area = MomentPolytope::new(vs.clone()).unwrap().signed_area();
            vs.rotate_left(k);
            prop_assert_eq!(MomentPolytope::new(vs.clone()).unwrap().signed_area(), area.clone());
            vs.reverse();
            let rev = MomentPolytope::new(vs).unwrap().signed_area();
            prop_assert_eq!(&rev, &(-area.clone()));
            prop_assert_eq!(rev.abs(), area);
        }

        #[test]
        fn ellipsoid_volume_symmetric(a in pos(), b in pos()) {
            prop_assert_eq!(
                ToricDomain::ellipsoid(a.clone(), b.clone()).unwrap().volume().unwrap(),
                ToricDomain::ellipsoid(b, a).unwrap().volume().unwrap()
            );
        }
    }
}
