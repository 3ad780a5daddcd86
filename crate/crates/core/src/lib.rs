//! Exact arithmetic for packing stability of symplectic 4-manifolds.
//!
//! The crate computes weight expansions of ellipsoids, certified lower
//! bounds for the packing-stability threshold of blow-ups of `P²`,
//! ellipsoids and pseudo-balls, exact ball-packing decisions by Cremona
//! reduction, and the decomposition of a closed manifold into ellipsoids and
//! pseudo-balls along a singular polarization.
//!
//! All areas, capacities and volumes are exact rationals. Quantities that
//! involve square roots are only reported as [`LowerBound`]s with downward
//! rounding.

pub mod bound;
pub mod certify;
pub mod cremona;
pub mod error;
pub mod lattice;
pub mod planner;
pub mod rational;
pub mod toric;
pub mod weights;

pub use bound::{LowerBound, DEFAULT_PRECISION};
pub use certify::{certify_packing, lambda_bound, Certificate, Mode, Target};
pub use cremona::{
    cremona_step, decide_ball_packing, max_equal_ball, reduce, BallSemantics, PackingVector, ReductionTrace,
};
pub use error::{Error, Result};
pub use lattice::{class_invariants, d_omega_bound, d_omega_search, volume_form_bound, BlowupForm, HomologyClass};
pub use planner::{
    partition_balls, perturb_allocation, plan, plan_discs, stability_constant, validate_polarization, Curve,
    DecompositionPlan, DiscAllocation, Polarization,
};
pub use rational::Rational;
pub use toric::{polytope_area, pseudo_ball_complement, validate_pseudo_ball, MomentPolytope, ToricDomain};
pub use weights::{ellipsoid_weights, weight_count, weight_sequence, WeightSequence};
