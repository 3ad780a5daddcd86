use thiserror::Error;

use crate::Rational;

pub type Result<T> = std::result::Result<T, Error>;

/// A violated strict inequality of a pseudo-ball `T(a, b, α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PseudoBallViolation {
    /// `a > α` fails.
    AAboveAlpha,
    /// `b > β` fails.
    BAboveBeta,
    /// `a < α + β` fails.
    ABelowSum,
    /// `b < α + β` fails.
    BBelowSum,
}

impl std::fmt::Display for PseudoBallViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PseudoBallViolation::AAboveAlpha => "a > alpha fails",
            PseudoBallViolation::BAboveBeta => "b > beta fails",
            PseudoBallViolation::ABelowSum => "a < alpha+beta fails",
            PseudoBallViolation::BBelowSum => "b < alpha+beta fails",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed rational {0:?}: expected p/q, an integer or a finite decimal")]
    MalformedRational(String),

    #[error("irrational or non-finite input {0:?}: approximate it from below by a rational first")]
    ApproximationRequired(String),

    #[error("malformed domain {0:?}: expected B(c), E(a,b), T(a,b,alpha,beta) or P2(mu)")]
    MalformedDomain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pseudo-ball constraints violated: {}", join(.0))]
    PseudoBall(Vec<PseudoBallViolation>),

    #[error("weight expansion needs a >= 1, got {0}; normalize E(1,a) so that a >= 1")]
    NotNormalized(Rational),

    #[error("blow-up infeasible: sum of squared sizes is {0}, must be < 1")]
    Infeasible(Rational),

    #[error("dimension mismatch: class has {class} exceptional coefficients, form has {form}")]
    DimensionMismatch { class: usize, form: usize },

    #[error("volume {0} outside (0, 1/2]")]
    VolumeOutOfRange(Rational),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("polarization invalid: {}", join(.0))]
    Polarization(Vec<String>),

    #[error("allocation invalid: {0}")]
    Allocation(String),

    #[error("closure violated: targets sum to {targets}, pieces sum to {pieces}")]
    Closure {
        targets: Box<Rational>,
        pieces: Box<Rational>,
    },

    #[error("partition infeasible: {0}")]
    Partition(String),

    #[error("empty {0}")]
    Empty(&'static str),
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
