use thiserror::Error;

use crate::algebra::Vec3;
use crate::manifolds::SwitchingManifold;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix exponential left the representable range")]
    Overflow,

    #[error("projection onto the {manifold} did not converge after {iterations} Newton steps")]
    NoConvergence {
        manifold: SwitchingManifold,
        iterations: usize,
    },

    #[error("unknown switching manifold {0:?}")]
    UnknownManifold(String),

    #[error("operation needs a {expected} pair, got a {got} pair")]
    WrongManifold {
        expected: SwitchingManifold,
        got: SwitchingManifold,
    },

    #[error("tangency form vanishes identically: the whole manifold is tangent")]
    ZeroForm,

    #[error("Xσ₂ vanishes identically on the torus (a31 = a32 = 0)")]
    DegenerateTorus,

    #[error("Xσ₂ is not quadratic, nonzero quartic coefficients: {}", format_terms(.0))]
    HypothesisViolation(Vec<(String, f64)>),

    #[error("sliding denominator vanishes at tangency point {0:?}")]
    TangencyPoint(Vec3),

    #[error("line parametrization degenerate: a32 + b32 = 0")]
    ParametrizationDegenerate,

    #[error("the sliding orbit lies entirely in the tangency set")]
    OrbitInTangencySet,

    #[error("trivial sliding field: a + b vanishes on the rotation entries")]
    TrivialSliding,

    #[error("point {point:?} is off the manifold (|σ| = {residual:e})")]
    NotOnManifold { point: Vec3, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn format_terms(terms: &[(String, f64)]) -> String {
    terms
        .iter()
        .map(|(name, v)| format!("{name}={v:e}"))
        .collect::<Vec<_>>()
        .join(", ")
}
