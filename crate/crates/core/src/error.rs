use thiserror::Error;

use crate::series::RepresentationKind;

pub type Result<T> = std::result::Result<T, CasimirError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CasimirError {
    #[error("{what}: argument {value} outside the domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{what}: pole at {at} ({residue})")]
    Pole {
        what: &'static str,
        at: f64,
        residue: String,
    },

    #[error("{what}: exponent {z} outside the convergence region (needs z > {boundary})")]
    OutsideConvergenceRegion { what: &'static str, z: f64, boundary: f64 },

    #[error("{what}: no convergence within {max_terms} terms (estimated error {abs_err:e})")]
    NonConvergence {
        what: &'static str,
        max_terms: usize,
        abs_err: f64,
    },

    #[error("{rep} representation is not available for the {system} system")]
    UnsupportedRepresentation {
        rep: RepresentationKind,
        system: &'static str,
    },

    #[error("{what}: xi = {xi} is below the floor {floor}; use the bessel or coth representation")]
    SlowConvergence { what: &'static str, xi: f64, floor: f64 },

    #[error("{what}: analytic value {analytic:e} disagrees with finite difference {numeric:e}")]
    Consistency {
        what: &'static str,
        analytic: f64,
        numeric: f64,
    },

    #[error("quadrature failed on [{a}, {b}]: error estimate {abs_err:e} above tolerance")]
    Quadrature { a: f64, b: f64, abs_err: f64 },

    #[error("invalid series control: {0}")]
    InvalidControl(&'static str),
}

pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> CasimirError {
    CasimirError::Domain { what, value, expected }
}

pub(crate) fn require_positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(domain(what, value, "finite and > 0"))
    }
}
