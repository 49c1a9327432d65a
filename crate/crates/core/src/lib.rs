//! Finite-temperature Casimir free energy and pressure for a perfectly
//! conducting plate facing an infinitely permeable one, together with the
//! conductor-conductor reference system, Epstein zeta functions and the
//! temperature-inversion relations between high and low temperature.
//!
//! Natural units (hbar = c = k_B = 1). Free energies are per unit plate area
//! (length^-3), pressures are force per unit area (length^-4), positive
//! pressure pushes the plates apart. The scaled temperature is
//! `xi = d / (pi beta)`.

// `!(x > 0.0)` is used on purpose so that NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod epstein;
pub mod error;
pub mod free_energy;
pub mod pressure;
pub mod quadrature;
pub mod series;
pub mod specfun;
pub mod symmetry;
pub mod verify;

pub use error::{CasimirError, Result};
pub use free_energy::{BoundaryKind, PlateSystem, ThermalPoint};
pub use series::{CompensatedSum, EvalResult, RepresentationKind, SeriesControl};

/// Apery's constant, zeta(3).
pub const ZETA3: f64 = 1.202_056_903_159_594_3;
