//! Net pressure on the conductor/permeable plate pair, `P = -dF/dd` at fixed
//! temperature. Positive values push the plates apart.
//!
//! The thermal-log form carries the prefactor `-1/(pi^2 beta^4 xi^3)` as
//! printed: adding it to the zero-temperature pressure reproduces the
//! derivative form to rounding (checked in the tests below).

use std::f64::consts::PI;

use crate::error::{require_positive, CasimirError, Result};
use crate::free_energy::{check_poisson_floor, f_scaled_single, PoissonSums, ThermalPoint, C_NARROW, C_WIDE};
use crate::series::{sum_ratio_bounded, EvalResult, RepresentationKind, SeriesControl};
use crate::specfun::{coth_kernel, inv_sinh_kernel};
use crate::ZETA3;

use RepresentationKind as Rep;

/// Relative agreement demanded between analytic derivatives and their
/// central-difference checks.
const DERIVATIVE_CHECK_TOL: f64 = 1e-6;

/// `(7/8) pi^2 / (240 d^4)`, the repulsive pressure at zero temperature.
pub fn pressure_zero_t(d: f64) -> Result<f64> {
    require_positive("d", d)?;
    Ok(7.0 * PI * PI / (1920.0 * d.powi(4)))
}

/// `df/dxi = sum_n csch(x) (csch^2 x + coth^2 x) / (8 n xi^3)`, `x = n/2xi`,
/// the term-wise derivative of the single hyperbolic sum for `f`.
pub fn f_scaled_derivative(xi: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    require_positive("xi", xi)?;
    ctl.validate()?;
    let delta = 0.5 / xi;
    let ratio = (-delta).exp();
    let s = sum_ratio_bounded(
        "f_scaled_derivative",
        ctl,
        0.0,
        |n| {
            let x = n as f64 * delta;
            let u = inv_sinh_kernel(x);
            let c = coth_kernel(x);
            u * (u * u + c * c) / (8.0 * n as f64 * xi.powi(3))
        },
        |_| ratio,
    )?;
    Ok(EvalResult::new(s.value, s.abs_err(), s.terms, Rep::CothSingle))
}

fn finite_difference_step(xi: f64) -> f64 {
    (1e-5 * xi.max(0.01)).min(0.5 * xi)
}

fn consistency(what: &'static str, analytic: f64, numeric: f64, floor: f64) -> Result<()> {
    if (analytic - numeric).abs() <= DERIVATIVE_CHECK_TOL * (analytic.abs() + floor) {
        Ok(())
    } else {
        Err(CasimirError::Consistency {
            what,
            analytic,
            numeric,
        })
    }
}

/// `P = (7/8) pi^2/(240 d^4) + f'(xi) / (pi^2 beta^4)`.
///
/// The analytic `f'` is compared with a central difference of `f` and a
/// disagreement above 1e-6 relative is reported as a consistency error.
pub fn pressure_net_dfdxi(t: &ThermalPoint, d: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    let p0 = pressure_zero_t(d)?;
    if t.is_zero_temperature() {
        return Ok(EvalResult::exact(p0, Rep::CothSingle));
    }
    let xi = t.xi(d);
    let df = f_scaled_derivative(xi, ctl)?;
    let h = finite_difference_step(xi);
    let tight = ctl.with_rel_tol(ctl.rel_tol.min(1e-14));
    let fd = (f_scaled_single(xi + h, &tight)?.value - f_scaled_single(xi - h, &tight)?.value) / (2.0 * h);
    let scale = PI * PI * t.beta().powi(4);
    // Below ~1e-6 of the zero-temperature pressure the derivative is irrelevant.
    consistency("pressure_net_dfdxi", df.value, fd, 1e-6 * p0 * scale)?;
    Ok(df.affine(p0, 1.0 / scale))
}

/// `sum_n n^2 ln(1 - e^{-n delta})` with a geometric tail bound.
fn log_series(what: &'static str, delta: f64, ctl: &SeriesControl) -> Result<(f64, f64, usize)> {
    let e = (-delta).exp();
    let s = sum_ratio_bounded(
        what,
        ctl,
        0.0,
        |n| {
            let nf = n as f64;
            nf * nf * (-(-nf * delta).exp()).ln_1p()
        },
        |n| {
            let r = (n as f64 + 1.0) / n as f64;
            r * r * e
        },
    )?;
    Ok((s.value, s.abs_err(), s.terms))
}

/// Thermal part of the pressure from the logarithmic mode sums,
/// `-(1/(pi^2 beta^4 xi^3)) [ (1/4) sum n^2 ln(1 - e^{-n/2xi}) - sum n^2 ln(1 - e^{-n/xi}) ]`.
///
/// The zero-temperature pressure is not included.
pub fn pressure_thermal_log(t: &ThermalPoint, d: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    require_positive("d", d)?;
    ctl.validate()?;
    if t.is_zero_temperature() {
        return Ok(EvalResult::exact(0.0, Rep::ModeIntegral));
    }
    let xi = t.xi(d);
    require_positive("xi", xi)?;
    let (s1, e1, n1) = log_series("pressure_thermal_log", 0.5 / xi, ctl)?;
    let (s2, e2, n2) = log_series("pressure_thermal_log", 1.0 / xi, ctl)?;
    let pre = -1.0 / (PI * PI * t.beta().powi(4) * xi.powi(3));
    let value = pre * (0.25 * s1 - s2);
    let err = pre.abs() * (0.25 * e1 + e2) + 4.0 * f64::EPSILON * value.abs();
    Ok(EvalResult::new(value, err, n1 + n2, Rep::ModeIntegral))
}

/// Poisson-resummed pressure, valid at every temperature above the floor:
/// `P = pi^2/(45 beta^4) - G''_{4pi^2}(xi)/(32 pi^4 beta^4) + G''_{2pi^2}(xi)/(8 pi^4 beta^4)`
/// with `G_c(xi) = (1/xi) sum_m coth(c m xi)/m^3`.
///
/// Each analytic `G''` is checked against a central difference of the
/// analytic `G'`. As `xi -> 0` the three terms cancel down to the
/// zero-temperature pressure.
pub fn pressure_poisson(t: &ThermalPoint, d: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    let p0 = pressure_zero_t(d)?;
    ctl.validate()?;
    if t.is_zero_temperature() {
        return Ok(EvalResult::exact(p0, Rep::Poisson));
    }
    let xi = t.xi(d);
    check_poisson_floor("pressure_poisson", xi, ctl)?;
    let h = finite_difference_step(xi);
    let mut second = [(0.0, 0.0); 2];
    let mut terms = 0;
    for (slot, c) in [C_WIDE, C_NARROW].into_iter().enumerate() {
        let sums = PoissonSums::new(c, xi, ctl)?;
        let (g2, g2_tail) = sums.second_derivative();
        let plus = PoissonSums::new(c, xi + h, ctl)?.first_derivative().0;
        let minus = PoissonSums::new(c, xi - h, ctl)?.first_derivative().0;
        consistency("pressure_poisson", g2, (plus - minus) / (2.0 * h), 0.0)?;
        second[slot] = (g2, g2_tail);
        terms += sums.terms;
    }
    let b4 = PI.powi(4) * t.beta().powi(4);
    let parts = [
        PI * PI / (45.0 * t.beta().powi(4)),
        -second[0].0 / (32.0 * b4),
        second[1].0 / (8.0 * b4),
    ];
    let value: f64 = parts.iter().sum();
    let rounding = 8.0 * f64::EPSILON * parts.iter().map(|p| p.abs()).sum::<f64>();
    let err = second[0].1 / (32.0 * b4) + second[1].1 / (8.0 * b4) + rounding;
    Ok(EvalResult::new(value, err, terms, Rep::Poisson))
}

/// High-temperature form
/// `pi^2/(45 beta^4) + 3 zeta3/(16 pi d^3 beta) + (1/(2 pi d^3 beta)) e^{-4 pi d/beta} (1 + 4 pi d/beta + 8 pi^2 d^2/beta^2)`.
pub fn pressure_high_t(t: &ThermalPoint, d: f64) -> f64 {
    let b = t.beta();
    let y = 4.0 * PI * d / b;
    PI * PI / (45.0 * b.powi(4))
        + 3.0 * ZETA3 / (16.0 * PI * d.powi(3) * b)
        + (-y).exp() * (1.0 + y + 0.5 * y * y) / (2.0 * PI * d.powi(3) * b)
}

/// Low-temperature form `(7/8) pi^2/(240 d^4) + (pi/(4 d^3 beta)) e^{-pi beta/2d}`.
pub fn pressure_low_t(t: &ThermalPoint, d: f64) -> f64 {
    let p0 = 7.0 * PI * PI / (1920.0 * d.powi(4));
    if t.is_zero_temperature() {
        return p0;
    }
    let b = t.beta();
    p0 + PI / (4.0 * d.powi(3) * b) * (-PI * b / (2.0 * d)).exp()
}

/// Rough size of what [`pressure_low_t`] drops: the thermal term times
/// `(1 + 1/xi) e^{-1/2xi}`.
fn low_t_remainder(t: &ThermalPoint, d: f64) -> f64 {
    if t.is_zero_temperature() {
        return 0.0;
    }
    let xi = t.xi(d);
    let thermal = PI / (4.0 * d.powi(3) * t.beta()) * (-0.5 / xi).exp();
    thermal * (1.0 + 1.0 / xi) * (-0.5 / xi).exp()
}

/// Rough size of what [`pressure_high_t`] drops: the next Poisson image,
/// `~ (8 pi / beta) (xi/4 + pi^2 xi^2) e^{-8 pi^2 xi} / d^3`.
fn high_t_remainder(t: &ThermalPoint, d: f64) -> f64 {
    let xi = t.xi(d);
    16.0 * PI / t.beta() * (xi / 4.0 + PI * PI * xi * xi) * (-8.0 * PI * PI * xi).exp() / d.powi(3)
}

/// Pressure in the requested representation, or the automatic choice for
/// `None` (derivative form below [`crate::free_energy::POISSON_FROM_XI`],
/// Poisson form above). `CothSingle` selects the derivative form and
/// `ModeIntegral` the thermal-log form plus the zero-temperature term.
pub fn pressure(t: &ThermalPoint, d: f64, rep: Option<Rep>, ctl: &SeriesControl) -> Result<EvalResult> {
    require_positive("d", d)?;
    ctl.validate()?;
    if t.is_zero_temperature() && rep.is_none() {
        return Ok(EvalResult::exact(pressure_zero_t(d)?, Rep::AsymptoticLow));
    }
    let rep = rep.unwrap_or_else(|| {
        if t.xi(d) >= crate::free_energy::POISSON_FROM_XI {
            Rep::Poisson
        } else {
            Rep::CothSingle
        }
    });
    match rep {
        Rep::CothSingle => pressure_net_dfdxi(t, d, ctl),
        Rep::ModeIntegral => Ok(pressure_thermal_log(t, d, ctl)?.affine(pressure_zero_t(d)?, 1.0)),
        Rep::Poisson => pressure_poisson(t, d, ctl),
        Rep::AsymptoticLow => Ok(EvalResult::new(
            pressure_low_t(t, d),
            low_t_remainder(t, d),
            0,
            Rep::AsymptoticLow,
        )),
        Rep::AsymptoticHigh => {
            if t.is_zero_temperature() {
                return Err(crate::error::domain("pressure_high_t", t.beta(), "finite beta"));
            }
            Ok(EvalResult::new(
                pressure_high_t(t, d),
                high_t_remainder(t, d),
                0,
                Rep::AsymptoticHigh,
            ))
        }
        Rep::Bessel | Rep::DoubleSum | Rep::Lattice => Err(CasimirError::UnsupportedRepresentation {
            rep,
            system: "pressure of the boyer",
        }),
    }
}
