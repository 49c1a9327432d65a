//! Helmholtz free energy per unit plate area.
//!
//! For the mixed (conductor/permeable) pair every representation is written
//! as `F/L^2 = 7 pi^2 / (5760 d^3) - f(xi) / (pi beta^3)` with the scaled
//! thermal profile `f(xi) > 0`. The conductor-conductor pair is described by
//! its dimensionless profile `d^3 F/L^2`.
//!
//! The sign of the exponential correction in the high-temperature form of the
//! mixed pair was settled numerically against the Poisson form: at
//! `xi = 0.2` the residual is 9e-6 (relative) with a `+` sign and 3e-2 with a
//! `-` sign. For `xi >= 1` the correction is below `e^-39` and cannot be
//! resolved in double precision either way.

use std::f64::consts::PI;

use crate::error::{domain, require_positive, CasimirError, Result};
use crate::quadrature::{integrate, Quadrature};
use crate::series::{
    divisor_pairs, envelope_tail, sum_ratio_bounded, CompensatedSum, EvalResult, PowerLawExtrapolator,
    RepresentationKind, SeriesControl,
};
use crate::specfun::{coth_kernel, coth_minus_one, half_order_polynomial, inv_sinh_kernel};
use crate::ZETA3;

use RepresentationKind as Rep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// Perfect conductor facing an infinitely permeable plate (repulsive).
    BoyerMixed,
    ConductorConductor,
}

impl BoundaryKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::BoyerMixed => "boyer",
            Self::ConductorConductor => "conductor",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "boyer" => Some(Self::BoyerMixed),
            "conductor" => Some(Self::ConductorConductor),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateSystem {
    pub d: f64,
    pub kind: BoundaryKind,
}

impl PlateSystem {
    pub fn new(d: f64, kind: BoundaryKind) -> Result<Self> {
        require_positive("plate separation d", d)?;
        Ok(Self { d, kind })
    }

    pub fn boyer(d: f64) -> Result<Self> {
        Self::new(d, BoundaryKind::BoyerMixed)
    }

    pub fn conductor(d: f64) -> Result<Self> {
        Self::new(d, BoundaryKind::ConductorConductor)
    }

    pub fn xi(&self, t: &ThermalPoint) -> f64 {
        t.xi(self.d)
    }
}

/// Inverse temperature. `beta = +inf` is the zero-temperature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalPoint {
    beta: f64,
}

impl ThermalPoint {
    pub fn new(beta: f64) -> Result<Self> {
        if beta > 0.0 {
            Ok(Self { beta })
        } else {
            Err(domain("beta", beta, "beta > 0"))
        }
    }

    pub fn zero_temperature() -> Self {
        Self { beta: f64::INFINITY }
    }

    /// The point with scaled temperature `xi = d/(pi beta)` for separation `d`.
    pub fn from_xi(xi: f64, d: f64) -> Result<Self> {
        require_positive("plate separation d", d)?;
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(domain("xi", xi, "finite and >= 0"));
        }
        if xi == 0.0 {
            return Ok(Self::zero_temperature());
        }
        Self::new(d / (PI * xi))
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn xi(&self, d: f64) -> f64 {
        d / (PI * self.beta)
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta == f64::INFINITY
    }
}

pub fn zero_temperature_energy(sys: &PlateSystem) -> f64 {
    let d3 = sys.d.powi(3);
    match sys.kind {
        BoundaryKind::BoyerMixed => 7.0 * PI * PI / (5760.0 * d3),
        BoundaryKind::ConductorConductor => -PI * PI / (720.0 * d3),
    }
}

fn require_boyer(sys: &PlateSystem, rep: Rep) -> Result<()> {
    match sys.kind {
        BoundaryKind::BoyerMixed => Ok(()),
        BoundaryKind::ConductorConductor => Err(CasimirError::UnsupportedRepresentation {
            rep,
            system: sys.kind.name(),
        }),
    }
}

/// `F0 - f/(pi beta^3)` for a thermal profile `f`.
fn boyer_from_profile(sys: &PlateSystem, t: &ThermalPoint, f: EvalResult) -> EvalResult {
    f.affine(zero_temperature_energy(sys), -1.0 / (PI * t.beta.powi(3)))
}

// ---------------------------------------------------------------------------
// Scaled thermal profile f(xi) of the mixed pair

/// `f(xi) = (1/4xi) sum_n (2xi/n + coth(n/2xi)) / (n^2 sinh(n/2xi))`.
///
/// Every term is positive and consecutive terms shrink at least by
/// `e^(-1/2xi)`, which gives the geometric tail bound.
pub fn f_scaled_single(xi: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    require_positive("xi", xi)?;
    ctl.validate()?;
    let delta = 0.5 / xi;
    let ratio = (-delta).exp();
    let s = sum_ratio_bounded(
        "f_scaled_single",
        ctl,
        0.0,
        |n| {
            let nf = n as f64;
            let x = nf * delta;
            (2.0 * xi / nf + coth_kernel(x)) * inv_sinh_kernel(x) / (4.0 * xi * nf * nf)
        },
        |_| ratio,
    )?;
    Ok(EvalResult::new(s.value, s.abs_err(), s.terms, Rep::CothSingle))
}

/// `f(xi) = sum_{n,m>=1} [(1/m^3 + n/(2xi m^2)) e^{-nm/2xi} - (1/m^3 + n/(xi m^2)) e^{-nm/xi}]`,
/// summed in shells of constant `q = nm`.
///
/// A shell holds at most `2 sqrt(q)` terms, each bounded by
/// `2 (1 + q/2xi) e^{-q/2xi}`.
pub fn f_scaled_double(xi: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    require_positive("xi", xi)?;
    ctl.validate()?;
    let h = 0.5 / xi;
    let envelope = |q: usize| {
        let y = q as f64 * h;
        4.0 * (q as f64).sqrt() * (1.0 + y) * (-y).exp()
    };
    let mut acc = CompensatedSum::new();
    let mut terms = 0usize;
    let mut tail = f64::INFINITY;
    for q in 1usize.. {
        let qf = q as f64;
        let e1 = (-qf * h).exp();
        let e2 = (-2.0 * qf * h).exp();
        for (n, m) in divisor_pairs(q) {
            let (nf, mf) = (n as f64, m as f64);
            let inv_m3 = 1.0 / (mf * mf * mf);
            let k = nf / (mf * mf);
            acc.add((inv_m3 + k * h) * e1 - (inv_m3 + 2.0 * k * h) * e2);
            terms += 1;
        }
        if terms >= ctl.min_terms && (qf * h > 1.0 || q % 16 == 0) {
            tail = envelope_tail(q, envelope);
            if ctl.tail_small(tail, acc.value(), terms) {
                return Ok(EvalResult::new(
                    acc.value(),
                    tail + acc.rounding_bound(),
                    terms,
                    Rep::DoubleSum,
                ));
            }
        }
        if terms >= ctl.max_terms {
            return Err(ctl.exhausted("f_scaled_double", tail));
        }
    }
    unreachable!()
}

/// Leading low-temperature behaviour `f(xi) ~ (1 + 1/2xi) e^{-1/2xi}`.
pub fn f_scaled_low_t(xi: f64) -> f64 {
    let y = 0.5 / xi;
    (1.0 + y) * (-y).exp()
}

// ---------------------------------------------------------------------------
// Free energy of the mixed pair

/// Double sum of half-integer Macdonald functions,
/// `F0 - (sqrt2 / beta^{3/2}) sum_{n,m} (md/n)^{-3/2} [2^{-3/2} K_{3/2}(x) - K_{3/2}(2x)]`
/// with `x = beta pi n m / 2d = nm/2xi`.
pub fn free_energy_bessel(sys: &PlateSystem, t: &ThermalPoint, ctl: &SeriesControl) -> Result<EvalResult> {
    bessel_form(sys, t, ctl, -1.0)
}

/// The Bessel form with the sign of the `K_{3/2}(2x)` term flipped; only used
/// to check that the verification suite notices a broken representation.
pub(crate) fn free_energy_bessel_tampered(
    sys: &PlateSystem,
    t: &ThermalPoint,
    ctl: &SeriesControl,
) -> Result<EvalResult> {
    bessel_form(sys, t, ctl, 1.0)
}

fn k_three_halves(x: f64) -> f64 {
    (PI / (2.0 * x)).sqrt() * (-x).exp() * half_order_polynomial(1, x)
}

fn bessel_form(sys: &PlateSystem, t: &ThermalPoint, ctl: &SeriesControl, second_sign: f64) -> Result<EvalResult> {
    require_boyer(sys, Rep::Bessel)?;
    ctl.validate()?;
    let f0 = zero_temperature_energy(sys);
    if t.is_zero_temperature() {
        return Ok(EvalResult::exact(f0, Rep::Bessel));
    }
    let d = sys.d;
    let h = 0.5 / t.xi(d);
    let first = 2f64.powf(-1.5);
    let envelope = |q: usize| {
        let qf = q as f64;
        2.0 * qf.sqrt() * (qf / d).powf(1.5) * (first + 1.0) * k_three_halves(qf * h)
    };
    let mut acc = CompensatedSum::new();
    let mut terms = 0usize;
    let mut tail = f64::INFINITY;
    for q in 1usize.. {
        let x = q as f64 * h;
        let k1 = k_three_halves(x);
        let k2 = k_three_halves(2.0 * x);
        for (n, m) in divisor_pairs(q) {
            let w = (m as f64 * d / n as f64).powf(-1.5);
            acc.add(w * (first * k1 + second_sign * k2));
            terms += 1;
        }
        if terms >= ctl.min_terms && (x > 1.0 || q % 16 == 0) {
            tail = envelope_tail(q, envelope);
            if ctl.tail_small(tail, acc.value(), terms) {
                break;
            }
        }
        if terms >= ctl.max_terms {
            return Err(ctl.exhausted("free_energy_bessel", tail));
        }
    }
    let scale = 2f64.sqrt() / t.beta.powf(1.5);
    let sum = EvalResult::new(acc.value(), tail + acc.rounding_bound(), terms, Rep::Bessel);
    Ok(sum.affine(f0, -scale))
}

/// Free energy from the single hyperbolic sum for `f`.
pub fn free_energy_single(sys: &PlateSystem, t: &ThermalPoint, ctl: &SeriesControl) -> Result<EvalResult> {
    match sys.kind {
        BoundaryKind::BoyerMixed => {
            if t.is_zero_temperature() {
                return Ok(EvalResult::exact(zero_temperature_energy(sys), Rep::CothSingle));
            }
            Ok(boyer_from_profile(sys, t, f_scaled_single(t.xi(sys.d), ctl)?))
        }
        BoundaryKind::ConductorConductor => {
            if t.is_zero_temperature() {
                return Ok(EvalResult::exact(zero_temperature_energy(sys), Rep::CothSingle));
            }
            Ok(f_conducting_single(t.xi(sys.d), ctl)?.affine(0.0, sys.d.powi(-3)))
        }
    }
}

pub fn free_energy_double(sys: &PlateSystem, t: &ThermalPoint, ctl: &SeriesControl) -> Result<EvalResult> {
    require_boyer(sys, Rep::DoubleSum)?;
    if t.is_zero_temperature() {
        return Ok(EvalResult::exact(zero_temperature_energy(sys), Rep::DoubleSum));
    }
    let mut r = boyer_from_profile(sys, t, f_scaled_double(t.xi(sys.d), ctl)?);
    r.rep = Rep::DoubleSum;
    Ok(r)
}

/// The sums behind `G_c(xi) = (1/xi) sum_m coth(c m xi)/m^3` and its first two
/// derivatives, with `coth = 1 + (coth - 1)` so the constant part sums to
/// `zeta(3)` exactly.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PoissonSums {
    pub c: f64,
    pub xi: f64,
    /// `sum (coth(cm xi) - 1)/m^3`
    pub excess3: f64,
    /// `sum csch^2(cm xi)/m^2`
    pub csch2: f64,
    /// `sum coth(cm xi) csch^2(cm xi)/m`
    pub coth_csch2: f64,
    pub tail: [f64; 3],
    pub terms: usize,
}

impl PoissonSums {
    pub fn new(c: f64, xi: f64, ctl: &SeriesControl) -> Result<Self> {
        let y = c * xi;
        // Each kernel shrinks by at least e^{-2y} per step in m.
        let ratio = (-2.0 * y).exp();
        let mut acc = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
        let mut tail = [f64::INFINITY; 3];
        for m in 1..=ctl.max_terms {
            let mf = m as f64;
            let x = mf * y;
            let u = inv_sinh_kernel(x);
            let u2 = u * u;
            let t = [
                coth_minus_one(x) / (mf * mf * mf),
                u2 / (mf * mf),
                coth_kernel(x) * u2 / mf,
            ];
            for i in 0..3 {
                acc[i].add(t[i]);
                tail[i] = crate::series::geometric_tail(t[i], ratio);
            }
            let this = Self {
                c,
                xi,
                excess3: acc[0].value(),
                csch2: acc[1].value(),
                coth_csch2: acc[2].value(),
                tail,
                terms: m,
            };
            let (g1, g1_tail) = this.first_derivative();
            let (g2, g2_tail) = this.second_derivative();
            if ctl.tail_small(g1_tail, g1, m) && ctl.tail_small(g2_tail, g2, m) {
                return Ok(this);
            }
        }
        Err(ctl.exhausted("poisson coth sums", tail[0]))
    }

    /// `G'(xi) = -(zeta3 + excess3)/xi^2 - (c/xi) csch2`, with its tail bound.
    pub fn first_derivative(&self) -> (f64, f64) {
        let xi = self.xi;
        let v = -(ZETA3 + self.excess3) / (xi * xi) - self.c / xi * self.csch2;
        let tail = self.tail[0] / (xi * xi) + self.c / xi * self.tail[1];
        (v, tail)
    }

    /// `G''(xi) = 2(zeta3 + excess3)/xi^3 + (2c/xi^2) csch2 + (2c^2/xi) coth_csch2`.
    pub fn second_derivative(&self) -> (f64, f64) {
        let (xi, c) = (self.xi, self.c);
        let v = 2.0 * (ZETA3 + self.excess3) / xi.powi(3)
            + 2.0 * c / (xi * xi) * self.csch2
            + 2.0 * c * c / xi * self.coth_csch2;
        let tail =
            2.0 * self.tail[0] / xi.powi(3) + 2.0 * c / (xi * xi) * self.tail[1] + 2.0 * c * c / xi * self.tail[2];
        (v, tail)
    }

    /// `G(xi)` itself, used for finite-difference checks.
    #[cfg(test)]
    pub fn value(&self) -> f64 {
        (ZETA3 + self.excess3) / self.xi
    }
}

pub(crate) const C_WIDE: f64 = 4.0 * PI * PI;
pub(crate) const C_NARROW: f64 = 2.0 * PI * PI;

pub(crate) fn check_poisson_floor(what: &'static str, xi: f64, ctl: &SeriesControl) -> Result<()> {
    if xi < ctl.poisson_xi_floor {
        Err(CasimirError::SlowConvergence {
            what,
            xi,
            floor: ctl.poisson_xi_floor,
        })
    } else {
        Ok(())
    }
}

/// Poisson-resummed form, suited to high temperature:
/// `F = -pi^2 d/(45 beta^4) + G'_{4pi^2}(xi)/(32 pi^3 beta^3) - G'_{2pi^2}(xi)/(8 pi^3 beta^3)`.
///
/// Convergence degrades as `xi -> 0`; below `ctl.poisson_xi_floor` the call
/// fails with [`CasimirError::SlowConvergence`].
pub fn free_energy_poisson(sys: &PlateSystem, t: &ThermalPoint, ctl: &SeriesControl) -> Result<EvalResult> {
    require_boyer(sys, Rep::Poisson)?;
    ctl.validate()?;
    if t.is_zero_temperature() {
        return Ok(EvalResult::exact(zero_temperature_energy(sys), Rep::Poisson));
    }
    let xi = t.xi(sys.d);
    check_poisson_floor("free_energy_poisson", xi, ctl)?;
    let beta = t.beta;
    let wide = PoissonSums::new(C_WIDE, xi, ctl)?;
    let narrow = PoissonSums::new(C_NARROW, xi, ctl)?;
    let (g1, g1_tail) = wide.first_derivative();
    let (g2, g2_tail) = narrow.first_derivative();
    let b3 = PI.powi(3) * beta.powi(3);
    let parts = [
        -PI * PI * sys.d / (45.0 * beta.powi(4)),
        g1 / (32.0 * b3),
        -g2 / (8.0 * b3),
    ];
    let value: f64 = parts.iter().sum();
    let rounding = 8.0 * f64::EPSILON * parts.iter().map(|p| p.abs()).sum::<f64>();
    let err = g1_tail / (32.0 * b3) + g2_tail / (8.0 * b3) + rounding;
    Ok(EvalResult::new(value, err, wide.terms + narrow.terms, Rep::Poisson))
}

/// Richardson-extrapolated sum of `term(n, m)` over boxes
/// `[start, a R] x [start, b R]` (origin excluded) with `R` doubling from an
/// even first value.
///
/// Lattice sums of `|(n,m)|^-4`-type terms have box remainders expanding in
/// `R^-2, R^-3, ...` as long as the box keeps its shape. The aspect `(a, b)`
/// follows the anisotropy of the quadratic form, and even edges keep any
/// `(-1)^m` factor in phase.
pub(crate) fn quadrant_box_sum(
    what: &'static str,
    start: usize,
    aspect: (usize, usize),
    ctl: &SeriesControl,
    term: impl Fn(usize, usize) -> f64,
) -> Result<EvalResult> {
    ctl.validate()?;
    let (a, b) = aspect;
    let max_r = (ctl.max_terms as f64 / (a * b) as f64).sqrt().floor() as usize;
    let mut r = ((max_r >> 5).clamp(4, 16)) & !1;
    let mut inner: Option<(usize, usize)> = None;
    let mut acc = CompensatedSum::new();
    let mut extrap = PowerLawExtrapolator::new(2.0, -2.0, 1.0);
    let mut last_err = f64::INFINITY;
    loop {
        let (edge_n, edge_m) = (a * r, b * r);
        let points = (edge_n + 1 - start) * (edge_m + 1 - start);
        if points > ctl.max_terms {
            return Err(ctl.exhausted(what, last_err));
        }
        for n in start..=edge_n {
            for m in start..=edge_m {
                if (n == 0 && m == 0) || inner.is_some_and(|(i, j)| n <= i && m <= j) {
                    continue;
                }
                acc.add(term(n, m));
            }
        }
        if let Some((best, change)) = extrap.push(acc.value()) {
            last_err = change + acc.rounding_bound();
            if extrap.levels() >= 3 && last_err <= ctl.rel_tol * best.abs() {
                return Ok(EvalResult::new(best, last_err, points, Rep::Lattice));
            }
        }
        inner = Some((edge_n, edge_m));
        r *= 2;
    }
}

/// Box aspect `(a, b)` for a form `n^2 + c^2 m^2`: the `n` edge is stretched
/// by about `c` when `c > 1`, the `m` edge by about `1/c` when `c < 1`.
fn aspect_for(c: f64) -> (usize, usize) {
    if c >= 1.0 {
        (c.round() as usize, 1)
    } else {
        (1, (1.0 / c).round() as usize)
    }
}

/// Weight of index `k` when folding a sum over all integers onto `k >= 0`.
#[inline]
fn fold(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        2.0
    }
}

/// Symmetric lattice form
/// `F = -(1/(16 pi^2 d^3)) sum'_{n,m in Z} (-1)^m c^4 / (n^2 + c^2 m^2)^2`, `c = 2 pi xi`.
pub fn free_energy_lattice(sys: &PlateSystem, t: &ThermalPoint, ctl: &SeriesControl) -> Result<EvalResult> {
    match sys.kind {
        BoundaryKind::BoyerMixed => {}
        BoundaryKind::ConductorConductor => {
            if t.is_zero_temperature() {
                return Ok(EvalResult::exact(zero_temperature_energy(sys), Rep::Lattice));
            }
            return Ok(f_conducting_lattice(t.xi(sys.d), ctl)?.affine(0.0, sys.d.powi(-3)));
        }
    }
    if t.is_zero_temperature() {
        return Ok(EvalResult::exact(zero_temperature_energy(sys), Rep::Lattice));
    }
    let c = 2.0 * PI * t.xi(sys.d);
    let c2 = c * c;
    let s = quadrant_box_sum("free_energy_lattice", 0, aspect_for(c), ctl, |n, m| {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let r = c2 / ((n * n) as f64 + c2 * (m * m) as f64);
        sign * fold(n) * fold(m) * r * r
    })?;
    Ok(s.affine(0.0, -1.0 / (16.0 * PI * PI * sys.d.powi(3))))
}

// ---------------------------------------------------------------------------
// Transverse-mode quadrature

/// Range beyond the lower limit over which the mode integrand is kept; the
/// discarded piece is below `e^-60` relative.
const MODE_WINDOW: f64 = 60.0;

/// `J(a) = int_a^inf u ln(1 - e^-u) du` by adaptive quadrature on
/// `[a, a + 60]`.
pub fn mode_integral(a: f64, rel_tol: f64) -> Result<Quadrature> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(domain("mode_integral", a, "finite lower limit >= 0"));
    }
    let mut q = integrate(|u| u * (-(-u).exp()).ln_1p(), a, a + MODE_WINDOW, 0.0, rel_tol)?;
    q.abs_err += (a + MODE_WINDOW + 1.0) * (-(a + MODE_WINDOW)).exp();
    Ok(q)
}

/// Scaled profile from the transverse-mode integrals,
/// `f = -sum_n J(n/2xi) + sum_n J(n/xi)`: the modes at odd multiples of
/// `pi/2d` are all multiples of `pi/2d` minus those of `pi/d`.
pub fn f_scaled_mode_integral(xi: f64, quadrature_tol: f64, max_terms: usize) -> Result<EvalResult> {
    require_positive("xi", xi)?;
    require_positive("quadrature_tol", quadrature_tol)?;
    let d1 = 0.5 / xi;
    let d2 = 1.0 / xi;
    let mut acc = CompensatedSum::new();
    let mut quad_err = 0.0;
    let mut evaluations = 0usize;
    let mut tail = f64::INFINITY;
    for n in 1..=max_terms {
        let nf = n as f64;
        let a = mode_integral(nf * d1, quadrature_tol)?;
        let b = mode_integral(nf * d2, quadrature_tol)?;
        acc.add(-a.value);
        acc.add(b.value);
        quad_err += a.abs_err + b.abs_err;
        evaluations += a.intervals + b.intervals;
        // |J(a + delta)| <= (1 + delta/a) e^{-delta} |J(a)| term by term.
        let r1 = (nf + 1.0) / nf * (-d1).exp();
        let r2 = (nf + 1.0) / nf * (-d2).exp();
        tail = crate::series::geometric_tail(a.value, r1) + crate::series::geometric_tail(b.value, r2);
        if n >= 8 && tail <= quadrature_tol * acc.value().abs() {
            return Ok(EvalResult::new(
                acc.value(),
                tail + quad_err + acc.rounding_bound(),
                evaluations,
                Rep::ModeIntegral,
            ));
        }
    }
    Err(CasimirError::NonConvergence {
        what: "f_scaled_mode_integral",
        max_terms,
        abs_err: tail,
    })
}

/// Free energy from the transverse-mode integrals; an independent oracle for
/// the series forms.
pub fn free_energy_mode_integral(sys: &PlateSystem, t: &ThermalPoint, quadrature_tol: f64) -> Result<EvalResult> {
    require_boyer(sys, Rep::ModeIntegral)?;
    if t.is_zero_temperature() {
        return Ok(EvalResult::exact(zero_temperature_energy(sys), Rep::ModeIntegral));
    }
    let f = f_scaled_mode_integral(t.xi(sys.d), quadrature_tol, 1_000_000)?;
    Ok(boyer_from_profile(sys, t, f))
}

// ---------------------------------------------------------------------------
// Asymptotic forms

/// Low-temperature closed forms, meant for `xi <~ 0.1` (not enforced).
///
/// Mixed pair: `F0 - (1/(pi beta^3) + 1/(2 d beta^2)) e^{-pi beta/2d}`.
/// Conductors: `-pi^2/(720 d^3) - zeta3/(2 pi beta^3) - (1/(pi beta^3) + 1/(d beta^2)) e^{-pi beta/d}`.
pub fn free_energy_low_t(sys: &PlateSystem, t: &ThermalPoint) -> f64 {
    let f0 = zero_temperature_energy(sys);
    if t.is_zero_temperature() {
        return f0;
    }
    let (b, d) = (t.beta, sys.d);
    match sys.kind {
        BoundaryKind::BoyerMixed => {
            f0 - (1.0 / (PI * b.powi(3)) + 1.0 / (2.0 * d * b * b)) * (-PI * b / (2.0 * d)).exp()
        }
        BoundaryKind::ConductorConductor => {
            f0 - ZETA3 / (2.0 * PI * b.powi(3)) - (1.0 / (PI * b.powi(3)) + 1.0 / (d * b * b)) * (-PI * b / d).exp()
        }
    }
}

/// High-temperature closed forms, meant for `xi >~ 1` (not enforced).
///
/// Mixed pair: `-pi^2 d/(45 beta^4) + (3/32) zeta3/(pi d^2 beta) + (1/(4 pi d^2 beta) + 1/(d beta^2)) e^{-4 pi d/beta}`.
/// Conductors: `-pi^2 d/(45 beta^4) - zeta3/(8 pi d^2 beta) - (1/(4 pi d^2 beta) + 1/(d beta^2)) e^{-4 pi d/beta}`.
pub fn free_energy_high_t(sys: &PlateSystem, t: &ThermalPoint) -> f64 {
    let (b, d) = (t.beta, sys.d);
    let sb = -PI * PI * d / (45.0 * b.powi(4));
    let exp_part = (1.0 / (4.0 * PI * d * d * b) + 1.0 / (d * b * b)) * (-4.0 * PI * d / b).exp();
    match sys.kind {
        BoundaryKind::BoyerMixed => sb + 3.0 / 32.0 * ZETA3 / (PI * d * d * b) + exp_part,
        BoundaryKind::ConductorConductor => sb - ZETA3 / (8.0 * PI * d * d * b) - exp_part,
    }
}

/// Size of the first term dropped by [`free_energy_low_t`].
fn low_t_remainder(sys: &PlateSystem, t: &ThermalPoint) -> f64 {
    if t.is_zero_temperature() {
        return 0.0;
    }
    let xi = t.xi(sys.d);
    let d3 = sys.d.powi(3);
    match sys.kind {
        BoundaryKind::BoyerMixed => PI * PI * xi.powi(3) / d3 * (1.0 + 1.0 / xi) * (-1.0 / xi).exp() / 8.0,
        BoundaryKind::ConductorConductor => 2.0 * PI * PI * (xi.powi(3) + xi * xi) * (-2.0 / xi).exp() / d3,
    }
}

/// Size of the first term dropped by [`free_energy_high_t`].
fn high_t_remainder(sys: &PlateSystem, t: &ThermalPoint) -> f64 {
    let xi = t.xi(sys.d);
    2.0 * (xi / 4.0 + PI * PI * xi * xi) * (-8.0 * PI * PI * xi).exp() / sys.d.powi(3)
}

// ---------------------------------------------------------------------------
// Conductor-conductor profile d^3 F/L^2

/// `d^3 F/L^2` of two conductors from the single hyperbolic sum
/// `-pi^2/720 - (pi^2/8) sum_{n>=1} [4 xi^3 coth(n/2xi)/n^3 + 2 xi^2 csch^2(n/2xi)/n^2]`,
/// where the `coth -> 1` part sums to `4 xi^3 zeta3` exactly.
pub fn f_conducting_single(xi: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    require_positive("xi", xi)?;
    ctl.validate()?;
    let delta = 0.5 / xi;
    let ratio = (-2.0 * delta).exp();
    let pre = PI * PI / 8.0;
    let offset = -PI * PI / 720.0 - pre * 4.0 * xi.powi(3) * ZETA3;
    let s = sum_ratio_bounded(
        "f_conducting_single",
        ctl,
        offset / -pre,
        |n| {
            let nf = n as f64;
            let x = nf * delta;
            let u = inv_sinh_kernel(x);
            4.0 * xi.powi(3) * coth_minus_one(x) / (nf * nf * nf) + 2.0 * xi * xi * u * u / (nf * nf)
        },
        |_| ratio,
    )?;
    let value = offset - pre * s.value;
    let err = pre * s.abs_err() + 4.0 * f64::EPSILON * (offset.abs() + (pre * s.value).abs());
    Ok(EvalResult::new(value, err, s.terms, Rep::CothSingle))
}

/// `d^3 F/L^2` of two conductors from the symmetric lattice
/// `-(1/16 pi^2) sum'_{n,m in Z} c^4/(m^2 + c^2 n^2)^2`, `c = 2 pi xi`.
pub fn f_conducting_lattice(xi: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    require_positive("xi", xi)?;
    let c2 = (2.0 * PI * xi).powi(2);
    let (a, b) = aspect_for(c2.sqrt());
    let s = quadrant_box_sum("f_conducting_lattice", 0, (b, a), ctl, |n, m| {
        let r = c2 / ((m * m) as f64 + c2 * (n * n) as f64);
        fold(n) * fold(m) * r * r
    })?;
    Ok(s.affine(0.0, -1.0 / (16.0 * PI * PI)))
}

/// The part of the conductor lattice with `n, m >= 1`,
/// `-(1/4 pi^2) sum_{n,m>=1} c^4/(m^2 + c^2 n^2)^2`; the axes contribute the
/// Stefan-Boltzmann term `-pi^6 xi^4/45` (row `n = 0`) and the zero-temperature
/// term `-pi^2/720` (column `m = 0`).
pub fn f_nontrivial(xi: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    require_positive("xi", xi)?;
    let c2 = (2.0 * PI * xi).powi(2);
    let (a, b) = aspect_for(c2.sqrt());
    let s = quadrant_box_sum("f_nontrivial", 1, (b, a), ctl, |n, m| {
        let r = c2 / ((m * m) as f64 + c2 * (n * n) as f64);
        r * r
    })?;
    Ok(s.affine(0.0, -1.0 / (4.0 * PI * PI)))
}

// ---------------------------------------------------------------------------
// Router

/// Scaled temperature from which the automatic choice switches from the
/// single hyperbolic sum to the Poisson form.
pub const POISSON_FROM_XI: f64 = 0.4;

pub fn auto_representation(kind: BoundaryKind, xi: f64) -> Rep {
    match kind {
        BoundaryKind::BoyerMixed if xi >= POISSON_FROM_XI => Rep::Poisson,
        _ => Rep::CothSingle,
    }
}

/// Free energy in the requested representation, or the automatic choice for
/// `None`. The zero-temperature point returns the exact Casimir energy.
pub fn free_energy(sys: &PlateSystem, t: &ThermalPoint, rep: Option<Rep>, ctl: &SeriesControl) -> Result<EvalResult> {
    ctl.validate()?;
    if t.is_zero_temperature() && rep.is_none() {
        return Ok(EvalResult::exact(zero_temperature_energy(sys), Rep::AsymptoticLow));
    }
    let rep = rep.unwrap_or_else(|| auto_representation(sys.kind, t.xi(sys.d)));
    match rep {
        Rep::Bessel => free_energy_bessel(sys, t, ctl),
        Rep::CothSingle => free_energy_single(sys, t, ctl),
        Rep::DoubleSum => free_energy_double(sys, t, ctl),
        Rep::Poisson => free_energy_poisson(sys, t, ctl),
        Rep::Lattice => free_energy_lattice(sys, t, ctl),
        Rep::ModeIntegral => free_energy_mode_integral(sys, t, ctl.rel_tol),
        Rep::AsymptoticLow => Ok(EvalResult::new(
            free_energy_low_t(sys, t),
            low_t_remainder(sys, t),
            0,
            Rep::AsymptoticLow,
        )),
        Rep::AsymptoticHigh => {
            if t.is_zero_temperature() {
                return Err(domain("free_energy_high_t", t.beta, "finite beta"));
            }
            Ok(EvalResult::new(
                free_energy_high_t(sys, t),
                high_t_remainder(sys, t),
                0,
                Rep::AsymptoticHigh,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    fn boyer() -> PlateSystem {
        PlateSystem::boyer(1.0).unwrap()
    }

    fn at_xi(xi: f64) -> ThermalPoint {
        ThermalPoint::from_xi(xi, 1.0).unwrap()
    }

    /// `f` from its exponential double sum taken as a plain rectangle, with
    /// no shell ordering; an independent check of the shell bookkeeping.
    fn f_rectangle(xi: f64, n_max: usize) -> f64 {
        let mut s = CompensatedSum::new();
        for n in 1..=n_max {
            for m in 1..=n_max {
                let (nf, mf) = (n as f64, m as f64);
                let q = nf * mf;
                s.add((1.0 / mf.powi(3) + nf / (2.0 * xi * mf * mf)) * (-q / (2.0 * xi)).exp());
                s.add(-(1.0 / mf.powi(3) + nf / (xi * mf * mf)) * (-q / xi).exp());
            }
        }
        s.value()
    }

    #[test]
    fn poisson_derivatives_match_finite_differences() {
        for c in [C_WIDE, C_NARROW] {
            for xi in [0.05, 0.3, 2.0] {
                let h = 1e-5 * xi;
                let g = |x| PoissonSums::new(c, x, &ctl()).unwrap();
                let fd = (g(xi + h).value() - g(xi - h).value()) / (2.0 * h);
                let (g1, _) = g(xi).first_derivative();
                assert!((g1 - fd).abs() < 1e-8 * g1.abs(), "c={c} xi={xi}");
            }
        }
    }

    #[test]
    fn construction_checks() {
        assert!(PlateSystem::boyer(0.0).is_err());
        assert!(PlateSystem::conductor(f64::NAN).is_err());
        assert!(ThermalPoint::new(-1.0).is_err());
        assert!(ThermalPoint::from_xi(-0.1, 1.0).is_err());
        let t = ThermalPoint::from_xi(0.0, 1.0).unwrap();
        assert!(t.is_zero_temperature());
        assert_eq!(t.xi(1.0), 0.0);
        let t = ThermalPoint::new(2.0).unwrap();
        assert_eq!(t.xi(1.0), 1.0 / (2.0 * PI));
        assert_eq!(BoundaryKind::from_name("boyer"), Some(BoundaryKind::BoyerMixed));
        assert_eq!(BoundaryKind::from_name("x"), None);
    }

    #[test]
    fn zero_temperature_values() {
        let b = zero_temperature_energy(&boyer());
        assert!((b - 0.011_994_3).abs() < 1e-7);
        let c = zero_temperature_energy(&PlateSystem::conductor(1.0).unwrap());
        assert!((c + 0.013_707_8).abs() < 1e-7);
        let b2 = zero_temperature_energy(&PlateSystem::boyer(2.0).unwrap());
        assert!((b2 - b / 8.0).abs() < 1e-18);
    }

    #[test]
    fn single_and_double_sums_agree_with_rectangle() {
        for &xi in &[0.1, 0.5, 2.0] {
            let s = f_scaled_single(xi, &ctl()).unwrap();
            let d = f_scaled_double(xi, &ctl()).unwrap();
            let r = f_rectangle(xi, 2000);
            assert!((s.value - r).abs() < 1e-11 * r, "xi={xi}: {} vs {r}", s.value);
            assert!((d.value - r).abs() < 1e-11 * r, "xi={xi}: {} vs {r}", d.value);
        }
    }

    #[test]
    fn single_sum_examples() {
        let c = ctl();
        let a = f_scaled_single(0.5, &c).unwrap();
        let b = f_scaled_double(0.5, &c).unwrap();
        assert!((a.value - b.value).abs() < 1e-10);
        // Leading low-temperature term 6 e^-5 differs by the e^-10 corrections.
        let v = f_scaled_single(0.1, &c).unwrap().value;
        assert!(((v - 6.0 * (-5f64).exp()) / v).abs() < 2e-3);
        assert!(f_scaled_single(0.002, &c).unwrap().value < 1e-100);
        assert_eq!(f_scaled_single(1e-4, &c).unwrap().value, 0.0);
        assert!(f_scaled_single(0.0, &c).is_err());
        // Stefan-Boltzmann growth at large xi.
        let v = f_scaled_double(5.0, &c).unwrap().value;
        assert!((v / (PI.powi(4) * 5.0 / 45.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mode_integral_at_zero_is_minus_zeta3() {
        // Pinned from quadrature; equals -zeta(3) to the quadrature accuracy.
        let q = mode_integral(0.0, 1e-13).unwrap();
        assert!((q.value + 1.202_056_903_159_594).abs() < 1e-12, "{}", q.value);
        // J(a) = -sum_k (a/k^2 + 1/k^3) e^{-ka}, checked at a = 2.
        let series: f64 = (1..60)
            .map(|k| {
                let k = k as f64;
                -(2.0 / (k * k) + 1.0 / (k * k * k)) * (-2.0 * k).exp()
            })
            .sum();
        let q = mode_integral(2.0, 1e-13).unwrap();
        assert!((q.value - series).abs() < 1e-14);
    }

    #[test]
    fn representations_agree_at_unit_beta() {
        let t = ThermalPoint::new(1.0).unwrap();
        let c = ctl();
        let b = free_energy_bessel(&boyer(), &t, &c).unwrap();
        let p = free_energy_poisson(&boyer(), &t, &c).unwrap();
        let s = free_energy_single(&boyer(), &t, &c).unwrap();
        let m = free_energy_mode_integral(&boyer(), &t, 1e-12).unwrap();
        let l = free_energy_lattice(&boyer(), &t, &c).unwrap();
        assert!((b.value - p.value).abs() < 1e-8);
        assert!((b.value - s.value).abs() < 1e-10);
        assert!((b.value - m.value).abs() < 1e-6);
        assert!((b.value - l.value).abs() < 1e-5);
    }

    #[test]
    fn bessel_examples() {
        let c = ctl();
        let t = ThermalPoint::new(2.0).unwrap();
        let b = free_energy_bessel(&boyer(), &t, &c).unwrap();
        let direct = zero_temperature_energy(&boyer()) - f_scaled_single(t.xi(1.0), &c).unwrap().value / (PI * 8.0);
        assert!((b.value - direct).abs() < 1e-10);
        let cold = free_energy_bessel(&boyer(), &ThermalPoint::new(100.0).unwrap(), &c).unwrap();
        assert!((cold.value - zero_temperature_energy(&boyer())).abs() < 1e-12);
        let conductor = PlateSystem::conductor(1.0).unwrap();
        assert!(matches!(
            free_energy_bessel(&conductor, &t, &c),
            Err(CasimirError::UnsupportedRepresentation { .. })
        ));
    }

    #[test]
    fn poisson_examples() {
        let c = ctl();
        // Below the floor.
        let t = ThermalPoint::new(1.0 / (PI * 0.01)).unwrap();
        assert!(matches!(
            free_energy_poisson(&boyer(), &t, &c),
            Err(CasimirError::SlowConvergence { .. })
        ));
        // High temperature: the residual after the Stefan-Boltzmann term.
        let t = ThermalPoint::new(0.1).unwrap();
        let p = free_energy_poisson(&boyer(), &t, &c).unwrap().value;
        let residual = p + PI * PI / (45.0 * 1e-4);
        let expected = 3.0 * ZETA3 / (32.0 * PI * 0.1);
        assert!((residual / expected - 1.0).abs() < 1e-2);
        // Homogeneity: F(beta=1, d=2) = F(beta=0.5, d=1)/8.
        let a = free_energy_poisson(&PlateSystem::boyer(2.0).unwrap(), &ThermalPoint::new(1.0).unwrap(), &c).unwrap();
        let b = free_energy_poisson(&boyer(), &ThermalPoint::new(0.5).unwrap(), &c).unwrap();
        assert!((a.value - b.value / 8.0).abs() < 1e-12 * a.value.abs());
    }

    #[test]
    fn conductor_profiles_agree() {
        let c = ctl();
        for &xi in &[0.05, 0.2, 1.0, 3.0] {
            let s = f_conducting_single(xi, &c).unwrap();
            let l = f_conducting_lattice(xi, &c).unwrap();
            assert!(
                (s.value - l.value).abs() < 1e-9 * s.value.abs().max(1.0),
                "xi={xi}: {} {}",
                s.value,
                l.value
            );
            let nt = f_nontrivial(xi, &c).unwrap();
            let axes = -PI.powi(6) * xi.powi(4) / 45.0 - PI * PI / 720.0;
            assert!((axes + nt.value - s.value).abs() < 1e-9 * s.value.abs().max(1.0));
        }
    }

    #[test]
    fn conductor_low_temperature_matches_series() {
        let sys = PlateSystem::conductor(1.0).unwrap();
        let t = ThermalPoint::new(20.0).unwrap();
        let low = free_energy_low_t(&sys, &t);
        let exact = free_energy_single(&sys, &t, &ctl()).unwrap().value;
        assert!((low - exact).abs() < 1e-15);
        let leading = -PI * PI / 720.0 - ZETA3 / (2.0 * PI * 8000.0);
        assert!((low - leading).abs() < 1e-9);
    }

    #[test]
    fn conductor_high_temperature_closed_form() {
        let sys = PlateSystem::conductor(1.0).unwrap();
        let t = ThermalPoint::new(0.1).unwrap();
        let v = free_energy_high_t(&sys, &t);
        let leading = -PI * PI / (45.0 * 1e-4) - ZETA3 / (8.0 * PI * 0.1);
        assert!((v + 2193.2).abs() < 1.0 && (v - leading).abs() < 1e-9);
        let exact = free_energy_single(&sys, &t, &ctl()).unwrap().value;
        assert!(((v - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn lattice_thermal_part_is_negative() {
        let c = ctl();
        let f0 = zero_temperature_energy(&boyer());
        for &xi in &[0.05, 0.2, 0.7, 2.0] {
            let v = free_energy_lattice(&boyer(), &at_xi(xi), &c).unwrap().value;
            assert!(v - f0 <= 0.0);
        }
    }

    #[test]
    fn router_choices() {
        let c = ctl();
        let r = free_energy(&boyer(), &ThermalPoint::zero_temperature(), None, &c).unwrap();
        assert_eq!(r.value, zero_temperature_energy(&boyer()));
        assert_eq!(r.abs_err_est, 0.0);
        assert_eq!(
            free_energy(&boyer(), &at_xi(0.2), None, &c).unwrap().rep,
            Rep::CothSingle
        );
        assert_eq!(free_energy(&boyer(), &at_xi(0.4), None, &c).unwrap().rep, Rep::Poisson);
        let conductor = PlateSystem::conductor(1.0).unwrap();
        assert_eq!(
            free_energy(&conductor, &at_xi(2.0), None, &c).unwrap().rep,
            Rep::CothSingle
        );
        assert!(free_energy(&conductor, &at_xi(2.0), Some(Rep::Poisson), &c).is_err());
        assert!(free_energy(
            &boyer(),
            &ThermalPoint::zero_temperature(),
            Some(Rep::AsymptoticHigh),
            &c
        )
        .is_err());
    }
}
