//! Temperature inversion: the mixed-pair free energy as a difference of two
//! conductor-pair free energies, `F = F1 - F2` (conductors at separation
//! `2d` and `d`), each of which is invariant under `xi -> 1/(lambda^2 xi)`
//! up to the factor `(lambda xi)^4`.
//!
//! The conductor profile `d^3 F/L^2` splits as `-pi^6 xi^4/45 - pi^2/720 + f_nt`
//! and the two explicit terms map onto each other, so `f_nt` carries the same
//! relation as the full profile: image `1/(4 pi^2 xi)`, fixed point `1/(2 pi)`.

use std::f64::consts::PI;
use std::ops::{Div, Mul, Neg};

use crate::error::{require_positive, CasimirError, Result};
use crate::free_energy::{
    f_conducting_lattice, f_conducting_single, f_nontrivial, free_energy_low_t, free_energy_single,
    zero_temperature_energy, PlateSystem, ThermalPoint,
};
use crate::series::{CompensatedSum, EvalResult, SeriesControl};
use crate::ZETA3;

/// Relative agreement required between the lattice and single-sum forms of
/// `F1` and `F2`.
pub const LATTICE_CROSS_CHECK_TOL: f64 = 1e-5;

/// Scale of the inversion for `F1`: `(4 pi xi)^4 F1(1/(16 pi^2 xi)) = F1(xi)`.
pub const LAMBDA_F1: f64 = 4.0 * PI;
/// Scale of the inversion for `F2` and for the bare conductor profile.
pub const LAMBDA_F2: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFreeEnergies {
    /// Conductors at separation `2d`, per unit area.
    pub f1: f64,
    /// Conductors at separation `d`, per unit area.
    pub f2: f64,
    pub xi: f64,
}

impl SplitFreeEnergies {
    pub fn evaluate(xi: f64, d: f64, ctl: &SeriesControl) -> Result<Self> {
        Ok(Self {
            f1: f1_eval(xi, d, ctl)?.value,
            f2: f2_eval(xi, d, ctl)?.value,
            xi,
        })
    }

    /// `F1 - F2`, the mixed-pair free energy.
    pub fn boyer(&self) -> f64 {
        self.f1 - self.f2
    }
}

fn f1_single(xi: f64, d: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    require_positive("d", d)?;
    Ok(f_conducting_single(2.0 * xi, ctl)?.affine(0.0, 1.0 / (8.0 * d.powi(3))))
}

fn f2_single(xi: f64, d: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    require_positive("d", d)?;
    Ok(f_conducting_single(xi, ctl)?.affine(0.0, 1.0 / d.powi(3)))
}

fn cross_check(what: &'static str, tight: EvalResult, lattice: EvalResult) -> Result<EvalResult> {
    if (tight.value - lattice.value).abs() <= LATTICE_CROSS_CHECK_TOL * tight.value.abs() {
        Ok(tight)
    } else {
        Err(CasimirError::Consistency {
            what,
            analytic: tight.value,
            numeric: lattice.value,
        })
    }
}

/// A control good enough for the `1e-5` lattice cross-check.
fn relaxed(ctl: &SeriesControl) -> SeriesControl {
    ctl.with_rel_tol(ctl.rel_tol.max(1e-9))
}

/// `F1/L^2` at scaled temperature `xi` of the mixed pair: conductors `2d`
/// apart, so their own scaled temperature is `2 xi`.
///
/// The single hyperbolic sum gives the value; the lattice sum must agree with
/// it to `1e-5` relative.
pub fn f1_eval(xi: f64, d: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    let tight = f1_single(xi, d, ctl)?;
    let lattice = f_conducting_lattice(2.0 * xi, &relaxed(ctl))?.affine(0.0, 1.0 / (8.0 * d.powi(3)));
    cross_check("f1_eval", tight, lattice)
}

/// `F2/L^2`: conductors `d` apart, cross-checked like [`f1_eval`].
pub fn f2_eval(xi: f64, d: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    let tight = f2_single(xi, d, ctl)?;
    let lattice = f_conducting_lattice(xi, &relaxed(ctl))?.affine(0.0, 1.0 / d.powi(3));
    cross_check("f2_eval", tight, lattice)
}

fn relative_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / rhs.abs().max(1e-300)
}

/// `|(lambda xi)^4 F(1/(lambda^2 xi)) - F(xi)| / |F(xi)|`.
fn inversion_residual(lambda: f64, xi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    require_positive("xi", xi)?;
    let image = 1.0 / (lambda * lambda * xi);
    let lhs = (lambda * xi).powi(4) * f(image)?;
    Ok(relative_residual(lhs, f(xi)?))
}

pub fn tis_residual_f1(xi: f64, d: f64, ctl: &SeriesControl) -> Result<f64> {
    inversion_residual(LAMBDA_F1, xi, |x| Ok(f1_single(x, d, ctl)?.value))
}

pub fn tis_residual_f2(xi: f64, d: f64, ctl: &SeriesControl) -> Result<f64> {
    inversion_residual(LAMBDA_F2, xi, |x| Ok(f2_single(x, d, ctl)?.value))
}

/// Inversion residual of the `n, m >= 1` part of the conductor lattice.
pub fn tis_residual_nontrivial(xi: f64, ctl: &SeriesControl) -> Result<f64> {
    inversion_residual(LAMBDA_F2, xi, |x| Ok(f_nontrivial(x, ctl)?.value))
}

/// The same relation tried on the mixed pair (`d = 1`). It does not hold:
/// the mixed boundary conditions break the symmetry, and the residual is of
/// order one.
pub fn naive_boyer_residual(xi: f64, ctl: &SeriesControl) -> Result<f64> {
    let sys = PlateSystem::boyer(1.0)?;
    inversion_residual(LAMBDA_F2, xi, |x| {
        Ok(free_energy_single(&sys, &ThermalPoint::from_xi(x, 1.0)?, ctl)?.value)
    })
}

// ---------------------------------------------------------------------------
// Summation identities

/// Both sides of a lattice summation identity. `lhs_err` bounds the
/// truncation of the direct sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentitySides {
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_err: f64,
}

/// Taylor coefficients in `x = (pi b)^2` of
/// `(1/y + coth y)/(2 y^2 sinh y) - 1/y^4`, `y = pi b`.
const ALTERNATING_REGULAR: [f64; 17] = [
    -0.019444444444444445,
    0.0041005291005291,
    -0.0006299603174603174,
    8.534418256640479e-05,
    -1.0816737213893299e-05,
    1.3153962806740584e-06,
    -1.554975159774429e-07,
    1.8006139836454294e-08,
    -2.052459693649639e-09,
    2.3106421580996968e-10,
    -2.575287443182514e-11,
    2.8465220031950697e-12,
    -3.1244739700508567e-13,
    3.4092735577354046e-14,
    -3.701053205052374e-15,
    3.9999476429296744e-16,
    -4.3060939406337556e-17,
];

/// Taylor coefficients in `x = (pi b)^2` of
/// `coth y/(2 y^3) + 1/(2 y^2 sinh^2 y) - 1/y^4`.
const PLAIN_REGULAR: [f64; 17] = [
    0.022222222222222223,
    -0.004232804232804233,
    0.0006349206349206349,
    -8.551119662230774e-05,
    1.0822021404031987e-05,
    -1.3155568711124266e-06,
    1.5550226152985776e-07,
    -1.8006277213447196e-08,
    2.0524636084132963e-09,
    -2.3106432599002625e-10,
    2.5752877501807372e-11,
    -2.8465220880280384e-12,
    3.1244739933300017e-13,
    -3.409273564085672e-14,
    3.701053206775811e-15,
    -3.9999476433953296e-16,
    4.306093940759079e-17,
];

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn alternating_regular(y: f64) -> f64 {
    if y < 1.0 {
        horner(&ALTERNATING_REGULAR, y * y)
    } else {
        (1.0 / y + 1.0 / y.tanh()) / (2.0 * y * y * y.sinh()) - 1.0 / y.powi(4)
    }
}

fn plain_regular(y: f64) -> f64 {
    if y < 1.0 {
        horner(&PLAIN_REGULAR, y * y)
    } else {
        let s = y.sinh();
        1.0 / (2.0 * y.powi(3) * y.tanh()) + 1.0 / (2.0 * y * y * s * s) - 1.0 / y.powi(4)
    }
}

/// `2 sum_{m>=1} sign(m) / (m^2 + b^2)^2`, stopped once `tail(M)` is below
/// `rel_tol` times the partial sum.
fn folded_sum(
    what: &'static str,
    b: f64,
    ctl: &SeriesControl,
    sign: impl Fn(usize) -> f64,
    tail: impl Fn(usize) -> f64,
) -> Result<(f64, f64)> {
    let b2 = b * b;
    let mut acc = CompensatedSum::new();
    for m in 1..=ctl.max_terms {
        let mf = m as f64;
        let r = 1.0 / (mf * mf + b2);
        acc.add(2.0 * sign(m) * r * r);
        let t = tail(m);
        if ctl.tail_small(t, acc.value(), m) {
            return Ok((acc.value(), t + acc.rounding_bound()));
        }
    }
    Err(ctl.exhausted(what, tail(ctl.max_terms)))
}

/// `sum_{m in Z} (-1)^m / (m^2 + b^2)^2` against
/// `pi^2 (1/(pi b) + coth(pi b)) / (2 b^2 sinh(pi b))`.
///
/// Both sides are assembled as `1/b^4` plus a regular part, so the `m = 0`
/// term never has to be cancelled out of the closed form. The alternating
/// tail is bounded by its first omitted term.
pub fn identity_alternating(b: f64, ctl: &SeriesControl) -> Result<IdentitySides> {
    require_positive("b", b)?;
    ctl.validate()?;
    let b2 = b * b;
    let (rest, err) = folded_sum(
        "identity_alternating",
        b,
        ctl,
        |m| if m % 2 == 0 { 1.0 } else { -1.0 },
        |m| {
            let r = 1.0 / ((m as f64 + 1.0).powi(2) + b2);
            2.0 * r * r
        },
    )?;
    let pole = 1.0 / (b2 * b2);
    Ok(IdentitySides {
        lhs: pole + rest,
        rhs: pole + PI.powi(4) * alternating_regular(PI * b),
        lhs_err: err,
    })
}

/// `sum_{l in Z} 1/(b^2 + l^2)^2` against
/// `pi coth(pi b)/(2 b^3) + pi^2 / (2 b^2 sinh^2(pi b))`, with the tail past
/// `M` bounded by `2/(3 M^3)`.
pub fn identity_plain(b: f64, ctl: &SeriesControl) -> Result<IdentitySides> {
    require_positive("b", b)?;
    ctl.validate()?;
    let (rest, err) = folded_sum("identity_plain", b, ctl, |_| 1.0, |m| 2.0 / (3.0 * (m as f64).powi(3)))?;
    let pole = 1.0 / (b * b).powi(2);
    Ok(IdentitySides {
        lhs: pole + rest,
        rhs: pole + PI.powi(4) * plain_regular(PI * b),
        lhs_err: err,
    })
}

// ---------------------------------------------------------------------------
// Stefan-Boltzmann limit to zero-temperature energy

/// `num/den * pi^power`, kept exact for the symbolic application below.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PiRational {
    pub num: i64,
    pub den: i64,
    pub power: i32,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl PiRational {
    pub fn new(num: i64, den: i64, power: i32) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1) * den.signum();
        Self {
            num: num / g,
            den: den / g,
            power,
        }
    }

    /// Sum of two terms with the same power of pi.
    pub fn checked_add(self, other: Self) -> Option<Self> {
        (self.power == other.power).then(|| {
            Self::new(
                self.num * other.den + other.num * self.den,
                self.den * other.den,
                self.power,
            )
        })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64 * PI.powi(self.power)
    }
}

impl Mul for PiRational {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        Self::new(self.num * other.num, self.den * other.den, self.power + other.power)
    }
}

impl Div for PiRational {
    type Output = Self;

    fn div(self, other: Self) -> Self {
        Self::new(self.num * other.den, self.den * other.num, self.power - other.power)
    }
}

impl Neg for PiRational {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.num, self.den, self.power)
    }
}

/// Stefan-Boltzmann coefficients `d^3 F/L^2 -> sb xi^4` for `F1` and `F2`.
pub const SB_F1: PiRational = PiRational {
    num: -2,
    den: 45,
    power: 6,
};
pub const SB_F2: PiRational = PiRational {
    num: -1,
    den: 45,
    power: 6,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbToCasimir {
    /// `d^3 F1(0)/L^2` obtained by inverting the high-temperature limit.
    pub f1_zero: PiRational,
    pub f2_zero: PiRational,
    /// `f1_zero - f2_zero`.
    pub boyer_zero_t_from_tis: PiRational,
    /// The zero-temperature energy of the mixed pair at `d = 1`.
    pub direct: f64,
}

/// Inverting `F(xi) ~ sb xi^4` through `(lambda xi)^4 F(1/(lambda^2 xi))`
/// leaves the constant `sb / lambda^4`.
fn invert_sb(sb: PiRational, lambda_over_pi: i64) -> PiRational {
    sb / PiRational::new(lambda_over_pi.pow(4), 1, 4)
}

/// Zero-temperature energies of `F1`, `F2` and of the mixed pair, from the
/// Stefan-Boltzmann terms alone (`d = 1`).
pub fn sb_to_casimir() -> SbToCasimir {
    let f1_zero = invert_sb(SB_F1, 4);
    let f2_zero = invert_sb(SB_F2, 2);
    let boyer = f1_zero.checked_add(-f2_zero).expect("both are multiples of pi^2");
    SbToCasimir {
        f1_zero,
        f2_zero,
        boyer_zero_t_from_tis: boyer,
        direct: zero_temperature_energy(&PlateSystem::boyer(1.0).expect("d = 1")),
    }
}

// ---------------------------------------------------------------------------
// High-temperature expansions mapped to low temperature

/// `d^3 F/L^2 ~ sb xi^4 + linear xi + (exp_lin xi + exp_quad xi^2) e^{-rate xi}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighTExpansion {
    pub sb: f64,
    pub linear: f64,
    pub exp_lin: f64,
    pub exp_quad: f64,
    pub rate: f64,
}

/// `d^3 F/L^2 ~ constant + cubic xi^3 + (exp_cubic xi^3 + exp_quad xi^2) e^{-rate/xi}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowTExpansion {
    pub constant: f64,
    pub cubic: f64,
    pub exp_cubic: f64,
    pub exp_quad: f64,
    pub rate: f64,
}

/// Conductors `2d` apart, in terms of the mixed pair's `xi`.
pub const F1_HIGH: HighTExpansion = HighTExpansion {
    sb: -2.0 * PI * PI * PI * PI * PI * PI / 45.0,
    linear: -ZETA3 / 32.0,
    exp_lin: -1.0 / 16.0,
    exp_quad: -PI * PI / 2.0,
    rate: 8.0 * PI * PI,
};

/// Conductors `d` apart.
pub const F2_HIGH: HighTExpansion = HighTExpansion {
    sb: -PI * PI * PI * PI * PI * PI / 45.0,
    linear: -ZETA3 / 8.0,
    exp_lin: -1.0 / 4.0,
    exp_quad: -PI * PI,
    rate: 4.0 * PI * PI,
};

impl HighTExpansion {
    pub fn eval(&self, xi: f64) -> f64 {
        let e = (-self.rate * xi).exp();
        self.sb * xi.powi(4) + self.linear * xi + (self.exp_lin * xi + self.exp_quad * xi * xi) * e
    }

    /// Term-by-term image under `F(xi) = (lambda xi)^4 F(1/(lambda^2 xi))`.
    pub fn invert(&self, lambda: f64) -> LowTExpansion {
        let l2 = lambda * lambda;
        LowTExpansion {
            constant: self.sb / (l2 * l2),
            cubic: self.linear * l2,
            exp_cubic: self.exp_lin * l2,
            exp_quad: self.exp_quad,
            rate: self.rate / l2,
        }
    }
}

impl LowTExpansion {
    pub fn eval(&self, xi: f64) -> f64 {
        let e = (-self.rate / xi).exp();
        self.constant + self.cubic * xi.powi(3) + (self.exp_cubic * xi.powi(3) + self.exp_quad * xi * xi) * e
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowTFromHighT {
    /// `d^3 F/L^2` of the mixed pair from the inverted conductor expansions.
    pub mapped: f64,
    /// The low-temperature closed form of the mixed pair at `d = 1`.
    pub direct_low_t: f64,
}

/// Low-temperature free energy of the mixed pair from the high-temperature
/// expansions of `F1` and `F2`.
///
/// The cubic terms cancel. The exponential of `F2` decays as `e^{-1/xi}`,
/// the same order as the first terms missing from the expansion of `F1`, so
/// it is dropped; what remains is
/// `(7/8) pi^2/720 - (pi^2 xi^3 + pi^2 xi^2/2) e^{-1/2xi}`.
pub fn low_t_from_high_t(xi: f64) -> Result<LowTFromHighT> {
    require_positive("xi", xi)?;
    let low1 = F1_HIGH.invert(LAMBDA_F1);
    let low2 = F2_HIGH.invert(LAMBDA_F2);
    let e = (-low1.rate / xi).exp();
    let mapped = (low1.constant - low2.constant)
        + (low1.cubic - low2.cubic) * xi.powi(3)
        + (low1.exp_cubic * xi.powi(3) + low1.exp_quad * xi * xi) * e;
    let sys = PlateSystem::boyer(1.0)?;
    Ok(LowTFromHighT {
        mapped,
        direct_low_t: free_energy_low_t(&sys, &ThermalPoint::from_xi(xi, 1.0)?),
    })
}
