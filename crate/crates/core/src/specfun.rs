//! Special and elementary functions used by the series: Riemann zeta, the
//! Gamma function, Macdonald functions and exponentially scaled hyperbolic
//! kernels.
//!
//! All functions are pure and overflow-safe for the argument ranges the
//! series produce (hyperbolic arguments routinely exceed 700).

use std::f64::consts::{LN_2, PI};

use crate::error::{domain, CasimirError, Result};

/// B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const LN_PI: f64 = 1.144_729_885_849_400_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Riemann zeta function on the real line.
///
/// For `s >= -1/2` the value comes from a short direct sum closed by its
/// Euler-Maclaurin tail (leading term `N^(1-s)/(s-1)`); negative arguments go
/// through the reflection formula. `zeta(0) = -1/2`, the trivial zeros and
/// `zeta(2k)` for `2k <= 20` are returned in closed form.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if s.is_nan() {
        return Err(domain("riemann_zeta", s, "a real number"));
    }
    if s == 1.0 {
        return Err(CasimirError::Pole {
            what: "riemann_zeta",
            at: 1.0,
            residue: "simple pole with residue 1".into(),
        });
    }
    if s == 0.0 {
        return Ok(-0.5);
    }
    if s == f64::INFINITY {
        return Ok(1.0);
    }
    if s.fract() == 0.0 && s.abs() <= 1e15 {
        let k = s as i64;
        if k < 0 && k % 2 == 0 {
            return Ok(0.0);
        }
        if k > 0 && k % 2 == 0 && k <= 20 {
            return Ok(zeta_even(k as u32));
        }
    }
    // Reflection maps s near 0 to 1 - s near the pole, where forming 1 - s
    // alone costs relative accuracy; the direct expansion is fine there.
    if s < -0.5 {
        return zeta_reflected(s);
    }
    Ok(zeta_euler_maclaurin(s))
}

/// `zeta(2k) = (-1)^(k+1) B_2k (2 pi)^2k / (2 (2k)!)`.
fn zeta_even(two_k: u32) -> f64 {
    let k = (two_k / 2) as usize;
    let b = BERNOULLI_EVEN[k - 1];
    let mut factorial = 1.0;
    for i in 2..=two_k {
        factorial *= i as f64;
    }
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * b * (2.0 * PI).powi(two_k as i32) / (2.0 * factorial)
}

fn zeta_reflected(s: f64) -> Result<f64> {
    let one_minus = 1.0 - s;
    let (ln_g, sign_g) = ln_gamma(one_minus)?;
    let ln_mag = s * LN_2 + (s - 1.0) * LN_PI + ln_g;
    let sin_term = sin_pi(s / 2.0);
    Ok(sign_g * sin_term * ln_mag.exp() * zeta_euler_maclaurin(one_minus))
}

fn zeta_euler_maclaurin(s: f64) -> f64 {
    const N: usize = 16;
    let n = N as f64;
    let mut acc = crate::series::CompensatedSum::new();
    for k in 1..N {
        acc.add((k as f64).powf(-s));
    }
    let n_pow = n.powf(-s);
    acc.add(n * n_pow / (s - 1.0));
    acc.add(0.5 * n_pow);
    // B_2k/(2k)! * s(s+1)...(s+2k-2) * N^(-s-2k+1)
    let mut rising = s;
    let mut factorial = 2.0;
    let mut power = n_pow / n;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / factorial * rising * power;
        acc.add(term);
        let two_k = 2.0 * (k + 1) as f64;
        rising *= (s + two_k - 1.0) * (s + two_k);
        factorial *= (two_k + 1.0) * (two_k + 2.0);
        power /= n * n;
    }
    acc.value()
}

/// `sin(pi x)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    if x.fract() == 0.0 {
        return 0.0;
    }
    let r = x.rem_euclid(2.0);
    (PI * r).sin()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `(ln |Gamma(x)|, sign Gamma(x))` from a Lanczos approximation, with the
/// reflection formula below 1/2. Non-positive integers are poles.
pub fn ln_gamma(x: f64) -> Result<(f64, f64)> {
    if x.is_nan() {
        return Err(domain("ln_gamma", x, "a real number"));
    }
    if x <= 0.0 && x.fract() == 0.0 {
        return Err(CasimirError::Pole {
            what: "gamma",
            at: x,
            residue: format!("simple pole at the non-positive integer {x}"),
        });
    }
    if x < 0.5 {
        let s = sin_pi(x);
        let (lg, sg) = ln_gamma(1.0 - x)?;
        return Ok((LN_PI - s.abs().ln() - lg, s.signum() * sg));
    }
    let z = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = z + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    Ok((LN_SQRT_2PI + (z + 0.5) * t.ln() - t + a.ln(), 1.0))
}

pub fn gamma(x: f64) -> Result<f64> {
    let (lg, sign) = ln_gamma(x)?;
    Ok(sign * lg.exp())
}

/// `1/Gamma(x)`, which is entire: zero at the non-positive integers.
pub fn recip_gamma(x: f64) -> f64 {
    match ln_gamma(x) {
        Ok((lg, sign)) => sign * (-lg).exp(),
        Err(_) => 0.0,
    }
}

/// Macdonald function of half-integer order, `K_{n+1/2}(z)`, from the finite
/// closed form
/// `sqrt(pi/2z) e^-z sum_{k<=n} (n+k)!/(k!(n-k)!(2z)^k)`.
///
/// There is no truncation error. For `z` beyond ~745 the exponential
/// underflows and the exact value `0.0` is returned.
pub fn macdonald_half(n: u32, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(domain("macdonald_half", z, "z > 0"));
    }
    if z == f64::INFINITY {
        return Ok(0.0);
    }
    Ok((PI / (2.0 * z)).sqrt() * (-z).exp() * half_order_polynomial(n, z))
}

/// `sum_{k<=n} (n+k)!/(k!(n-k)!(2z)^k)`.
#[inline]
pub(crate) fn half_order_polynomial(n: u32, z: f64) -> f64 {
    let mut coef = 1.0;
    let mut sum = 1.0;
    for k in 1..=n {
        let kf = k as f64;
        coef *= (n as f64 + kf) * (n as f64 - kf + 1.0) / (kf * 2.0 * z);
        sum += coef;
    }
    sum
}

/// Macdonald function `K_nu(x)` of real order, from the trapezoidal rule on
/// `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt`, which converges
/// geometrically in the step for this entire integrand.
pub fn macdonald(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("macdonald", x, "x > 0"));
    }
    if nu.is_nan() {
        return Err(domain("macdonald", nu, "a real order"));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    let nu = nu.abs();
    // The integrand has width ~ 1/sqrt(x) around t = 0 for large x.
    let h = if x > 25.0 { 0.5 / x.sqrt() } else { 0.1 };
    let log_term = |t: f64| {
        let half = (0.5 * t).sinh();
        -2.0 * x * half * half + nu * t + (0.5 * (1.0 + (-2.0 * nu * t).exp())).ln()
    };
    let mut sum = 0.5 * log_term(0.0).exp();
    let mut k = 1usize;
    loop {
        let t = k as f64 * h;
        let term = log_term(t).exp();
        sum += term;
        let decreasing = x * t.sinh() > nu;
        if decreasing && term <= 1e-18 * sum {
            break;
        }
        k += 1;
        if k > 100_000 {
            return Err(CasimirError::NonConvergence {
                what: "macdonald",
                max_terms: k,
                abs_err: term * h,
            });
        }
    }
    Ok((-x).exp() * h * sum)
}

/// `coth(x)` evaluated as `1 + 2e^{-2x}/(1 - e^{-2x})`.
pub fn coth_stable(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("coth_stable", x, "x > 0"));
    }
    Ok(coth_kernel(x))
}

/// `1/sinh(x)` evaluated as `2e^{-x}/(1 - e^{-2x})`.
pub fn inv_sinh_stable(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("inv_sinh_stable", x, "x > 0"));
    }
    Ok(inv_sinh_kernel(x))
}

#[inline]
pub(crate) fn coth_kernel(x: f64) -> f64 {
    1.0 + coth_minus_one(x)
}

/// `coth(x) - 1 = 2e^{-2x}/(1 - e^{-2x})`, exponentially small for large x.
#[inline]
pub(crate) fn coth_minus_one(x: f64) -> f64 {
    let e2 = (-2.0 * x).exp();
    2.0 * e2 / -(-2.0 * x).exp_m1()
}

#[inline]
pub(crate) fn inv_sinh_kernel(x: f64) -> f64 {
    2.0 * (-x).exp() / -(-2.0 * x).exp_m1()
}
