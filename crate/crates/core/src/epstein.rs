//! Epstein zeta functions over the positive-integer lattice,
//! `E_N(z; a_1..a_N) = sum_{n_i >= 1} (a_1 n_1^2 + ... + a_N n_N^2 + M^2)^-z`,
//! by direct summation where it converges and by the Bessel-series
//! continuation for `N = 2`, `M^2 = 0` everywhere else.

use std::f64::consts::PI;

use crate::error::{domain, require_positive, CasimirError, Result};
use crate::series::{
    divisor_pairs, envelope_tail, CompensatedSum, EvalResult, PowerLawExtrapolator, RepresentationKind, SeriesControl,
};
use crate::specfun::{ln_gamma, macdonald, macdonald_half, recip_gamma, riemann_zeta};

#[derive(Debug, Clone, PartialEq)]
pub struct EpsteinParams {
    pub z: f64,
    pub a: Vec<f64>,
    pub m2: f64,
}

impl EpsteinParams {
    pub fn new(z: f64, a: Vec<f64>, m2: f64) -> Result<Self> {
        let p = Self { z, a, m2 };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() {
            return Err(CasimirError::InvalidControl("Epstein sum needs N >= 1 coefficients"));
        }
        for &ai in &self.a {
            require_positive("epstein coefficient", ai)?;
        }
        if !(self.m2 >= 0.0 && self.m2.is_finite()) {
            return Err(domain("epstein M^2", self.m2, "finite and >= 0"));
        }
        if !self.z.is_finite() {
            return Err(domain("epstein exponent", self.z, "finite"));
        }
        Ok(())
    }
}

/// Direct lattice sum on growing boxes `[1, R]^N` with `R` doubling.
///
/// The box remainder expands in powers `R^(N-2z)`, `R^(N-2z-1)`, ... so the
/// box sums are Richardson-extrapolated; `abs_err_est` is the gap between the
/// two highest extrapolation orders on the last level. The result is tagged
/// [`RepresentationKind::Lattice`].
pub fn epstein_direct(p: &EpsteinParams, ctl: &SeriesControl) -> Result<EvalResult> {
    p.validate()?;
    ctl.validate()?;
    let n = p.dim();
    let boundary = n as f64 / 2.0;
    if p.z <= boundary {
        return Err(CasimirError::OutsideConvergenceRegion {
            what: "epstein_direct",
            z: p.z,
            boundary,
        });
    }
    let term = |idx: &[usize]| {
        let q: f64 = idx.iter().zip(&p.a).map(|(&k, &ai)| ai * (k * k) as f64).sum::<f64>() + p.m2;
        q.powf(-p.z)
    };

    let mut acc = CompensatedSum::new();
    let mut extrap = PowerLawExtrapolator::new(2.0, n as f64 - 2.0 * p.z, 1.0);
    let mut inner = 0usize;
    // Leave room for about five doublings inside the term budget.
    let max_edge = (ctl.max_terms as f64).powf(1.0 / n as f64).floor() as usize;
    let mut edge = (max_edge >> 5).clamp(4, 15);
    let mut last = (0.0, f64::INFINITY);
    loop {
        let points = edge.checked_pow(n as u32).unwrap_or(usize::MAX);
        if points > ctl.max_terms {
            return Err(ctl.exhausted("epstein_direct", last.1));
        }
        add_box_shell(n, inner, edge, &term, &mut acc);
        let rounding = acc.rounding_bound();
        if let Some((best, change)) = extrap.push(acc.value()) {
            last = (best, change + rounding);
            if extrap.levels() >= 3 && points >= ctl.min_terms && last.1 <= ctl.rel_tol * best.abs() {
                return Ok(EvalResult::new(best, last.1, points, RepresentationKind::Lattice));
            }
        }
        inner = edge;
        edge *= 2;
    }
}

/// Adds every lattice point of `[1, outer]^N` with some coordinate above `inner`.
fn add_box_shell<F: Fn(&[usize]) -> f64>(n: usize, inner: usize, outer: usize, term: &F, acc: &mut CompensatedSum) {
    let mut idx = vec![1usize; n];
    loop {
        if idx.iter().any(|&k| k > inner) {
            acc.add(term(&idx));
        }
        let mut d = 0;
        loop {
            if d == n {
                return;
            }
            if idx[d] < outer {
                idx[d] += 1;
                break;
            }
            idx[d] = 1;
            d += 1;
        }
    }
}

/// `E_1(z; a) = a^-z zeta(2z)`, valid on the whole continuation.
pub fn epstein1_closed(z: f64, a: f64) -> Result<f64> {
    require_positive("epstein1 coefficient", a)?;
    if z == 0.5 {
        return Err(CasimirError::Pole {
            what: "epstein1_closed",
            at: z,
            residue: format!("residue {} from zeta(2z)", 0.5 / a.sqrt()),
        });
    }
    Ok(a.powf(-z) * riemann_zeta(2.0 * z)?)
}

/// Continuation of `E_2(z; a1, a2)` (with `M^2 = 0`) to all real `z` except
/// the poles at `z = 1` and `z = 1/2`:
///
/// `E_2 = -(a1^-z/2) zeta(2z)
///        + (1/2) sqrt(pi/a2) Gamma(z-1/2)/Gamma(z) E_1(z-1/2; a1)
///        + 2 pi^z / (Gamma(z) a2^(z/2+1/4))
///          * sum_{n,m>=1} m^(z-1/2) (a1 n^2)^(-(z-1/2)/2) K_{z-1/2}(2 pi m n sqrt(a1/a2))`.
///
/// The Bessel double sum is accumulated in shells of constant `q = n m` and
/// stopped once an explicit envelope of all remaining shells is below
/// `rel_tol` times the running value. Tagged [`RepresentationKind::Bessel`].
pub fn epstein2_continued(z: f64, a1: f64, a2: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    require_positive("epstein2 a1", a1)?;
    require_positive("epstein2 a2", a2)?;
    ctl.validate()?;
    if !z.is_finite() {
        return Err(domain("epstein2_continued", z, "finite exponent"));
    }
    if z == 1.0 {
        return Err(CasimirError::Pole {
            what: "epstein2_continued",
            at: z,
            residue: format!("residue pi/(4 sqrt(a1 a2)) = {}", PI / (4.0 * (a1 * a2).sqrt())),
        });
    }
    if z == 0.5 {
        return Err(CasimirError::Pole {
            what: "epstein2_continued",
            at: z,
            residue: format!(
                "residue -(1/sqrt(a1) + 1/sqrt(a2))/4 = {}",
                -0.25 * (1.0 / a1.sqrt() + 1.0 / a2.sqrt())
            ),
        });
    }

    let t1 = -0.5 * a1.powf(-z) * riemann_zeta(2.0 * z)?;
    let rg = recip_gamma(z);
    let t2 = if rg == 0.0 {
        0.0
    } else {
        0.5 * (PI / a2).sqrt() * a1.powf(0.5 - z) * rg * gamma_zeta_product(z)?
    };

    let nu = z - 0.5;
    let mut bessel = BesselLatticeSum::new(nu, a1, a2);
    let sum = if rg == 0.0 {
        EvalResult::exact(0.0, RepresentationKind::Bessel)
    } else {
        bessel.evaluate(ctl)?
    };
    // 2 pi^z / (Gamma(z) a2^(z/2 + 1/4)), computed in log space.
    let prefactor_ln = (2.0f64).ln() + z * PI.ln() - (z / 2.0 + 0.25) * a2.ln();
    let prefactor = if rg == 0.0 { 0.0 } else { rg * prefactor_ln.exp() };
    let t3 = prefactor * sum.value;

    let value = t1 + t2 + t3;
    let special = 1e-14 * (t1.abs() + t2.abs() + t3.abs());
    let abs_err = prefactor.abs() * sum.abs_err_est + special + 4.0 * f64::EPSILON * value.abs();
    Ok(EvalResult::new(
        value,
        abs_err,
        sum.terms_used,
        RepresentationKind::Bessel,
    ))
}

/// `Gamma(z - 1/2) zeta(2z - 1)`, using
/// `Gamma(z-1/2) zeta(2z-1) = pi^(2z-3/2) Gamma(1-z) zeta(2-2z)` below `z = 1/2`
/// where `Gamma(z-1/2)` has poles.
fn gamma_zeta_product(z: f64) -> Result<f64> {
    if z > 0.5 {
        let (lg, sg) = ln_gamma(z - 0.5)?;
        Ok(sg * lg.exp() * riemann_zeta(2.0 * z - 1.0)?)
    } else {
        let (lg, sg) = ln_gamma(1.0 - z)?;
        let ln_mag = (2.0 * z - 1.5) * PI.ln() + lg;
        Ok(sg * ln_mag.exp() * riemann_zeta(2.0 - 2.0 * z)?)
    }
}

/// `sum_{n,m>=1} m^nu (sqrt(a1) n)^-nu K_nu(2 pi m n sqrt(a1/a2))`.
struct BesselLatticeSum {
    nu: f64,
    half_order: Option<u32>,
    a1: f64,
    rate: f64,
}

impl BesselLatticeSum {
    fn new(nu: f64, a1: f64, a2: f64) -> Self {
        let shifted = nu.abs() - 0.5;
        let half_order = (shifted >= 0.0 && shifted.fract() == 0.0 && shifted < 64.0).then_some(shifted as u32);
        Self {
            nu,
            half_order,
            a1,
            rate: 2.0 * PI * (a1 / a2).sqrt(),
        }
    }

    fn k(&self, x: f64) -> Result<f64> {
        match self.half_order {
            Some(n) => macdonald_half(n, x),
            None => macdonald(self.nu, x),
        }
    }

    fn term(&self, n: usize, m: usize) -> Result<f64> {
        let x = self.rate * (n * m) as f64;
        let scale = ((m as f64) / (self.a1.sqrt() * n as f64)).powf(self.nu);
        Ok(scale * self.k(x)?)
    }

    /// Envelope on the magnitude of any term of shell `q`: at most
    /// `2 sqrt(q)` terms, each bounded by `q^|nu| a1^(-nu/2) Kbar(rate q)`
    /// where `Kbar` decays at least like `e^-x` beyond `x0 = rate q0`.
    fn shell_envelope(&self, q: usize, k_at_q0: f64, q0: usize) -> f64 {
        let x = self.rate * q as f64;
        let x0 = self.rate * q0 as f64;
        let kbar = if self.nu.abs() >= 0.5 {
            k_at_q0 * (x0 - x).exp()
        } else {
            (PI / (2.0 * x)).sqrt() * (-x).exp()
        };
        let qf = q as f64;
        2.0 * qf.sqrt() * qf.powf(self.nu.abs()) * self.a1.powf(-self.nu / 2.0).max(self.a1.powf(self.nu / 2.0)) * kbar
    }

    fn tail_bound(&self, q0: usize) -> Result<f64> {
        let k0 = if self.nu.abs() >= 0.5 {
            self.k(self.rate * q0 as f64)?
        } else {
            0.0
        };
        Ok(envelope_tail(q0, |q| self.shell_envelope(q, k0, q0)))
    }

    fn evaluate(&mut self, ctl: &SeriesControl) -> Result<EvalResult> {
        let mut acc = CompensatedSum::new();
        let mut terms = 0usize;
        let mut tail = f64::INFINITY;
        for q in 1usize.. {
            for (n, m) in divisor_pairs(q) {
                acc.add(self.term(n, m)?);
                terms += 1;
            }
            // The envelope only becomes useful once the exponential dominates.
            if terms >= ctl.min_terms && (self.rate * q as f64 > 5.0 || q % 8 == 0) {
                tail = self.tail_bound(q)?;
                if ctl.tail_small(tail, acc.value(), terms) {
                    break;
                }
            }
            if terms >= ctl.max_terms {
                return Err(ctl.exhausted("epstein2 Bessel sum", tail));
            }
        }
        Ok(EvalResult::new(
            acc.value(),
            tail + acc.rounding_bound() + 1e-14 * acc.abs_total(),
            terms,
            RepresentationKind::Bessel,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn direct_one_dimensional_reduces_to_zeta() {
        let p = EpsteinParams::new(1.0, vec![1.0], 0.0).unwrap();
        let r = epstein_direct(&p, &ctl()).unwrap();
        assert!((r.value - PI * PI / 6.0).abs() < 1e-12, "{}", r.value);
        assert!(r.abs_err_est < 1e-11);
        let p = EpsteinParams::new(1.0, vec![4.0], 0.0).unwrap();
        let r = epstein_direct(&p, &ctl()).unwrap();
        assert!((r.value - PI * PI / 24.0).abs() < 1e-12);
    }

    #[test]
    fn direct_rejects_divergent_exponent() {
        let p = EpsteinParams::new(1.0, vec![1.0, 1.0], 0.0).unwrap();
        assert!(matches!(
            epstein_direct(&p, &ctl()),
            Err(CasimirError::OutsideConvergenceRegion { .. })
        ));
        assert!(EpsteinParams::new(2.0, vec![1.0, -1.0], 0.0).is_err());
        assert!(EpsteinParams::new(2.0, vec![], 0.0).is_err());
        assert!(EpsteinParams::new(2.0, vec![1.0], -1.0).is_err());
    }

    #[test]
    fn direct_two_dimensional_reference() {
        // Frozen from a brute-force 2^15 x 2^15 box plus an Euler-Maclaurin
        // correction of the box remainder.
        let p = EpsteinParams::new(2.0, vec![1.0, 1.0], 0.0).unwrap();
        let r = epstein_direct(&p, &ctl()).unwrap();
        assert!((r.value - 0.424_379_776_211_846_84).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn direct_with_mass_matches_brute_force() {
        // N = 3 converges quickly enough at z = 4 to check by plain summation.
        let p = EpsteinParams::new(4.0, vec![1.0, 2.0, 0.5], 0.3).unwrap();
        let r = epstein_direct(&p, &ctl().with_rel_tol(1e-10)).unwrap();
        let mut brute = CompensatedSum::new();
        for i in 1..=150usize {
            for j in 1..=150usize {
                for k in 1..=150usize {
                    let q = (i * i) as f64 + 2.0 * (j * j) as f64 + 0.5 * (k * k) as f64 + 0.3;
                    brute.add(q.powf(-4.0));
                }
            }
        }
        // The plain cube misses a positive remainder of a few 1e-12.
        let missing = r.value - brute.value();
        assert!(missing > 0.0 && missing < 1e-11, "{missing}");
    }

    #[test]
    fn epstein1_values() {
        assert!((epstein1_closed(1.0, 1.0).unwrap() - PI * PI / 6.0).abs() < 1e-15);
        assert!((epstein1_closed(2.0, 1.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-15);
        assert_eq!(epstein1_closed(-1.0, 1.0).unwrap(), 0.0);
        assert!(epstein1_closed(0.5, 1.0).is_err());
        assert!(epstein1_closed(1.0, 0.0).is_err());
    }

    #[test]
    fn continued_matches_direct_in_overlap() {
        let c = ctl();
        for &(a1, a2) in &[(1.0, 1.0), (1.0, 4.0), (0.25, 1.0)] {
            for &z in &[1.6, 2.0, 2.5, 3.0] {
                let cont = epstein2_continued(z, a1, a2, &c).unwrap();
                let p = EpsteinParams::new(z, vec![a1, a2], 0.0).unwrap();
                let direct = epstein_direct(&p, &c).unwrap();
                let diff = (cont.value - direct.value).abs();
                assert!(diff < 1e-9, "z={z} a=({a1},{a2}) diff={diff}");
                assert!(diff <= 10.0 * (cont.abs_err_est + direct.abs_err_est));
            }
        }
    }

    #[test]
    fn continued_poles_and_trivial_points() {
        let c = ctl();
        assert!(matches!(
            epstein2_continued(1.0, 1.0, 1.0, &c),
            Err(CasimirError::Pole { .. })
        ));
        assert!(matches!(
            epstein2_continued(0.5, 1.0, 1.0, &c),
            Err(CasimirError::Pole { .. })
        ));
        assert!(epstein2_continued(2.0, 0.0, 1.0, &c).is_err());
        // At z = 0 only -zeta(0)/2 survives.
        let v = epstein2_continued(0.0, 1.0, 3.0, &c).unwrap();
        assert!((v.value - 0.25).abs() < 1e-15);
        // At negative integers only the first term survives and zeta(2z) = 0.
        let v = epstein2_continued(-2.0, 1.0, 3.0, &c).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn continued_is_exchange_symmetric_off_overlap() {
        let c = ctl();
        for &z in &[-0.7, 0.3, 0.8, 1.3] {
            let x = epstein2_continued(z, 1.0, 2.0, &c).unwrap().value;
            let y = epstein2_continued(z, 2.0, 1.0, &c).unwrap().value;
            assert!(((x - y) / y).abs() < 1e-10, "z={z}: {x} vs {y}");
        }
    }

    #[test]
    fn continued_residue_near_unit_exponent() {
        let c = ctl();
        let h = 1e-6;
        let res = 0.5
            * h
            * (epstein2_continued(1.0 + h, 1.0, 2.0, &c).unwrap().value
                - epstein2_continued(1.0 - h, 1.0, 2.0, &c).unwrap().value);
        assert!((res - PI / (4.0 * 2f64.sqrt())).abs() < 1e-6, "{res}");
    }
}
