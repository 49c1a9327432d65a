//! Truncation control, result records and the summation machinery shared by
//! every series in the crate.

use std::fmt;

use crate::error::{CasimirError, Result};

/// Truncation policy for every adaptive series.
///
/// A series stops once its bounded tail falls below `rel_tol * |partial sum|`
/// (and at least `min_terms` terms were taken). Reaching `max_terms` first is
/// reported as [`CasimirError::NonConvergence`], never as a silent return.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
    pub min_terms: usize,
    /// Smallest scaled temperature accepted by the Poisson-resummed forms.
    pub poisson_xi_floor: f64,
}

pub const DEFAULT_POISSON_XI_FLOOR: f64 = 0.05;

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 1_000_000,
            min_terms: 8,
            poisson_xi_floor: DEFAULT_POISSON_XI_FLOOR,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize, min_terms: usize) -> Result<Self> {
        let ctl = Self {
            rel_tol,
            max_terms,
            min_terms,
            ..Self::default()
        };
        ctl.validate()?;
        Ok(ctl)
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn with_poisson_floor(mut self, floor: f64) -> Self {
        self.poisson_xi_floor = floor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(CasimirError::InvalidControl("rel_tol must be finite and > 0"));
        }
        if self.max_terms == 0 {
            return Err(CasimirError::InvalidControl("max_terms must be positive"));
        }
        if self.min_terms == 0 || self.min_terms > self.max_terms {
            return Err(CasimirError::InvalidControl(
                "min_terms must satisfy 1 <= min_terms <= max_terms",
            ));
        }
        if !(self.poisson_xi_floor >= 0.0) {
            return Err(CasimirError::InvalidControl("poisson_xi_floor must be >= 0"));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn tail_small(&self, tail: f64, partial: f64, terms: usize) -> bool {
        terms >= self.min_terms && tail <= self.rel_tol * partial.abs()
    }

    pub(crate) fn exhausted(&self, what: &'static str, abs_err: f64) -> CasimirError {
        CasimirError::NonConvergence {
            what,
            max_terms: self.max_terms,
            abs_err,
        }
    }
}

/// The series forms of the free energy and pressure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RepresentationKind {
    /// Double sum of half-integer Macdonald functions.
    Bessel,
    /// Single sum of hyperbolic kernels.
    CothSingle,
    /// Exponential double sum over the (n, m) lattice.
    DoubleSum,
    /// Poisson-resummed form, suited to high temperature.
    Poisson,
    /// Symmetric two-dimensional lattice sum.
    Lattice,
    /// Transverse-mode sum of black-body integrals.
    ModeIntegral,
    AsymptoticLow,
    AsymptoticHigh,
}

impl RepresentationKind {
    pub const ALL: [RepresentationKind; 8] = [
        Self::Bessel,
        Self::CothSingle,
        Self::DoubleSum,
        Self::Poisson,
        Self::Lattice,
        Self::ModeIntegral,
        Self::AsymptoticLow,
        Self::AsymptoticHigh,
    ];

    /// Short name used on the command line and in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            Self::Bessel => "bessel",
            Self::CothSingle => "coth",
            Self::DoubleSum => "double",
            Self::Poisson => "poisson",
            Self::Lattice => "lattice",
            Self::ModeIntegral => "mode-integral",
            Self::AsymptoticLow => "low",
            Self::AsymptoticHigh => "high",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for RepresentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A series value with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    /// Bounded truncation tail plus a rounding allowance; always >= 0.
    pub abs_err_est: f64,
    pub terms_used: usize,
    pub rep: RepresentationKind,
}

impl EvalResult {
    pub fn new(value: f64, abs_err_est: f64, terms_used: usize, rep: RepresentationKind) -> Self {
        debug_assert!(abs_err_est >= 0.0);
        Self {
            value,
            abs_err_est,
            terms_used,
            rep,
        }
    }

    pub fn exact(value: f64, rep: RepresentationKind) -> Self {
        Self::new(value, 0.0, 0, rep)
    }

    /// Affine map `offset + scale * value`, carrying the error along.
    pub fn affine(self, offset: f64, scale: f64) -> Self {
        let value = offset + scale * self.value;
        let rounding = f64::EPSILON * (offset.abs() + (scale * self.value).abs());
        Self {
            value,
            abs_err_est: scale.abs() * self.abs_err_est + rounding,
            ..self
        }
    }
}

/// Neumaier's variant of compensated (Kahan) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
    abs_sum: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += value.abs();
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// Sum of the magnitudes of everything added, used for rounding budgets.
    #[inline]
    pub fn abs_total(&self) -> f64 {
        self.abs_sum
    }

    /// Rounding allowance for terms that each carry a few ulps of error.
    #[inline]
    pub fn rounding_bound(&self) -> f64 {
        8.0 * f64::EPSILON * self.abs_sum
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Richardson extrapolation of partial sums `S(R)` taken on a geometric
/// schedule `R_k = R_0 q^k`, whose remainder expands in powers
/// `R^p0, R^(p0 - step), R^(p0 - 2 step), ...`.
#[derive(Debug, Clone)]
pub struct PowerLawExtrapolator {
    ratio: f64,
    leading: f64,
    step: f64,
    max_columns: usize,
    rows: Vec<Vec<f64>>,
}

impl PowerLawExtrapolator {
    pub fn new(ratio: f64, leading_exponent: f64, step: f64) -> Self {
        Self {
            ratio,
            leading: leading_exponent,
            step,
            max_columns: 8,
            rows: Vec::new(),
        }
    }

    /// Feeds the next partial sum; returns the current best estimate and its
    /// distance to the next-lower extrapolation order (the error estimate).
    pub fn push(&mut self, partial: f64) -> Option<(f64, f64)> {
        let mut row = vec![partial];
        if let Some(prev) = self.rows.last() {
            let cols = prev.len().min(self.max_columns);
            for j in 1..=cols {
                let r = self.ratio.powf(self.leading - (j - 1) as f64 * self.step);
                let next = (row[j - 1] - r * prev[j - 1]) / (1.0 - r);
                row.push(next);
            }
        }
        let best = *row.last().unwrap();
        let estimate = (row.len() >= 2).then(|| (best, (best - row[row.len() - 2]).abs()));
        self.rows.push(row);
        estimate
    }

    pub fn levels(&self) -> usize {
        self.rows.len()
    }
}

/// Upper bound on `sum_{q > N} t_q` when every ratio `t_{q+1}/t_q <= ratio < 1`.
#[inline]
pub fn geometric_tail(last_term: f64, ratio: f64) -> f64 {
    if ratio >= 1.0 {
        f64::INFINITY
    } else {
        last_term.abs() * ratio / (1.0 - ratio)
    }
}

/// A one-dimensional series summed until its bounded tail is small.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SeriesSum {
    pub value: f64,
    pub tail: f64,
    pub rounding: f64,
    pub terms: usize,
}

impl SeriesSum {
    pub fn abs_err(&self) -> f64 {
        self.tail + self.rounding
    }
}

/// Sums `term(1), term(2), ...` while `ratio(n)` bounds every later ratio
/// `t_{k+1}/t_k` for `k >= n`. Stops once the geometric tail is below
/// `rel_tol * |offset + partial|`, so a known constant can anchor the
/// relative criterion.
pub(crate) fn sum_ratio_bounded(
    what: &'static str,
    ctl: &SeriesControl,
    offset: f64,
    term: impl Fn(usize) -> f64,
    ratio: impl Fn(usize) -> f64,
) -> Result<SeriesSum> {
    let mut acc = CompensatedSum::new();
    let mut tail = f64::INFINITY;
    for n in 1..=ctl.max_terms {
        let t = term(n);
        acc.add(t);
        tail = geometric_tail(t, ratio(n));
        if ctl.tail_small(tail, offset + acc.value(), n) {
            return Ok(SeriesSum {
                value: acc.value(),
                tail,
                rounding: acc.rounding_bound(),
                terms: n,
            });
        }
    }
    Err(ctl.exhausted(what, tail))
}

/// Bound on `sum_{q > q0} env(q)` for an envelope whose consecutive ratio is
/// non-increasing once it drops below one: terms are added explicitly until
/// the geometric remainder is negligible against what was summed.
pub(crate) fn envelope_tail(q0: usize, env: impl Fn(usize) -> f64) -> f64 {
    let mut tail = 0.0;
    let mut prev = f64::INFINITY;
    for q in q0 + 1..q0 + 10_000_000 {
        let e = env(q);
        if e == 0.0 {
            return tail;
        }
        tail += e;
        let ratio = e / prev;
        if prev.is_finite() && ratio < 1.0 {
            let rest = e * ratio / (1.0 - ratio);
            if rest <= 1e-3 * tail {
                return tail + rest;
            }
        }
        prev = e;
    }
    f64::INFINITY
}

/// Ordered pairs `(n, m)` with `n m = q`, in increasing `n`.
pub(crate) fn divisor_pairs(q: usize) -> impl Iterator<Item = (usize, usize)> {
    let root = (q as f64).sqrt() as usize + 1;
    let mut small: Vec<usize> = (1..=root.min(q))
        .filter(|n| n * n <= q && q.is_multiple_of(*n))
        .collect();
    let large: Vec<usize> = small.iter().rev().map(|n| q / n).filter(|&m| m * m != q).collect();
    small.extend(large);
    small.into_iter().map(move |n| (n, q / n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_validation() {
        assert!(SeriesControl::default().validate().is_ok());
        assert!(SeriesControl::new(0.0, 10, 1).is_err());
        assert!(SeriesControl::new(1e-10, 4, 8).is_err());
        assert!(SeriesControl::new(1e-10, 0, 0).is_err());
        assert!(SeriesControl::new(1e-10, 100, 8).is_ok());
    }

    #[test]
    fn compensated_sum_recovers_cancelled_bits() {
        let mut acc = CompensatedSum::new();
        for v in [1.0, 1e100, 1.0, -1e100] {
            acc.add(v);
        }
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn extrapolator_accelerates_zeta_partial_sums() {
        // sum_{n<=R} n^-3 = zeta(3) - R^-2/2 + R^-3/2 - ...
        let zeta3 = 1.202_056_903_159_594_3;
        let mut ex = PowerLawExtrapolator::new(2.0, -2.0, 1.0);
        let mut last = None;
        for k in 0..7 {
            let r = 8usize << k;
            let s: CompensatedSum = (1..=r).map(|n| (n as f64).powi(-3)).collect();
            last = ex.push(s.value());
        }
        let (v, err) = last.unwrap();
        assert!((v - zeta3).abs() < 1e-14, "{v}");
        assert!(err < 1e-10);
    }

    #[test]
    fn representation_names_round_trip() {
        for rep in RepresentationKind::ALL {
            assert_eq!(RepresentationKind::from_name(rep.name()), Some(rep));
        }
        assert_eq!(RepresentationKind::from_name("auto"), None);
    }

    #[test]
    fn divisor_pairs_cover_each_factorisation_once() {
        let pairs: Vec<_> = divisor_pairs(12).collect();
        assert_eq!(pairs, vec![(1, 12), (2, 6), (3, 4), (4, 3), (6, 2), (12, 1)]);
        assert_eq!(divisor_pairs(9).count(), 3);
        assert_eq!(divisor_pairs(1).collect::<Vec<_>>(), vec![(1, 1)]);
    }

    #[test]
    fn envelope_tail_of_geometric_series() {
        let t = envelope_tail(0, |q| 0.5f64.powi(q as i32));
        assert!((t - 1.0).abs() < 1e-3);
        assert!(t >= 1.0 - 1e-12);
    }

    #[test]
    fn geometric_tail_bound() {
        assert_eq!(geometric_tail(1.0, 0.5), 1.0);
        assert!(geometric_tail(1.0, 1.0).is_infinite());
    }
}
