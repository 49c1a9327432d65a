//! The invariant suite run by `casimir verify`: every cross-representation
//! check, inversion residual, summation identity and asymptotic window, with
//! the measured residual next to its tolerance.

use std::f64::consts::PI;

use crate::epstein::{epstein2_continued, epstein_direct, EpsteinParams};
use crate::error::Result;
use crate::free_energy::{
    f_conducting_single, free_energy, free_energy_bessel_tampered, free_energy_high_t, free_energy_low_t,
    zero_temperature_energy, PlateSystem, ThermalPoint,
};
use crate::pressure::{pressure, pressure_high_t, pressure_net_dfdxi, pressure_poisson};
use crate::series::{EvalResult, RepresentationKind as Rep, SeriesControl};
use crate::symmetry::{
    identity_alternating, identity_plain, naive_boyer_residual, sb_to_casimir, tis_residual_f1, tis_residual_f2,
    tis_residual_nontrivial, PiRational, SplitFreeEnergies,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    /// A few points per check.
    Coarse,
    /// Every grid point named by the checks.
    Full,
}

impl Grid {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "coarse" => Some(Self::Coarse),
            "full" => Some(Self::Full),
            _ => None,
        }
    }

    fn pick(self, full: &[f64], coarse: &[f64]) -> Vec<f64> {
        match self {
            Grid::Full => full.to_vec(),
            Grid::Coarse => coarse.to_vec(),
        }
    }
}

/// Deliberate breakage used to confirm the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tamper {
    /// Flip the sign of the `K_{3/2}(2x)` term of the Bessel form.
    BesselSign,
}

impl Tamper {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "bessel-sign" => Some(Self::BesselSign),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Pass when the measured value is at most the tolerance.
    AtMost,
    /// Pass when the measured value exceeds the tolerance.
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub group: &'static str,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
    /// Evaluation error, when the check could not be computed.
    pub error: Option<String>,
}

impl CheckOutcome {
    fn from(group: &'static str, name: String, measured: Result<f64>, tolerance: f64, bound: Bound) -> Self {
        match measured {
            Ok(m) => {
                let passed = match bound {
                    Bound::AtMost => m <= tolerance,
                    Bound::Above => m > tolerance,
                };
                Self {
                    group,
                    name,
                    measured: m,
                    tolerance,
                    bound,
                    passed,
                    error: None,
                }
            }
            Err(e) => Self {
                group,
                name,
                measured: f64::NAN,
                tolerance,
                bound,
                passed: false,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub grid: Grid,
    pub tamper: Option<Tamper>,
    pub ctl: SeriesControl,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid: Grid::Full,
            tamper: None,
            ctl: SeriesControl::default(),
        }
    }
}

/// Truncation used for the exponentially convergent series. The absolute
/// tolerances of the suite (1e-8 on values near 1e4 at `xi = 5`) sit below
/// what the default `1e-12` relative truncation guarantees.
pub const SERIES_REL_TOL: f64 = 1e-14;

struct Suite {
    opts: VerifyOptions,
    /// `opts.ctl` tightened to [`SERIES_REL_TOL`].
    tight: SeriesControl,
    out: Vec<CheckOutcome>,
}

impl Suite {
    fn at_most(&mut self, group: &'static str, name: String, measured: Result<f64>, tol: f64) {
        self.out
            .push(CheckOutcome::from(group, name, measured, tol, Bound::AtMost));
    }

    fn above(&mut self, group: &'static str, name: String, measured: Result<f64>, tol: f64) {
        self.out
            .push(CheckOutcome::from(group, name, measured, tol, Bound::Above));
    }

    fn boyer_energy(&self, xi: f64, rep: Rep) -> Result<EvalResult> {
        let sys = PlateSystem::boyer(1.0)?;
        let t = ThermalPoint::from_xi(xi, 1.0)?;
        match (rep, self.opts.tamper) {
            (Rep::Bessel, Some(Tamper::BesselSign)) => free_energy_bessel_tampered(&sys, &t, &self.tight),
            (Rep::Lattice | Rep::ModeIntegral, _) => free_energy(&sys, &t, Some(rep), &self.opts.ctl),
            _ => free_energy(&sys, &t, Some(rep), &self.tight),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Runs every check; the suite passes when every outcome passed.
pub fn run(opts: &VerifyOptions) -> Vec<CheckOutcome> {
    let mut s = Suite {
        opts: *opts,
        tight: opts.ctl.with_rel_tol(opts.ctl.rel_tol.min(SERIES_REL_TOL)),
        out: Vec::new(),
    };
    zero_temperature_anchors(&mut s);
    representation_equivalence(&mut s);
    pressure_consistency(&mut s);
    asymptotic_windows(&mut s);
    inversion(&mut s);
    split_identity(&mut s);
    summation_identities(&mut s);
    epstein(&mut s);
    s.out
}

pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|o| o.passed)
}

fn zero_temperature_anchors(s: &mut Suite) {
    let ctl = s.tight;
    let xi = 0.02;
    let boyer = (|| {
        let sys = PlateSystem::boyer(1.0)?;
        let f = free_energy(&sys, &ThermalPoint::from_xi(xi, 1.0)?, Some(Rep::Bessel), &ctl)?;
        Ok((f.value - 7.0 * PI * PI / 5760.0).abs())
    })();
    s.at_most("anchors", "boyer d^3 F at xi=0.02".into(), boyer, 1e-6);
    // The conductor profile approaches its limit only as xi^3.
    let cond = f_conducting_single(0.001, &ctl).map(|f| (f.value + PI * PI / 720.0).abs());
    s.at_most("anchors", "conductor d^3 F at xi=0.001".into(), cond, 1e-6);
    let p = (|| {
        let p = pressure_net_dfdxi(&ThermalPoint::from_xi(xi, 1.0)?, 1.0, &ctl)?;
        Ok((p.value - 7.0 * PI * PI / 1920.0).abs())
    })();
    s.at_most("anchors", "boyer d^4 P at xi=0.02".into(), p, 1e-5);
}

fn representation_equivalence(s: &mut Suite) {
    let grid = s
        .opts
        .grid
        .pick(&[0.1, 0.2, 0.3, 0.5, 0.8, 1.0, 2.0, 5.0], &[0.1, 0.5, 2.0]);
    let reps: [(Rep, f64); 6] = [
        (Rep::Bessel, 1e-8),
        (Rep::CothSingle, 1e-8),
        (Rep::DoubleSum, 1e-8),
        (Rep::ModeIntegral, 1e-6),
        (Rep::Poisson, 1e-8),
        (Rep::Lattice, 1e-5),
    ];
    for xi in grid {
        let values: Vec<Result<EvalResult>> = reps.iter().map(|&(r, _)| s.boyer_energy(xi, r)).collect();
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                let tol = reps[i].1.max(reps[j].1);
                let name = format!("{} vs {} at xi={xi}", reps[i].0.name(), reps[j].0.name());
                let diff = match (&values[i], &values[j]) {
                    (Ok(a), Ok(b)) => Ok((a.value - b.value).abs()),
                    (Err(e), _) | (_, Err(e)) => Err(e.clone()),
                };
                s.at_most("equivalence", name, diff, tol);
            }
        }
    }
}

fn pressure_consistency(s: &mut Suite) {
    let ctl = s.tight;
    let grid = s.opts.grid.pick(&[0.1, 0.3, 0.5, 1.0, 2.0, 5.0], &[0.1, 1.0]);
    for &xi in &grid {
        let diff = (|| {
            let t = ThermalPoint::from_xi(xi, 1.0)?;
            Ok((pressure_net_dfdxi(&t, 1.0, &ctl)?.value - pressure_poisson(&t, 1.0, &ctl)?.value).abs())
        })();
        s.at_most("pressure", format!("derivative vs poisson at xi={xi}"), diff, 1e-8);
    }
    let grid = s.opts.grid.pick(&[0.1, 0.5, 1.0, 2.0], &[0.5]);
    for xi in grid {
        let r = (|| {
            // Fixed beta, so xi moves with d.
            let t = ThermalPoint::from_xi(xi, 1.0)?;
            let h = 1e-5;
            let f = |d: f64| -> Result<f64> { Ok(free_energy(&PlateSystem::boyer(d)?, &t, None, &ctl)?.value) };
            let fd = -(f(1.0 + h)? - f(1.0 - h)?) / (2.0 * h);
            Ok(rel(pressure(&t, 1.0, None, &ctl)?.value, fd))
        })();
        s.at_most("pressure", format!("P = -dF/dd at xi={xi}"), r, 1e-5);
    }
    let homog = (|| {
        let lambda = 2.5;
        let p = pressure(&ThermalPoint::new(0.7)?, 1.3, None, &ctl)?.value;
        let q = pressure(&ThermalPoint::new(0.7 * lambda)?, 1.3 * lambda, None, &ctl)?.value;
        Ok(rel(q * lambda.powi(4), p))
    })();
    s.at_most("pressure", "homogeneity P(lb, ld) = P/l^4".into(), homog, 1e-10);
    let grid = s.opts.grid.pick(&[0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0], &[0.1, 1.0]);
    for xi in grid {
        let p = (|| pressure(&ThermalPoint::from_xi(xi, 1.0)?, 1.0, None, &ctl).map(|p| p.value))();
        s.above("pressure", format!("repulsion at xi={xi}"), p, 0.0);
    }
}

fn asymptotic_windows(s: &mut Suite) {
    let ctl = s.tight;
    let window = |xi: f64, high: bool| -> Result<f64> {
        let sys = PlateSystem::boyer(1.0)?;
        let t = ThermalPoint::from_xi(xi, 1.0)?;
        let exact = free_energy(&sys, &t, Some(Rep::Bessel), &ctl)?.value;
        let asym = if high {
            free_energy_high_t(&sys, &t)
        } else {
            free_energy_low_t(&sys, &t)
        };
        Ok(rel(asym, exact))
    };
    s.at_most(
        "asymptotics",
        "low-T free energy at xi=0.05".into(),
        window(0.05, false),
        1e-5,
    );
    s.at_most(
        "asymptotics",
        "high-T free energy at xi=2".into(),
        window(2.0, true),
        1e-4,
    );
    let p = (|| {
        let t = ThermalPoint::new(0.1)?;
        Ok(rel(pressure_high_t(&t, 1.0), pressure_poisson(&t, 1.0, &ctl)?.value))
    })();
    s.at_most("asymptotics", "high-T pressure at beta=0.1".into(), p, 1e-6);
    // Near the floor the Poisson pressure still resolves the thermal term.
    let cold = (|| {
        let t = ThermalPoint::from_xi(0.05, 1.0)?;
        Ok(rel(
            pressure_poisson(&t, 1.0, &ctl)?.value,
            pressure_net_dfdxi(&t, 1.0, &ctl)?.value,
        ))
    })();
    s.at_most("asymptotics", "poisson pressure at xi=0.05".into(), cold, 1e-8);
}

fn inversion(s: &mut Suite) {
    let ctl = s.tight;
    let grid = s.opts.grid.pick(&[0.1, 0.2, 0.5, 1.0, 2.0], &[0.1, 1.0]);
    for xi in grid {
        s.at_most(
            "inversion",
            format!("F1 at xi={xi}"),
            tis_residual_f1(xi, 1.0, &ctl),
            1e-8,
        );
        s.at_most(
            "inversion",
            format!("F2 at xi={xi}"),
            tis_residual_f2(xi, 1.0, &ctl),
            1e-8,
        );
        s.at_most(
            "inversion",
            format!("f_nt at xi={xi}"),
            tis_residual_nontrivial(xi, &s.opts.ctl),
            1e-8,
        );
    }
    s.at_most(
        "inversion",
        "F1 at fixed point 1/(4pi)".into(),
        tis_residual_f1(1.0 / (4.0 * PI), 1.0, &ctl),
        1e-12,
    );
    s.at_most(
        "inversion",
        "F2 at fixed point 1/(2pi)".into(),
        tis_residual_f2(1.0 / (2.0 * PI), 1.0, &ctl),
        1e-12,
    );
    s.at_most(
        "inversion",
        "f_nt at fixed point 1/(2pi)".into(),
        tis_residual_nontrivial(1.0 / (2.0 * PI), &s.opts.ctl),
        1e-12,
    );
    s.above(
        "inversion",
        "mixed pair breaks inversion at xi=0.5".into(),
        naive_boyer_residual(0.5, &ctl),
        1e-2,
    );
}

fn split_identity(s: &mut Suite) {
    let ctl = s.tight;
    let grid = s.opts.grid.pick(&[0.1, 0.3, 1.0, 3.0], &[0.3]);
    for xi in grid {
        let d = (|| {
            let split = SplitFreeEnergies::evaluate(xi, 1.0, &ctl)?;
            let sys = PlateSystem::boyer(1.0)?;
            let f = free_energy(&sys, &ThermalPoint::from_xi(xi, 1.0)?, Some(Rep::Bessel), &ctl)?;
            Ok((split.boyer() - f.value).abs())
        })();
        s.at_most("split", format!("F1 - F2 = F at xi={xi}"), d, 1e-8);
    }
    let r = sb_to_casimir();
    let exact = r.boyer_zero_t_from_tis == PiRational::new(7, 5760, 2);
    s.at_most(
        "split",
        "Stefan-Boltzmann terms give 7 pi^2/5760".into(),
        Ok(if exact { 0.0 } else { 1.0 }),
        0.0,
    );
    let direct = zero_temperature_energy(&PlateSystem::boyer(1.0).expect("d = 1"));
    s.at_most(
        "split",
        "inverted SB terms vs zero-T energy".into(),
        Ok(rel(r.boyer_zero_t_from_tis.value(), direct)),
        1e-15,
    );
}

fn summation_identities(s: &mut Suite) {
    let ctl = s.opts.ctl;
    let grid = s.opts.grid.pick(&[0.05, 0.3, 1.0, 5.0, 20.0], &[0.05, 1.0, 20.0]);
    for b in grid {
        let a = identity_alternating(b, &ctl).map(|r| (r.lhs - r.rhs).abs());
        s.at_most("identities", format!("alternating at b={b}"), a, 1e-10);
        let p = identity_plain(b, &ctl).map(|r| (r.lhs - r.rhs).abs());
        s.at_most("identities", format!("plain at b={b}"), p, 1e-10);
    }
}

fn epstein(s: &mut Suite) {
    let ctl = s.opts.ctl;
    let zs = s.opts.grid.pick(&[1.6, 2.0, 2.5, 3.0], &[2.0]);
    let pairs = [(1.0, 1.0), (1.0, 4.0), (0.25, 1.0)];
    for &z in &zs {
        for (a1, a2) in pairs {
            let d = (|| {
                let direct = epstein_direct(&EpsteinParams::new(z, vec![a1, a2], 0.0)?, &ctl)?;
                Ok((epstein2_continued(z, a1, a2, &ctl)?.value - direct.value).abs())
            })();
            s.at_most("epstein", format!("continued vs direct z={z} a=({a1},{a2})"), d, 1e-9);
        }
    }
    for z in [-0.7, 0.3, 2.0] {
        let h = (|| {
            let l: f64 = 3.0;
            let a = epstein2_continued(z, 1.0, 4.0, &ctl)?.value;
            let b = epstein2_continued(z, l, 4.0 * l, &ctl)?.value;
            Ok(rel(b * l.powf(z), a))
        })();
        s.at_most("epstein", format!("homogeneity at z={z}"), h, 1e-10);
        let x = (|| {
            let a = epstein2_continued(z, 0.25, 1.0, &ctl)?.value;
            let b = epstein2_continued(z, 1.0, 0.25, &ctl)?.value;
            Ok(rel(b, a))
        })();
        s.at_most("epstein", format!("exchange symmetry at z={z}"), x, 1e-10);
    }
}
