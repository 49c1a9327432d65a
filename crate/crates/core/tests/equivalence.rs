//! Cross-representation agreement on the reference grid.

use casimir_core::free_energy::{free_energy, PlateSystem, ThermalPoint};
use casimir_core::{EvalResult, RepresentationKind as Rep, SeriesControl};

const GRID: [f64; 8] = [0.1, 0.2, 0.3, 0.5, 0.8, 1.0, 2.0, 5.0];

fn eval(xi: f64, rep: Rep, ctl: &SeriesControl) -> EvalResult {
    let sys = PlateSystem::boyer(1.0).unwrap();
    let t = ThermalPoint::from_xi(xi, 1.0).unwrap();
    free_energy(&sys, &t, Some(rep), ctl).unwrap_or_else(|e| panic!("{} at xi={xi}: {e}", rep.name()))
}

#[test]
fn series_forms_agree_within_their_error_estimates() {
    let ctl = SeriesControl::default();
    let reps = [
        Rep::Bessel,
        Rep::CothSingle,
        Rep::DoubleSum,
        Rep::ModeIntegral,
        Rep::Poisson,
    ];
    for xi in GRID {
        let values: Vec<EvalResult> = reps.iter().map(|&r| eval(xi, r, &ctl)).collect();
        for (i, a) in values.iter().enumerate() {
            for b in &values[i + 1..] {
                let gap = (a.value - b.value).abs();
                let allowed = 10.0 * (a.abs_err_est + b.abs_err_est);
                assert!(
                    gap <= allowed,
                    "{} vs {} at xi={xi}: gap {gap:e}, allowed {allowed:e}",
                    a.rep.name(),
                    b.rep.name()
                );
            }
        }
    }
}

#[test]
fn series_forms_agree_to_absolute_tolerances() {
    // The 1e-8 absolute demands need tighter truncation than the default
    // once |F| reaches 1e4 at xi = 5.
    let tight = SeriesControl::default().with_rel_tol(1e-14);
    for xi in GRID {
        let reference = eval(xi, Rep::Bessel, &tight).value;
        for (rep, tol) in [(Rep::CothSingle, 1e-8), (Rep::DoubleSum, 1e-8), (Rep::Poisson, 1e-8)] {
            let v = eval(xi, rep, &tight).value;
            assert!((v - reference).abs() < tol, "{} at xi={xi}", rep.name());
        }
        let mode = eval(xi, Rep::ModeIntegral, &SeriesControl::default()).value;
        assert!((mode - reference).abs() < 1e-6, "mode at xi={xi}");
        let lattice = eval(xi, Rep::Lattice, &SeriesControl::default()).value;
        assert!((lattice - reference).abs() < 1e-5, "lattice at xi={xi}");
    }
}

#[test]
fn lattice_error_estimate_is_honest() {
    let ctl = SeriesControl::default();
    for xi in [0.1, 0.5, 2.0] {
        let l = eval(xi, Rep::Lattice, &ctl);
        let exact = eval(xi, Rep::CothSingle, &ctl.with_rel_tol(1e-15)).value;
        assert!((l.value - exact).abs() <= 10.0 * l.abs_err_est + 1e-15, "xi={xi}");
    }
}
