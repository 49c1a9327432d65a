use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use casimir_core::free_energy::{auto_representation, free_energy, zero_temperature_energy, PlateSystem, ThermalPoint};
use casimir_core::pressure::{pressure, pressure_zero_t};
use casimir_core::verify::{self, Bound, Grid, Tamper, VerifyOptions};
use casimir_core::{BoundaryKind, CasimirError, EvalResult, RepresentationKind as Rep, SeriesControl};
use rayon::prelude::*;

use crate::format::sci;
use crate::{
    EvalArgs, Failure, FigureArgs, GridArg, Quantity, SeriesArgs, Spacing, SweepArgs, System, TamperArg, VerifyArgs,
};

type Outcome = Result<(), Failure>;

fn series_control(a: &SeriesArgs) -> Result<SeriesControl, Failure> {
    let mut ctl = SeriesControl::default();
    if let Some(tol) = a.tol {
        ctl = ctl.with_rel_tol(tol);
    }
    if let Some(n) = a.max_terms {
        ctl = ctl.with_max_terms(n);
    }
    ctl.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(ctl)
}

fn parse_rep(name: &str) -> Result<Option<Rep>, Failure> {
    if name == "auto" {
        return Ok(None);
    }
    Rep::from_name(name)
        .map(Some)
        .ok_or_else(|| Failure::Usage(format!("unknown representation '{name}'")))
}

fn plate_system(system: System, d: f64) -> Result<PlateSystem, Failure> {
    match system {
        System::Boyer => PlateSystem::boyer(d),
        System::Conductor => PlateSystem::conductor(d),
    }
    .map_err(|e| Failure::Usage(e.to_string()))
}

/// One quantity at one point. Errors name the representation that failed.
fn evaluate(
    q: Quantity,
    sys: &PlateSystem,
    t: &ThermalPoint,
    rep: Option<Rep>,
    ctl: &SeriesControl,
) -> Result<EvalResult, String> {
    let d = sys.d;
    let result = match q {
        Quantity::FreeEnergy => free_energy(sys, t, rep, ctl),
        Quantity::FScaled => free_energy(sys, t, rep, ctl).map(|r| r.affine(0.0, d.powi(3))),
        Quantity::Pressure | Quantity::PScaled => {
            let r = match sys.kind {
                BoundaryKind::BoyerMixed => pressure(t, d, rep, ctl),
                _ => Err(CasimirError::UnsupportedRepresentation {
                    rep: rep.unwrap_or(Rep::CothSingle),
                    system: "pressure of the conductor",
                }),
            };
            if q == Quantity::PScaled {
                r.map(|r| r.affine(0.0, d.powi(4)))
            } else {
                r
            }
        }
    };
    result.map_err(|e| {
        let label = match rep {
            Some(r) => r.name(),
            None if t.is_zero_temperature() => "auto",
            None => auto_representation(sys.kind, t.xi(d)).name(),
        };
        format!("{label} representation: {e}")
    })
}

pub fn eval(a: EvalArgs) -> Outcome {
    let ctl = series_control(&a.series)?;
    let rep = parse_rep(&a.rep)?;
    let sys = plate_system(a.system, a.d)?;
    let t = match (a.beta, a.xi) {
        (Some(beta), None) => ThermalPoint::new(beta),
        (None, Some(xi)) => ThermalPoint::from_xi(xi, a.d),
        (None, None) => return Err(Failure::Usage("one of --beta or --xi is required".into())),
        (Some(_), Some(_)) => return Err(Failure::Usage("--beta and --xi are mutually exclusive".into())),
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let r = evaluate(a.quantity, &sys, &t, rep, &ctl).map_err(Failure::Evaluation)?;
    let line = format!(
        "{} {} {} {}\n",
        sci(r.value),
        sci(r.abs_err_est),
        r.terms_used,
        r.rep.name()
    );
    std::io::stdout()
        .write_all(line.as_bytes())
        .map_err(|e| Failure::Io(e.to_string()))
}

/// `points` values from `lo` to `hi` inclusive.
fn grid(lo: f64, hi: f64, points: usize, spacing: Spacing) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i == 0 {
                return lo;
            }
            if i + 1 == points {
                return hi;
            }
            let s = i as f64 / last;
            match spacing {
                Spacing::Linear => lo + (hi - lo) * s,
                Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * s).exp(),
            }
        })
        .collect()
}

/// Evaluates `f` at every index, in parallel, returning results in index order.
fn par_map<T: Send>(threads: Option<usize>, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>, Failure> {
    match threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Failure::Io(e.to_string()))?;
            Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
        }
        None => Ok((0..n).into_par_iter().map(f).collect()),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Outcome {
    let res = match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    res.map_err(Failure::Io)
}

pub fn sweep(a: SweepArgs) -> Outcome {
    let ctl = series_control(&a.series)?;
    let rep = parse_rep(&a.rep)?;
    let sys = plate_system(a.system, a.d)?;
    if !(a.xi_min > 0.0 && a.xi_min.is_finite() && a.xi_max.is_finite()) {
        return Err(Failure::Usage(
            "--xi-min and --xi-max must be positive and finite".into(),
        ));
    }
    if a.xi_min >= a.xi_max {
        return Err(Failure::Usage("--xi-min must be below --xi-max".into()));
    }
    if a.points < 2 {
        return Err(Failure::Usage("--points must be at least 2".into()));
    }
    let xs = grid(a.xi_min, a.xi_max, a.points, a.spacing);
    let rows = par_map(a.threads, xs.len(), |i| {
        let t = ThermalPoint::from_xi(xs[i], sys.d).map_err(|e| e.to_string())?;
        evaluate(a.quantity, &sys, &t, rep, &ctl).map_err(|e| format!("xi = {}: {e}", xs[i]))
    })?;
    let mut csv = String::from("xi,value,abs_err_est,rep\n");
    for (xi, row) in xs.iter().zip(rows) {
        let r = row.map_err(Failure::Evaluation)?;
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            sci(*xi),
            sci(r.value),
            sci(r.abs_err_est),
            r.rep.name()
        );
    }
    write_output(a.out.as_deref(), &csv)
}

pub fn verify(a: VerifyArgs) -> Outcome {
    let opts = VerifyOptions {
        grid: match a.grid {
            GridArg::Coarse => Grid::Coarse,
            GridArg::Full => Grid::Full,
        },
        tamper: a.tamper.map(|t| match t {
            TamperArg::BesselSign => Tamper::BesselSign,
        }),
        ctl: series_control(&a.series)?,
    };
    let outcomes = verify::run(&opts);
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    let mut report = String::new();
    let _ = writeln!(
        report,
        "{:<12} {:<width$} {:>10}   {:>12}  status",
        "group", "check", "measured", "tolerance"
    );
    for o in &outcomes {
        let rel = match o.bound {
            Bound::AtMost => "<=",
            Bound::Above => "> ",
        };
        let status = if o.passed { "PASS" } else { "FAIL" };
        let _ = write!(
            report,
            "{:<12} {:<width$} {:>10.3e}   {rel} {:>9.1e}  {status}",
            o.group, o.name, o.measured, o.tolerance
        );
        if let Some(err) = &o.error {
            let _ = write!(report, "  ({err})");
        }
        report.push('\n');
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let _ = writeln!(report, "{passed}/{} checks passed", outcomes.len());
    write_output(None, &report)?;
    if verify::all_passed(&outcomes) {
        Ok(())
    } else {
        Err(Failure::VerifyFailed)
    }
}

pub fn figure(a: FigureArgs) -> Outcome {
    let ctl = series_control(&a.series)?;
    if a.points < 200 {
        return Err(Failure::Usage("figures need at least 200 points".into()));
    }
    let boyer = PlateSystem::boyer(1.0).expect("unit separation");
    let conductor = PlateSystem::conductor(1.0).expect("unit separation");
    let (lo, hi, header) = match a.id {
        1 => (
            0.0,
            0.6,
            "xi,f_boyer,f_conductor,f_boyer_zeroT_line,f_conductor_zeroT_line",
        ),
        2 => (
            0.3,
            3.0,
            "xi,f_boyer,f_conductor,f_boyer_zeroT_line,f_conductor_zeroT_line,sb_curve",
        ),
        _ => (0.0, 1.0, "xi,p_boyer,p_zeroT_line"),
    };
    let xs = grid(lo, hi, a.points, Spacing::Linear);
    let f_boyer_zero = zero_temperature_energy(&boyer);
    let f_conductor_zero = zero_temperature_energy(&conductor);
    let p_zero = pressure_zero_t(1.0).expect("unit separation");

    let rows = par_map(a.threads, xs.len(), |i| -> Result<Vec<f64>, String> {
        let xi = xs[i];
        let t = ThermalPoint::from_xi(xi, 1.0).map_err(|e| e.to_string())?;
        let at = |e: String| format!("xi = {xi}: {e}");
        Ok(match a.id {
            1 | 2 => {
                let fb = evaluate(Quantity::FScaled, &boyer, &t, None, &ctl).map_err(at)?.value;
                let fc = evaluate(Quantity::FScaled, &conductor, &t, None, &ctl)
                    .map_err(at)?
                    .value;
                let mut row = vec![xi, fb, fc, f_boyer_zero, f_conductor_zero];
                if a.id == 2 {
                    row.push(-PI.powi(6) * xi.powi(4) / 45.0);
                }
                row
            }
            _ => {
                let p = evaluate(Quantity::PScaled, &boyer, &t, None, &ctl).map_err(at)?.value;
                vec![xi, p, p_zero]
            }
        })
    })?;
    let mut csv = format!("{header}\n");
    for row in rows {
        let row = row.map_err(Failure::Evaluation)?;
        let cells: Vec<String> = row.into_iter().map(sci).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    write_output(a.out.as_deref(), &csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_hit_both_ends() {
        let g = grid(0.01, 0.5, 7, Spacing::Log);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[6], 0.5);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let ratio = g[1] / g[0];
        assert!((g[4] / g[3] / ratio - 1.0).abs() < 1e-12);

        let g = grid(0.0, 0.6, 301, Spacing::Linear);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[300], 0.6);
        assert!((g[150] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn par_map_keeps_index_order() {
        let v = par_map(Some(3), 1000, |i| i * i).unwrap();
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }

    #[test]
    fn evaluation_errors_name_the_representation() {
        let sys = PlateSystem::boyer(1.0).unwrap();
        let t = ThermalPoint::from_xi(0.01, 1.0).unwrap();
        let err = evaluate(
            Quantity::FreeEnergy,
            &sys,
            &t,
            Some(Rep::Poisson),
            &SeriesControl::default(),
        )
        .unwrap_err();
        assert!(err.starts_with("poisson representation"), "{err}");
    }
}
