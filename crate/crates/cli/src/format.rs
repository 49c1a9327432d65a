//! Number formatting matching C's `%.16e`.

/// `x` with 17 significant digits and a signed, at least two-digit exponent,
/// e.g. `1.1994262624068751e-02`.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{x:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.unsigned_abs())
}
