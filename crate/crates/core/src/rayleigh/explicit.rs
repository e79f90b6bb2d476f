//! Closed-form solutions for the parabola profile `U_s = y^2` at `alpha = 0`.
//!
//! With the logarithm determined on `C - R_+`, the second solution is
//!
//! ```text
//! psi2(y, c) = -y/(2 sqrt(c)) + (y^2 - c)/(4c) * log((y + sqrt(c))/(y - sqrt(c)))
//! ```
//!
//! It decays like `-1/(3z)` (`z = y/sqrt(c)`) as `y -> +inf` and grows like
//! `i pi z^2 / 2` as `y -> -inf`: the two sides see completely different
//! magnitudes, which is the localization mechanism in miniature.

use num_complex::Complex64;

use super::SolveError;

/// Logarithm with the branch cut along the positive real axis
/// (`arg` in `(0, 2 pi)`).
pub fn log_cut_positive_axis(w: Complex64) -> Complex64 {
    let mut arg = w.im.atan2(w.re);
    if arg <= 0.0 {
        arg += 2.0 * std::f64::consts::PI;
    }
    Complex64::new(w.norm().ln(), arg)
}

/// The explicit second solution `psi2(y, c)` of the parabola problem.
pub fn explicit_psi2_parabola(y: f64, c: Complex64) -> Result<Complex64, SolveError> {
    if c.im == 0.0 && c.re >= 0.0 {
        return Err(SolveError::Branch(format!(
            "c = {c} lies on the closed positive real axis"
        )));
    }
    let sc = c.sqrt();
    let num = y + sc;
    let den = y - sc;
    if den.norm() == 0.0 || num.norm() == 0.0 {
        return Err(SolveError::Branch(format!("y = +/- sqrt(c) at y = {y}")));
    }
    let ratio = num / den;
    if ratio.im == 0.0 && ratio.re > 0.0 && (c.im != 0.0) {
        // the ratio can only land exactly on the cut through rounding
        return Err(SolveError::Branch(format!(
            "log argument {ratio} sits on the positive real cut"
        )));
    }
    let y2c = Complex64::new(y * y, 0.0) - c;
    Ok(-y / (2.0 * sc) + y2c / (4.0 * c) * log_cut_positive_axis(ratio))
}

/// The reflected solution `psi3(y, c) = psi2(-y, c)`. It satisfies
/// `psi3 = -psi2 + (i pi / 2c)(y^2 - c)`, i.e. it differs from `-psi2` by a
/// multiple of the smooth solution `y^2 - c`, and has the mirror asymptotics
/// `+1/(3z)` at `-inf` and `i pi z^2/2` at `+inf`.
pub fn explicit_psi3_parabola(y: f64, c: Complex64) -> Result<Complex64, SolveError> {
    explicit_psi2_parabola(-y, c)
}
