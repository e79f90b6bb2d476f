//! Bracketed scalar root finding (bisection with secant acceleration).

/// Error returned when a bracket does not isolate a root.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BracketError {
    #[error("no sign change on bracket [{0}, {1}]")]
    NoSignChange(f64, f64),
    #[error("invalid bracket [{0}, {1}]")]
    Invalid(f64, f64),
}

/// Finds the root of `f` inside `[a, b]`, assuming `f(a)` and `f(b)` have
/// opposite signs. Bisection safeguards a secant step, so convergence is
/// guaranteed and usually superlinear.
pub fn brent(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, BracketError> {
    if !(a < b) {
        return Err(BracketError::Invalid(a, b));
    }
    let (mut lo, mut hi) = (a, b);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(BracketError::NoSignChange(a, b));
    }
    for _ in 0..200 {
        if hi - lo <= tol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        // secant proposal, clipped into the bracket interior
        let mut x = lo - flo * (hi - lo) / (fhi - flo);
        let mid = 0.5 * (lo + hi);
        if !x.is_finite() || x <= lo || x >= hi {
            x = mid;
        }
        // keep exponential convergence by alternating with bisection
        if (x - lo).min(hi - x) < 0.01 * (hi - lo) {
            x = mid;
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scans `[a, b]` on `n` panels and returns every sign-change bracket of `f`.
pub fn scan_brackets(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut x0 = a;
    let mut f0 = f(a);
    for k in 1..=n {
        let x1 = a + (b - a) * k as f64 / n as f64;
        let f1 = f(x1);
        if f0 == 0.0 {
            out.push((x0, x0));
        } else if f0.signum() != f1.signum() {
            out.push((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    out
}
