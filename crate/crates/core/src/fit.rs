//! Least-squares helpers for exponent fits on log-log data.

/// Straight-line least squares `y = a + b x`; returns `(a, b, r2)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (a, b, r2)
}

/// Fits `v = C t^p` by linear regression in log-log coordinates and returns
/// `(p, r2)`. Nonpositive samples are rejected by assertion.
pub fn power_fit(ts: &[f64], vs: &[f64]) -> (f64, f64) {
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = vs
        .iter()
        .map(|v| {
            assert!(*v > 0.0, "power_fit needs positive samples");
            v.ln()
        })
        .collect();
    let (_, slope, r2) = linear_fit(&xs, &ys);
    (slope, r2)
}

/// Logarithmically spaced samples in `[a, b]`.
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2);
    (0..n)
        .map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_recovered() {
        let ts = log_spaced(1.0, 100.0, 9);
        let vs: Vec<f64> = ts.iter().map(|t| 3.5 * t.powf(-2.0)).collect();
        let (p, r2) = power_fit(&ts, &vs);
        assert!((p + 2.0).abs() < 1e-12);
        assert!(r2 > 0.999999);
    }

    #[test]
    fn linear_fit_reports_r2() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (a, b, r2) = linear_fit(&xs, &ys);
        assert!((a - 1.0).abs() < 1e-14);
        assert!((b - 2.0).abs() < 1e-14);
        assert!((r2 - 1.0).abs() < 1e-14);
    }
}
