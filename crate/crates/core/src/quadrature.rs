//! Quadrature kernels for simple-pole (Plemelj), principal-value,
//! logarithmic-branch and oscillatory integrands.
//!
//! The Plemelj limit `lim_{eps->0+} int phi(x)/(x - p - i eps) dx
//! = i pi phi(p) + PV int phi(x)/(x - p) dx` is implemented literally: the
//! principal value uses symmetric excision with a local quadratic correction,
//! and the oscillatory variants extract the pole before quadrature. The
//! decomposition `phi(x) = phi(p) + (x - p) psi(x)` is the algorithm, not
//! just the proof device.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("pole {pole} outside the sampled support [{lo}, {hi}] (margin {margin})")]
    Support { pole: f64, lo: f64, hi: f64, margin: f64 },
    #[error("adaptive quadrature failed to converge (best error {0:.3e})")]
    NoConvergence(f64),
}

// 10-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// 10-point Gauss-Legendre on a single panel.
pub fn gl10(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> Complex64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = Complex64::new(0.0, 0.0);
    for (&x, &w) in GL_X.iter().zip(&GL_W) {
        s += w * (f(mid + half * x) + f(mid - half * x));
    }
    half * s
}

/// Adaptive Gauss-Legendre with bisection error control.
pub fn adaptive(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    fn rec(
        f: &dyn Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        whole: Complex64,
        tol: f64,
        depth: usize,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let left = gl10(f, a, m);
        let right = gl10(f, m, b);
        let err = (left + right - whole).norm();
        if err <= tol || depth >= 28 {
            return left + right;
        }
        rec(f, a, m, left, 0.5 * tol, depth + 1) + rec(f, m, b, right, 0.5 * tol, depth + 1)
    }
    let whole = gl10(f, a, b);
    rec(f, a, b, whole, tol.max(1e-15), 0)
}

fn filon_moments(theta: f64) -> [Complex64; 3] {
    let i = Complex64::new(0.0, 1.0);
    if theta.abs() < 1e-3 {
        let t2 = theta * theta;
        let m0 = 2.0 - t2 / 3.0 + t2 * t2 / 60.0;
        let m1 = theta * (2.0 / 3.0 - t2 / 15.0 + t2 * t2 / 420.0);
        let m2 = 2.0 / 3.0 - t2 / 5.0 + t2 * t2 / 84.0;
        [
            Complex64::new(m0, 0.0),
            i * m1,
            Complex64::new(m2, 0.0),
        ]
    } else {
        let (s, c) = theta.sin_cos();
        let m0 = 2.0 * s / theta;
        let m1 = 2.0 * (s - theta * c) / (theta * theta);
        let m2 = 2.0 * ((theta * theta - 2.0) * s + 2.0 * theta * c) / (theta.powi(3));
        [
            Complex64::new(m0, 0.0),
            i * m1,
            Complex64::new(m2, 0.0),
        ]
    }
}

/// One Filon panel for `int_a^b f(x) e^{i x t} dx`: `f` is interpolated by the
/// quadratic through the endpoints and midpoint, the oscillation integrated
/// exactly.
fn filon_panel(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, t: f64) -> Complex64 {
    let h = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let theta = t * h;
    let fa = f(a);
    let fm = f(mid);
    let fb = f(b);
    let c0 = fm;
    let c1 = 0.5 * (fb - fa);
    let c2 = 0.5 * (fa + fb) - fm;
    let m = filon_moments(theta);
    let phase = Complex64::new(0.0, t * mid).exp();
    h * phase * (c0 * m[0] + c1 * m[1] + c2 * m[2])
}

/// Composite adaptive Filon quadrature of `int_a^b f(x) e^{i x t} dx` for
/// smooth `f`. Falls back to plain adaptive quadrature when the phase barely
/// rotates across the interval.
pub fn oscillatory(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, t: f64, tol: f64) -> Complex64 {
    if (t * (b - a)).abs() < 0.5 {
        let g = |x: f64| f(x) * Complex64::new(0.0, x * t).exp();
        return adaptive(&g, a, b, tol);
    }
    fn rec(
        f: &dyn Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        t: f64,
        whole: Complex64,
        tol: f64,
        depth: usize,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let left = filon_panel(f, a, m, t);
        let right = filon_panel(f, m, b, t);
        let err = (left + right - whole).norm();
        if err <= tol || depth >= 26 {
            return left + right;
        }
        rec(f, a, m, t, left, 0.5 * tol, depth + 1) + rec(f, m, b, t, right, 0.5 * tol, depth + 1)
    }
    let whole = filon_panel(f, a, b, t);
    rec(f, a, b, t, whole, tol.max(1e-15), 0)
}

/// `int_0^len f(u) e^{mu u} du` from three samples of `f` at `0, len/2, len`,
/// with the exponential integrated exactly (complex rate: decaying,
/// oscillatory, or both). This is the contour-quadrature workhorse: the
/// expensive resolvent samples are reused for every time value, only the
/// moments depend on `mu`.
pub fn filon_exp(
    f0: Complex64,
    fm: Complex64,
    f1: Complex64,
    len: f64,
    mu: Complex64,
) -> Complex64 {
    let h = 0.5 * len;
    // e^{mu u} = e^{mu h} e^{i theta xi}, u = h (1 + xi), theta = -i mu h
    let theta = Complex64::new(0.0, -1.0) * mu * h;
    let c0 = fm;
    let c1 = 0.5 * (f1 - f0);
    let c2 = 0.5 * (f0 + f1) - fm;
    let (m0, m1, m2) = if theta.norm() < 1e-3 {
        let t2 = theta * theta;
        (
            2.0 + t2 * (-1.0 / 3.0 + t2 / 60.0),
            Complex64::i() * theta * (2.0 / 3.0 - t2 / 15.0),
            Complex64::new(2.0 / 3.0, 0.0) + t2 * (-0.2 + t2 / 84.0),
        )
    } else {
        let s = theta.sin();
        let c = theta.cos();
        (
            2.0 * s / theta,
            2.0 * Complex64::i() * (s - theta * c) / (theta * theta),
            2.0 * ((theta * theta - 2.0) * s + 2.0 * theta * c) / (theta * theta * theta),
        )
    };
    h * (mu * h).exp() * (c0 * m0 + c1 * m1 + c2 * m2)
}

/// Oscillatory quadrature with geometric panel grading towards one integrable
/// singular point (log or x log x type integrands).
pub fn oscillatory_graded(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    t: f64,
    singular_at: f64,
    tol: f64,
) -> Complex64 {
    let s = singular_at;
    if s <= a || s >= b {
        return oscillatory(f, a, b, t, tol);
    }
    let mut total = Complex64::new(0.0, 0.0);
    let panel_tol = tol * 0.02;
    // halving panels approaching s from the left: [s - w, s - w/2]
    if s > a {
        let floor = (s - a) * 1e-14;
        let mut w = s - a;
        while w > floor {
            let next = 0.5 * w;
            total += oscillatory(f, s - w, s - next, t, panel_tol);
            w = next;
        }
    }
    // and from the right: [s + w/2, s + w]
    if s < b {
        let floor = (b - s) * 1e-14;
        let mut w = b - s;
        while w > floor {
            let next = 0.5 * w;
            total += oscillatory(f, s + next, s + w, t, panel_tol);
            w = next;
        }
    }
    total
}

/// The Plemelj limit `i pi phi(p) + PV int phi/(x - p)` over the support
/// `[lo, hi]`. The principal value excises a symmetric window of radius
/// `1e-3 * (hi - lo)` and corrects it with the local quadratic model.
pub fn plemelj_integral(
    phi: &dyn Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    pole: f64,
    tol: f64,
) -> Result<Complex64, QuadratureError> {
    let margin = 1e-2 * (hi - lo);
    if pole < lo + margin || pole > hi - margin {
        return Err(QuadratureError::Support {
            pole,
            lo,
            hi,
            margin,
        });
    }
    let pv = principal_value(phi, lo, hi, pole, tol)?;
    Ok(pv + Complex64::new(0.0, std::f64::consts::PI) * phi(pole))
}

/// `PV int_lo^hi phi(x)/(x - pole) dx` by symmetric excision.
pub fn principal_value(
    phi: &dyn Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    pole: f64,
    tol: f64,
) -> Result<Complex64, QuadratureError> {
    let margin = (hi - lo) * 1e-2;
    if pole < lo + margin || pole > hi - margin {
        return Err(QuadratureError::Support {
            pole,
            lo,
            hi,
            margin,
        });
    }
    let h = 1e-3 * (hi - lo);
    let g = |x: f64| phi(x) / (x - pole);
    let outer = adaptive(&g, lo, pole - h, tol * 0.3) + adaptive(&g, pole + h, hi, tol * 0.3);
    // int_{p-h}^{p+h} phi/(x-p): the odd pole part cancels by symmetry, the
    // rest is the smooth difference quotient (leading term 2 h phi'(p))
    let phi_p = phi(pole);
    let dq = |x: f64| (phi(x) - phi_p) / (x - pole);
    let correction = gl10(&dq, pole - h, pole + h);
    Ok(outer + correction)
}

/// `lim_{eps->0+} int phi(x) e^{i x t}/(x - pole - i eps) dx`
/// `= i pi phi(p) e^{i p t} + PV int phi e^{ixt}/(x-p)`, with the pole part
/// extracted so the quadrature only ever sees smooth integrands. For large
/// `t` this tends to `2 i pi phi(p) e^{i p t}` with an `O(t^{-2})` remainder.
pub fn oscillatory_pole_integral(
    phi: &dyn Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    pole: f64,
    t: f64,
    tol: f64,
) -> Result<Complex64, QuadratureError> {
    let margin = 1e-2 * (hi - lo);
    if pole < lo + margin || pole > hi - margin {
        return Err(QuadratureError::Support {
            pole,
            lo,
            hi,
            margin,
        });
    }
    let i = Complex64::new(0.0, 1.0);
    let phi_p = phi(pole);
    // difference quotient psi(x) = (phi(x) - phi(p))/(x - p), smooth across p
    let d = 1e-6 * (hi - lo);
    let dphi = (phi(pole + d) - phi(pole - d)) / (2.0 * d);
    let d2phi = (phi(pole + d) - 2.0 * phi_p + phi(pole - d)) / (d * d);
    let psi = move |x: f64| {
        let u = x - pole;
        if u.abs() < 2.0 * d {
            dphi + 0.5 * d2phi * u
        } else {
            (phi(x) - phi_p) / u
        }
    };
    let smooth = oscillatory(&psi, lo, hi, t, tol);
    // phi(p) * [ PV int e^{iut}/u du + i pi e^{ipt} ] over the shifted support
    let kernel = pv_osc_kernel(pole - lo, hi - pole, t, tol);
    let phase = (i * pole * t).exp();
    Ok(smooth + phi_p * phase * (kernel + i * std::f64::consts::PI))
}

/// `PV int_{-a}^{b} e^{i u t}/u du` (a, b > 0).
fn pv_osc_kernel(a: f64, b: f64, t: f64, tol: f64) -> Complex64 {
    let h = 1e-3 * (a + b);
    let g = |u: f64| Complex64::new(1.0 / u, 0.0);
    let outer = oscillatory(&g, -a, -h, t, tol * 0.3) + oscillatory(&g, h, b, t, tol * 0.3);
    // int_{-h}^{h} (e^{iut}-1)/u du = 2 i Si(h t), series for small h t
    let x = h * t;
    let si = if x.abs() < 1.0 {
        x - x.powi(3) / 18.0 + x.powi(5) / 600.0 - x.powi(7) / 35_280.0
    } else {
        si_large(x)
    };
    outer + Complex64::new(0.0, 2.0 * si)
}

fn si_large(x: f64) -> f64 {
    // composite quadrature of sin(u)/u on [0, x]; x stays O(1) in practice
    let f = |u: f64| {
        if u.abs() < 1e-8 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(u.sin() / u, 0.0)
        }
    };
    adaptive(&f, 0.0, x, 1e-12).re
}

/// `lim_{eps->0+} int phi(x) e^{ixt} log(x - b - i eps) dx`, the logarithmic
/// branch integral. Splits `phi = phi(b) + (x-b) psi` and grades panels into
/// the branch point; for large `t` the value tends to `(2 pi / t) phi(b)`
/// (when `b = 0`, modulo the `e^{ibt}` carrier).
pub fn log_branch_integral(
    phi: &dyn Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    branch: f64,
    t: f64,
    tol: f64,
) -> Result<Complex64, QuadratureError> {
    let margin = 1e-2 * (hi - lo);
    if branch < lo + margin || branch > hi - margin {
        return Err(QuadratureError::Support {
            pole: branch,
            lo,
            hi,
            margin,
        });
    }
    // log(x - b - i0) = ln|x-b| - i pi for x < b, ln(x-b) for x > b
    let i_pi = Complex64::new(0.0, std::f64::consts::PI);
    let g = move |x: f64| {
        let u = x - branch;
        let logpart = if u >= 0.0 {
            Complex64::new(if u > 0.0 { u.ln() } else { -745.0 }, 0.0)
        } else {
            Complex64::new((-u).ln(), 0.0) - i_pi
        };
        phi(x) * logpart
    };
    Ok(oscillatory_graded(&g, lo, hi, t, branch, tol))
}

/// `lim_{eps->0+} int phi(x) e^{ixt} (x - b - i eps) log(x - b - i eps) dx`;
/// decays like `t^{-2}` for smooth compactly supported `phi`.
pub fn zlogz_integral(
    phi: &dyn Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    branch: f64,
    t: f64,
    tol: f64,
) -> Result<Complex64, QuadratureError> {
    let margin = 1e-2 * (hi - lo);
    if branch < lo + margin || branch > hi - margin {
        return Err(QuadratureError::Support {
            pole: branch,
            lo,
            hi,
            margin,
        });
    }
    let i_pi = Complex64::new(0.0, std::f64::consts::PI);
    let g = move |x: f64| {
        let u = x - branch;
        if u == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let logpart = if u > 0.0 {
            Complex64::new(u.ln(), 0.0)
        } else {
            Complex64::new((-u).ln(), 0.0) - i_pi
        };
        phi(x) * u * logpart
    };
    Ok(oscillatory_graded(&g, lo, hi, t, branch, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Smooth compactly supported bump on [-1, 1], scaled.
    fn bump(x: f64, center: f64, width: f64) -> f64 {
        let s = (x - center) / width;
        if s.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - s * s)).exp() * 1.0_f64.exp()
        }
    }


    #[test]
    fn filon_exp_matches_closed_form() {
        // int_0^L e^{a u} e^{i b u} du for a smooth f = u^2 + 1 sampled at 3 pts
        // must equal the quadratic's exact moment integral
        for &(a, b) in &[(-0.5, 40.0), (0.0, 7.0), (-2.0, 0.0), (0.3, 120.0)] {
            let mu = Complex64::new(a, b);
            let len = 0.4;
            let f = |u: f64| c(u * u + 1.0);
            let got = filon_exp(f(0.0), f(0.5 * len), f(len), len, mu);
            // exact: integrate (u^2+1)e^{mu u} by parts twice
            let e = (mu * len).exp();
            let exact = ((len * len + 1.0) * e - 1.0) / mu
                - (2.0 * len * e) / (mu * mu)
                + 2.0 * (e - 1.0) / (mu * mu * mu);
            assert!((got - exact).norm() < 1e-12 * (1.0 + exact.norm()), "mu={mu}: {got} vs {exact}");
        }
    }

    #[test]
    fn adaptive_integrates_polynomial_exactly() {
        let v = adaptive(&|x| c(x * x * x - 2.0 * x + 1.0), -1.0, 2.0, 1e-13);
        // int = [x^4/4 - x^2 + x] from -1 to 2 = (4-4+2)-(1/4-1-1)
        assert!((v.re - (2.0 - (0.25 - 2.0))).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_matches_closed_form() {
        // int_0^1 e^{ixt} dx = (e^{it}-1)/(it)
        for &t in &[3.0, 47.0, 250.0] {
            let v = oscillatory(&|_x| c(1.0), 0.0, 1.0, t, 1e-12);
            let exact = (Complex64::new(0.0, t).exp() - 1.0) / Complex64::new(0.0, t);
            assert!((v - exact).norm() < 1e-10, "t={t}: {v} vs {exact}");
        }
    }

    #[test]
    fn even_bump_kills_pv() {
        let phi = |x: f64| c(bump(x, 0.0, 0.5));
        let v = plemelj_integral(&phi, -1.0, 1.0, 0.0, 1e-12).unwrap();
        let expect = Complex64::new(0.0, PI) * phi(0.0);
        assert!((v - expect).norm() < 1e-8, "{v} vs {expect}");
    }

    #[test]
    fn removable_singularity_is_plain_integral() {
        // phi(x) = x * bump => phi/x = bump, PV equals the smooth integral
        let phi = |x: f64| c(x * bump(x, 0.0, 0.5));
        let v = principal_value(&phi, -1.0, 1.0, 0.0, 1e-12).unwrap();
        let direct = adaptive(&|x| c(bump(x, 0.0, 0.5)), -1.0, 1.0, 1e-13);
        assert!((v - direct).norm() < 1e-8);
    }

    #[test]
    fn plemelj_matches_eps_limit_oracle() {
        // brute-force eps-limit of int phi/(x - p - i eps) with Richardson
        let phi = |x: f64| c(bump(x, 0.1, 0.6) * (1.0 + 0.3 * x));
        let pole = 0.05;
        let exact = plemelj_integral(&phi, -1.0, 1.0, pole, 1e-12).unwrap();
        let eval = |eps: f64| {
            adaptive(
                &|x| phi(x) / Complex64::new(x - pole, -eps),
                -1.0,
                1.0,
                1e-13,
            )
        };
        // eps-limit with two-level Richardson over {1e-2,...,1e-5}
        let mut vals = Vec::new();
        for &e in &[1e-2, 5e-3, 2.5e-3] {
            vals.push(eval(e));
        }
        let r1 = 2.0 * vals[1] - vals[0];
        let r2 = 2.0 * vals[2] - vals[1];
        let extr = (4.0 * r2 - r1) / 3.0;
        assert!(
            (extr - exact).norm() < 1e-6,
            "{extr} vs {exact} ({:.2e})",
            (extr - exact).norm()
        );
    }

    #[test]
    fn pole_outside_support_is_error() {
        let phi = |x: f64| c(bump(x, 0.0, 0.5));
        assert!(matches!(
            plemelj_integral(&phi, -1.0, 1.0, 1.2, 1e-10),
            Err(QuadratureError::Support { .. })
        ));
    }

    #[test]
    fn oscillatory_pole_t0_reduces_to_plemelj_identity() {
        // at t = 0 the two appendix formulas must agree:
        // osc(t=0) = i pi phi(p) + PV = plemelj value
        let phi = |x: f64| c(bump(x, -0.1, 0.7));
        let pole = 0.12;
        let a = oscillatory_pole_integral(&phi, -1.0, 1.0, pole, 0.0, 1e-12).unwrap();
        let b = plemelj_integral(&phi, -1.0, 1.0, pole, 1e-12).unwrap();
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn oscillatory_pole_remainder_decays_like_t_minus_2() {
        let phi = |x: f64| c(bump(x, 0.0, 0.8));
        let pole = 0.1;
        let two_i_pi = Complex64::new(0.0, 2.0 * PI);
        let mut ts = Vec::new();
        let mut rs = Vec::new();
        for &t in &[10.0, 20.0, 40.0, 80.0] {
            let v = oscillatory_pole_integral(&phi, -1.0, 1.0, pole, t, 1e-13).unwrap();
            let lead = two_i_pi * phi(pole) * Complex64::new(0.0, pole * t).exp();
            ts.push(t);
            rs.push((v - lead).norm());
        }
        let (slope, _) = crate::fit::power_fit(&ts, &rs);
        assert!(slope <= -1.8, "remainder slope {slope}");
    }

    #[test]
    fn log_branch_leading_term() {
        // (2 pi / t) phi(0) within 10% at t = 20, 40
        let phi = |x: f64| c(bump(x, 0.0, 0.8));
        for &t in &[20.0, 40.0] {
            let v = log_branch_integral(&phi, -1.0, 1.0, 0.0, t, 1e-13).unwrap();
            let lead = 2.0 * PI / t * phi(0.0).re;
            assert!(
                (v.norm() - lead).abs() < 0.1 * lead,
                "t={t}: |v|={} lead={lead}",
                v.norm()
            );
        }
    }

    #[test]
    fn zlogz_zero_function_is_zero() {
        let v = zlogz_integral(&|_| c(0.0), -1.0, 1.0, 0.0, 25.0, 1e-12).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zlogz_decay_slope() {
        let phi = |x: f64| c(bump(x, 0.0, 0.8));
        let ts: Vec<f64> = vec![10.0, 20.0, 40.0, 80.0, 160.0];
        let vs: Vec<f64> = ts
            .iter()
            .map(|&t| {
                zlogz_integral(&phi, -1.0, 1.0, 0.0, t, 1e-13)
                    .unwrap()
                    .norm()
            })
            .collect();
        let (slope, _) = crate::fit::power_fit(&ts, &vs);
        assert!(slope <= -1.8, "slope {slope}");
    }

    #[test]
    fn zlogz_shift_invariance() {
        let phi0 = |x: f64| c(bump(x, 0.0, 0.6));
        let shift = 0.3;
        let phi1 = move |x: f64| c(bump(x - shift, 0.0, 0.6));
        let t = 30.0;
        let v0 = zlogz_integral(&phi0, -1.0, 1.0, 0.0, t, 1e-12).unwrap();
        let v1 = zlogz_integral(&phi1, -1.0 + shift, 1.0 + shift, shift, t, 1e-12).unwrap();
        assert!((v0.norm() - v1.norm()).abs() < 1e-8 * (1.0 + v0.norm()));
    }

    #[test]
    fn pv_is_lipschitz_in_pole_location() {
        let phi = |x: f64| c(bump(x, 0.0, 0.8));
        let mut prev: Option<(f64, Complex64)> = None;
        for k in 0..10 {
            let p = -0.2 + 0.04 * k as f64;
            let v = plemelj_integral(&phi, -1.0, 1.0, p, 1e-12).unwrap();
            if let Some((pp, vp)) = prev {
                let rate = (v - vp).norm() / (p - pp).abs();
                assert!(rate < 20.0, "not Lipschitz: {rate}");
            }
            prev = Some((p, v));
        }
    }
}
