//! Assembly and application of the Rayleigh Green's function
//! `G = G^int + G^b` on the half line.
//!
//! The interior part solves the equation with the decay condition only; the
//! boundary part removes the wall trace:
//!
//! ```text
//! G^int(x,y) = psi_-(max) psi_+(min) / (c - U_s(x)),
//! G^b(x,y)   = -(psi_+(0)/psi_-(0)) psi_-(x) psi_-(y) / (c - U_s(x)).
//! ```
//!
//! The denominator orientation pairs with the Wronskian convention
//! `psi_+' psi_- - psi_-' psi_+ = 1`, so that `Ray_y G = +delta_x` and
//! applying the kernel to `Ray(phi)` returns `phi` (not `-phi`). The
//! dispersion zero `psi_-(0) = 0` appears only in `G^b`, which is where the
//! eigenvalue poles of the resolvent live.

use num_complex::Complex64;

use crate::profile::{all_critical_layers, ShearProfile};
use crate::quadrature::{gl10, plemelj_integral};
use crate::rayleigh::{hermite_eval, ModeBasis, SolveError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GreensError {
    #[error("c = {c} is an eigenvalue within tolerance: |D| = {abs_d:.3e}")]
    Eigenvalue { c: Complex64, abs_d: f64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("quadrature: {0}")]
    Quadrature(String),
}

/// Sampled Green's function on a grid pair.
#[derive(Debug, Clone)]
pub struct GreensKernel {
    pub xgrid: Vec<f64>,
    pub ygrid: Vec<f64>,
    /// `g_int[ix][iy]`.
    pub g_int: Vec<Vec<Complex64>>,
    pub g_b: Vec<Vec<Complex64>>,
    pub basis: ModeBasis,
}

impl GreensKernel {
    /// Jump of `d/dx G` across the diagonal at height `y`:
    /// `1/(U_s(y) - c)` by the unit Wronskian and the `c - U_s` orientation.
    pub fn diagonal_jump(&self, profile: &ShearProfile, y: f64) -> Complex64 {
        1.0 / (profile.us(y) - self.basis.psi_minus.params.c)
    }

    /// CSV dump `x,y,re_gint,im_gint,re_gb,im_gb` for debugging.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,re_gint,im_gint,re_gb,im_gb\n");
        for (ix, &x) in self.xgrid.iter().enumerate() {
            for (iy, &y) in self.ygrid.iter().enumerate() {
                let gi = self.g_int[ix][iy];
                let gb = self.g_b[ix][iy];
                out.push_str(&format!(
                    "{x:e},{y:e},{:e},{:e},{:e},{:e}\n",
                    gi.re, gi.im, gb.re, gb.im
                ));
            }
        }
        out
    }
}

/// Guard against assembling at (numerically) an eigenvalue: the boundary
/// correction has a pole there.
fn check_not_eigenvalue(basis: &ModeBasis) -> Result<(), GreensError> {
    let d = basis.psi_minus.boundary_value();
    let scale = basis
        .psi_minus
        .psi
        .iter()
        .map(|p| p.norm())
        .fold(0.0, f64::max);
    if d.norm() < 1e-9 * scale {
        return Err(GreensError::Eigenvalue {
            c: basis.psi_minus.params.c,
            abs_d: d.norm(),
        });
    }
    Ok(())
}

/// Assembles the kernel on subsampled grids (at most `n_cap` nodes each).
pub fn assemble_greens(
    profile: &ShearProfile,
    basis: &ModeBasis,
    n_cap: usize,
) -> Result<GreensKernel, GreensError> {
    check_not_eigenvalue(basis)?;
    let c = basis.psi_minus.params.c;
    let grid = &basis.psi_minus.grid;
    let stride = (grid.len() / n_cap.max(2)).max(1);
    let idx: Vec<usize> = (0..grid.len()).step_by(stride).collect();
    let sub: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
    let ratio = basis.psi_plus.psi[0] / basis.psi_minus.psi[0];
    let mut g_int = vec![vec![Complex64::default(); sub.len()]; sub.len()];
    let mut g_b = vec![vec![Complex64::default(); sub.len()]; sub.len()];
    for (ai, &ix) in idx.iter().enumerate() {
        let denom = c - profile.us(grid[ix]);
        for (bi, &iy) in idx.iter().enumerate() {
            let (lo, hi) = (ix.min(iy), ix.max(iy));
            g_int[ai][bi] =
                basis.psi_minus.psi[hi] * basis.psi_plus.psi[lo] / denom;
            g_b[ai][bi] =
                -ratio * basis.psi_minus.psi[ix] * basis.psi_minus.psi[iy] / denom;
        }
    }
    Ok(GreensKernel {
        xgrid: sub.clone(),
        ygrid: sub,
        g_int,
        g_b,
        basis: basis.clone(),
    })
}

/// Result of applying the kernel to a forcing: the interior and boundary
/// parts separately, sampled with derivatives on the solution grid.
#[derive(Debug, Clone)]
pub struct GreensApplication {
    pub grid: Vec<f64>,
    pub psi_int: Vec<Complex64>,
    pub dpsi_int: Vec<Complex64>,
    pub psi_b: Vec<Complex64>,
    pub dpsi_b: Vec<Complex64>,
}

impl GreensApplication {
    pub fn psi(&self, i: usize) -> Complex64 {
        self.psi_int[i] + self.psi_b[i]
    }

    pub fn dpsi(&self, i: usize) -> Complex64 {
        self.dpsi_int[i] + self.dpsi_b[i]
    }
}

/// Applies `G_{alpha,c}` to a forcing by cumulative quadrature:
/// `psi^int(y) = psi_-(y) int_0^y psi_+ f/(U_s - c) + psi_+(y) int_y^Y psi_- f/(U_s - c)`.
/// Valid off the real axis (`Im c != 0`) or when `Re c` misses the range.
pub fn apply_greens(
    profile: &ShearProfile,
    basis: &ModeBasis,
    forcing: &dyn Fn(f64) -> Complex64,
) -> Result<GreensApplication, GreensError> {
    check_not_eigenvalue(basis)?;
    let c = basis.psi_minus.params.c;
    if c.im == 0.0 && !all_critical_layers(profile, c.re).is_empty() {
        return Err(GreensError::Quadrature(
            "cumulative application needs Im c != 0; use apply_greens_at on the axis".into(),
        ));
    }
    let grid = &basis.psi_minus.grid;
    let n = grid.len();
    let minus = &basis.psi_minus;
    let plus = &basis.psi_plus;
    // panel integrals of psi_{+-} f / (U_s - c) by Hermite interpolation
    let panel = |sol: &crate::rayleigh::ModeSolution, i: usize| -> Complex64 {
        let (a, b) = (grid[i], grid[i + 1]);
        let (fa, da, fb, db) = (sol.psi[i], sol.dpsi[i], sol.psi[i + 1], sol.dpsi[i + 1]);
        let f = |x: f64| {
            let (p, _) = hermite_eval(a, b, fa, da, fb, db, x);
            p * forcing(x) / (c - profile.us(x))
        };
        gl10(&f, a, b)
    };
    let mut cum_plus = vec![Complex64::default(); n]; // int_0^y psi_+ f/(U_s-c)
    for i in 0..n - 1 {
        cum_plus[i + 1] = cum_plus[i] + panel(plus, i);
    }
    let mut cum_minus = vec![Complex64::default(); n]; // int_y^Y psi_- f/(U_s-c)
    for i in (0..n - 1).rev() {
        cum_minus[i] = cum_minus[i + 1] + panel(minus, i);
    }
    let ratio = plus.psi[0] / minus.psi[0];
    let full = cum_minus[0];
    let mut psi_int = vec![Complex64::default(); n];
    let mut dpsi_int = vec![Complex64::default(); n];
    let mut psi_b = vec![Complex64::default(); n];
    let mut dpsi_b = vec![Complex64::default(); n];
    for i in 0..n {
        psi_int[i] = minus.psi[i] * cum_plus[i] + plus.psi[i] * cum_minus[i];
        dpsi_int[i] = minus.dpsi[i] * cum_plus[i] + plus.dpsi[i] * cum_minus[i];
        // the boundary correction cancels the wall trace of the interior part
        psi_b[i] = -ratio * full * minus.psi[i];
        dpsi_b[i] = -ratio * full * minus.dpsi[i];
    }
    Ok(GreensApplication {
        grid: grid.clone(),
        psi_int,
        dpsi_int,
        psi_b,
        dpsi_b,
    })
}

/// Real-axis application at one target height: `psi^{int}(y)` and
/// `psi^b(y)` for `c` on the real axis with simple critical layers.
///
/// The `1/(U_s(x) - c)` pole at each layer `x_c` is rewritten through the
/// smooth factor `phi_eff(x) = phi(x)(x - x_c)/(U_s(x) - c)` and evaluated by
/// the Plemelj limit from `Im c -> 0^+`; the orientation sign is carried by
/// `U_s'(x_c)` inside `phi_eff`. The diagonal case `x_c = y` (the depletion
/// evaluation) leaves `phi_eff` continuous with a kink from the Wronskian
/// jump, which the symmetric principal value tolerates.
pub fn apply_greens_at(
    profile: &ShearProfile,
    basis: &ModeBasis,
    forcing: &dyn Fn(f64) -> Complex64,
    y: f64,
) -> Result<(Complex64, Complex64), GreensError> {
    check_not_eigenvalue(basis)?;
    let c = basis.psi_minus.params.c;
    let y_top = *basis.psi_minus.grid.last().unwrap();
    let layers = all_critical_layers(profile, c.re);
    for &xc in &layers {
        if profile.us1(xc).abs() < 1e-6 {
            return Err(GreensError::Quadrature(format!(
                "critical layer at x = {xc} is degenerate (extremal c)"
            )));
        }
    }
    let minus = &basis.psi_minus;
    let plus = &basis.psi_plus;
    let kernel_at = |x: f64| -> Complex64 {
        if x <= y {
            plus.eval(x).0 * minus.eval(y).0
        } else {
            minus.eval(x).0 * plus.eval(y).0
        }
    };
    // pole_aware_integral carries the U_s - c denominator; the kernel
    // orientation is c - U_s, hence the global minus signs
    let interior = -pole_aware_integral(
        profile,
        &|x| kernel_at(x) * forcing(x),
        c,
        &layers,
        0.0,
        y_top,
    )?;
    let trace = -pole_aware_integral(
        profile,
        &|x| minus.eval(x).0 * forcing(x),
        c,
        &layers,
        0.0,
        y_top,
    )?;
    let ratio = plus.psi[0] / minus.psi[0];
    let boundary = -ratio * trace * minus.eval(y).0;
    Ok((interior, boundary))
}

/// `int_lo^hi phi(x)/(U_s(x) - c) dx` in the `Im c -> 0^+` limit, with
/// Plemelj handling at every simple critical layer inside the interval.
pub fn pole_aware_integral(
    profile: &ShearProfile,
    phi: &dyn Fn(f64) -> Complex64,
    c: Complex64,
    layers: &[f64],
    lo: f64,
    hi: f64,
) -> Result<Complex64, GreensError> {
    let mut window = 0.04 * (hi - lo);
    for (i, &a) in layers.iter().enumerate() {
        for &b in &layers[i + 1..] {
            window = window.min(0.4 * (a - b).abs());
        }
        window = window.min(0.8 * (a - lo).abs().min((hi - a).abs()).max(1e-6));
    }
    let mut cuts: Vec<f64> = vec![lo, hi];
    for &xc in layers {
        if xc > lo && xc < hi {
            cuts.push((xc - window).max(lo));
            cuts.push((xc + window).min(hi));
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * (hi - lo));
    let g = |x: f64| phi(x) / (profile.us(x) - c);
    let mut total = Complex64::default();
    for k in 0..cuts.len() - 1 {
        let (a, b) = (cuts[k], cuts[k + 1]);
        let mid = 0.5 * (a + b);
        let inside = layers.iter().find(|&&xc| xc >= a && xc <= b && (mid - xc).abs() <= window);
        if let Some(&xc) = inside {
            let us1_c = profile.us1(xc);
            let phi_eff = move |x: f64| {
                if (x - xc).abs() < 1e-9 * (hi - lo) {
                    phi(x) / us1_c
                } else {
                    phi(x) * (x - xc) / (profile.us(x) - c.re)
                }
            };
            total += plemelj_integral(&phi_eff, a, b, xc, 1e-10)
                .map_err(|e| GreensError::Quadrature(e.to_string()))?;
        } else {
            total += crate::quadrature::adaptive(&g, a, b, 1e-11);
        }
    }
    Ok(total)
}

/// Complex tridiagonal solve (Thomas algorithm), shared by tests and the
/// direct evolution stepper.
pub fn solve_tridiagonal(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
) -> Vec<Complex64> {
    let n = diag.len();
    let mut cp = vec![Complex64::default(); n];
    let mut dp = vec![Complex64::default(); n];
    cp[0] = upper[0] / diag[0];
    dp[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * cp[i - 1];
        cp[i] = if i + 1 < n { upper[i] / m } else { Complex64::default() };
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / m;
    }
    let mut x = vec![Complex64::default(); n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{build_profile, ProfileSpec};
    use crate::rayleigh::{solve_minus, solve_plus, SolveOptions, SpectralParams};

    /// Smooth compactly supported mollifier bump, vanishing outside
    /// `|y - y0| < w` with all derivatives.
    fn bump(y: f64, y0: f64, w: f64) -> f64 {
        let s = (y - y0) / w;
        if s.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - s * s)).exp() * 1.0_f64.exp()
        }
    }

    fn bump_d1(y: f64, y0: f64, w: f64) -> f64 {
        let s = (y - y0) / w;
        if s.abs() >= 1.0 {
            0.0
        } else {
            let e = (-1.0 / (1.0 - s * s)).exp() * 1.0_f64.exp();
            e * (-2.0 * s / (1.0 - s * s).powi(2)) / w
        }
    }

    fn bump_d2(y: f64, y0: f64, w: f64) -> f64 {
        // analytic second derivative of the mollifier
        let s = (y - y0) / w;
        if s.abs() >= 1.0 {
            0.0
        } else {
            let u = 1.0 - s * s;
            let e = (-1.0 / u).exp() * 1.0_f64.exp();
            let g = -2.0 * s / (u * u); // (log e)' in s
            let gp = (-2.0 * u * u - (-2.0 * s) * 2.0 * u * (-2.0 * s)) / u.powi(4);
            e * (g * g + gp) / (w * w)
        }
    }

    fn setup(c: Complex64) -> (crate::profile::ShearProfile, crate::rayleigh::ModeBasis) {
        let p = build_profile(&ProfileSpec::builtin_exp(1.0), 30.0).unwrap();
        let params = SpectralParams::new(1.0, c);
        let opts = SolveOptions::default();
        let minus = solve_minus(&p, &params, &opts).unwrap();
        let basis = solve_plus(&p, &minus, &opts).unwrap();
        (p, basis)
    }

    #[test]
    fn kernel_columns_solve_rayleigh_off_diagonal() {
        let c = Complex64::new(0.5, 0.2);
        let (p, basis) = setup(c);
        let kernel = assemble_greens(&p, &basis, 400).unwrap();
        // fixed x, central differences in y away from x
        let ix = kernel.xgrid.len() / 3;
        let x = kernel.xgrid[ix];
        let alpha2 = 1.0;
        for iy in (10..kernel.ygrid.len() - 10).step_by(37) {
            let y = kernel.ygrid[iy];
            if (y - x).abs() < 0.5 {
                continue;
            }
            let g = |j: usize| kernel.g_int[ix][j] + kernel.g_b[ix][j];
            let (ym, y0, yp) = (kernel.ygrid[iy - 1], y, kernel.ygrid[iy + 1]);
            let (h1, h2) = (y0 - ym, yp - y0);
            let d2 = 2.0 * (g(iy - 1) * h2 - g(iy) * (h1 + h2) + g(iy + 1) * h1)
                / (h1 * h2 * (h1 + h2));
            let res = (p.us(y) - c) * (d2 - alpha2 * g(iy)) - p.us2(y) * g(iy);
            let scale = (p.us(y) - c).norm() * (d2.norm() + g(iy).norm()) + 1e-12;
            assert!(
                res.norm() / scale < 2e-3,
                "y={y}: residual {:.2e}",
                res.norm() / scale
            );
        }
    }

    #[test]
    fn kernel_vanishes_on_the_wall() {
        let c = Complex64::new(0.5, 0.2);
        let (p, basis) = setup(c);
        let kernel = assemble_greens(&p, &basis, 300).unwrap();
        let _ = &p;
        for ix in (0..kernel.xgrid.len()).step_by(29) {
            let total = kernel.g_int[ix][0] + kernel.g_b[ix][0];
            let scale = kernel.g_int[ix]
                .iter()
                .map(|g| g.norm())
                .fold(0.0, f64::max);
            assert!(
                total.norm() <= 1e-10 * scale.max(1e-30),
                "x-index {ix}: wall value {:.2e}",
                total.norm()
            );
        }
    }

    #[test]
    fn manufactured_solution_recovered() {
        // f = Ray(phi) for a compactly supported phi with phi(0) = 0:
        // applying the kernel must return phi
        let c = Complex64::new(0.4, 0.2);
        let (p, basis) = setup(c);
        let (y0, w) = (2.0, 1.2);
        let alpha2 = 1.0;
        let forcing = move |x: f64| {
            let phi = bump(x, y0, w);
            let d2 = bump_d2(x, y0, w);
            (p.us(x) - c) * (d2 - alpha2 * phi) - p.us2(x) * phi
        };
        let (p2, _) = setup(c);
        let app = apply_greens(&p2, &basis, &forcing).unwrap();
        let mut worst = 0.0f64;
        for (i, &y) in app.grid.iter().enumerate() {
            let expect = bump(y, y0, w);
            worst = worst.max((app.psi(i) - expect).norm());
        }
        assert!(worst < 1e-5, "max deviation {worst:.2e}");
    }

    #[test]
    fn zero_forcing_gives_zero_field() {
        let c = Complex64::new(0.5, 0.2);
        let (p, basis) = setup(c);
        let app = apply_greens(&p, &basis, &|_| Complex64::default()).unwrap();
        assert!(app.psi_int.iter().all(|v| v.norm() == 0.0));
        assert!(app.psi_b.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn matches_independent_bvp_solve() {
        // forcing i/alpha * omega0 with omega0 a bump away from the critical
        // layer; oracle = second-order finite-difference two-point BVP
        let c = Complex64::new(0.5, 0.2);
        let alpha = 1.0;
        let (p, basis) = setup(c);
        let omega0 = |x: f64| Complex64::new(bump(x, 3.0, 0.8), 0.0);
        let forcing = move |x: f64| Complex64::new(0.0, 1.0 / alpha) * omega0(x);
        let app = apply_greens(&p, &basis, &forcing).unwrap();

        // FD oracle: (U_s - c)(psi'' - a^2 psi) - U_s'' psi = f,
        // psi(0) = 0, psi'(N) = -alpha psi(N); Richardson over two grids
        // removes the O(h^2) discretization bias of the oracle itself.
        let bvp = |n: usize| -> Vec<Complex64> {
            let h = 30.0 / n as f64;
            let mut lower = vec![Complex64::default(); n];
            let mut diag = vec![Complex64::default(); n];
            let mut upper = vec![Complex64::default(); n];
            let mut rhs = vec![Complex64::default(); n];
            for i in 0..n - 1 {
                let y = h * (i + 1) as f64;
                let uc = p.us(y) - c;
                lower[i] = uc / (h * h);
                diag[i] = uc * (-2.0 / (h * h) - alpha * alpha) - p.us2(y);
                upper[i] = uc / (h * h);
                rhs[i] = forcing(y);
            }
            let m = n - 1;
            lower[m] = Complex64::new(-1.0 / h, 0.0);
            diag[m] = Complex64::new(1.0 / h + alpha, 0.0);
            upper[m] = Complex64::default();
            rhs[m] = Complex64::default();
            solve_tridiagonal(&lower, &diag, &upper, &rhs)
        };
        let n = 6000usize;
        let h = 30.0 / n as f64;
        let coarse = bvp(n);
        let fine = bvp(2 * n);
        // Hermite-evaluate the application at the oracle's uniform nodes
        let eval_app = |y: f64| -> Complex64 {
            let k = match app
                .grid
                .binary_search_by(|g| g.partial_cmp(&y).unwrap())
            {
                Ok(k) => return app.psi(k),
                Err(k) => k.clamp(1, app.grid.len() - 1) - 1,
            };
            hermite_eval(
                app.grid[k],
                app.grid[k + 1],
                app.psi(k),
                app.dpsi(k),
                app.psi(k + 1),
                app.dpsi(k + 1),
                y,
            )
            .0
        };
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for j in (20..(20.0 / h) as usize).step_by(17) {
            let y = h * j as f64;
            let oracle = (4.0 * fine[2 * j - 1] - coarse[j - 1]) / 3.0;
            worst = worst.max((eval_app(y) - oracle).norm());
            scale = scale.max(oracle.norm());
        }
        assert!(scale > 0.1, "oracle scale degenerate");
        assert!(worst / scale < 1e-5, "relative {:.2e}", worst / scale);
    }

    #[test]
    fn eigenvalue_pole_is_detected() {
        // at the jet's unstable eigenvalue the boundary part has a pole
        let p = build_profile(&ProfileSpec::builtin_jet(), 30.0).unwrap();
        let c_eig = Complex64::new(0.2592962677357, 0.0356286595240);
        let params = SpectralParams::new(0.2, c_eig);
        let opts = SolveOptions::default();
        let minus = solve_minus(&p, &params, &opts).unwrap();
        let basis = solve_plus(&p, &minus, &opts).unwrap();
        assert!(matches!(
            assemble_greens(&p, &basis, 100),
            Err(GreensError::Eigenvalue { .. })
        ));
    }

    #[test]
    fn boundary_response_scaling_near_extremal_velocity() {
        // |psi^b| response ~ O(|c-c_extr|^{3/2}) below the layer and
        // O(|c-c_extr|^3) above (exponent fits +-0.2)
        let p = build_profile(&ProfileSpec::builtin_jet(), 30.0).unwrap();
        let c_extr = p.extremal_layers[0].c_extr;
        let opts = SolveOptions::default();
        let omega0 = |x: f64| Complex64::new(bump(x, 0.6, 0.35), 0.0);
        let forcing = move |x: f64| Complex64::new(0.0, 1.0) * omega0(x);
        let mut ds = Vec::new();
        let mut below = Vec::new();
        let mut above = Vec::new();
        for &d in &[1e-2, 1e-3, 1e-4] {
            let params = SpectralParams::new(1.0, Complex64::new(c_extr, d));
            let minus = solve_minus(&p, &params, &opts).unwrap();
            let basis = solve_plus(&p, &minus, &opts).unwrap();
            let app = apply_greens(&p, &basis, &forcing).unwrap();
            // sample y = 0.5 (below y_extr = 1) and y = 1.6 (above)
            let at = |target: f64| {
                let i = app
                    .grid
                    .iter()
                    .position(|&g| g >= target)
                    .unwrap();
                app.psi_b[i].norm()
            };
            ds.push(d);
            below.push(at(0.5));
            above.push(at(1.6));
        }
        let (s_below, _) = crate::fit::power_fit(&ds, &below);
        let (s_above, _) = crate::fit::power_fit(&ds, &above);
        // scaling bookkeeping: psi_+(0)/psi_-(0) ~ d^3, the forcing trace
        // integral ~ d^{-3/2} (the decaying solution blows up below the
        // layer), psi_-(y) ~ d^{-3/2} below and O(1) above, so the boundary
        // response is O(1) below and O(d^{3/2}) above
        assert!(
            s_below.abs() < 0.3,
            "below-layer slope {s_below}, expected ~0"
        );
        assert!(
            (s_above - 1.5).abs() < 0.25,
            "above-layer slope {s_above}, expected 1.5"
        );
    }
}
