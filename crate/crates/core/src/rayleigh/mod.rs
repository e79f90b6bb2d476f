//! Construction of the canonical Rayleigh solutions.
//!
//! `psi_-` decays like `e^{-alpha y}` at infinity and is computed by adaptive
//! integration inward from the far field; `psi_+` is its Wronskian partner,
//! built from the reduction-of-order integral in [`plus`]. Near critical
//! layers the coefficient `U_s''/(U_s - c)` is close to singular, so the mesh
//! is graded and the stepper carries a distance-dependent step floor.
//! Real-axis values of `c` are boundary limits, evaluated by structured
//! extrapolation in the imaginary part.

pub mod explicit;
pub mod extremal;
pub mod local;
pub mod plus;

use num_complex::Complex64;

use crate::ode::{self, Controls, State};
use crate::profile::{all_critical_layers, ShearProfile};

pub use extremal::{eval_j_primitives, extremal_frame, local_pair_wronskian, ExtremalFrame};
pub use explicit::{explicit_psi2_parabola, explicit_psi3_parabola};
pub use local::local_iteration_solution;
pub use plus::solve_plus;

/// Default imaginary offset for real-axis boundary limits.
pub const EPS_REAL_AXIS: f64 = 1e-3;
/// Exclusion radius around extremal velocities where the real-axis extension
/// fails.
pub const TOL_EXTR: f64 = 1e-6;
/// Distance from `U_+` below which the far-field exponent degenerates.
pub const TOL_UPLUS_EXTEND: f64 = 1e-3;
pub const TOL_UPLUS_FAIL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("alpha must be positive for the far-field asymptotics, got {0}")]
    BadAlpha(f64),
    #[error("c = {c} is a real extremal velocity within {tol}: extension undefined")]
    ExtremalVelocity { c: f64, tol: f64 },
    #[error("c = {c} too close to U_+ = {u_plus}: e^{{-alpha y}} tail invalid")]
    Tail { c: Complex64, u_plus: f64 },
    #[error("c = {0} lies in the lower half plane over the continuous range")]
    LowerHalfOnRange(Complex64),
    #[error("integration failed: {0}")]
    Ode(#[from] ode::OdeError),
    #[error("psi_- vanishes near the quadrature path at y = {0} and deformation failed")]
    Quadrature(f64),
    #[error("local iteration does not contract (ratio {0})")]
    NoContraction(f64),
    #[error("extremal frame: Re(c - c_extr)/kappa = {0} is on the wrong side of zero")]
    Window(f64),
    #[error("J primitives evaluated at a pole v = {0}")]
    Pole(Complex64),
    #[error("branch cut crossed: {0}")]
    Branch(String),
}

/// Spectral parameters of a single Fourier mode. The Laplace variable is
/// `lambda = -i alpha c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    pub alpha: f64,
    pub c: Complex64,
}

impl SpectralParams {
    pub fn new(alpha: f64, c: Complex64) -> Self {
        assert!(alpha >= 0.0, "negative wavenumber");
        SpectralParams { alpha, c }
    }

    pub fn lambda(&self) -> Complex64 {
        -Complex64::i() * self.alpha * self.c
    }
}

/// Normalization tags for sampled solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Unit coefficient on `e^{-alpha y}` at the far field.
    DecayingUnitTail,
    /// Fixed by Wronskian 1 against the decaying solution.
    WronskianPartner,
}

impl Normalization {
    pub fn tag(&self) -> &'static str {
        match self {
            Normalization::DecayingUnitTail => "decaying-unit-tail",
            Normalization::WronskianPartner => "wronskian-partner",
        }
    }
}

/// A sampled complex solution `(psi, psi')` on an ascending grid.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub params: SpectralParams,
    pub grid: Vec<f64>,
    pub psi: Vec<Complex64>,
    pub dpsi: Vec<Complex64>,
    pub normalization: Normalization,
}

impl ModeSolution {
    /// Cubic Hermite evaluation between grid nodes.
    pub fn eval(&self, y: f64) -> (Complex64, Complex64) {
        let i = match self
            .grid
            .binary_search_by(|g| g.partial_cmp(&y).unwrap())
        {
            Ok(i) => return (self.psi[i], self.dpsi[i]),
            Err(i) => i.clamp(1, self.grid.len() - 1) - 1,
        };
        hermite_eval(
            self.grid[i],
            self.grid[i + 1],
            self.psi[i],
            self.dpsi[i],
            self.psi[i + 1],
            self.dpsi[i + 1],
            y,
        )
    }

    /// Boundary trace `psi(0)`: the dispersion value for the decaying branch.
    pub fn boundary_value(&self) -> Complex64 {
        self.psi[0]
    }

    /// CSV serialization: `y,re_psi,im_psi,re_dpsi,im_dpsi`, with the
    /// parameters carried in comment lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# alpha = {:e}\n", self.params.alpha));
        out.push_str(&format!(
            "# c = {:e} {:+e}i\n",
            self.params.c.re, self.params.c.im
        ));
        out.push_str(&format!("# normalization = {}\n", self.normalization.tag()));
        out.push_str("y,re_psi,im_psi,re_dpsi,im_dpsi\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e}\n",
                self.grid[i], self.psi[i].re, self.psi[i].im, self.dpsi[i].re, self.dpsi[i].im
            ));
        }
        out
    }
}

/// Hermite cubic on `[x0, x1]` from values and derivatives at the ends.
pub fn hermite_eval(
    x0: f64,
    x1: f64,
    f0: Complex64,
    d0: Complex64,
    f1: Complex64,
    d1: Complex64,
    x: f64,
) -> (Complex64, Complex64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let f = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
    let g00 = (6.0 * t2 - 6.0 * t) / h;
    let g10 = 3.0 * t2 - 4.0 * t + 1.0;
    let g01 = (-6.0 * t2 + 6.0 * t) / h;
    let g11 = 3.0 * t2 - 2.0 * t;
    let d = g00 * f0 + g10 * d0 + g01 * f1 + g11 * d1;
    (f, d)
}

/// The two canonical solutions with Wronskian `psi_+' psi_- - psi_-' psi_+`
/// normalized to 1.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub psi_minus: ModeSolution,
    pub psi_plus: ModeSolution,
    pub wronskian: Complex64,
    /// Anchor height of the reduction-of-order integral (where `psi_+` has
    /// no admixture of `psi_-` by convention).
    pub anchor: f64,
}

/// Solver tuning knobs.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Target number of grid nodes for the sampled solution.
    pub n_nodes: usize,
    /// Relative tolerance of the adaptive stepper.
    pub rtol: f64,
    /// Base imaginary offset for real-axis limits.
    pub eps0: f64,
    /// Anchor override for the Wronskian integral of `psi_+`.
    pub anchor: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            n_nodes: 1600,
            rtol: 1e-10,
            eps0: EPS_REAL_AXIS,
            anchor: None,
        }
    }
}

/// Graded mesh on `[0, y_top]`: node density `~ (dist(y, y_c)^2 + |Im c|)^{-1/2}`
/// summed over the critical layers of `Re c`, capped at 1e5 nodes.
pub fn graded_mesh(
    profile: &ShearProfile,
    c: Complex64,
    n_base: usize,
    y_top: f64,
) -> Vec<f64> {
    let ycs: Vec<f64> = all_critical_layers(profile, c.re)
        .into_iter()
        .filter(|&y| y <= y_top)
        .collect();
    let imc = c.im.abs().max(1e-12);
    let density = |y: f64| -> f64 {
        let mut rho = n_base as f64 / y_top;
        for &yc in &ycs {
            let d2 = (y - yc) * (y - yc);
            rho += 25.0 / (d2 + imc).sqrt();
        }
        rho
    };
    let pre = 16_000;
    let mut cum = Vec::with_capacity(pre + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    let hp = y_top / pre as f64;
    let mut rho_prev = density(0.0);
    for k in 1..=pre {
        let rho = density(hp * k as f64);
        acc += 0.5 * (rho + rho_prev) * hp;
        cum.push(acc);
        rho_prev = rho;
    }
    let total = acc;
    let n = (total.round() as usize).clamp(n_base, 100_000);
    let mut mesh = Vec::with_capacity(n + 1);
    let mut j = 0usize;
    for k in 0..=n {
        let target = total * k as f64 / n as f64;
        while j + 1 < cum.len() && cum[j + 1] < target {
            j += 1;
        }
        let y = if j + 1 >= cum.len() {
            y_top
        } else {
            let frac = (target - cum[j]) / (cum[j + 1] - cum[j]).max(1e-300);
            hp * (j as f64 + frac)
        };
        mesh.push(y.clamp(0.0, y_top));
    }
    mesh[0] = 0.0;
    *mesh.last_mut().unwrap() = y_top;
    mesh.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * y_top);
    mesh
}

/// Far-field integration start and tail data. Extends the domain when `c`
/// sits close to `U_+`, where the `e^{-alpha y}` exponent degenerates.
fn far_field_start(
    profile: &ShearProfile,
    params: &SpectralParams,
) -> Result<(f64, State), SolveError> {
    let dist = (params.c - profile.u_plus).norm();
    if dist < TOL_UPLUS_FAIL {
        return Err(SolveError::Tail {
            c: params.c,
            u_plus: profile.u_plus,
        });
    }
    let y_top = if dist < TOL_UPLUS_EXTEND {
        profile.y_max + 10.0 / profile.tail_rate
    } else {
        profile.y_max
    };
    let a = params.alpha;
    let amp = Complex64::new((-a * y_top).exp(), 0.0);
    // first-order tail correction: psi = e^{-ay}(1 + d(y)) with
    // d ~ q / (tail_rate^2 + 2 a tail_rate), q = U_s''/(U_s - c) at the top
    let q_top = profile.us2(y_top) / (profile.us(y_top) - params.c);
    let beta = profile.tail_rate;
    let d = q_top / (beta * beta + 2.0 * a * beta);
    let psi = amp * (1.0 + d);
    let dpsi = amp * (-a * (1.0 + d) - beta * d);
    Ok((y_top, [psi, dpsi]))
}

fn rayleigh_rhs<'p>(
    profile: &'p ShearProfile,
    params: &SpectralParams,
) -> impl Fn(f64, &State) -> State + 'p {
    let alpha2 = params.alpha * params.alpha;
    let c = params.c;
    move |y: f64, s: &State| {
        let q = profile.us2(y) / (profile.us(y) - c);
        [s[1], (alpha2 + q) * s[0]]
    }
}

/// Validates the location of `c` relative to the continuous range and the
/// extremal velocities.
fn check_c_location(profile: &ShearProfile, params: &SpectralParams) -> Result<(), SolveError> {
    let c = params.c;
    if c.im > 0.0 {
        return Ok(());
    }
    let (lo, hi) = profile.velocity_range();
    let margin = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
    if c.im < 0.0 {
        if c.re >= lo - margin && c.re <= hi + margin {
            return Err(SolveError::LowerHalfOnRange(c));
        }
        return Ok(());
    }
    // real axis: fine outside the range, and inside only away from the
    // extremal velocities (Prop. "extension of the dispersion relation")
    for l in &profile.extremal_layers {
        if (c.re - l.c_extr).abs() < TOL_EXTR {
            return Err(SolveError::ExtremalVelocity {
                c: c.re,
                tol: TOL_EXTR,
            });
        }
    }
    Ok(())
}

/// The decaying solution `psi_-`, integrated inward from the far field with
/// unit tail normalization. For `Im c = 0` with `c` in the continuous range
/// this integrates the boundary limit directly only when no critical layer
/// exists; otherwise use [`solve_minus_real`].
pub fn solve_minus(
    profile: &ShearProfile,
    params: &SpectralParams,
    opts: &SolveOptions,
) -> Result<ModeSolution, SolveError> {
    if params.alpha <= 0.0 {
        return Err(SolveError::BadAlpha(params.alpha));
    }
    check_c_location(profile, params)?;
    if params.c.im == 0.0 && !all_critical_layers(profile, params.c.re).is_empty() {
        // boundary limit with genuine critical layers: extrapolate
        return solve_minus_real(profile, params.alpha, params.c.re, opts);
    }
    solve_minus_direct(profile, params, opts)
}

fn solve_minus_direct(
    profile: &ShearProfile,
    params: &SpectralParams,
    opts: &SolveOptions,
) -> Result<ModeSolution, SolveError> {
    let (y_top, start) = far_field_start(profile, params)?;
    let mesh = graded_mesh(profile, params.c, opts.n_nodes, y_top);
    let rhs = rayleigh_rhs(profile, params);
    let ycs = all_critical_layers(profile, params.c.re);
    let imc = params.c.im.abs();
    let min_step = move |y: f64| -> f64 {
        let mut d2 = f64::INFINITY;
        for &yc in &ycs {
            d2 = d2.min((y - yc) * (y - yc));
        }
        if !d2.is_finite() {
            return 1e-10;
        }
        1e-7 * (d2 + imc).sqrt().max(1e-5)
    };
    let ctl = Controls {
        rtol: opts.rtol,
        atol: 1e-290,
        max_steps: 400_000,
        min_step: Some(&min_step),
    };
    let n = mesh.len();
    let mut psi = vec![Complex64::default(); n];
    let mut dpsi = vec![Complex64::default(); n];
    psi[n - 1] = start[0];
    dpsi[n - 1] = start[1];
    let mut state = start;
    for i in (0..n - 1).rev() {
        state = ode::integrate(&rhs, mesh[i + 1], mesh[i], state, &ctl, |_, _| {})?;
        psi[i] = state[0];
        dpsi[i] = state[1];
    }
    Ok(ModeSolution {
        params: *params,
        grid: mesh,
        psi,
        dpsi,
        normalization: Normalization::DecayingUnitTail,
    })
}

/// Boundary limit of `psi_-` on the real axis, by structured extrapolation
/// over `Im c in {eps, eps/2, eps/4}` with the `delta log delta` term of the
/// critical-layer structure included in the fit basis.
pub fn solve_minus_real(
    profile: &ShearProfile,
    alpha: f64,
    c_real: f64,
    opts: &SolveOptions,
) -> Result<ModeSolution, SolveError> {
    let probe = SpectralParams::new(alpha, Complex64::new(c_real, 0.0));
    check_c_location(profile, &probe)?;
    let eps = opts.eps0;
    let deltas = [eps, 0.5 * eps, 0.25 * eps];
    // share a single mesh so the extrapolation is nodewise
    let c_finest = Complex64::new(c_real, deltas[2]);
    let (y_top, _) = far_field_start(profile, &probe)?;
    let mesh = graded_mesh(profile, c_finest, opts.n_nodes, y_top);
    let mut sols = Vec::with_capacity(3);
    for &d in &deltas {
        let p = SpectralParams::new(alpha, Complex64::new(c_real, d));
        let sol = solve_minus_on_mesh(profile, &p, opts, &mesh)?;
        sols.push(sol);
    }
    let w = extrapolation_weights(&deltas);
    let n = mesh.len();
    let mut psi = vec![Complex64::default(); n];
    let mut dpsi = vec![Complex64::default(); n];
    for i in 0..n {
        for k in 0..3 {
            psi[i] += w[k] * sols[k].psi[i];
            dpsi[i] += w[k] * sols[k].dpsi[i];
        }
    }
    Ok(ModeSolution {
        params: probe,
        grid: mesh,
        psi,
        dpsi,
        normalization: Normalization::DecayingUnitTail,
    })
}

/// Weights reproducing the constant term of `f(d) = A + B d + C d log d`
/// from samples at the three offsets.
fn extrapolation_weights(deltas: &[f64; 3]) -> [f64; 3] {
    let mut m = [[0.0f64; 3]; 3];
    for (r, &d) in deltas.iter().enumerate() {
        m[r] = [1.0, d, d * d.ln()];
    }
    // solve M^T w = e_1 so that sum w_k f(d_k) = A for f in the span
    let mut a = [
        [m[0][0], m[1][0], m[2][0], 1.0],
        [m[0][1], m[1][1], m[2][1], 0.0],
        [m[0][2], m[1][2], m[2][2], 0.0],
    ];
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..4 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]]
}

/// `solve_minus` onto a caller-provided mesh (used by the extrapolation and
/// by kernel assembly, which need matching grids across several `c`).
pub fn solve_minus_on_mesh(
    profile: &ShearProfile,
    params: &SpectralParams,
    opts: &SolveOptions,
    mesh: &[f64],
) -> Result<ModeSolution, SolveError> {
    if params.alpha <= 0.0 {
        return Err(SolveError::BadAlpha(params.alpha));
    }
    check_c_location(profile, params)?;
    let (y_top, start) = far_field_start(profile, params)?;
    assert!(
        (mesh.last().unwrap() - y_top).abs() < 1e-9 * y_top,
        "mesh must reach the far-field start"
    );
    let rhs = rayleigh_rhs(profile, params);
    let ycs = all_critical_layers(profile, params.c.re);
    let imc = params.c.im.abs();
    let min_step = move |y: f64| -> f64 {
        let mut d2 = f64::INFINITY;
        for &yc in &ycs {
            d2 = d2.min((y - yc) * (y - yc));
        }
        if !d2.is_finite() {
            return 1e-10;
        }
        1e-7 * (d2 + imc).sqrt().max(1e-5)
    };
    let ctl = Controls {
        rtol: opts.rtol,
        atol: 1e-290,
        max_steps: 400_000,
        min_step: Some(&min_step),
    };
    let n = mesh.len();
    let mut psi = vec![Complex64::default(); n];
    let mut dpsi = vec![Complex64::default(); n];
    psi[n - 1] = start[0];
    dpsi[n - 1] = start[1];
    let mut state = start;
    for i in (0..n - 1).rev() {
        state = ode::integrate(&rhs, mesh[i + 1], mesh[i], state, &ctl, |_, _| {})?;
        psi[i] = state[0];
        dpsi[i] = state[1];
    }
    Ok(ModeSolution {
        params: *params,
        grid: mesh.to_vec(),
        psi,
        dpsi,
        normalization: Normalization::DecayingUnitTail,
    })
}

/// Maximum relative Rayleigh residual over interior nodes, with `psi''`
/// reconstructed from the sampled derivative by nonuniform differences.
/// Grid-level differentiation error is absorbed into the scale.
pub fn max_relative_residual(profile: &ShearProfile, sol: &ModeSolution) -> f64 {
    let a2 = sol.params.alpha * sol.params.alpha;
    let c = sol.params.c;
    let n = sol.grid.len();
    let mut d2s = vec![Complex64::default(); n];
    for i in 1..n - 1 {
        let h1 = sol.grid[i] - sol.grid[i - 1];
        let h2 = sol.grid[i + 1] - sol.grid[i];
        let w_m = -h2 / (h1 * (h1 + h2));
        let w_0 = (h2 - h1) / (h1 * h2);
        let w_p = h1 / (h2 * (h1 + h2));
        d2s[i] = w_m * sol.dpsi[i - 1] + w_0 * sol.dpsi[i] + w_p * sol.dpsi[i + 1];
    }
    let mut worst = 0.0f64;
    for i in 2..n - 2 {
        let y = sol.grid[i];
        let us = profile.us(y);
        let us2 = profile.us2(y);
        let res = (us - c) * (d2s[i] - a2 * sol.psi[i]) - us2 * sol.psi[i];
        // windowed scale so isolated zeros of psi do not degenerate the ratio
        let mut d2_loc = 0.0f64;
        let mut psi_loc = 0.0f64;
        for j in i - 2..=i + 2 {
            d2_loc = d2_loc.max(d2s[j].norm());
            psi_loc = psi_loc.max(sol.psi[j].norm());
        }
        let scale =
            (us - c).norm() * (d2_loc + a2 * psi_loc) + us2.abs() * psi_loc + 1e-300;
        worst = worst.max(res.norm() / scale);
    }
    worst
}

/// Independent consistency check: re-integrates short grid segments with a
/// fixed-step classical RK4 and compares against the recorded samples.
/// Returns the worst relative deviation over `n_probes` segments.
pub fn cross_check_rk4(profile: &ShearProfile, sol: &ModeSolution, n_probes: usize) -> f64 {
    let rhs = rayleigh_rhs(profile, &sol.params);
    let n = sol.grid.len();
    let mut worst = 0.0f64;
    for p in 0..n_probes {
        let i = 1 + (n - 2) * p / n_probes;
        let (y0, y1) = (sol.grid[i], sol.grid[i + 1]);
        let mut state = [sol.psi[i], sol.dpsi[i]];
        let steps = 64;
        let h = (y1 - y0) / steps as f64;
        for k in 0..steps {
            let t = y0 + h * k as f64;
            let k1 = rhs(t, &state);
            let s2 = [state[0] + 0.5 * h * k1[0], state[1] + 0.5 * h * k1[1]];
            let k2 = rhs(t + 0.5 * h, &s2);
            let s3 = [state[0] + 0.5 * h * k2[0], state[1] + 0.5 * h * k2[1]];
            let k3 = rhs(t + 0.5 * h, &s3);
            let s4 = [state[0] + h * k3[0], state[1] + h * k3[1]];
            let k4 = rhs(t + h, &s4);
            state = [
                state[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                state[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
        }
        let scale = sol.psi[i + 1].norm() + sol.dpsi[i + 1].norm() + 1e-300;
        let dev = (state[0] - sol.psi[i + 1]).norm() + (state[1] - sol.dpsi[i + 1]).norm();
        worst = worst.max(dev / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{build_profile, ProfileSpec, ShearProfile};

    const E_INV: f64 = 0.36787944117144233;

    #[test]
    fn linear_window_gives_pure_exponential() {
        // U_s'' = 0 turns Rayleigh into psi'' = alpha^2 psi
        let p = ShearProfile::linear_window(1.0, 10.0);
        let params = SpectralParams::new(1.0, Complex64::new(0.5, 0.5));
        let sol = solve_minus(&p, &params, &SolveOptions::default()).unwrap();
        for (i, &y) in sol.grid.iter().enumerate() {
            let exact = Complex64::new((-y).exp(), 0.0);
            let rel = (sol.psi[i] - exact).norm() / exact.norm();
            assert!(rel < 1e-8, "y={y}: rel={rel:.2e}");
        }
    }

    #[test]
    fn exp_profile_residual_and_cross_check() {
        let p = build_profile(&ProfileSpec::builtin_exp(1.0), 30.0).unwrap();
        let params = SpectralParams::new(1.0, Complex64::new(0.5, 0.1));
        let sol = solve_minus(&p, &params, &SolveOptions::default()).unwrap();
        // independent high-order integrator agreement at 10 probes
        let dev = cross_check_rk4(&p, &sol, 10);
        assert!(dev < 1e-8, "cross-check {dev:.2e}");
        // residual of the sampled pair (grid-limited differentiation)
        let res = max_relative_residual(&p, &sol);
        assert!(res < 5e-4, "residual {res:.2e}");
    }

    #[test]
    fn extremal_velocity_is_rejected_on_axis() {
        let p = build_profile(&ProfileSpec::builtin_jet(), 30.0).unwrap();
        let params = SpectralParams::new(1.0, Complex64::new(E_INV, 0.0));
        assert!(matches!(
            solve_minus(&p, &params, &SolveOptions::default()),
            Err(SolveError::ExtremalVelocity { .. })
        ));
    }

    #[test]
    fn c_near_u_plus_errors_or_extends() {
        let p = build_profile(&ProfileSpec::builtin_exp(1.0), 30.0).unwrap();
        let params = SpectralParams::new(1.0, Complex64::new(1.0, 1e-10));
        assert!(matches!(
            solve_minus(&p, &params, &SolveOptions::default()),
            Err(SolveError::Tail { .. })
        ));
        // at moderate distance the domain extension applies
        let params = SpectralParams::new(1.0, Complex64::new(1.0, 5e-4));
        let sol = solve_minus(&p, &params, &SolveOptions::default()).unwrap();
        assert!(sol.grid.last().unwrap() > &35.0);
    }

    #[test]
    fn localization_blowup_below_extremal_layer() {
        // |psi_-(0.5)| ~ |c - c_extr|^{-3/2} for the jet (slope fit)
        let p = build_profile(&ProfileSpec::builtin_jet(), 30.0).unwrap();
        let mut ds = Vec::new();
        let mut vs = Vec::new();
        for &d in &[1e-2, 1e-3, 1e-4] {
            let params = SpectralParams::new(1.0, Complex64::new(E_INV, d));
            let sol = solve_minus(&p, &params, &SolveOptions::default()).unwrap();
            ds.push(d);
            vs.push(sol.eval(0.5).0.norm());
        }
        let (slope, _) = crate::fit::power_fit(&ds, &vs);
        assert!(
            (slope + 1.5).abs() < 0.1,
            "blow-up slope {slope}, expected -1.5"
        );
    }

    #[test]
    fn real_axis_limit_is_continuous() {
        // |D(c + i eps) - D_extrapolated(c)| -> 0 like eps log eps
        let p = build_profile(&ProfileSpec::builtin_exp(1.0), 30.0).unwrap();
        let c_real = 0.5;
        let opts = SolveOptions::default();
        let d0 = solve_minus_real(&p, 1.0, c_real, &opts)
            .unwrap()
            .boundary_value();
        let mut prev_err = f64::INFINITY;
        for &eps in &[4e-3, 2e-3, 1e-3] {
            let params = SpectralParams::new(1.0, Complex64::new(c_real, eps));
            let d = solve_minus(&p, &params, &SolveOptions::default())
                .unwrap()
                .boundary_value();
            let err = (d - d0).norm();
            assert!(err < prev_err * 1.01, "not shrinking: {err} vs {prev_err}");
            assert!(err < 5.0 * eps * eps.ln().abs(), "eps={eps}: err={err:.3e}");
            prev_err = err;
        }
    }

    #[test]
    fn mesh_is_graded_near_critical_layer() {
        let p = build_profile(&ProfileSpec::builtin_exp(1.0), 30.0).unwrap();
        let c = Complex64::new(0.5, 1e-4);
        let mesh = graded_mesh(&p, c, 1600, 30.0);
        let yc = crate::profile::critical_layer(&p, 0.5, (0.0, 10.0)).unwrap();
        // the spacing right at the layer is much finer than the base spacing
        let mut near = f64::INFINITY;
        let mut far = 0.0f64;
        for w in mesh.windows(2) {
            let h = w[1] - w[0];
            if (w[0] - yc).abs() < 0.01 {
                near = near.min(h);
            }
            if (w[0] - 20.0).abs() < 2.0 {
                far = far.max(h);
            }
        }
        assert!(near < 0.05 * far, "near={near:.2e} far={far:.2e}");
        assert!(mesh.len() <= 100_000);
    }
}
