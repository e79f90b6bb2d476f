//! The limiting vorticity profile and its depletion at extremal layers.
//!
//! The long-time vorticity locks onto `omega_inf(y) e^{-i alpha U_s(y) t}`
//! with `omega_inf(y) = omega0(y) - i alpha U_s''(y) psi^{int}_{alpha,U_s(y)}(y)`,
//! the interior resolvent evaluated on the diagonal `c = U_s(y)`. Away from
//! extremal layers the diagonal value comes from the Plemelj-corrected
//! kernel application; inside an extremal window the `1/(U_s - c)` factor is
//! first rewritten through the Rayleigh equation (`psi/(c - U_s) =
//! -(psi'' - a^2 psi)/U_s''`) and integrated by parts, which turns the
//! formula into
//!
//! ```text
//! omega_inf(y) = (1 - chi(y)) omega0(y)
//!              + i alpha U_s''(y) [ int G~(x,y) theta(x) dx - N2(y) ]
//! ```
//!
//! with `theta = (d^2 - a^2)(chi f / U_s'')` and `G~` the kernel without the
//! `1/(U_s - c)` factor. The depletion zero at `y_extr` is explicit: the
//! `omega0` term cancels and the remaining products vanish quadratically
//! (with a log factor) by the localization scalings.

use num_complex::Complex64;
use serde::Serialize;

use crate::evolution::{EvolutionField, InitialData};
use crate::fit::{linear_fit, log_spaced};
use crate::greens::{apply_greens_at, pole_aware_integral, GreensError};
use crate::profile::{all_critical_layers, ShearProfile};
use crate::quadrature::adaptive;
use crate::rayleigh::{
    solve_minus_on_mesh, solve_plus, ModeBasis, SolveError, SolveOptions, SpectralParams,
};
use crate::theta_weight;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DepletionError {
    #[error("extremal window too narrow to cover the singular band at y = {0}")]
    ExtremalWindow(f64),
    #[error("(A3) violated: |D| = {abs_d:.3e} below floor near c_extr = {c_extr}")]
    A3Violation { c_extr: f64, abs_d: f64 },
    #[error("fit rejected: r^2 = {r2:.4} < 0.95 for {quantity:?}")]
    PoorFit { quantity: FitQuantity, r2: f64 },
    #[error("need at least 8 samples in the fit window, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Greens(#[from] GreensError),
}

/// Per-layer depletion diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct LayerDiagnostics {
    pub y_extr: f64,
    pub abs_at_extr: f64,
    pub fit_exponent: f64,
    pub fit_r2: f64,
}

/// The limiting vorticity with the boundary contribution and diagnostics.
#[derive(Debug, Clone)]
pub struct DepletionProfile {
    pub alpha: f64,
    pub ygrid: Vec<f64>,
    pub omega_inf: Vec<Complex64>,
    pub zeta_b: Vec<Complex64>,
    pub diagnostics: Vec<LayerDiagnostics>,
}

impl DepletionProfile {
    /// CSV rows `y,re_omega_inf,im_omega_inf,abs_omega_inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y,re_omega_inf,im_omega_inf,abs_omega_inf\n");
        for (i, &y) in self.ygrid.iter().enumerate() {
            let w = self.omega_inf[i];
            out.push_str(&format!("{y:e},{:e},{:e},{:e}\n", w.re, w.im, w.norm()));
        }
        out
    }

    pub fn diagnostics_json(&self) -> String {
        serde_json::to_string_pretty(&self.diagnostics).expect("diagnostics serialize")
    }
}

#[derive(Debug, Clone)]
pub struct DepletionOptions {
    pub solve: SolveOptions,
    /// Halfwidth of the extremal rewrite window.
    pub window: f64,
    /// Imaginary offset scaling: `eps = clamp(scale * |c - c_extr|, floor, eps0)`.
    pub eps_scale: f64,
    pub eps_floor: f64,
    /// Fit band `|y - y_extr|` for the local exponent (innermost log-dominated
    /// band excluded).
    pub fit_band: (f64, f64),
    /// (A3) floor relative to the median boundary value.
    pub a3_floor: f64,
}

impl Default for DepletionOptions {
    fn default() -> Self {
        let mut solve = SolveOptions::default();
        solve.n_nodes = 1200;
        solve.rtol = 1e-9;
        DepletionOptions {
            solve,
            window: 0.5,
            eps_scale: 0.25,
            eps_floor: 1e-6,
            fit_band: (1e-2, 1e-1),
            a3_floor: 1e-6,
        }
    }
}

/// Evaluation grid: uniform coverage plus log-graded bands at each layer.
pub fn depletion_grid(profile: &ShearProfile, n_base: usize) -> Vec<f64> {
    let top = profile.y_max.min(8.0);
    let mut grid: Vec<f64> = (1..n_base)
        .map(|k| top * k as f64 / n_base as f64)
        .collect();
    for l in &profile.extremal_layers {
        for &r in log_spaced(5e-3, 0.25, 14).iter() {
            for s in [-1.0, 1.0] {
                let y = l.y_extr + s * r;
                if y > 1e-3 && y < top {
                    grid.push(y);
                }
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    grid
}

/// Boundary-limit basis at real `c`, with the imaginary offsets shrunk near
/// extremal velocities so the extrapolation stays inside the region where
/// the limit is smooth.
fn basis_at_real_c(
    profile: &ShearProfile,
    alpha: f64,
    c_real: f64,
    opts: &DepletionOptions,
) -> Result<ModeBasis, DepletionError> {
    let mut eps = opts.solve.eps0;
    for l in &profile.extremal_layers {
        let d = (c_real - l.c_extr).abs();
        eps = eps.min((opts.eps_scale * d).max(opts.eps_floor));
    }
    // each level gets its own full basis (psi_+ integrates the ODE and
    // cannot run at exactly real c through a critical layer); the boundary
    // limit is taken nodewise on the shared mesh
    let deltas = [eps, 0.5 * eps, 0.25 * eps];
    let c_finest = Complex64::new(c_real, deltas[2]);
    let mesh = crate::rayleigh::graded_mesh(profile, c_finest, opts.solve.n_nodes, profile.y_max);
    let mut bases = Vec::with_capacity(3);
    for &d in &deltas {
        let p_level = SpectralParams::new(alpha, Complex64::new(c_real, d));
        let minus = solve_minus_on_mesh(profile, &p_level, &opts.solve, &mesh)?;
        bases.push(solve_plus(profile, &minus, &opts.solve)?);
    }
    let w = extrap_weights(&deltas);
    let n = mesh.len();
    let combine = |get: &dyn Fn(&ModeBasis, usize) -> Complex64| -> Vec<Complex64> {
        (0..n)
            .map(|i| (0..3).map(|k| w[k] * get(&bases[k], i)).sum())
            .collect()
    };
    let params0 = SpectralParams::new(alpha, Complex64::new(c_real, 0.0));
    let minus = crate::rayleigh::ModeSolution {
        params: params0,
        grid: mesh.clone(),
        psi: combine(&|b, i| b.psi_minus.psi[i]),
        dpsi: combine(&|b, i| b.psi_minus.dpsi[i]),
        normalization: crate::rayleigh::Normalization::DecayingUnitTail,
    };
    let plus = crate::rayleigh::ModeSolution {
        params: params0,
        grid: mesh,
        psi: combine(&|b, i| b.psi_plus.psi[i]),
        dpsi: combine(&|b, i| b.psi_plus.dpsi[i]),
        normalization: crate::rayleigh::Normalization::WronskianPartner,
    };
    Ok(ModeBasis {
        psi_minus: minus,
        psi_plus: plus,
        wronskian: Complex64::new(1.0, 0.0),
        anchor: bases[0].anchor,
    })
}

fn extrap_weights(deltas: &[f64; 3]) -> [f64; 3] {
    let mut a = [[0.0f64; 4]; 3];
    for (r, &d) in deltas.iter().enumerate() {
        a[r][0] = 1.0;
        a[r][1] = d;
        a[r][2] = d * d.ln();
    }
    // transpose-solve for the constant-term weights
    let m = a;
    let mut t = [
        [m[0][0], m[1][0], m[2][0], 1.0],
        [m[0][1], m[1][1], m[2][1], 0.0],
        [m[0][2], m[1][2], m[2][2], 0.0],
    ];
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| t[i][col].abs().total_cmp(&t[j][col].abs()))
            .unwrap();
        t.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = t[row][col] / t[col][col];
                for k in col..4 {
                    t[row][k] -= f * t[col][k];
                }
            }
        }
    }
    [t[0][3] / t[0][0], t[1][3] / t[1][1], t[2][3] / t[2][2]]
}

/// C^2 cutoff: 1 inside `|x| <= w/2`, 0 outside `|x| >= w`.
fn smooth_cutoff(x: f64, w: f64) -> f64 {
    let a = x.abs();
    if a <= 0.5 * w {
        1.0
    } else if a >= w {
        0.0
    } else {
        let t = (w - a) / (0.5 * w);
        t * t * t * (6.0 * t * t - 15.0 * t + 10.0)
    }
}

/// Computes `omega_inf` and the boundary contribution `zeta^b` on a grid.
pub fn compute_omega_inf(
    profile: &ShearProfile,
    data: &InitialData,
    ygrid: &[f64],
    opts: &DepletionOptions,
) -> Result<DepletionProfile, DepletionError> {
    use rayon::prelude::*;
    let alpha = data.alpha;
    let rows: Result<Vec<(Complex64, Complex64, f64)>, DepletionError> = ygrid
        .par_iter()
        .map(|&y| {
            let c_real = profile.us(y);
            let basis = basis_at_real_c(profile, alpha, c_real, opts)?;
            let d_abs = basis.psi_minus.psi[0].norm();
            let near_layer = profile
                .extremal_layers
                .iter()
                .find(|l| (y - l.y_extr).abs() < 0.5 * opts.window);
            let f = |x: f64| data.forcing(x);
            let (interior, boundary) = match near_layer {
                None => apply_greens_at(profile, &basis, &f, y)?,
                Some(l) => window_rewrite(profile, data, &basis, y, l.y_extr, opts)?,
            };
            let i_alpha_us2 = Complex64::i() * alpha * profile.us2(y);
            Ok((
                data.omega0(y) - i_alpha_us2 * interior,
                i_alpha_us2 * boundary,
                d_abs,
            ))
        })
        .collect();
    let rows = rows?;
    let omega_inf: Vec<Complex64> = rows.iter().map(|r| r.0).collect();
    let zeta_b: Vec<Complex64> = rows.iter().map(|r| r.1).collect();
    let d_samples: Vec<f64> = rows.iter().map(|r| r.2).collect();
    // (A3) audit over the evaluated diagonal samples
    if !profile.extremal_layers.is_empty() {
        let mut sorted = d_samples.clone();
        sorted.sort_by(f64::total_cmp);
        let med = sorted[sorted.len() / 2].max(1e-300);
        for (k, &y) in ygrid.iter().enumerate() {
            for l in &profile.extremal_layers {
                if (y - l.y_extr).abs() < 0.3 && d_samples[k] < opts.a3_floor * med {
                    return Err(DepletionError::A3Violation {
                        c_extr: l.c_extr,
                        abs_d: d_samples[k],
                    });
                }
            }
        }
    }
    let diagnostics = layer_diagnostics(profile, ygrid, &omega_inf, opts);
    Ok(DepletionProfile {
        alpha,
        ygrid: ygrid.to_vec(),
        omega_inf,
        zeta_b,
        diagnostics,
    })
}

/// Interior/boundary evaluation inside an extremal window, with the
/// `1/(U_s - c)` singularity absorbed by the integration-by-parts rewrite.
fn window_rewrite(
    profile: &ShearProfile,
    data: &InitialData,
    basis: &ModeBasis,
    y: f64,
    y_extr: f64,
    opts: &DepletionOptions,
) -> Result<(Complex64, Complex64), DepletionError> {
    let alpha = data.alpha;
    let w = opts.window;
    // the rewrite divides by U_s'': the window must stay inside its support
    for &edge in &[y_extr - w, y_extr + w] {
        if profile.us2(edge).abs() < 1e-3 {
            return Err(DepletionError::ExtremalWindow(edge));
        }
    }
    let c = Complex64::new(profile.us(y), 0.0);
    let minus = &basis.psi_minus;
    let plus = &basis.psi_plus;
    let g_tilde = |x: f64| -> Complex64 {
        if x <= y {
            plus.eval(x).0 * minus.eval(y).0
        } else {
            minus.eval(x).0 * plus.eval(y).0
        }
    };
    // theta = (d^2 - a^2) [chi f / U_s''], by central differences of the
    // smooth composite
    let phi = move |x: f64| -> Complex64 {
        let chi = smooth_cutoff(x - y_extr, w);
        if chi == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(0.0, 1.0 / alpha) * data.omega0(x) * chi / profile.us2(x)
        }
    };
    let h = 1e-4;
    let theta = move |x: f64| -> Complex64 {
        (phi(x + h) - 2.0 * phi(x) + phi(x - h)) / (h * h) - alpha * alpha * phi(x)
    };
    // int G~ theta over the window, split at the kink x = y
    let (lo, hi) = (y_extr - w, y_extr + w);
    let gt = |x: f64| g_tilde(x) * theta(x);
    let int_gt = adaptive(&gt, lo, y, 1e-11) + adaptive(&gt, y, hi, 1e-11);
    // N2: the cutoff complement, no critical layers on its support
    let y_top = *minus.grid.last().unwrap();
    let n2_int = {
        let f_n2 = |x: f64| {
            let chi = smooth_cutoff(x - y_extr, w);
            if 1.0 - chi == 0.0 {
                Complex64::default()
            } else {
                (1.0 - chi) * data.forcing(x) * g_tilde(x) / (c - profile.us(x))
            }
        };
        adaptive(&f_n2, 0.0, lo, 1e-11)
            + adaptive(&f_n2, lo, hi, 1e-11)
            + adaptive(&f_n2, hi, y_top, 1e-11)
    };
    let chi_y = smooth_cutoff(y - y_extr, w);
    // psi_int = -i/alpha chi omega0 / U_s'' - int G~ theta + N2
    let interior = -Complex64::new(0.0, 1.0 / alpha) * chi_y * data.omega0(y) / profile.us2(y)
        - int_gt
        + n2_int;
    // boundary part: trace integral with Plemelj at the window's simple
    // critical layers, then the wall-ratio correction
    let layers = all_critical_layers(profile, c.re);
    let trace = -pole_aware_integral(
        profile,
        &|x| minus.eval(x).0 * data.forcing(x),
        c,
        &layers,
        0.0,
        y_top,
    )?;
    let ratio = plus.psi[0] / minus.psi[0];
    let boundary = -ratio * trace * minus.eval(y).0;
    Ok((interior, boundary))
}

/// Local power-law fit of `|omega_inf|` around each layer over the fit band.
fn layer_diagnostics(
    profile: &ShearProfile,
    ygrid: &[f64],
    omega_inf: &[Complex64],
    opts: &DepletionOptions,
) -> Vec<LayerDiagnostics> {
    let mut out = Vec::new();
    for l in &profile.extremal_layers {
        // nearest-sample magnitude at the layer
        let abs_at = ygrid
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - l.y_extr)
                    .abs()
                    .total_cmp(&(b.1 - l.y_extr).abs())
            })
            .map(|(i, _)| omega_inf[i].norm())
            .unwrap_or(f64::NAN);
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (i, &y) in ygrid.iter().enumerate() {
            let d = (y - l.y_extr).abs();
            if d >= opts.fit_band.0 && d <= opts.fit_band.1 && omega_inf[i].norm() > 0.0 {
                xs.push(d.ln());
                vs.push(omega_inf[i].norm().ln());
            }
        }
        let (exponent, r2) = if xs.len() >= 4 {
            let (_, slope, r2) = linear_fit(&xs, &vs);
            (slope, r2)
        } else {
            (f64::NAN, 0.0)
        };
        out.push(LayerDiagnostics {
            y_extr: l.y_extr,
            abs_at_extr: abs_at,
            fit_exponent: exponent,
            fit_r2: r2,
        });
    }
    out
}

/// The boundary trace `zeta^b(y) = i alpha U_s''(y) psi^b_{alpha,U_s(y)}(y)`
/// on its own (subset of [`compute_omega_inf`]'s output, kept as the spec's
/// separate operation).
pub fn depletion_boundary_part(
    profile: &ShearProfile,
    data: &InitialData,
    ygrid: &[f64],
    opts: &DepletionOptions,
) -> Result<Vec<Complex64>, DepletionError> {
    let prof = compute_omega_inf(profile, data, ygrid, opts)?;
    Ok(prof.zeta_b)
}

/// Long-time extraction oracle: `omega(t,y) e^{+i alpha U_s(y) t}` averaged
/// over the tail of a direct evolution.
pub fn omega_inf_from_direct(
    profile: &ShearProfile,
    field: &EvolutionField,
    t_window: (f64, f64),
) -> (Vec<f64>, Vec<Complex64>) {
    let mut acc = vec![Complex64::default(); field.ygrid.len()];
    let mut count = 0usize;
    for (it, &t) in field.times.iter().enumerate() {
        if t < t_window.0 || t > t_window.1 {
            continue;
        }
        count += 1;
        for (iy, &y) in field.ygrid.iter().enumerate() {
            acc[iy] += field.omega[it][iy]
                * (Complex64::i() * field.alpha * profile.us(y) * t).exp();
        }
    }
    if count > 0 {
        for v in &mut acc {
            *v /= count as f64;
        }
    }
    (field.ygrid.clone(), acc)
}

/// Decay-fit quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitQuantity {
    Psi,
    DPsi,
    PsiInt,
    OmegaRemainder,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub window: (f64, f64),
    pub quantity: FitQuantity,
    pub exponent: f64,
    pub r2: f64,
    pub n_samples: usize,
}

impl DecayFit {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serializes")
    }
}

/// Theta-weighted sup norm over the grid: `sup_y |v(y)| / prod_l Theta(y - y_extr_l)`.
fn weighted_sup(profile: &ShearProfile, ygrid: &[f64], row: &[Complex64]) -> f64 {
    let mut best = 0.0f64;
    for (iy, &y) in ygrid.iter().enumerate() {
        let mut w = 1.0;
        for l in &profile.extremal_layers {
            w *= theta_weight(y - l.y_extr);
        }
        best = best.max(row[iy].norm() / w);
    }
    best
}

/// Least-squares decay exponent of the requested quantity against
/// `log <alpha t>` over the window. `omega_inf` is required for the
/// remainder quantity.
pub fn fit_decay(
    profile: &ShearProfile,
    field: &EvolutionField,
    quantity: FitQuantity,
    window: (f64, f64),
    omega_inf: Option<&DepletionProfile>,
) -> Result<DecayFit, DepletionError> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (it, &t) in field.times.iter().enumerate() {
        if t < window.0 || t > window.1 {
            continue;
        }
        let value = match quantity {
            FitQuantity::Psi => weighted_sup(profile, &field.ygrid, &field.decay_psi[it]),
            FitQuantity::DPsi => weighted_sup(profile, &field.ygrid, &field.decay_dpsi[it]),
            FitQuantity::PsiInt => {
                if field.psi_int.is_empty() {
                    return Err(DepletionError::TooFewSamples(0));
                }
                weighted_sup(profile, &field.ygrid, &field.psi_int[it])
            }
            FitQuantity::OmegaRemainder => {
                let dep = omega_inf.expect("omega_inf needed for the remainder fit");
                let row: Vec<Complex64> = field
                    .ygrid
                    .iter()
                    .enumerate()
                    .map(|(iy, &y)| {
                        let winf = interp_omega_inf(dep, y);
                        field.decay_omega[it][iy]
                            - winf
                                * (-Complex64::i() * field.alpha * profile.us(y) * t).exp()
                    })
                    .collect();
                weighted_sup(profile, &field.ygrid, &row)
            }
        };
        xs.push(crate::bracket(field.alpha * t).ln());
        vs.push(value.max(1e-300).ln());
    }
    if xs.len() < 8 {
        return Err(DepletionError::TooFewSamples(xs.len()));
    }
    let (_, slope, r2) = linear_fit(&xs, &vs);
    if r2 < 0.95 {
        return Err(DepletionError::PoorFit { quantity, r2 });
    }
    Ok(DecayFit {
        window,
        quantity,
        exponent: slope,
        r2,
        n_samples: xs.len(),
    })
}

fn interp_omega_inf(dep: &DepletionProfile, y: f64) -> Complex64 {
    match dep
        .ygrid
        .binary_search_by(|g| g.partial_cmp(&y).unwrap())
    {
        Ok(i) => dep.omega_inf[i],
        Err(i) => {
            if i == 0 {
                dep.omega_inf[0]
            } else if i >= dep.ygrid.len() {
                *dep.omega_inf.last().unwrap()
            } else {
                let t = (y - dep.ygrid[i - 1]) / (dep.ygrid[i] - dep.ygrid[i - 1]);
                dep.omega_inf[i - 1] * (1.0 - t) + dep.omega_inf[i] * t
            }
        }
    }
}
