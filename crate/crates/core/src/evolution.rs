//! Time evolution of one Fourier mode of the linearized Euler equations.
//!
//! Two independent routes:
//! - [`evolve_contour`]: inverse Laplace transform of the resolvent,
//!   `psi(t,y) = (alpha/2pi) int_Gamma e^{-i alpha c t} psi_{alpha,c}(y) dc`
//!   over `Gamma = Gamma_1 u Gamma_2 u Gamma_3` (slanted rays into the lower
//!   half plane plus a horizontal segment at height `eps`). The vorticity
//!   transport pole is integrated analytically, eigenvalue poles are
//!   subtracted from the samples and added back as modes, and the expensive
//!   resolvent samples are shared across output times through exact
//!   exponential moments per panel.
//! - [`evolve_direct`]: classical RK4 on the vorticity transport form
//!   `d omega/dt = -i alpha U_s omega + i alpha U_s'' psi` with a tridiagonal
//!   elliptic solve per stage. This is the oracle the contour route is
//!   checked against.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::greens::{apply_greens, solve_tridiagonal, GreensError};
use crate::profile::ShearProfile;
use crate::quadrature::filon_exp;
use crate::rayleigh::{
    solve_minus, solve_minus_real, solve_plus, SolveError, SolveOptions, SpectralParams,
};
use crate::spectrum::SpectrumReport;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvolutionError {
    #[error("eigenvalue at c = {c} lies within {dist:.3e} of the contour (needs > {needed:.3e})")]
    ContourEigenvalue { c: Complex64, dist: f64, needed: f64 },
    #[error("dt = {dt} violates the stability bound {bound:.3e}")]
    Step { dt: f64, bound: f64 },
    #[error("initial data invalid: {0}")]
    BadData(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Greens(#[from] GreensError),
}

/// Fourier-mode initial vorticity. The closure is the transform in `x` of
/// the initial vorticity at wavenumber `alpha`.
#[derive(Clone)]
pub struct InitialData {
    pub alpha: f64,
    omega0: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    /// Measured exponential tail rate of `|omega0|`.
    pub kappa: f64,
}

impl InitialData {
    pub fn new(
        alpha: f64,
        profile_y_max: f64,
        omega0: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self, EvolutionError> {
        let f = Arc::new(omega0);
        let peak = (0..400)
            .map(|k| f(profile_y_max * k as f64 / 400.0).norm())
            .fold(0.0f64, f64::max);
        if peak == 0.0 {
            return Ok(InitialData {
                alpha,
                omega0: f,
                kappa: f64::INFINITY,
            });
        }
        // measured decay rate over the outer half of the domain
        let y1 = 0.5 * profile_y_max;
        let y2 = 0.85 * profile_y_max;
        let v1 = f(y1).norm().max(1e-280);
        let v2 = f(y2).norm().max(1e-280);
        let kappa = (v1 / v2).ln() / (y2 - y1);
        if kappa <= 0.0 && v2 > 1e-12 * peak {
            return Err(EvolutionError::BadData(format!(
                "initial vorticity does not decay (measured rate {kappa})"
            )));
        }
        Ok(InitialData {
            alpha,
            omega0: f,
            kappa: kappa.max(0.0),
        })
    }

    /// Gaussian bump `exp(-((y - center)/width)^2)`.
    pub fn gaussian(
        alpha: f64,
        profile_y_max: f64,
        center: f64,
        width: f64,
    ) -> Result<Self, EvolutionError> {
        Self::new(alpha, profile_y_max, move |y: f64| {
            Complex64::new((-((y - center) / width).powi(2)).exp(), 0.0)
        })
    }

    pub fn omega0(&self, y: f64) -> Complex64 {
        (self.omega0)(y)
    }

    /// The Rayleigh forcing `i alpha^{-1} omega0`.
    pub fn forcing(&self, y: f64) -> Complex64 {
        Complex64::new(0.0, 1.0 / self.alpha) * (self.omega0)(y)
    }
}

/// Contour geometry: `Gamma_2 = [-A + i eps, A + i eps]` and the two rays
/// descending at 45 degrees from its endpoints.
#[derive(Debug, Clone)]
pub struct ContourSpec {
    pub a_half: f64,
    pub eps: f64,
    /// Panel edges along `Gamma_2` (real parts).
    pub gamma2_edges: Vec<f64>,
    /// Panel edges along each ray (arc parameter, ascending from 0).
    pub ray_edges: Vec<f64>,
}

impl ContourSpec {
    /// Builds the contour for times down to `t_min` (ray truncation) with
    /// pole-aware grading of `Gamma_2` towards the continuous range.
    pub fn build(profile: &ShearProfile, alpha: f64, eps: f64, t_min: f64) -> Self {
        let (lo, hi) = profile.velocity_range();
        let a_half = (2.0 * lo.abs().max(hi.abs())).max(1.0);
        // Gamma_2: panels sized by distance to the range, floor ~ eps scale
        let mut edges = vec![-a_half];
        let mut x = -a_half;
        while x < a_half {
            let dist = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            };
            let step = (0.35 * dist + 0.55 * eps).clamp(0.55 * eps, 0.35);
            x += step;
            edges.push(x.min(a_half));
        }
        // rays: length to kill |e^{-i alpha c t}| below 1e-12 at t_min,
        // log-spaced panels
        let decay_len = if t_min > 0.0 {
            (12.0 * std::f64::consts::LN_10 / (alpha * t_min)).min(2400.0)
        } else {
            2400.0
        };
        let mut ray_edges = vec![0.0];
        let mut s = (decay_len / 4096.0).min(0.05);
        while *ray_edges.last().unwrap() < decay_len {
            ray_edges.push(s.min(decay_len));
            s *= 1.45;
        }
        ContourSpec {
            a_half,
            eps,
            gamma2_edges: edges,
            ray_edges,
        }
    }

    /// Minimum distance from a point to the contour polyline.
    pub fn distance(&self, c: Complex64) -> f64 {
        let mut d = (c.im - self.eps).abs();
        if c.re.abs() > self.a_half {
            d = d.max((c.re.abs() - self.a_half) / std::f64::consts::SQRT_2);
        }
        d
    }

    /// Coarsest panel size near a given real part (for the eigenvalue
    /// clearance check).
    pub fn local_spacing(&self, re: f64) -> f64 {
        let mut best = f64::INFINITY;
        for w in self.gamma2_edges.windows(2) {
            if re >= w[0] - 0.5 && re <= w[1] + 0.5 {
                best = best.min(w[1] - w[0]);
            }
        }
        if best.is_finite() {
            best
        } else {
            self.ray_edges.get(1).copied().unwrap_or(0.05)
        }
    }
}

/// One eigenmode contribution: the field term is `amp * e^{-i alpha c t}`.
#[derive(Debug, Clone)]
pub struct ModeContribution {
    pub c: Complex64,
    pub embedded: bool,
    pub amp_psi: Vec<Complex64>,
    pub amp_dpsi: Vec<Complex64>,
    pub amp_omega: Vec<Complex64>,
}

/// Time-indexed fields with the mode/decay split.
#[derive(Debug, Clone)]
pub struct EvolutionField {
    pub alpha: f64,
    pub times: Vec<f64>,
    pub ygrid: Vec<f64>,
    pub psi: Vec<Vec<Complex64>>,
    pub dpsi: Vec<Vec<Complex64>>,
    pub omega: Vec<Vec<Complex64>>,
    pub decay_psi: Vec<Vec<Complex64>>,
    pub decay_dpsi: Vec<Vec<Complex64>>,
    pub decay_omega: Vec<Vec<Complex64>>,
    /// Interior (no-boundary-correction) part of the decaying stream
    /// function; empty for the direct stepper.
    pub psi_int: Vec<Vec<Complex64>>,
    pub modes: Vec<ModeContribution>,
}

impl EvolutionField {
    pub fn sup_norm(&self, arr: &[Vec<Complex64>], it: usize) -> f64 {
        arr[it].iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV rows `t,y,re_psi,im_psi,re_dpsi,im_dpsi,re_omega,im_omega,part`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("t,y,re_psi,im_psi,re_dpsi,im_dpsi,re_omega,im_omega,part\n");
        let mut push = |t: f64,
                        y: f64,
                        p: Complex64,
                        d: Complex64,
                        o: Complex64,
                        part: &str,
                        out: &mut String| {
            out.push_str(&format!(
                "{t:e},{y:e},{:e},{:e},{:e},{:e},{:e},{:e},{part}\n",
                p.re, p.im, d.re, d.im, o.re, o.im
            ));
        };
        for (it, &t) in self.times.iter().enumerate() {
            for (iy, &y) in self.ygrid.iter().enumerate() {
                push(
                    t,
                    y,
                    self.psi[it][iy],
                    self.dpsi[it][iy],
                    self.omega[it][iy],
                    "full",
                    &mut out,
                );
                push(
                    t,
                    y,
                    self.decay_psi[it][iy],
                    self.decay_dpsi[it][iy],
                    self.decay_omega[it][iy],
                    "decay",
                    &mut out,
                );
                let mut mp = Complex64::default();
                let mut md = Complex64::default();
                let mut mo = Complex64::default();
                for m in &self.modes {
                    let phase = (-Complex64::i() * self.alpha * m.c * t).exp();
                    mp += m.amp_psi[iy] * phase;
                    md += m.amp_dpsi[iy] * phase;
                    mo += m.amp_omega[iy] * phase;
                }
                push(t, y, mp, md, mo, "modes", &mut out);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionOptions {
    pub solve: SolveOptions,
    /// Output grid: uniform nodes on `[0, y_out_max]`.
    pub n_out: usize,
    pub y_out_max: Option<f64>,
    /// Cap of the contour height schedule `eps = min(cap, 1/(alpha t))`.
    pub eps_cap: f64,
    /// Two-level Richardson extrapolation in the contour height.
    pub richardson: bool,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        let mut solve = SolveOptions::default();
        solve.n_nodes = 1000;
        EvolutionOptions {
            solve,
            n_out: 257,
            y_out_max: None,
            eps_cap: 1e-2,
            richardson: true,
        }
    }
}

fn output_grid(profile: &ShearProfile, opts: &EvolutionOptions) -> Vec<f64> {
    let top = opts.y_out_max.unwrap_or(profile.y_max.min(10.0));
    (0..opts.n_out)
        .map(|k| top * k as f64 / (opts.n_out - 1) as f64)
        .collect()
}

/// Mode amplitudes on a target grid: the residue of the resolvent at each
/// eigenvalue, normalized so the field term is `amp * e^{-i alpha c t}`.
///
/// `amp_psi = i alpha psi_+(0) T w_res psi_-(y)` with
/// `T = int psi_- f/(c - U_s) dx` and `w_res = 1/D'`; at the eigenvalue
/// `psi_+(0) = -1/psi_-'(0)` exactly (unit Wronskian at a dispersion zero).
pub fn mode_amplitudes(
    profile: &ShearProfile,
    data: &InitialData,
    report: &SpectrumReport,
    ygrid: &[f64],
    opts: &EvolutionOptions,
) -> Result<Vec<ModeContribution>, EvolutionError> {
    let alpha = data.alpha;
    let mut out = Vec::new();
    let mut entries: Vec<(Complex64, Complex64, bool)> = report
        .discrete
        .iter()
        .map(|d| (d.c(), d.residue_weight(), false))
        .collect();
    for e in &report.embedded {
        // residue weight for embedded roots from the extrapolated derivative
        let h = 1e-6;
        let dp = solve_minus_real(profile, alpha, e.c + h, &opts.solve)?.boundary_value();
        let dm = solve_minus_real(profile, alpha, e.c - h, &opts.solve)?.boundary_value();
        let w = 2.0 * h / (dp - dm);
        entries.push((Complex64::new(e.c, 0.0), w, true));
    }
    for (c, w_res, embedded) in entries {
        let minus = if embedded {
            solve_minus_real(profile, alpha, c.re, &opts.solve)?
        } else {
            solve_minus(profile, &SpectralParams::new(alpha, c), &opts.solve)?
        };
        let psi_plus_0 = -1.0 / minus.dpsi[0];
        // T = int psi_- f /(c - U_s) dx on the solver grid
        let mut t_int = Complex64::default();
        for i in 0..minus.grid.len() - 1 {
            let (a, b) = (minus.grid[i], minus.grid[i + 1]);
            let (fa, da, fb, db) = (minus.psi[i], minus.dpsi[i], minus.psi[i + 1], minus.dpsi[i + 1]);
            let f = |x: f64| {
                let (p, _) = crate::rayleigh::hermite_eval(a, b, fa, da, fb, db, x);
                p * data.forcing(x) / (c - profile.us(x))
            };
            t_int += crate::quadrature::gl10(&f, a, b);
        }
        let coef = Complex64::i() * alpha * psi_plus_0 * t_int * w_res;
        let mut amp_psi = Vec::with_capacity(ygrid.len());
        let mut amp_dpsi = Vec::with_capacity(ygrid.len());
        let mut amp_omega = Vec::with_capacity(ygrid.len());
        for &y in ygrid {
            let (p, d) = minus.eval(y);
            amp_psi.push(coef * p);
            amp_dpsi.push(coef * d);
            // omega residue: -(U_s''/(U_s - c)) times the psi residue
            amp_omega.push(-profile.us2(y) / (profile.us(y) - c) * coef * p);
        }
        out.push(ModeContribution {
            c,
            embedded,
            amp_psi,
            amp_dpsi,
            amp_omega,
        });
    }
    Ok(out)
}

/// One resolvent sample on the contour: the applied Green's function parts
/// on the output grid.
struct ContourSample {
    c: Complex64,
    psi_int: Vec<Complex64>,
    dpsi_int: Vec<Complex64>,
    psi_b: Vec<Complex64>,
    dpsi_b: Vec<Complex64>,
}

fn resolvent_sample(
    profile: &ShearProfile,
    data: &InitialData,
    c: Complex64,
    ygrid: &[f64],
    opts: &EvolutionOptions,
) -> Result<ContourSample, EvolutionError> {
    let params = SpectralParams::new(data.alpha, c);
    let minus = solve_minus(profile, &params, &opts.solve)?;
    let basis = solve_plus(profile, &minus, &opts.solve)?;
    let f = |x: f64| data.forcing(x);
    let app = apply_greens(profile, &basis, &f)?;
    // interpolate the application onto the output grid
    let eval = |arr_p: &[Complex64], arr_d: &[Complex64], y: f64| -> (Complex64, Complex64) {
        let grid = &app.grid;
        let k = match grid.binary_search_by(|g| g.partial_cmp(&y).unwrap()) {
            Ok(k) => return (arr_p[k], arr_d[k]),
            Err(k) => k.clamp(1, grid.len() - 1) - 1,
        };
        crate::rayleigh::hermite_eval(
            grid[k],
            grid[k + 1],
            arr_p[k],
            arr_d[k],
            arr_p[k + 1],
            arr_d[k + 1],
            y,
        )
    };
    let mut psi_int = Vec::with_capacity(ygrid.len());
    let mut dpsi_int = Vec::with_capacity(ygrid.len());
    let mut psi_b = Vec::with_capacity(ygrid.len());
    let mut dpsi_b = Vec::with_capacity(ygrid.len());
    for &y in ygrid {
        let (p, d) = eval(&app.psi_int, &app.dpsi_int, y);
        psi_int.push(p);
        dpsi_int.push(d);
        let (p, d) = eval(&app.psi_b, &app.dpsi_b, y);
        psi_b.push(p);
        dpsi_b.push(d);
    }
    Ok(ContourSample {
        c,
        psi_int,
        dpsi_int,
        psi_b,
        dpsi_b,
    })
}

/// Contour panels with three samples each (edges shared).
struct PanelSet {
    /// (start c, dc/ds, length, sample indices [i0, im, i1])
    panels: Vec<(Complex64, Complex64, f64, [usize; 3])>,
    samples: Vec<ContourSample>,
}

fn build_samples(
    profile: &ShearProfile,
    data: &InitialData,
    spec: &ContourSpec,
    ygrid: &[f64],
    opts: &EvolutionOptions,
) -> Result<PanelSet, EvolutionError> {
    // collect sample locations: rays (left: descending into lower-left,
    // traversed upward; right: descending to lower-right), Gamma_2 between
    let i_eps = Complex64::new(0.0, spec.eps);
    let left_corner = Complex64::new(-spec.a_half, 0.0) + i_eps;
    let right_corner = Complex64::new(spec.a_half, 0.0) + i_eps;
    let dir_left = Complex64::new(1.0, 1.0) / std::f64::consts::SQRT_2;
    let dir_right = Complex64::new(1.0, -1.0) / std::f64::consts::SQRT_2;

    let mut panel_geom: Vec<(Complex64, Complex64, f64)> = Vec::new();
    // Gamma_1: from the far end of the left ray up to the corner
    for w in spec.ray_edges.windows(2).rev() {
        let (s0, s1) = (w[1], w[0]);
        let start = left_corner - dir_left * s0;
        panel_geom.push((start, dir_left, s0 - s1));
    }
    // Gamma_2 left to right
    for w in spec.gamma2_edges.windows(2) {
        let start = Complex64::new(w[0], 0.0) + i_eps;
        panel_geom.push((start, Complex64::new(1.0, 0.0), w[1] - w[0]));
    }
    // Gamma_3 downward
    for w in spec.ray_edges.windows(2) {
        let start = right_corner + dir_right * w[0];
        panel_geom.push((start, dir_right, w[1] - w[0]));
    }

    // dedupe shared sample points
    let mut samples_c: Vec<Complex64> = Vec::new();
    let mut panels = Vec::new();
    let mut push_sample = |c: Complex64, samples_c: &mut Vec<Complex64>| -> usize {
        if let Some(last) = samples_c.last() {
            if (last - c).norm() < 1e-14 * (1.0 + c.norm()) {
                return samples_c.len() - 1;
            }
        }
        samples_c.push(c);
        samples_c.len() - 1
    };
    for (start, dir, len) in panel_geom {
        let i0 = push_sample(start, &mut samples_c);
        let im = push_sample(start + dir * (0.5 * len), &mut samples_c);
        let i1 = push_sample(start + dir * len, &mut samples_c);
        panels.push((start, dir, len, [i0, im, i1]));
    }

    let samples: Result<Vec<ContourSample>, EvolutionError> = samples_c
        .par_iter()
        .map(|&c| resolvent_sample(profile, data, c, ygrid, opts))
        .collect();
    Ok(PanelSet {
        panels,
        samples: samples?,
    })
}

/// Evolves by contour integration. The spectrum report must cover the
/// search region so the contour can be placed and the poles extracted.
pub fn evolve_contour(
    profile: &ShearProfile,
    data: &InitialData,
    report: &SpectrumReport,
    times: &[f64],
    opts: &EvolutionOptions,
) -> Result<EvolutionField, EvolutionError> {
    let alpha = data.alpha;
    let ygrid = output_grid(profile, opts);
    let ny = ygrid.len();
    let nt = times.len();
    let modes = mode_amplitudes(profile, data, report, &ygrid, opts)?;

    let mut decay_psi = vec![vec![Complex64::default(); ny]; nt];
    let mut decay_dpsi = vec![vec![Complex64::default(); ny]; nt];
    let mut psi_int_arr = vec![vec![Complex64::default(); ny]; nt];
    let mut omega_coupling = vec![vec![Complex64::default(); ny]; nt];

    // bucket times by the eps schedule (octaves)
    let eps_of = |t: f64| {
        if t <= 0.0 {
            opts.eps_cap
        } else {
            opts.eps_cap.min(1.0 / (alpha * t))
        }
    };
    // t = 0 keeps its own bucket: its rays never decay, so it cannot share
    // the truncation length of positive times
    let mut buckets: Vec<(f64, Vec<usize>)> = Vec::new();
    for (it, &t) in times.iter().enumerate() {
        let e = eps_of(t);
        match buckets.iter_mut().find(|(be, list)| {
            *be / e < 2.0
                && e / *be < 2.0
                && (t > 0.0) == list.iter().all(|&j| times[j] > 0.0)
                && (t > 0.0 || times[list[0]] == 0.0)
        }) {
            Some((be, list)) => {
                *be = be.min(e);
                list.push(it);
            }
            None => buckets.push((e, vec![it])),
        }
    }

    for (eps_bucket, t_indices) in buckets {
        let t_min_pos = t_indices
            .iter()
            .map(|&i| times[i])
            .filter(|&t| t > 0.0)
            .fold(f64::INFINITY, f64::min);
        let t_min_pos = if t_min_pos.is_finite() { t_min_pos } else { 0.0 };
        let levels: Vec<f64> = if opts.richardson {
            vec![eps_bucket, 0.5 * eps_bucket]
        } else {
            vec![eps_bucket]
        };
        // per-level fields, then Richardson extrapolation in eps
        let mut level_fields: Vec<[Vec<Vec<Complex64>>; 4]> = Vec::new();
        for &eps in &levels {
            let spec = ContourSpec::build(profile, alpha, eps, t_min_pos);
            // eigenvalues must clear the contour
            for m in &modes {
                if m.embedded {
                    continue;
                }
                let dist = spec.distance(m.c);
                let needed = 2.0 * spec.local_spacing(m.c.re);
                if dist < needed {
                    return Err(EvolutionError::ContourEigenvalue {
                        c: m.c,
                        dist,
                        needed,
                    });
                }
            }
            let set = build_samples(profile, data, &spec, &ygrid, opts)?;
            let field = accumulate_times(
                profile, data, &set, &modes, &ygrid, &t_indices, times, eps,
            );
            level_fields.push(field);
        }
        let combine = |k: usize, a: &Vec<Vec<Complex64>>, b: Option<&Vec<Vec<Complex64>>>| {
            let _ = k;
            let mut out = a.clone();
            if let Some(b) = b {
                for (row_a, row_b) in out.iter_mut().zip(b) {
                    for (va, vb) in row_a.iter_mut().zip(row_b) {
                        // Richardson: 2 f(eps/2) - f(eps)
                        *va = 2.0 * *vb - *va;
                    }
                }
            }
            out
        };
        let fine = level_fields.get(1);
        let psi_l = combine(0, &level_fields[0][0], fine.map(|f| &f[0]));
        let dpsi_l = combine(1, &level_fields[0][1], fine.map(|f| &f[1]));
        let int_l = combine(2, &level_fields[0][2], fine.map(|f| &f[2]));
        let om_l = combine(3, &level_fields[0][3], fine.map(|f| &f[3]));
        for (row, &it) in t_indices.iter().enumerate() {
            decay_psi[it] = psi_l[row].clone();
            decay_dpsi[it] = dpsi_l[row].clone();
            psi_int_arr[it] = int_l[row].clone();
            omega_coupling[it] = om_l[row].clone();
        }
    }

    // assemble the full fields: transport + coupling + modes
    let mut psi = vec![vec![Complex64::default(); ny]; nt];
    let mut dpsi = vec![vec![Complex64::default(); ny]; nt];
    let mut omega = vec![vec![Complex64::default(); ny]; nt];
    let mut decay_omega = vec![vec![Complex64::default(); ny]; nt];
    for (it, &t) in times.iter().enumerate() {
        for (iy, &y) in ygrid.iter().enumerate() {
            let transport =
                data.omega0(y) * (-Complex64::i() * alpha * profile.us(y) * t).exp();
            decay_omega[it][iy] = transport + omega_coupling[it][iy];
            let mut mp = Complex64::default();
            let mut md = Complex64::default();
            let mut mo = Complex64::default();
            for m in &modes {
                let phase = (-Complex64::i() * alpha * m.c * t).exp();
                mp += m.amp_psi[iy] * phase;
                md += m.amp_dpsi[iy] * phase;
                mo += m.amp_omega[iy] * phase;
            }
            psi[it][iy] = decay_psi[it][iy] + mp;
            dpsi[it][iy] = decay_dpsi[it][iy] + md;
            omega[it][iy] = decay_omega[it][iy] + mo;
        }
    }
    Ok(EvolutionField {
        alpha,
        times: times.to_vec(),
        ygrid,
        psi,
        dpsi,
        omega,
        decay_psi,
        decay_dpsi,
        decay_omega,
        psi_int: psi_int_arr,
        modes,
    })
}

/// Sums the contour quadrature for each requested time, with eigenvalue
/// poles subtracted from the samples. Returns
/// `[psi_decay, dpsi_decay, psi_int, omega_coupling]` indexed `[t][y]`.
#[allow(clippy::too_many_arguments)]
fn accumulate_times(
    profile: &ShearProfile,
    data: &InitialData,
    set: &PanelSet,
    modes: &[ModeContribution],
    ygrid: &[f64],
    t_indices: &[usize],
    times: &[f64],
    eps: f64,
) -> [Vec<Vec<Complex64>>; 4] {
    let alpha = data.alpha;
    let ny = ygrid.len();
    let nt = t_indices.len();
    let mut psi_out = vec![vec![Complex64::default(); ny]; nt];
    let mut dpsi_out = vec![vec![Complex64::default(); ny]; nt];
    let mut int_out = vec![vec![Complex64::default(); ny]; nt];
    let mut om_out = vec![vec![Complex64::default(); ny]; nt];

    // pole-subtracted sample values at one (sample, y)
    let sub = |s: &ContourSample, iy: usize| -> (Complex64, Complex64, Complex64, Complex64) {
        let mut p = s.psi_int[iy] + s.psi_b[iy];
        let mut d = s.dpsi_int[iy] + s.dpsi_b[iy];
        let pint = s.psi_int[iy];
        let y = ygrid[iy];
        let mut om = profile.us2(y) * (s.psi_int[iy] + s.psi_b[iy])
            / (profile.us(y) - s.c);
        for m in modes {
            // amp = -i alpha Res => Res = amp/(-i alpha)
            let res_p = m.amp_psi[iy] / (-Complex64::i() * alpha);
            let res_d = m.amp_dpsi[iy] / (-Complex64::i() * alpha);
            let res_o = m.amp_omega[iy] / (-Complex64::i() * alpha);
            p -= res_p / (s.c - m.c);
            d -= res_d / (s.c - m.c);
            // F_omega = U_s'' psi/(U_s - c) has residue -res_o at the pole
            om += res_o / (s.c - m.c);
        }
        (p, d, pint, om)
    };

    let rows: Vec<(usize, [Vec<Complex64>; 4])> = (0..nt)
        .into_par_iter()
        .map(|row| {
            let t = times[t_indices[row]];
            let mut psi_row = vec![Complex64::default(); ny];
            let mut dpsi_row = vec![Complex64::default(); ny];
            let mut int_row = vec![Complex64::default(); ny];
            let mut om_row = vec![Complex64::default(); ny];
            for &(start, dir, len, idx) in &set.panels {
                // int F(s) e^{-i alpha t c(s)} dc = dir e^{-i a t c0} int F e^{mu s} ds
                let mu = -Complex64::i() * alpha * t * dir;
                let carrier = (-Complex64::i() * alpha * t * start).exp() * dir;
                let s0 = &set.samples[idx[0]];
                let sm = &set.samples[idx[1]];
                let s1 = &set.samples[idx[2]];
                for iy in 0..ny {
                    let (p0, d0, i0, o0) = sub(s0, iy);
                    let (pm, dm, im, om) = sub(sm, iy);
                    let (p1, d1, i1, o1) = sub(s1, iy);
                    psi_row[iy] += carrier * filon_exp(p0, pm, p1, len, mu);
                    dpsi_row[iy] += carrier * filon_exp(d0, dm, d1, len, mu);
                    int_row[iy] += carrier * filon_exp(i0, im, i1, len, mu);
                    om_row[iy] += carrier * filon_exp(o0, om, o1, len, mu);
                }
            }
            // (alpha/2pi) prefactor; omega coupling carries the -1 from
            // omega_hat = -[U_s'' psi + f]/(U_s - c)
            let pref = alpha / (2.0 * std::f64::consts::PI);
            for iy in 0..ny {
                psi_row[iy] *= pref;
                dpsi_row[iy] *= pref;
                int_row[iy] *= pref;
                om_row[iy] *= -pref;
            }
            // embedded poles sit below the contour: re-add the exact
            // level-dependent part of their models so the eps-limit is clean
            let t_loc = t;
            for m in modes.iter().filter(|m| m.embedded) {
                let phase = (-Complex64::i() * alpha * m.c * t_loc).exp();
                let damp = (-alpha * eps * t_loc).exp() - 1.0;
                for iy in 0..ny {
                    psi_row[iy] += m.amp_psi[iy] * phase * damp;
                    dpsi_row[iy] += m.amp_dpsi[iy] * phase * damp;
                    om_row[iy] += m.amp_omega[iy] * phase * damp;
                }
            }
            (row, [psi_row, dpsi_row, int_row, om_row])
        })
        .collect();
    for (row, [p, d, i, o]) in rows {
        psi_out[row] = p;
        dpsi_out[row] = d;
        int_out[row] = i;
        om_out[row] = o;
    }
    [psi_out, dpsi_out, int_out, om_out]
}

/// Classical explicit RK4 on the vorticity transport form, with the stream
/// function recovered each stage by a tridiagonal elliptic solve
/// (`psi(0) = 0`, Robin `psi' = -alpha psi` at the top).
pub fn evolve_direct(
    profile: &ShearProfile,
    data: &InitialData,
    times: &[f64],
    dt: f64,
    n_y: usize,
) -> Result<EvolutionField, EvolutionError> {
    let alpha = data.alpha;
    let (lo, hi) = profile.velocity_range();
    let bound = 0.5 / (alpha * hi.abs().max(lo.abs()).max(1e-12));
    if dt > bound {
        return Err(EvolutionError::Step { dt, bound });
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = profile.y_max / n_y as f64;
    let ygrid: Vec<f64> = (0..=n_y).map(|k| h * k as f64).collect();
    let us: Vec<f64> = ygrid.iter().map(|&y| profile.us(y)).collect();
    let us2: Vec<f64> = ygrid.iter().map(|&y| profile.us2(y)).collect();

    // elliptic solve (d^2 - alpha^2) psi = -omega on interior nodes
    let n_int = n_y; // unknowns psi_1..psi_N (wall value fixed to zero)
    let mut lower = vec![Complex64::default(); n_int];
    let mut diag = vec![Complex64::default(); n_int];
    let mut upper = vec![Complex64::default(); n_int];
    for i in 0..n_int - 1 {
        lower[i] = Complex64::new(1.0 / (h * h), 0.0);
        diag[i] = Complex64::new(-2.0 / (h * h) - alpha * alpha, 0.0);
        upper[i] = Complex64::new(1.0 / (h * h), 0.0);
    }
    let m = n_int - 1;
    lower[m] = Complex64::new(-1.0 / h, 0.0);
    diag[m] = Complex64::new(1.0 / h + alpha, 0.0);
    upper[m] = Complex64::default();

    let solve_psi = |omega: &[Complex64]| -> Vec<Complex64> {
        let mut rhs = vec![Complex64::default(); n_int];
        for i in 0..n_int - 1 {
            rhs[i] = -omega[i + 1];
        }
        rhs[m] = Complex64::default();
        let interior = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        let mut psi = vec![Complex64::default(); n_y + 1];
        psi[1..].copy_from_slice(&interior);
        psi
    };
    // d omega/dt = -i alpha (U_s omega + U_s'' psi); the coupling sign is
    // fixed by Laplace-transform consistency with the Rayleigh resolvent
    // (U_s - c)(psi'' - a^2 psi) - U_s'' psi = i omega0 / alpha
    let rhs_omega = |omega: &[Complex64]| -> Vec<Complex64> {
        let psi = solve_psi(omega);
        (0..=n_y)
            .map(|i| {
                -Complex64::i() * alpha * (us[i] * omega[i] + us2[i] * psi[i])
            })
            .collect()
    };

    let mut omega: Vec<Complex64> = ygrid.iter().map(|&y| data.omega0(y)).collect();
    let mut t = 0.0;
    let mut psi_t = Vec::new();
    let mut dpsi_t = Vec::new();
    let mut omega_t = Vec::new();
    for &target in &sorted {
        let span = target - t;
        if span > 1e-14 {
            let steps = (span / dt).ceil() as usize;
            let hstep = span / steps as f64;
            for _ in 0..steps {
                let k1 = rhs_omega(&omega);
                let w2: Vec<Complex64> = omega
                    .iter()
                    .zip(&k1)
                    .map(|(o, k)| o + 0.5 * hstep * k)
                    .collect();
                let k2 = rhs_omega(&w2);
                let w3: Vec<Complex64> = omega
                    .iter()
                    .zip(&k2)
                    .map(|(o, k)| o + 0.5 * hstep * k)
                    .collect();
                let k3 = rhs_omega(&w3);
                let w4: Vec<Complex64> = omega
                    .iter()
                    .zip(&k3)
                    .map(|(o, k)| o + hstep * k)
                    .collect();
                let k4 = rhs_omega(&w4);
                for i in 0..omega.len() {
                    omega[i] += hstep / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            t = target;
        }
        let psi = solve_psi(&omega);
        let mut dpsi = vec![Complex64::default(); n_y + 1];
        for i in 1..n_y {
            dpsi[i] = (psi[i + 1] - psi[i - 1]) / (2.0 * h);
        }
        dpsi[0] = (psi[1] - psi[0]) / h;
        dpsi[n_y] = -alpha * psi[n_y];
        psi_t.push(psi);
        dpsi_t.push(dpsi);
        omega_t.push(omega.clone());
    }
    Ok(EvolutionField {
        alpha,
        times: sorted,
        ygrid,
        psi: psi_t.clone(),
        dpsi: dpsi_t.clone(),
        omega: omega_t.clone(),
        decay_psi: psi_t,
        decay_dpsi: dpsi_t,
        decay_omega: omega_t,
        psi_int: Vec::new(),
        modes: Vec::new(),
    })
}

/// Populates `modes` from the spectrum report and subtracts them from the
/// field, leaving `decay_* = field - modes`.
pub fn split_modes(
    mut field: EvolutionField,
    profile: &ShearProfile,
    data: &InitialData,
    report: &SpectrumReport,
    opts: &EvolutionOptions,
) -> Result<EvolutionField, EvolutionError> {
    let modes = mode_amplitudes(profile, data, report, &field.ygrid, opts)?;
    for (it, &t) in field.times.iter().enumerate() {
        for iy in 0..field.ygrid.len() {
            let mut mp = Complex64::default();
            let mut md = Complex64::default();
            let mut mo = Complex64::default();
            for m in &modes {
                let phase = (-Complex64::i() * data.alpha * m.c * t).exp();
                mp += m.amp_psi[iy] * phase;
                md += m.amp_dpsi[iy] * phase;
                mo += m.amp_omega[iy] * phase;
            }
            field.decay_psi[it][iy] = field.psi[it][iy] - mp;
            field.decay_dpsi[it][iy] = field.dpsi[it][iy] - md;
            field.decay_omega[it][iy] = field.omega[it][iy] - mo;
        }
    }
    field.modes = modes;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{build_profile, ProfileSpec, ShearProfile};
    use crate::spectrum::{audit_and_report, SearchBox, SpectrumOptions};

    fn window_report(p: &ShearProfile, alpha: f64) -> SpectrumReport {
        audit_and_report(
            p,
            alpha,
            &SearchBox {
                re_lo: 0.02,
                re_hi: 0.97,
                im_lo: 1e-3,
                im_hi: 0.5,
            },
            &SpectrumOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn direct_is_exact_transport_when_uncoupled() {
        // U_s'' = 0: omega(t,y) = e^{-i alpha U_s(y) t} omega0(y)
        let p = ShearProfile::linear_window(1.0, 8.0);
        let data = InitialData::gaussian(1.0, 8.0, 3.0, 0.5).unwrap();
        let field = evolve_direct(&p, &data, &[10.0], 5e-4, 1600).unwrap();
        let mut worst = 0.0f64;
        let mut amp_dev = 0.0f64;
        for (iy, &y) in field.ygrid.iter().enumerate() {
            let exact = data.omega0(y) * (-Complex64::i() * p.us(y) * 10.0).exp();
            worst = worst.max((field.omega[0][iy] - exact).norm());
            // modulus preserved pointwise by the phase rotation
            amp_dev = amp_dev.max((field.omega[0][iy].norm() - data.omega0(y).norm()).abs());
        }
        assert!(worst < 1e-6, "transport deviation {worst:.2e}");
        assert!(amp_dev < 1e-8, "modulus drift {amp_dev:.2e}");
    }

    #[test]
    fn direct_rejects_unstable_dt() {
        let p = ShearProfile::linear_window(1.0, 8.0);
        let data = InitialData::gaussian(1.0, 8.0, 3.0, 0.5).unwrap();
        assert!(matches!(
            evolve_direct(&p, &data, &[1.0], 0.2, 400),
            Err(EvolutionError::Step { .. })
        ));
    }

    #[test]
    fn initial_data_must_decay() {
        let r = InitialData::new(1.0, 30.0, |_y| Complex64::new(1.0, 0.0));
        assert!(matches!(r, Err(EvolutionError::BadData(_))));
    }

    #[test]
    fn contour_reconstructs_omega0_at_t_zero() {
        let p = ShearProfile::linear_window(1.0, 8.0);
        let data = InitialData::gaussian(1.0, 8.0, 3.0, 0.5).unwrap();
        let report = audit_and_report(
            &p,
            1.0,
            &SearchBox {
                re_lo: 0.5,
                re_hi: 7.5,
                im_lo: 1e-3,
                im_hi: 0.5,
            },
            &SpectrumOptions::default(),
        )
        .unwrap();
        let mut opts = EvolutionOptions::default();
        opts.y_out_max = Some(8.0);
        let field = evolve_contour(&p, &data, &report, &[0.0], &opts).unwrap();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for (iy, &y) in field.ygrid.iter().enumerate() {
            worst = worst.max((field.omega[0][iy] - data.omega0(y)).norm());
            scale = scale.max(data.omega0(y).norm());
        }
        assert!(worst / scale < 1e-4, "t=0 identity {:.2e}", worst / scale);
        // boundary condition at every output time
        assert!(field.psi[0][0].norm() < 1e-12);
    }

    #[test]
    fn contour_matches_direct_oracle_on_window_profile() {
        let p = ShearProfile::linear_window(1.0, 8.0);
        let data = InitialData::gaussian(1.0, 8.0, 3.0, 0.5).unwrap();
        let report = audit_and_report(
            &p,
            1.0,
            &SearchBox {
                re_lo: 0.5,
                re_hi: 7.5,
                im_lo: 1e-3,
                im_hi: 0.5,
            },
            &SpectrumOptions::default(),
        )
        .unwrap();
        let mut opts = EvolutionOptions::default();
        opts.y_out_max = Some(8.0);
        opts.n_out = 257;
        let times = [1.0, 5.0, 10.0];
        let field = evolve_contour(&p, &data, &report, &times, &opts).unwrap();
        let direct = evolve_direct(&p, &data, &times, 2e-3, 2560).unwrap();
        for (it, &t) in times.iter().enumerate() {
            let mut w = 0.0f64;
            let mut s = 0.0f64;
            for (iy, &y) in field.ygrid.iter().enumerate() {
                let j = (y / 8.0 * 2560.0).round() as usize;
                if (y - 8.0 * j as f64 / 2560.0).abs() > 1e-9 {
                    continue;
                }
                w = w.max((field.psi[it][iy] - direct.psi[it][j]).norm());
                s = s.max(direct.psi[it][j].norm());
            }
            assert!(w / s < 1e-3, "t={t}: psi mismatch {:.2e}", w / s);
        }
    }

    #[test]
    fn contour_field_satisfies_elliptic_relation() {
        // omega = -(dyy - alpha^2) psi within grid discretization error,
        // with psi and omega coming from independent quadratures
        let p = build_profile(&ProfileSpec::builtin_exp(1.0), 30.0).unwrap();
        let data = InitialData::gaussian(1.0, 30.0, 2.0, 0.6).unwrap();
        let report = window_report(&p, 1.0);
        let mut opts = EvolutionOptions::default();
        opts.y_out_max = Some(7.5);
        let t = 5.0;
        let field = evolve_contour(&p, &data, &report, &[t], &opts).unwrap();
        let h = field.ygrid[1] - field.ygrid[0];
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for iy in 1..field.ygrid.len() - 1 {
            let lap = (field.psi[0][iy - 1] - 2.0 * field.psi[0][iy] + field.psi[0][iy + 1])
                / (h * h)
                - field.psi[0][iy];
            worst = worst.max((field.omega[0][iy] + lap).norm());
            scale = scale.max(field.omega[0][iy].norm());
        }
        assert!(worst / scale < 0.05, "elliptic relation {:.2e}", worst / scale);
    }

    #[test]
    fn jet_vorticity_phase_locks_at_long_times() {
        // omega e^{i alpha U_s t} converges pointwise: successive differences
        // shrink between (50,100) and (100,200)
        let p = build_profile(&ProfileSpec::builtin_jet(), 30.0).unwrap();
        let data = InitialData::gaussian(1.0, 30.0, 0.7, 0.25).unwrap();
        let field = evolve_direct(&p, &data, &[50.0, 100.0, 200.0], 0.02, 3000).unwrap();
        let unwind = |it: usize, iy: usize| {
            field.omega[it][iy]
                * (Complex64::i() * field.alpha * p.us(field.ygrid[iy]) * field.times[it]).exp()
        };
        let mut d1 = 0.0f64;
        let mut d2 = 0.0f64;
        for iy in 0..field.ygrid.len() {
            if field.ygrid[iy] > 6.0 {
                break;
            }
            d1 = d1.max((unwind(1, iy) - unwind(0, iy)).norm());
            d2 = d2.max((unwind(2, iy) - unwind(1, iy)).norm());
        }
        assert!(
            d2 < d1,
            "phase-locked differences not shrinking: {d2:.3e} vs {d1:.3e}"
        );
    }

    #[test]
    fn planted_mode_dominates_field_but_not_decay_part() {
        // jet at alpha = 0.2: one unstable mode; the full field grows at the
        // planted rate, the mode-subtracted part grows strictly slower than
        // e^{Im(alpha c) t / 2}
        let p = build_profile(&ProfileSpec::builtin_jet(), 30.0).unwrap();
        let alpha = 0.2;
        let data = InitialData::gaussian(alpha, 30.0, 0.7, 0.3).unwrap();
        let report = audit_and_report(
            &p,
            alpha,
            &SearchBox {
                re_lo: 0.05,
                re_hi: 0.35,
                im_lo: 1e-3,
                im_hi: 0.3,
            },
            &SpectrumOptions::default(),
        )
        .unwrap();
        assert_eq!(report.discrete.len(), 1);
        let growth = alpha * report.discrete[0].im;
        let mut opts = EvolutionOptions::default();
        opts.y_out_max = Some(8.0);
        let (t1, t2) = (60.0, 160.0);
        let field = evolve_contour(&p, &data, &report, &[t1, t2], &opts).unwrap();
        assert_eq!(field.modes.len(), 1);
        let full1 = field.sup_norm(&field.psi, 0);
        let full2 = field.sup_norm(&field.psi, 1);
        let rate_full = (full2 / full1).ln() / (t2 - t1);
        assert!(
            (rate_full - growth).abs() < 0.2 * growth,
            "field growth rate {rate_full:.4e} vs planted {growth:.4e}"
        );
        let dec1 = field.sup_norm(&field.decay_psi, 0);
        let dec2 = field.sup_norm(&field.decay_psi, 1);
        let rate_dec = (dec2 / dec1).ln() / (t2 - t1);
        assert!(
            rate_dec < 0.5 * growth,
            "decay part grows at {rate_dec:.4e}, not below half of {growth:.4e}"
        );
    }

    #[test]
    fn split_modes_is_identity_without_eigenvalues() {
        let p = build_profile(&ProfileSpec::builtin_exp(1.0), 30.0).unwrap();
        let data = InitialData::gaussian(1.0, 30.0, 2.0, 0.6).unwrap();
        let report = window_report(&p, 1.0);
        let direct = evolve_direct(&p, &data, &[5.0], 0.01, 1500).unwrap();
        let split = split_modes(direct.clone(), &p, &data, &report, &EvolutionOptions::default())
            .unwrap();
        assert!(split.modes.is_empty());
        for iy in 0..split.ygrid.len() {
            assert_eq!(split.decay_psi[0][iy], direct.psi[0][iy]);
        }
    }

    #[test]
    fn contour_rejects_eigenvalue_on_the_contour() {
        // force the contour height onto the planted eigenvalue
        let p = build_profile(&ProfileSpec::builtin_jet(), 30.0).unwrap();
        let alpha = 0.4; // eigenvalue at Im c = 0.00634
        let data = InitialData::gaussian(alpha, 30.0, 0.7, 0.3).unwrap();
        let report = audit_and_report(
            &p,
            alpha,
            &SearchBox {
                re_lo: 0.05,
                re_hi: 0.35,
                im_lo: 1e-3,
                im_hi: 0.3,
            },
            &SpectrumOptions::default(),
        )
        .unwrap();
        assert_eq!(report.discrete.len(), 1);
        let mut opts = EvolutionOptions::default();
        opts.eps_cap = report.discrete[0].im; // contour through the pole
        let r = evolve_contour(&p, &data, &report, &[10.0], &opts);
        assert!(matches!(r, Err(EvolutionError::ContourEigenvalue { .. })));
    }

    #[test]
    fn field_csv_has_all_parts() {
        let p = ShearProfile::linear_window(1.0, 8.0);
        let data = InitialData::gaussian(1.0, 8.0, 3.0, 0.5).unwrap();
        let field = evolve_direct(&p, &data, &[1.0], 5e-3, 200).unwrap();
        let csv = field.to_csv();
        assert!(csv.starts_with("t,y,re_psi"));
        assert!(csv.contains(",full\n"));
        assert!(csv.contains(",decay\n"));
        assert!(csv.contains(",modes\n"));
    }
}
