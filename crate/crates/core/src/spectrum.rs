//! The dispersion relation `D(alpha, c) = psi_{-,alpha,c}(0)`, discrete
//! eigenvalues in the upper half plane by the argument principle, embedded
//! eigenvalues on the real axis, and the (A3)/(A4) assumption audit.

use num_complex::Complex64;
use serde::Serialize;

use crate::profile::ShearProfile;
use crate::rayleigh::{
    solve_minus, solve_minus_real, SolveError, SolveOptions, SpectralParams, TOL_EXTR,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectrumError {
    #[error("|D| = {abs:.3e} at c = {c} on a cell boundary after maximal subdivision")]
    BoundaryZero { c: Complex64, abs: f64 },
    #[error("search box must have Im c >= im_floor > 0, got {0}")]
    BadBox(f64),
    #[error("embedded root at c = {c} is not simple: |dD/dc| = {dvalue:.3e}")]
    NonSimple { c: f64, dvalue: f64 },
    #[error("Newton refinement failed near c = {0}")]
    NoConvergence(Complex64),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// One evaluation of the dispersion relation together with its
/// finite-difference `c` derivative.
#[derive(Debug, Clone, Copy)]
pub struct DispersionSample {
    pub params: SpectralParams,
    pub value: Complex64,
    pub dvalue: Complex64,
}

/// A zero of `D` in the upper half plane with its residue weight `1/D'`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiscreteEigenvalue {
    pub re: f64,
    pub im: f64,
    pub residue_re: f64,
    pub residue_im: f64,
}

impl DiscreteEigenvalue {
    pub fn c(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn residue_weight(&self) -> Complex64 {
        Complex64::new(self.residue_re, self.residue_im)
    }
}

/// A real zero of the extended dispersion relation inside `Range(U_s)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EmbeddedEigenvalue {
    pub c: f64,
    pub simple: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RangeInterval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditFlags {
    pub a3: bool,
    pub a4: bool,
}

/// Full spectrum findings for one wavenumber.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub schema_version: u32,
    pub alpha: f64,
    pub discrete: Vec<DiscreteEigenvalue>,
    pub embedded: Vec<EmbeddedEigenvalue>,
    pub range: RangeInterval,
    pub flags: AuditFlags,
    /// Per-extremal-layer (A3) outcomes, in layer order.
    pub a3_per_layer: Vec<bool>,
}

impl SpectrumReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Rectangle in the upper half `c` plane.
#[derive(Debug, Clone, Copy)]
pub struct SearchBox {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

#[derive(Debug, Clone)]
pub struct SpectrumOptions {
    pub solve: SolveOptions,
    /// Relative eigenvalue residual `|D| < tol_eig * scale`.
    pub tol_eig: f64,
    /// Boundaries must keep `Im c` above this.
    pub im_floor: f64,
    /// (A3)/simplicity floors, relative to the `|D|` scale.
    pub a3_floor: f64,
    pub simple_floor: f64,
    /// Finite-difference step of the Newton derivative.
    pub fd_step: f64,
    /// Embedded scan: points across the range, candidate threshold.
    pub scan_points: usize,
    pub tol_embed: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            solve: SolveOptions::default(),
            tol_eig: 1e-9,
            im_floor: 1e-3,
            a3_floor: 1e-4,
            simple_floor: 1e-4,
            fd_step: 1e-6,
            scan_points: 400,
            tol_embed: 1e-2,
        }
    }
}

/// Evaluates `D(alpha, c)` and its derivative. Real-axis `c` inside the
/// continuous range uses the extrapolated boundary limit.
pub fn dispersion(
    profile: &ShearProfile,
    alpha: f64,
    c: Complex64,
    opts: &SpectrumOptions,
) -> Result<DispersionSample, SpectrumError> {
    let value = dispersion_value(profile, alpha, c, opts)?;
    let h = opts.fd_step;
    let vp = dispersion_value(profile, alpha, c + h, opts)?;
    let vm = dispersion_value(profile, alpha, c - h, opts)?;
    Ok(DispersionSample {
        params: SpectralParams::new(alpha, c),
        value,
        dvalue: (vp - vm) / (2.0 * h),
    })
}

fn dispersion_value(
    profile: &ShearProfile,
    alpha: f64,
    c: Complex64,
    opts: &SpectrumOptions,
) -> Result<Complex64, SpectrumError> {
    let params = SpectralParams::new(alpha, c);
    Ok(solve_minus(profile, &params, &opts.solve)?.boundary_value())
}

/// Typical `|D|` magnitude over the box boundary, used to make the
/// eigenvalue and audit thresholds relative.
fn d_scale(samples: &[Complex64]) -> f64 {
    let mut mags: Vec<f64> = samples.iter().map(|d| d.norm()).collect();
    mags.sort_by(f64::total_cmp);
    mags[mags.len() / 2].max(1e-300)
}

/// Winding number of `D` along the rectangle boundary by adaptive phase
/// tracking: segments are bisected until the phase step stays below pi/2.
pub fn winding_number(
    profile: &ShearProfile,
    alpha: f64,
    rect: &SearchBox,
    opts: &SpectrumOptions,
) -> Result<(i64, Vec<Complex64>), SpectrumError> {
    let corners = [
        Complex64::new(rect.re_lo, rect.im_lo),
        Complex64::new(rect.re_hi, rect.im_lo),
        Complex64::new(rect.re_hi, rect.im_hi),
        Complex64::new(rect.re_lo, rect.im_hi),
    ];
    let mut all = Vec::new();
    let mut total_phase = 0.0f64;
    for e in 0..4 {
        let a = corners[e];
        let b = corners[(e + 1) % 4];
        // adaptive subdivision of one edge
        let mut ts = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let eval = |t: f64| dispersion_value(profile, alpha, a + (b - a) * t, opts);
        let mut vals = Vec::new();
        for &t in &ts {
            vals.push(eval(t)?);
        }
        let mut depth = 0;
        loop {
            let mut refined = false;
            let mut k = 0;
            while k + 1 < ts.len() {
                let dphi = (vals[k + 1] / vals[k]).arg().abs();
                if dphi > 0.5 * std::f64::consts::PI && ts[k + 1] - ts[k] > 1e-6 {
                    let tm = 0.5 * (ts[k] + ts[k + 1]);
                    ts.insert(k + 1, tm);
                    vals.insert(k + 1, eval(tm)?);
                    refined = true;
                } else {
                    k += 1;
                }
            }
            depth += 1;
            if !refined || depth > 24 {
                break;
            }
        }
        for k in 0..ts.len() - 1 {
            total_phase += (vals[k + 1] / vals[k]).arg();
        }
        all.extend(vals);
    }
    let scale = d_scale(&all);
    for (i, d) in all.iter().enumerate() {
        if d.norm() < 1e-7 * scale {
            let _ = i;
            return Err(SpectrumError::BoundaryZero {
                c: Complex64::new(f64::NAN, f64::NAN),
                abs: d.norm(),
            });
        }
    }
    let w = (total_phase / (2.0 * std::f64::consts::PI)).round() as i64;
    Ok((w, all))
}

/// Locates the zeros of `D` inside the box: argument-principle counts over
/// adaptively subdivided cells, then damped Newton refinement of each
/// isolated zero. The residue weight of a root is `1/D'`.
pub fn find_discrete_spectrum(
    profile: &ShearProfile,
    alpha: f64,
    search: &SearchBox,
    opts: &SpectrumOptions,
) -> Result<Vec<DiscreteEigenvalue>, SpectrumError> {
    if search.im_lo < opts.im_floor || search.im_lo <= 0.0 {
        return Err(SpectrumError::BadBox(search.im_lo));
    }
    let mut roots: Vec<(Complex64, Complex64)> = Vec::new();
    let mut stack = vec![*search];
    let mut scale_probe: Option<f64> = None;
    while let Some(rect) = stack.pop() {
        let (w, samples) = winding_number(profile, alpha, &rect, opts)?;
        if scale_probe.is_none() {
            scale_probe = Some(d_scale(&samples));
        }
        if w == 0 {
            continue;
        }
        let small = (rect.re_hi - rect.re_lo) < 0.05 && (rect.im_hi - rect.im_lo) < 0.05;
        if w == 1 && small {
            let seed = Complex64::new(
                0.5 * (rect.re_lo + rect.re_hi),
                0.5 * (rect.im_lo + rect.im_hi),
            );
            let scale = scale_probe.unwrap_or(1.0);
            let (c, dd) = newton_refine(profile, alpha, seed, scale, opts)?;
            if !roots.iter().any(|(r, _)| (r - c).norm() < 1e-7) {
                roots.push((c, dd));
            }
        } else {
            // quadrisect, keeping cell edges off the previous midlines
            let rm = 0.5 * (rect.re_lo + rect.re_hi);
            let im = 0.5 * (rect.im_lo + rect.im_hi);
            for (rl, rh, il, ih) in [
                (rect.re_lo, rm, rect.im_lo, im),
                (rm, rect.re_hi, rect.im_lo, im),
                (rect.re_lo, rm, im, rect.im_hi),
                (rm, rect.re_hi, im, rect.im_hi),
            ] {
                stack.push(SearchBox {
                    re_lo: rl,
                    re_hi: rh,
                    im_lo: il,
                    im_hi: ih,
                });
            }
        }
    }
    roots.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(roots
        .into_iter()
        .map(|(c, dd)| {
            let w = 1.0 / dd;
            DiscreteEigenvalue {
                re: c.re,
                im: c.im,
                residue_re: w.re,
                residue_im: w.im,
            }
        })
        .collect())
}

fn newton_refine(
    profile: &ShearProfile,
    alpha: f64,
    seed: Complex64,
    scale: f64,
    opts: &SpectrumOptions,
) -> Result<(Complex64, Complex64), SpectrumError> {
    let mut c = seed;
    let mut dd = Complex64::new(0.0, 0.0);
    for _ in 0..60 {
        let s = dispersion(profile, alpha, c, opts)?;
        dd = s.dvalue;
        if s.value.norm() < opts.tol_eig * scale {
            return Ok((c, dd));
        }
        let mut step = s.value / s.dvalue;
        // damping keeps the iterate inside the resolvent's domain
        for _ in 0..20 {
            let next = c - step;
            if next.im > 0.5 * opts.im_floor {
                break;
            }
            step *= 0.5;
        }
        c -= step;
    }
    let s = dispersion(profile, alpha, c, opts)?;
    if s.value.norm() < 1e3 * opts.tol_eig * scale {
        return Ok((c, s.dvalue));
    }
    Err(SpectrumError::NoConvergence(c))
}

/// Scans the continuous range for embedded eigenvalues: local minima of the
/// extrapolated `|D|` below threshold, refined by a secant/Newton step in
/// the real coordinate.
pub fn find_embedded(
    profile: &ShearProfile,
    alpha: f64,
    opts: &SpectrumOptions,
) -> Result<Vec<EmbeddedEigenvalue>, SpectrumError> {
    let (lo, hi) = profile.velocity_range();
    let excl = 10.0 * TOL_EXTR;
    let n = opts.scan_points;
    let mut cs: Vec<f64> = Vec::new();
    let margin = 2e-3 * (hi - lo);
    for k in 0..=n {
        let c = lo + margin + (hi - lo - 2.0 * margin) * k as f64 / n as f64;
        if (c - profile.u_plus).abs() < 2e-3 {
            continue;
        }
        if profile
            .extremal_layers
            .iter()
            .all(|l| (c - l.c_extr).abs() > excl)
        {
            cs.push(c);
        }
    }
    let mut vals = Vec::with_capacity(cs.len());
    for &c in &cs {
        let d = solve_minus_real(profile, alpha, c, &opts.solve)?.boundary_value();
        vals.push(d.norm());
    }
    let scale = {
        let mut m = vals.clone();
        m.sort_by(f64::total_cmp);
        m[m.len() / 2].max(1e-300)
    };
    let mut out: Vec<EmbeddedEigenvalue> = Vec::new();
    for k in 1..vals.len().saturating_sub(1) {
        if vals[k] < vals[k - 1] && vals[k] < vals[k + 1] && vals[k] < opts.tol_embed * scale {
            // Newton in the real coordinate on the extrapolated value
            let mut c = cs[k];
            let mut ok = false;
            for _ in 0..30 {
                let d = solve_minus_real(profile, alpha, c, &opts.solve)?.boundary_value();
                if d.norm() < 1e-3 * scale {
                    ok = true;
                }
                let h = opts.fd_step;
                let dp = solve_minus_real(profile, alpha, c + h, &opts.solve)?.boundary_value();
                let dm = solve_minus_real(profile, alpha, c - h, &opts.solve)?.boundary_value();
                let deriv = (dp - dm) / (2.0 * h);
                let step = (d / deriv).re;
                c -= step.clamp(-0.01 * (hi - lo), 0.01 * (hi - lo));
                if step.abs() < 1e-10 {
                    break;
                }
            }
            if !ok {
                continue;
            }
            let h = opts.fd_step;
            let dp = solve_minus_real(profile, alpha, c + h, &opts.solve)?.boundary_value();
            let dm = solve_minus_real(profile, alpha, c - h, &opts.solve)?.boundary_value();
            let deriv = ((dp - dm) / (2.0 * h)).norm();
            if deriv <= opts.simple_floor * scale {
                return Err(SpectrumError::NonSimple { c, dvalue: deriv });
            }
            if !out.iter().any(|e| (e.c - c).abs() < 1e-6) {
                out.push(EmbeddedEigenvalue { c, simple: true });
            }
        }
    }
    out.sort_by(|a, b| a.c.total_cmp(&b.c));
    Ok(out)
}

/// Assembles the full report with the (A3) and (A4) audits.
pub fn audit_and_report(
    profile: &ShearProfile,
    alpha: f64,
    search: &SearchBox,
    opts: &SpectrumOptions,
) -> Result<SpectrumReport, SpectrumError> {
    let discrete = find_discrete_spectrum(profile, alpha, search, opts)?;
    let embedded = find_embedded(profile, alpha, opts)?;
    let (lo, hi) = profile.velocity_range();

    // (A3): |D| bounded away from zero near each extremal velocity. The
    // probes sit at the smallest distance the boundary-limit evaluation
    // resolves (the extrapolation offsets themselves).
    let radius = (10.0 * TOL_EXTR).max(2.0 * opts.solve.eps0);
    let mut scale_samples = Vec::new();
    let mut a3_per_layer = Vec::new();
    for layer in &profile.extremal_layers {
        let mut min_abs = f64::INFINITY;
        for &r in &[radius, 2.0 * radius, 4.0 * radius] {
            for &sgn in &[-1.0, 1.0] {
                let c = layer.c_extr + sgn * r;
                if c <= lo || c >= hi {
                    continue;
                }
                let d = solve_minus_real(profile, alpha, c, &opts.solve)?.boundary_value();
                min_abs = min_abs.min(d.norm());
                scale_samples.push(d);
            }
        }
        a3_per_layer.push(min_abs);
    }
    let scale = if scale_samples.is_empty() {
        1.0
    } else {
        d_scale(&scale_samples)
    };
    let a3_flags: Vec<bool> = a3_per_layer
        .iter()
        .map(|&m| m > opts.a3_floor * scale)
        .collect();
    let a4 = embedded.iter().all(|e| e.simple);
    Ok(SpectrumReport {
        schema_version: 1,
        alpha,
        discrete,
        embedded,
        range: RangeInterval { lo, hi },
        flags: AuditFlags {
            a3: a3_flags.iter().all(|&b| b),
            a4,
        },
        a3_per_layer: a3_flags,
    })
}
