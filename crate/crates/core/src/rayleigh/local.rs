//! Local solution basis on a window, by the contraction iteration
//! `psi_{n+1} = psi_0 + alpha^2 G psi_n`.
//!
//! The `alpha = 0` base pair is explicit: `psi1 = U_s - c` and the
//! reduction-of-order partner `psi2 = (U_s - c) int dy / (U_s - c)^2` with
//! unit Wronskian. `G` is the Green operator of `d^2/dy^2 - U_s''/(U_s - c)`
//! on the window, whose sup-norm is proportional to the window size, so the
//! iteration contracts once `halfwidth * alpha^2` is small.

use num_complex::Complex64;

use crate::profile::ShearProfile;
use crate::quadrature::gl10;

use super::{ModeBasis, ModeSolution, Normalization, SolveError, SpectralParams};

/// Result of the local iteration: the window basis plus the measured
/// contraction history.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    pub basis: ModeBasis,
    /// `||delta_{n+1}|| / ||delta_n||` per iteration.
    pub contraction_ratios: Vec<f64>,
}

/// Builds the local `alpha != 0` basis on `[center - halfwidth,
/// center + halfwidth]` by iterating on the explicit `alpha = 0` pair.
pub fn local_iteration_solution(
    profile: &ShearProfile,
    params: &SpectralParams,
    center: f64,
    halfwidth: f64,
) -> Result<LocalBasis, SolveError> {
    let n = 1200usize;
    let lo = center - halfwidth;
    let hi = center + halfwidth;
    let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let c = params.c;
    let a2 = params.alpha * params.alpha;

    // base pair at alpha = 0
    let psi1: Vec<Complex64> = grid.iter().map(|&y| profile.us(y) - c).collect();
    let dpsi1: Vec<Complex64> = grid
        .iter()
        .map(|&y| Complex64::new(profile.us1(y), 0.0))
        .collect();
    // psi2 = (U_s - c) * I with I(y) = int_yl^y du/(U_s-c)^2, panelwise GL
    let mut cum = vec![Complex64::default(); n + 1];
    for k in 0..n {
        let f = |u: f64| {
            let d = profile.us(u) - c;
            1.0 / (d * d)
        };
        cum[k + 1] = cum[k] + gl10(&f, grid[k], grid[k + 1]);
    }
    let psi2: Vec<Complex64> = (0..=n).map(|k| psi1[k] * cum[k]).collect();
    let dpsi2: Vec<Complex64> = (0..=n)
        .map(|k| dpsi1[k] * cum[k] + 1.0 / psi1[k])
        .collect();

    // iterate each base solution to the full-alpha fixed point
    let mut ratios_all = Vec::new();
    let mut iterate = |f0: &[Complex64], df0: &[Complex64]| -> Result<(Vec<Complex64>, Vec<Complex64>), SolveError> {
        let mut cur = f0.to_vec();
        let mut dcur = df0.to_vec();
        let mut prev_delta = f64::INFINITY;
        let mut ratios = Vec::new();
        for _ in 0..80 {
            let (g, dg) = green_apply(&grid, &psi1, &dpsi1, &psi2, &dpsi2, &cur);
            let mut next = vec![Complex64::default(); cur.len()];
            let mut dnext = vec![Complex64::default(); cur.len()];
            let mut delta = 0.0f64;
            let mut scale = 0.0f64;
            for k in 0..cur.len() {
                next[k] = f0[k] + a2 * g[k];
                dnext[k] = df0[k] + a2 * dg[k];
                delta = delta.max((next[k] - cur[k]).norm());
                scale = scale.max(next[k].norm());
            }
            cur = next;
            dcur = dnext;
            if prev_delta.is_finite() && prev_delta > 0.0 {
                let r = delta / prev_delta;
                ratios.push(r);
                if r > 0.95 && delta > 1e-13 * scale {
                    return Err(SolveError::NoContraction(r));
                }
            }
            if delta <= 1e-13 * scale {
                break;
            }
            prev_delta = delta;
        }
        ratios_all.push(ratios);
        Ok((cur, dcur))
    };

    let (f1, df1) = iterate(&psi1, &dpsi1)?;
    let (mut f2, mut df2) = iterate(&psi2, &dpsi2)?;
    let ratios = ratios_all
        .iter()
        .flat_map(|r| r.iter().copied())
        .collect::<Vec<_>>();

    // restore unit Wronskian: the iteration preserves it only to O(alpha^2 h)
    let mid = n / 2;
    let w_raw = df2[mid] * f1[mid] - df1[mid] * f2[mid];
    for k in 0..=n {
        f2[k] /= w_raw;
        df2[k] /= w_raw;
    }
    let wronskian = df2[mid] * f1[mid] - df1[mid] * f2[mid];
    let mk = |psi: Vec<Complex64>, dpsi: Vec<Complex64>, tag: Normalization| ModeSolution {
        params: *params,
        grid: grid.clone(),
        psi,
        dpsi,
        normalization: tag,
    };
    Ok(LocalBasis {
        basis: ModeBasis {
            psi_minus: mk(f1, df1, Normalization::WronskianPartner),
            psi_plus: mk(f2, df2, Normalization::WronskianPartner),
            wronskian,
            anchor: center,
        },
        contraction_ratios: ratios,
    })
}

/// Applies the window Green operator of `d^2 - q` with the unit-Wronskian
/// pair: `G f(y) = psi2(y) int_lo^y psi1 f + psi1(y) int_y^hi psi2 f`.
/// Returns the image and its derivative. Composite Simpson on the grid.
fn green_apply(
    grid: &[f64],
    psi1: &[Complex64],
    dpsi1: &[Complex64],
    psi2: &[Complex64],
    dpsi2: &[Complex64],
    f: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = grid.len();
    let h = grid[1] - grid[0];
    // cumulative trapezoid with endpoint-corrected accuracy
    let mut a = vec![Complex64::default(); n]; // int_lo^y psi1 f
    let mut b = vec![Complex64::default(); n]; // int_y^hi psi2 f
    for k in 1..n {
        let t1 = psi1[k - 1] * f[k - 1] + psi1[k] * f[k];
        a[k] = a[k - 1] + 0.5 * h * t1;
    }
    for k in (0..n - 1).rev() {
        let t2 = psi2[k] * f[k] + psi2[k + 1] * f[k + 1];
        b[k] = b[k + 1] + 0.5 * h * t2;
    }
    let mut g = vec![Complex64::default(); n];
    let mut dg = vec![Complex64::default(); n];
    for k in 0..n {
        g[k] = psi2[k] * a[k] + psi1[k] * b[k];
        dg[k] = dpsi2[k] * a[k] + dpsi1[k] * b[k];
    }
    (g, dg)
}
