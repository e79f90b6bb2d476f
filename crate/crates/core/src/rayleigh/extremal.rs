//! The rescaled frame at an extremal layer and the explicit primitives
//! `J_0..J_3` of `P_j(v) / ((v - z_1)^2 (v - z_2)^2)`.
//!
//! Working variables: `c_hat = (c - c_extr) / kappa` with
//! `kappa = U_s''(y_extr)/2`, so the local profile looks like `v^2` with the
//! turning points at `z_{+-} = (y_{+-} - y_extr)/sqrt(Re c_hat) -> +-1`.
//! `z_1, z_2` reinstate the imaginary part of `c` as the complex roots of
//! `beta Re(c_hat) (v - z_-)(v - z_+) = i Im(c_hat)`.

use num_complex::Complex64;

use crate::profile::ShearProfile;
use crate::roots::brent;

use super::{solve_minus, SolveError, SolveOptions, SpectralParams};

/// Rescaled data at one extremal layer for `c` near its extremal velocity.
#[derive(Debug, Clone)]
pub struct ExtremalFrame {
    pub y_extr: f64,
    pub c_extr: f64,
    /// `U_s''(y_extr) / 2`.
    pub kappa: f64,
    /// `(c - c_extr) / kappa`.
    pub c_hat: Complex64,
    /// Real turning points `U_s(y_{+-}) = Re c` in rescaled coordinates.
    pub z_minus: f64,
    pub z_plus: f64,
    /// `beta = (z_+ - z_-)^2 / 4 = 1 + O(Re c_hat)`.
    pub beta_coef: f64,
    /// Complex roots with `Im c` reinstated; `z_{1,2} = z_{+-}` when `Im c = 0`.
    pub z1: Complex64,
    pub z2: Complex64,
}

impl ExtremalFrame {
    /// The polynomial basis `P_0 = 1, P_1 = v, P_2 = (v-z1)(v-z2),
    /// P_3 = v (v-z1)(v-z2)` of the degree-3 space.
    pub fn basis_polys(&self, v: Complex64) -> [Complex64; 4] {
        let p2 = (v - self.z1) * (v - self.z2);
        [Complex64::new(1.0, 0.0), v, p2, v * p2]
    }
}

/// Builds the rescaled frame at layer `l` for `c` close to its extremal
/// velocity. Requires `Re(c - c_extr)/kappa > 0` so the turning points are
/// real (the opposite side continues through the alternate parabola and has
/// no real turning points).
pub fn extremal_frame(
    profile: &ShearProfile,
    l: usize,
    c: Complex64,
) -> Result<ExtremalFrame, SolveError> {
    let layer = profile.extremal_layers[l];
    let kappa = layer.us2_at_extr / 2.0;
    let c_hat = (c - layer.c_extr) / kappa;
    let s = c_hat.re;
    if s <= 0.0 {
        return Err(SolveError::Window(s));
    }
    let scale = s.sqrt();
    // real turning points on both sides of the layer
    let target = layer.c_extr + kappa * s;
    let window = (6.0 * scale).min(0.5 * (profile.y_max - layer.y_extr).min(layer.y_extr));
    let g = |y: f64| profile.us(y) - target;
    let y_plus = brent(g, layer.y_extr, layer.y_extr + window, 1e-14)
        .map_err(|_| SolveError::Window(s))?;
    let y_minus = brent(g, layer.y_extr - window, layer.y_extr, 1e-14)
        .map_err(|_| SolveError::Window(s))?;
    let z_plus = (y_plus - layer.y_extr) / scale;
    let z_minus = (y_minus - layer.y_extr) / scale;
    let beta_coef = 0.25 * (z_plus - z_minus) * (z_plus - z_minus);
    // beta s (v - z_-)(v - z_+) = i Im(c_hat)
    let m = 0.5 * (z_plus + z_minus);
    let disc = Complex64::new(beta_coef, 0.0)
        + Complex64::new(0.0, c_hat.im) / (beta_coef * s);
    let root = disc.sqrt();
    Ok(ExtremalFrame {
        y_extr: layer.y_extr,
        c_extr: layer.c_extr,
        kappa,
        c_hat,
        z_minus,
        z_plus,
        beta_coef,
        z1: m + root,
        z2: m - root,
    })
}

/// The four primitives of `P_j(v) / ((v - z1)^2 (v - z2)^2)`.
pub fn eval_j_primitives(frame: &ExtremalFrame, v: Complex64) -> Result<[Complex64; 4], SolveError> {
    let z1 = frame.z1;
    let z2 = frame.z2;
    let tol = 1e-12 * (1.0 + z1.norm().max(z2.norm()));
    if (v - z1).norm() < tol || (v - z2).norm() < tol {
        return Err(SolveError::Pole(v));
    }
    let dz = z2 - z1;
    let log_ratio = ((v - z1) / (v - z2)).ln();
    let j0 = 2.0 / dz.powu(3) * log_ratio - (1.0 / (v - z1) + 1.0 / (v - z2)) / dz.powu(2);
    let j1 = (z1 + z2) / dz.powu(3) * log_ratio
        - (z1 / (v - z1) + z2 / (v - z2)) / dz.powu(2);
    let j2 = -log_ratio / dz;
    let j3 = (z1 * (v - z1).ln() - z2 * (v - z2).ln()) / (z1 - z2);
    Ok([j0, j1, j2, j3])
}

/// Wronskian of the local pair at an extremal layer: the decaying solution
/// (O(1) above the layer) against the solution with unit Cauchy data
/// `(1, 0)` at `y_below` (O(1) below). Evaluated at `y_below` the
/// determinant is `-psi_-'(y_below)`, which blows up like
/// `|c - c_extr|^{-3/2}`.
pub fn local_pair_wronskian(
    profile: &ShearProfile,
    l: usize,
    alpha: f64,
    c: Complex64,
    y_below: f64,
    opts: &SolveOptions,
) -> Result<Complex64, SolveError> {
    let layer = profile.extremal_layers[l];
    assert!(y_below < layer.y_extr, "probe must sit below the layer");
    let params = SpectralParams::new(alpha, c);
    let minus = solve_minus(profile, &params, opts)?;
    let (_, dpsi) = minus.eval(y_below);
    Ok(-dpsi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{build_profile, ProfileSpec};

    const E_INV: f64 = 0.36787944117144233;

    fn jet_frame(c_off: Complex64) -> ExtremalFrame {
        let p = build_profile(&ProfileSpec::builtin_jet(), 30.0).unwrap();
        extremal_frame(&p, 0, Complex64::new(E_INV, 0.0) + c_off).unwrap()
    }

    #[test]
    fn real_c_collapses_z12_onto_turning_points() {
        // jet: kappa < 0, so the frame opens for Re c_off < 0
        let f = jet_frame(Complex64::new(-1e-3, 0.0));
        assert!((f.z1 - f.z_plus).norm() < 1e-12);
        assert!((f.z2 - f.z_minus).norm() < 1e-12);
    }

    #[test]
    fn turning_points_tend_to_plus_minus_one() {
        let mut prev_gap = f64::INFINITY;
        for &off in &[-1e-2, -1e-3, -1e-4] {
            let f = jet_frame(Complex64::new(off, 0.0));
            let gap = (f.z_plus - f.z_minus - 2.0).abs();
            assert!(gap < prev_gap, "z_+ - z_- not tending to 2");
            assert!((f.beta_coef - 1.0).abs() < 10.0 * off.abs().sqrt());
            prev_gap = gap;
        }
        let f = jet_frame(Complex64::new(-1e-6, 0.0));
        assert!((f.z_plus - f.z_minus - 2.0).abs() < 1e-2);
        assert!((f.beta_coef - 1.0).abs() < 1e-2);
    }

    #[test]
    fn wrong_side_is_window_error() {
        let p = build_profile(&ProfileSpec::builtin_jet(), 30.0).unwrap();
        // kappa < 0 and c_off > 0 puts Re(c_hat) < 0
        let r = extremal_frame(&p, 0, Complex64::new(E_INV + 1e-3, 0.0));
        assert!(matches!(r, Err(SolveError::Window(_))));
    }

    #[test]
    fn j_primitives_differentiate_back() {
        // dJ_j/dv = P_j / ((v-z1)^2 (v-z2)^2), central differences h = 1e-5
        let f = jet_frame(Complex64::new(-1e-2, 1e-3 / E_INV));
        let v = Complex64::new(3.0, 0.2);
        let h = 1e-5;
        let jp = eval_j_primitives(&f, v + h).unwrap();
        let jm = eval_j_primitives(&f, v - h).unwrap();
        let denom = (v - f.z1).powu(2) * (v - f.z2).powu(2);
        let basis = f.basis_polys(v);
        for j in 0..4 {
            let d_num = (jp[j] - jm[j]) / (2.0 * h);
            let d_exact = basis[j] / denom;
            assert!(
                (d_num - d_exact).norm() < 1e-6 * (1.0 + d_exact.norm()),
                "J_{j}: {d_num} vs {d_exact}"
            );
        }
    }

    #[test]
    fn j2_closed_form_and_swap_symmetry() {
        let f = jet_frame(Complex64::new(-5e-3, 2e-3));
        let v = Complex64::new(2.0, 0.4);
        let j = eval_j_primitives(&f, v).unwrap();
        let expect = ((v - f.z1) / (v - f.z2)).ln() / (f.z1 - f.z2);
        assert!((j[2] - expect).norm() < 1e-12);
        // the integrand 1/((v-z1)(v-z2)) is z1 <-> z2 symmetric, so the
        // primitive is too: both the prefactor and the log flip sign
        let mut swapped = f.clone();
        std::mem::swap(&mut swapped.z1, &mut swapped.z2);
        let js = eval_j_primitives(&swapped, v).unwrap();
        assert!((js[2] - j[2]).norm() < 1e-12);
        // negation appears only when the log factor is held fixed
        let neg = ((v - f.z1) / (v - f.z2)).ln() / (f.z2 - f.z1);
        assert!((neg + j[2]).norm() < 1e-12);
    }

    #[test]
    fn pole_evaluation_is_rejected() {
        let f = jet_frame(Complex64::new(-1e-3, 0.0));
        assert!(matches!(
            eval_j_primitives(&f, f.z1),
            Err(SolveError::Pole(_))
        ));
    }
}
