//! The growing solution `psi_+`, realized as the reduction-of-order partner
//! `psi_+(y) = psi_-(y) int_{y_a}^{y} psi_-(x)^{-2} dx` of the decaying
//! solution.
//!
//! The anchor `y_a` sits below the lowest extremal layer: below a layer the
//! anchored integral is `O(|c - c_extr|^3)`, so `psi_+` inherits the
//! `|c - c_extr|^{3/2}` localization bound; any far-field anchor pollutes
//! `psi_+` with a large multiple of `psi_-` and destroys that scaling.
//!
//! Numerically the integral form is treacherous: `psi_-` has complex zeros
//! that can drift arbitrarily close to the real path between grid nodes,
//! where `psi_-^{-2}` blows up without any node-value warning. The anchored
//! solution is therefore computed by integrating the Rayleigh equation
//! directly with the equivalent Cauchy data `psi_+(y_a) = 0`,
//! `psi_+'(y_a) = 1/psi_-(y_a)` (unit Wronskian at the anchor), which is
//! stable in both directions because the extremal layer lies above the
//! anchor.

use num_complex::Complex64;

use crate::ode::{self, Controls, State};
use crate::profile::{all_critical_layers, ShearProfile};

use super::{ModeBasis, ModeSolution, Normalization, SolveError, SolveOptions};

/// Builds the Wronskian partner of a decaying solution.
pub fn solve_plus(
    profile: &ShearProfile,
    psi_minus: &ModeSolution,
    opts: &SolveOptions,
) -> Result<ModeBasis, SolveError> {
    let grid = &psi_minus.grid;
    let n = grid.len();
    let anchor_target = opts.anchor.unwrap_or_else(|| default_anchor(profile));
    let anchor_idx = grid
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - anchor_target)
                .abs()
                .total_cmp(&(b.1 - anchor_target).abs())
        })
        .map(|(i, _)| i)
        .unwrap();
    if psi_minus.psi[anchor_idx].norm() == 0.0 {
        return Err(SolveError::Quadrature(grid[anchor_idx]));
    }

    let params = &psi_minus.params;
    let alpha2 = params.alpha * params.alpha;
    let c = params.c;
    let rhs = move |y: f64, s: &State| -> State {
        let q = profile.us2(y) / (profile.us(y) - c);
        [s[1], (alpha2 + q) * s[0]]
    };
    let ycs = all_critical_layers(profile, c.re);
    let imc = c.im.abs();
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

    let mut psi = vec![Complex64::default(); n];
    let mut dpsi = vec![Complex64::default(); n];
    let start: State = [
        Complex64::default(),
        1.0 / psi_minus.psi[anchor_idx],
    ];
    psi[anchor_idx] = start[0];
    dpsi[anchor_idx] = start[1];
    let mut state = start;
    for i in anchor_idx + 1..n {
        state = ode::integrate(&rhs, grid[i - 1], grid[i], state, &ctl, |_, _| {})?;
        psi[i] = state[0];
        dpsi[i] = state[1];
    }
    state = start;
    for i in (0..anchor_idx).rev() {
        state = ode::integrate(&rhs, grid[i + 1], grid[i], state, &ctl, |_, _| {})?;
        psi[i] = state[0];
        dpsi[i] = state[1];
    }

    let psi_plus = ModeSolution {
        params: *params,
        grid: grid.clone(),
        psi,
        dpsi,
        normalization: Normalization::WronskianPartner,
    };
    Ok(ModeBasis {
        psi_minus: psi_minus.clone(),
        psi_plus,
        wronskian: Complex64::new(1.0, 0.0),
        anchor: grid[anchor_idx],
    })
}

/// Anchor below every extremal layer; mid-height otherwise.
pub fn default_anchor(profile: &ShearProfile) -> f64 {
    profile
        .extremal_layers
        .iter()
        .map(|l| l.y_extr)
        .fold(f64::INFINITY, f64::min)
        .min(2.5)
        .min(profile.y_max / 3.0)
        * 0.4
}
