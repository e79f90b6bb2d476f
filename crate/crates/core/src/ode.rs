//! Adaptive Dormand-Prince 5(4) integration for complex second-order systems.
//!
//! The Rayleigh solver integrates the first-order system `(psi, psi')` with a
//! right-hand side whose coefficient `U_s''/(U_s - c)` is near-singular at
//! critical layers, so the stepper supports a position-dependent step floor
//! and forced output points.

use num_complex::Complex64;

/// State of the second-order system: `(psi, dpsi)`.
pub type State = [Complex64; 2];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("step count limit exceeded ({0} steps)")]
    StepLimit(usize),
    #[error("non-finite state encountered at y = {0}")]
    NonFinite(f64),
}

/// Integration controls. `min_step` is a callback so callers can tie the
/// floor to the distance from a critical layer.
pub struct Controls<'a> {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub min_step: Option<&'a dyn Fn(f64) -> f64>,
}

impl Default for Controls<'_> {
    fn default() -> Self {
        Controls {
            rtol: 1e-10,
            atol: 1e-14,
            max_steps: 400_000,
            min_step: None,
        }
    }
}

// Dormand-Prince coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn axpy(y: &State, k: &[State], coeffs: &[f64], h: f64) -> State {
    let mut out = *y;
    for (ki, &ci) in k.iter().zip(coeffs) {
        if ci != 0.0 {
            out[0] += h * ci * ki[0];
            out[1] += h * ci * ki[1];
        }
    }
    out
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1` (either direction) and
/// returns the final state. `record` is called with every accepted
/// `(t, state)` pair, starting with the initial one.
pub fn integrate(
    f: &dyn Fn(f64, &State) -> State,
    t0: f64,
    t1: f64,
    y0: State,
    ctl: &Controls,
    mut record: impl FnMut(f64, &State),
) -> Result<State, OdeError> {
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    if span == 0.0 {
        record(t0, &y0);
        return Ok(y0);
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * (span / 100.0).min(0.1).max(1e-8);
    record(t, &y);
    let mut k = [f(t, &y); 7];
    let mut steps = 0usize;
    while (t - t1) * dir < 0.0 {
        steps += 1;
        if steps > ctl.max_steps {
            return Err(OdeError::StepLimit(ctl.max_steps));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for i in 0..6 {
            let yi = axpy(&y, &k[..=i.min(5)], &A[i][..=i], h);
            k[i + 1] = f(t + C[i] * h, &yi);
        }
        let y5 = axpy(&y, &k, &B5, h);
        let y4 = axpy(&y, &k, &B4, h);
        let mut err: f64 = 0.0;
        for j in 0..2 {
            let scale = ctl.atol + ctl.rtol * y[j].norm().max(y5[j].norm());
            err = err.max((y5[j] - y4[j]).norm() / scale);
        }
        let floor = ctl.min_step.map(|m| m(t)).unwrap_or(0.0).max(1e-13);
        if err <= 1.0 || h.abs() <= floor {
            t += h;
            y = y5;
            if !y[0].is_finite() || !y[1].is_finite() {
                return Err(OdeError::NonFinite(t));
            }
            record(t, &y);
            k[0] = k[6]; // FSAL
        } else {
            k[0] = f(t, &y);
        }
        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h = (h * fac).abs().max(floor) * dir;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    #[test]
    fn integrates_exponential_decay() {
        // psi'' = psi has solution e^{-t}; integrate downward from t = 5.
        let f = |_t: f64, y: &State| [y[1], y[0]];
        let y5 = C64::new((-5.0f64).exp(), 0.0);
        let got = integrate(
            &f,
            5.0,
            0.0,
            [y5, -y5],
            &Controls::default(),
            |_, _| {},
        )
        .unwrap();
        assert!((got[0].re - 1.0).abs() < 1e-9, "{}", got[0]);
        assert!((got[1].re + 1.0).abs() < 1e-9);
    }

    #[test]
    fn integrates_complex_rotation() {
        // psi'' = -psi from (1, i): psi = e^{it}.
        let f = |_t: f64, y: &State| [y[1], -y[0]];
        let got = integrate(
            &f,
            0.0,
            std::f64::consts::PI,
            [C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
            &Controls::default(),
            |_, _| {},
        )
        .unwrap();
        assert!((got[0] - C64::new(-1.0, 0.0)).norm() < 1e-9);
    }
}
