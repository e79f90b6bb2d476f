//! # `rayflow`: Rayleigh equation machinery for shear flows on the half line
//!
//! This library constructs solutions of the Rayleigh equation
//!
//! ```text
//! (U_s - c) (psi'' - alpha^2 psi) - U_s'' psi = f,      psi(0) = 0,
//! ```
//!
//! for shear profiles `U_s(y)` on `[0, infinity)`, locates the spectrum of the
//! linearized Euler operator, evolves a single Fourier mode of the linearized
//! Euler equations by contour integration of the Green's function, and extracts
//! the limiting vorticity profile together with its depletion diagnostics at
//! extremal layers (heights where `U_s' = 0`).
//!
//! The main building blocks are:
//! - [`profile`]: shear profiles, their derivatives and extremal-layer data,
//! - [`rayleigh`]: the decaying/growing solution basis, local bases near
//!   critical and extremal points, and the explicit parabola solutions,
//! - [`spectrum`]: the dispersion relation `D(alpha, c) = psi_-(0)`, discrete
//!   and embedded eigenvalues, assumption audits,
//! - [`greens`]: assembly and application of the Green's function,
//! - [`evolution`]: contour-integral and direct time evolution,
//! - [`depletion`]: the limiting vorticity `omega_inf` and decay-exponent fits,
//! - [`quadrature`]: Plemelj, principal-value, logarithmic and oscillatory
//!   quadrature rules used throughout.

pub mod depletion;
pub mod evolution;
pub mod fit;
pub mod greens;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod rayleigh;
pub mod roots;
pub mod spectrum;

pub use num_complex::Complex64;

/// `1 + |t|`, the Japanese bracket used in all decay estimates.
pub fn bracket(t: f64) -> f64 {
    1.0 + t.abs()
}

/// The logarithmic weight `Theta(x) = 1 + 1_{|x|<=1} |log|x||` appearing in
/// the pointwise bounds near extremal layers.
pub fn theta_weight(x: f64) -> f64 {
    if x.abs() <= 1.0 {
        1.0 + x.abs().ln().abs()
    } else {
        1.0
    }
}
