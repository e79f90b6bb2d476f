//! Shear profiles `U_s(y)` on the half line: builtins, tabulated data,
//! validation of the standing assumptions and extremal-layer detection.
//!
//! A profile is valid when `U_s(0) = 0`, `U_s'(0) != 0`, `U_s` converges
//! exponentially to a constant `U_+`, every root of `U_s'` is nondegenerate
//! (`U_s'' != 0` there) and the extremal velocities are pairwise distinct.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::roots::{brent, scan_brackets};

/// Relative tolerance for critical-layer and extremal-layer root solves.
pub const TOL_ROOT: f64 = 1e-10;
/// Threshold on `|U_s''|` below which a root of `U_s'` counts as degenerate.
pub const TOL_NONDEG: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("profile validation failed: {0}")]
    Validation(String),
    #[error("degenerate extremum at y = {y}: |U_s''| = {us2_abs} < {tol}")]
    DegenerateExtremum { y: f64, us2_abs: f64, tol: f64 },
    #[error("duplicate extremal velocities: U_s({y1}) = U_s({y2}) = {c}")]
    DuplicateExtremalVelocity { y1: f64, y2: f64, c: f64 },
    #[error("c = {c} is not attained by U_s on [{lo}, {hi}]")]
    NoRoot { c: f64, lo: f64, hi: f64 },
    #[error("U_s' changes sign inside the bracket [{lo}, {hi}]")]
    MultiRoot { lo: f64, hi: f64 },
    #[error("table error: {0}")]
    Table(String),
}

/// One extremal layer: a root of `U_s'` with `U_s'' != 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExtremalLayer {
    pub y_extr: f64,
    pub c_extr: f64,
    pub us2_at_extr: f64,
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Evaluator {
    /// `U_s(y) = U_+ (1 - e^{-y})`
    Exp { u_plus: f64 },
    /// `U_s(y) = y e^{-y}`
    Jet,
    /// Exact parabola `(y - y0)^2` inside a window, quintic blends outside.
    ParabolaWindow(ParabolaWindow),
    /// Quintic Hermite interpolant of tabulated `(y, U, U', U'')`.
    Tabulated(Arc<QuinticTable>),
    /// Caller-supplied closures (test fixtures, synthetic coefficients).
    Custom {
        us: ScalarFn,
        us1: ScalarFn,
        us2: ScalarFn,
    },
}

/// A validated shear profile with derivative data and extremal layers.
#[derive(Clone)]
pub struct ShearProfile {
    eval: Evaluator,
    pub u_plus: f64,
    pub tail_rate: f64,
    pub y_max: f64,
    pub extremal_layers: Vec<ExtremalLayer>,
}

impl fmt::Debug for ShearProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShearProfile")
            .field("u_plus", &self.u_plus)
            .field("tail_rate", &self.tail_rate)
            .field("y_max", &self.y_max)
            .field("extremal_layers", &self.extremal_layers)
            .finish()
    }
}

/// Builtin profile kinds plus tabulated input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileKind {
    BuiltinExp,
    BuiltinJet,
    BuiltinParabolaWindow,
    Tabulated,
}

/// Declarative profile description, as read from a config file.
#[derive(Debug, Clone)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub params: BTreeMap<String, f64>,
    pub table_path: Option<PathBuf>,
}

impl ProfileSpec {
    pub fn builtin_exp(u_plus: f64) -> Self {
        let mut params = BTreeMap::new();
        params.insert("u_plus".into(), u_plus);
        ProfileSpec {
            kind: ProfileKind::BuiltinExp,
            params,
            table_path: None,
        }
    }

    pub fn builtin_jet() -> Self {
        ProfileSpec {
            kind: ProfileKind::BuiltinJet,
            params: BTreeMap::new(),
            table_path: None,
        }
    }

    pub fn builtin_parabola_window() -> Self {
        ProfileSpec {
            kind: ProfileKind::BuiltinParabolaWindow,
            params: BTreeMap::new(),
            table_path: None,
        }
    }

    pub fn tabulated(path: impl Into<PathBuf>) -> Self {
        ProfileSpec {
            kind: ProfileKind::Tabulated,
            params: BTreeMap::new(),
            table_path: Some(path.into()),
        }
    }
}

impl ShearProfile {
    pub fn us(&self, y: f64) -> f64 {
        match &self.eval {
            Evaluator::Exp { u_plus } => u_plus * (1.0 - (-y).exp()),
            Evaluator::Jet => y * (-y).exp(),
            Evaluator::ParabolaWindow(p) => p.us(y),
            Evaluator::Tabulated(t) => t.eval(y).0,
            Evaluator::Custom { us, .. } => us(y),
        }
    }

    pub fn us1(&self, y: f64) -> f64 {
        match &self.eval {
            Evaluator::Exp { u_plus } => u_plus * (-y).exp(),
            Evaluator::Jet => (1.0 - y) * (-y).exp(),
            Evaluator::ParabolaWindow(p) => p.us1(y),
            Evaluator::Tabulated(t) => t.eval(y).1,
            Evaluator::Custom { us1, .. } => us1(y),
        }
    }

    pub fn us2(&self, y: f64) -> f64 {
        match &self.eval {
            Evaluator::Exp { u_plus } => -u_plus * (-y).exp(),
            Evaluator::Jet => (y - 2.0) * (-y).exp(),
            Evaluator::ParabolaWindow(p) => p.us2(y),
            Evaluator::Tabulated(t) => t.eval(y).2,
            Evaluator::Custom { us2, .. } => us2(y),
        }
    }

    /// Closure of the attained velocity set `[min U_s, max U_s]` on the grid.
    pub fn velocity_range(&self) -> (f64, f64) {
        let n = 4000;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..=n {
            let u = self.us(self.y_max * k as f64 / n as f64);
            lo = lo.min(u);
            hi = hi.max(u);
        }
        (lo, hi)
    }

    /// Deterministic sample table `(y, U, U', U'')` on a uniform grid.
    pub fn sample_table(&self, n: usize) -> Vec<(f64, f64, f64, f64)> {
        (0..=n)
            .map(|k| {
                let y = self.y_max * k as f64 / n as f64;
                (y, self.us(y), self.us1(y), self.us2(y))
            })
            .collect()
    }

    /// Builds a profile from closures, bypassing the far-field audit.
    /// Intended for test fixtures (windowed profiles, synthetic Rayleigh
    /// coefficients); extremal layers are still detected and checked.
    pub fn from_functions(
        us: impl Fn(f64) -> f64 + Send + Sync + 'static,
        us1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        us2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        u_plus: f64,
        tail_rate: f64,
        y_max: f64,
    ) -> Result<Self, ProfileError> {
        let mut p = ShearProfile {
            eval: Evaluator::Custom {
                us: Arc::new(us),
                us1: Arc::new(us1),
                us2: Arc::new(us2),
            },
            u_plus,
            tail_rate,
            y_max,
            extremal_layers: Vec::new(),
        };
        p.extremal_layers = detect_extremal_layers(&p)?;
        Ok(p)
    }

    /// `U_s(y) = slope * y` with `U_s'' = 0`: the exactly solvable window
    /// used to pin the trivial-profile behaviour of the solvers.
    pub fn linear_window(slope: f64, y_max: f64) -> Self {
        ShearProfile {
            eval: Evaluator::Custom {
                us: Arc::new(move |y| slope * y),
                us1: Arc::new(move |_| slope),
                us2: Arc::new(|_| 0.0),
            },
            u_plus: slope * y_max,
            tail_rate: 1.0,
            y_max,
            extremal_layers: Vec::new(),
        }
    }
}

/// Builds and validates a profile from its spec.
pub fn build_profile(spec: &ProfileSpec, y_max: f64) -> Result<ShearProfile, ProfileError> {
    let (eval, u_plus, tail_rate) = match spec.kind {
        ProfileKind::BuiltinExp => {
            let u_plus = *spec.params.get("u_plus").unwrap_or(&1.0);
            if u_plus == 0.0 {
                return Err(ProfileError::Validation("u_plus must be nonzero".into()));
            }
            (Evaluator::Exp { u_plus }, u_plus, 1.0)
        }
        ProfileKind::BuiltinJet => (Evaluator::Jet, 0.0, 0.9),
        ProfileKind::BuiltinParabolaWindow => {
            let p = ParabolaWindow::standard();
            let u_plus = p.u_plus;
            (Evaluator::ParabolaWindow(p), u_plus, 2.0)
        }
        ProfileKind::Tabulated => {
            let path = spec
                .table_path
                .as_ref()
                .ok_or_else(|| ProfileError::Table("tabulated profile needs a table path".into()))?;
            let table = QuinticTable::load(path)?;
            let u_plus = *spec
                .params
                .get("u_plus")
                .unwrap_or(&table.rows.last().unwrap().1);
            let tail_rate = *spec
                .params
                .get("tail_rate")
                .unwrap_or(&table.estimate_tail_rate(u_plus));
            (Evaluator::Tabulated(Arc::new(table)), u_plus, tail_rate)
        }
    };
    if tail_rate <= 0.0 {
        return Err(ProfileError::Validation("tail_rate must be positive".into()));
    }
    if y_max <= 0.0 || (-tail_rate * y_max).exp() >= 1e-10 {
        return Err(ProfileError::Validation(format!(
            "y_max = {y_max} too small: exp(-tail_rate*y_max) must stay below 1e-10"
        )));
    }
    let mut profile = ShearProfile {
        eval,
        u_plus,
        tail_rate,
        y_max,
        extremal_layers: Vec::new(),
    };
    // (A1) wall conditions
    let scale = profile.u_plus.abs().max(1.0);
    if profile.us(0.0).abs() > 1e-12 * scale {
        return Err(ProfileError::Validation(format!(
            "U_s(0) = {} is not zero",
            profile.us(0.0)
        )));
    }
    if profile.us1(0.0).abs() < 1e-10 * scale {
        return Err(ProfileError::Validation("U_s'(0) vanishes".into()));
    }
    // (A1) far field: both U_s - U_+ and U_s'' must sit below the stated
    // exponential envelope on the outer half of the grid.
    let envelope_const = {
        let mut c: f64 = 0.0;
        for k in 0..=200 {
            let y = y_max * (0.3 + 0.2 * k as f64 / 200.0);
            let e = (tail_rate * y).exp();
            c = c.max((profile.us(y) - u_plus).abs() * e);
            c = c.max(profile.us2(y).abs() * e);
        }
        c.max(1.0)
    };
    for k in 0..=200 {
        let y = y_max * (0.5 + 0.5 * k as f64 / 200.0);
        let bound = 100.0 * envelope_const * (-tail_rate * y).exp() + 1e-12;
        if (profile.us(y) - u_plus).abs() > bound || profile.us2(y).abs() > bound {
            return Err(ProfileError::Validation(format!(
                "far-field decay violated at y = {y}"
            )));
        }
    }
    let tol_nondeg = *spec.params.get("tol_nondeg").unwrap_or(&TOL_NONDEG);
    profile.extremal_layers = detect_extremal_layers_with_tol(&profile, tol_nondeg)?;
    Ok(profile)
}

/// Root search on `U_s'` over `(0, y_max)` with nondegeneracy and
/// distinct-velocity checks (A2).
fn detect_extremal_layers(p: &ShearProfile) -> Result<Vec<ExtremalLayer>, ProfileError> {
    detect_extremal_layers_with_tol(p, TOL_NONDEG)
}

fn detect_extremal_layers_with_tol(
    p: &ShearProfile,
    tol_nondeg: f64,
) -> Result<Vec<ExtremalLayer>, ProfileError> {
    let mut layers: Vec<ExtremalLayer> = Vec::new();
    let eps = 1e-9 * p.y_max;
    for (a, b) in scan_brackets(|y| p.us1(y), eps, p.y_max, 8000) {
        let y_extr = if a == b {
            a
        } else {
            brent(|y| p.us1(y), a, b, TOL_ROOT).expect("bracket came from a sign scan")
        };
        let us2 = p.us2(y_extr);
        if us2.abs() <= tol_nondeg {
            return Err(ProfileError::DegenerateExtremum {
                y: y_extr,
                us2_abs: us2.abs(),
                tol: tol_nondeg,
            });
        }
        let c_extr = p.us(y_extr);
        for l in &layers {
            if (l.c_extr - c_extr).abs() < 1e-8 * (1.0 + c_extr.abs()) {
                return Err(ProfileError::DuplicateExtremalVelocity {
                    y1: l.y_extr,
                    y2: y_extr,
                    c: c_extr,
                });
            }
        }
        layers.push(ExtremalLayer {
            y_extr,
            c_extr,
            us2_at_extr: us2,
        });
    }
    // Touching roots of U_s' never flip the sign, so the bracket scan misses
    // them: look for interior dips of |U_s'| to near zero.
    let n = 8000;
    let scale = (0..=n)
        .map(|k| p.us1(p.y_max * k as f64 / n as f64).abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut prev2 = p.us1(eps).abs();
    let mut prev = p.us1(p.y_max / n as f64).abs();
    for k in 2..n {
        let y = p.y_max * k as f64 / n as f64;
        let cur = p.us1(y).abs();
        let y_mid = p.y_max * (k - 1) as f64 / n as f64;
        if prev < prev2 && prev < cur && prev < 1e-6 * scale {
            let far_from_known = layers
                .iter()
                .all(|l| (l.y_extr - y_mid).abs() > 2.0 * p.y_max / n as f64);
            if far_from_known {
                // refine the dip before judging nondegeneracy
                let step = p.y_max / n as f64;
                let (mut lo, mut hi) = (y_mid - 2.0 * step, y_mid + 2.0 * step);
                for _ in 0..80 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if p.us1(m1).abs() < p.us1(m2).abs() {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                let y_dip = 0.5 * (lo + hi);
                let us2 = p.us2(y_dip);
                if us2.abs() <= tol_nondeg {
                    return Err(ProfileError::DegenerateExtremum {
                        y: y_dip,
                        us2_abs: us2.abs(),
                        tol: tol_nondeg,
                    });
                }
            }
        }
        prev2 = prev;
        prev = cur;
    }
    layers.sort_by(|a, b| a.y_extr.partial_cmp(&b.y_extr).unwrap());
    Ok(layers)
}

/// Locates the critical layer `y_c` with `U_s(y_c) = c_real` inside a bracket
/// on which `U_s'` keeps one sign.
pub fn critical_layer(
    profile: &ShearProfile,
    c_real: f64,
    bracket: (f64, f64),
) -> Result<f64, ProfileError> {
    let (lo, hi) = bracket;
    // monotonicity guard: U_s' must not change sign inside
    let s0 = profile.us1(lo).signum();
    for k in 1..=64 {
        let y = lo + (hi - lo) * k as f64 / 64.0;
        if profile.us1(y).signum() != s0 {
            return Err(ProfileError::MultiRoot { lo, hi });
        }
    }
    let f = |y: f64| profile.us(y) - c_real;
    if f(lo) == 0.0 {
        return Ok(lo);
    }
    if f(hi) == 0.0 {
        return Ok(hi);
    }
    if f(lo).signum() == f(hi).signum() {
        return Err(ProfileError::NoRoot { c: c_real, lo, hi });
    }
    brent(f, lo, hi, TOL_ROOT).map_err(|_| ProfileError::NoRoot { c: c_real, lo, hi })
}

/// All critical layers `U_s(y) = c_real` on `(0, y_max)`.
pub fn all_critical_layers(profile: &ShearProfile, c_real: f64) -> Vec<f64> {
    scan_brackets(|y| profile.us(y) - c_real, 0.0, profile.y_max, 8000)
        .into_iter()
        .filter_map(|(a, b)| {
            if a == b {
                Some(a)
            } else {
                brent(|y| profile.us(y) - c_real, a, b, TOL_ROOT).ok()
            }
        })
        .collect()
}

/// Parabola-window profile: `U_s = (y - y0)^2` for `|y - y0| <= w`, a C^2
/// quintic blend down to the wall, and a blend onto an exponential tail
/// `U_+ - C e^{-lambda (y - y_b)}` (an exactly constant tail would give
/// `U_s'` a continuum of zeros, violating A2).
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolaWindow {
    pub y0: f64,
    pub halfwidth: f64,
    pub u_plus: f64,
    lower: Quintic,
    upper: Quintic,
    blend_end: f64,
    tail_amp: f64,
    tail_lambda: f64,
}

impl ParabolaWindow {
    /// Window centre 1.2, half width 0.5, wall slope 1.5, tail rate 2.
    pub fn standard() -> Self {
        let y0 = 1.2;
        let w = 0.5;
        let wall_slope = 1.5;
        let u_plus = 0.9;
        let tail_amp = 0.05;
        let tail_lambda = 2.0;
        let a = y0 - w;
        let b = y0 + w;
        let blend_end = b + 1.3;
        let lower = Quintic::hermite(0.0, a, (0.0, wall_slope, 0.0), (w * w, -2.0 * w, 2.0));
        let upper = Quintic::hermite(
            b,
            blend_end,
            (w * w, 2.0 * w, 2.0),
            (
                u_plus - tail_amp,
                tail_amp * tail_lambda,
                -tail_amp * tail_lambda * tail_lambda,
            ),
        );
        ParabolaWindow {
            y0,
            halfwidth: w,
            u_plus,
            lower,
            upper,
            blend_end,
            tail_amp,
            tail_lambda,
        }
    }

    pub fn window(&self) -> (f64, f64) {
        (self.y0 - self.halfwidth, self.y0 + self.halfwidth)
    }

    fn us(&self, y: f64) -> f64 {
        let (a, b) = self.window();
        if y < a {
            self.lower.eval(y).0
        } else if y <= b {
            (y - self.y0).powi(2)
        } else if y <= self.blend_end {
            self.upper.eval(y).0
        } else {
            self.u_plus - self.tail_amp * (-self.tail_lambda * (y - self.blend_end)).exp()
        }
    }

    fn us1(&self, y: f64) -> f64 {
        let (a, b) = self.window();
        if y < a {
            self.lower.eval(y).1
        } else if y <= b {
            2.0 * (y - self.y0)
        } else if y <= self.blend_end {
            self.upper.eval(y).1
        } else {
            self.tail_amp * self.tail_lambda * (-self.tail_lambda * (y - self.blend_end)).exp()
        }
    }

    fn us2(&self, y: f64) -> f64 {
        let (a, b) = self.window();
        if y < a {
            self.lower.eval(y).2
        } else if y <= b {
            2.0
        } else if y <= self.blend_end {
            self.upper.eval(y).2
        } else {
            -self.tail_amp
                * self.tail_lambda
                * self.tail_lambda
                * (-self.tail_lambda * (y - self.blend_end)).exp()
        }
    }
}

/// Quintic with prescribed value/first/second derivative at both ends.
#[derive(Debug, Clone, PartialEq)]
struct Quintic {
    x0: f64,
    h: f64,
    coef: [f64; 6],
}

impl Quintic {
    fn hermite(x0: f64, x1: f64, left: (f64, f64, f64), right: (f64, f64, f64)) -> Self {
        let h = x1 - x0;
        let (p0, d0, s0) = left;
        // scale derivatives to the unit interval
        let (p1, d1, s1) = right;
        let (d0, d1) = (d0 * h, d1 * h);
        let (s0, s1) = (s0 * h * h, s1 * h * h);
        // q(t) = sum coef[k] t^k with q(0),q'(0),q''(0),q(1),q'(1),q''(1) given
        let c0 = p0;
        let c1 = d0;
        let c2 = 0.5 * s0;
        let r0 = p1 - c0 - c1 - c2;
        let r1 = d1 - c1 - 2.0 * c2;
        let r2 = s1 - 2.0 * c2;
        let c3 = 10.0 * r0 - 4.0 * r1 + 0.5 * r2;
        let c4 = -15.0 * r0 + 7.0 * r1 - r2;
        let c5 = 6.0 * r0 - 3.0 * r1 + 0.5 * r2;
        Quintic {
            x0,
            h,
            coef: [c0, c1, c2, c3, c4, c5],
        }
    }

    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let t = (x - self.x0) / self.h;
        let c = &self.coef;
        let p = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
        let d = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
        let s = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
        (p, d / self.h, s / (self.h * self.h))
    }
}

/// Tabulated profile: strictly increasing `y` starting at 0, columns
/// `y,U,U1,U2`, interpolated by quintic Hermite pieces (C^2 by construction).
#[derive(Debug, Clone)]
pub struct QuinticTable {
    rows: Vec<(f64, f64, f64, f64)>,
    pieces: Vec<Quintic>,
}

impl QuinticTable {
    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ProfileError::Table(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ProfileError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| ProfileError::Table("empty table".into()))?;
        if header.trim().replace(' ', "") != "y,U,U1,U2" {
            return Err(ProfileError::Table(format!(
                "expected header 'y,U,U1,U2', got '{header}'"
            )));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let vals: Result<Vec<f64>, _> =
                line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let vals =
                vals.map_err(|e| ProfileError::Table(format!("row {}: {e}", i + 2)))?;
            if vals.len() != 4 {
                return Err(ProfileError::Table(format!("row {} needs 4 columns", i + 2)));
            }
            rows.push((vals[0], vals[1], vals[2], vals[3]));
        }
        if rows.len() < 4 {
            return Err(ProfileError::Table("need at least 4 rows".into()));
        }
        if rows[0].0 != 0.0 {
            return Err(ProfileError::Table("first row must have y = 0".into()));
        }
        if !rows.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(ProfileError::Table("y must be strictly increasing".into()));
        }
        let pieces = rows
            .windows(2)
            .map(|w| {
                let (x0, p0, d0, s0) = w[0];
                let (x1, p1, d1, s1) = w[1];
                Quintic::hermite(x0, x1, (p0, d0, s0), (p1, d1, s1))
            })
            .collect();
        Ok(QuinticTable { rows, pieces })
    }

    fn eval(&self, y: f64) -> (f64, f64, f64) {
        let last = self.rows.last().unwrap();
        if y >= last.0 {
            return (last.1, 0.0, 0.0);
        }
        let idx = match self
            .rows
            .binary_search_by(|r| r.0.partial_cmp(&y).unwrap())
        {
            Ok(i) => i.min(self.pieces.len() - 1),
            Err(i) => i.saturating_sub(1).min(self.pieces.len() - 1),
        };
        self.pieces[idx].eval(y)
    }

    fn estimate_tail_rate(&self, u_plus: f64) -> f64 {
        // slope of log |U - U_+| over the outer half of the table
        let mut pts = Vec::new();
        let n = self.rows.len();
        for &(y, u, _, _) in &self.rows[n / 2..] {
            let d = (u - u_plus).abs();
            if d > 1e-14 {
                pts.push((y, d.ln()));
            }
        }
        if pts.len() < 2 {
            return 1.0;
        }
        let (y0, l0) = pts[0];
        let (y1, l1) = *pts.last().unwrap();
        if y1 > y0 && l1 < l0 {
            ((l0 - l1) / (y1 - y0)).max(0.05)
        } else {
            1.0
        }
    }
}
