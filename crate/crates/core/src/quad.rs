//! Adaptive Simpson quadrature for real and complex integrands.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

/// Absolute tolerance used for every pulse integral.
pub const PULSE_QUAD_TOL: f64 = 1e-12;

const MAX_DEPTH: u32 = 30;
/// Refinement stops once the change is below this fraction of `int |f|`
/// over the panel, where roundoff in `f` dominates.
const ROUNDOFF_FLOOR: f64 = 1e-14;
/// Panels narrower than this many ulps of their endpoints are not split.
const MIN_WIDTH_ULPS: f64 = 1024.0;

/// Values an adaptive rule can integrate.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for C64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

struct Panel<T> {
    a: f64,
    m: f64,
    b: f64,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
}

fn recurse<T: Integrand, F: Fn(f64) -> T>(f: &F, p: Panel<T>, eps: f64, depth: u32) -> T {
    let Panel { a, m, b, fa, fm, fb, whole } = p;
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let (hl, hr) = (m - a, b - m);
    let left = (fa + flm * 4.0 + fm) * (hl / 6.0);
    let right = (fm + frm * 4.0 + fb) * (hr / 6.0);
    let both = left + right;
    let delta = both - whole;
    let mass = (fa.magnitude() + 4.0 * flm.magnitude() + 2.0 * fm.magnitude()
        + 4.0 * frm.magnitude()
        + fb.magnitude())
        * ((b - a) / 12.0);
    let floor = ROUNDOFF_FLOOR * mass;
    let unresolvable = b - a <= MIN_WIDTH_ULPS * f64::EPSILON * a.abs().max(b.abs());
    if depth == 0 || delta.magnitude() <= 15.0 * eps.max(floor) || unresolvable {
        return both + delta * (1.0 / 15.0);
    }
    recurse(f, Panel { a, m: lm, b: m, fa, fm: flm, fb: fm, whole: left }, 0.5 * eps, depth - 1)
        + recurse(f, Panel { a: m, m: rm, b, fa: fm, fm: frm, fb, whole: right }, 0.5 * eps, depth - 1)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Integrand, F: Fn(f64) -> T>(f: F, a: f64, b: f64, tol: f64) -> T {
    if b == a {
        return f(a) * 0.0;
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol) * -1.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
    recurse(&f, Panel { a, m, b, fa, fm, fb, whole }, tol, MAX_DEPTH)
}

/// Split `[a, b]` into panels no longer than `max_panel` and integrate each
/// adaptively, sharing `tol` evenly. Use for integrands that oscillate or
/// have structure on a known scale.
pub fn integrate_panels<T: Integrand, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    max_panel: f64,
    tol: f64,
) -> T {
    let len = b - a;
    let n = if max_panel > 0.0 && max_panel.is_finite() {
        ((len.abs() / max_panel).ceil() as usize).clamp(1, 1 << 20)
    } else {
        1
    };
    let h = len / n as f64;
    let sub_tol = tol / n as f64;
    let mut acc = f(a) * 0.0;
    for k in 0..n {
        let lo = a + h * k as f64;
        let hi = if k + 1 == n { b } else { a + h * (k + 1) as f64 };
        acc = acc + adaptive_simpson(&f, lo, hi, sub_tol);
    }
    acc
}
