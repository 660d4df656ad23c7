//! Closed-form propagators for the limiting regimes of a singly pulsed
//! two-level system.
//!
//! None of these functions check whether their regime actually applies;
//! that is [`crate::map::classify`]'s job. The only enforced precondition is
//! the structural one of [`adiabatic_u`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::refine_final;
use crate::pulse::PulseSpec;
use crate::quad::{adaptive_simpson, integrate_panels, PULSE_QUAD_TOL};
use crate::qubit::{SystemParams, Unitary2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    Degenerate,
    DegenerateExtended,
    Perturbative,
    ZeroPotential,
    Adiabatic,
    Kicked,
}

impl RegimeKind {
    pub const ALL: [RegimeKind; 6] = [
        RegimeKind::Degenerate,
        RegimeKind::DegenerateExtended,
        RegimeKind::Perturbative,
        RegimeKind::ZeroPotential,
        RegimeKind::Adiabatic,
        RegimeKind::Kicked,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegimeKind::Degenerate => "degenerate",
            RegimeKind::DegenerateExtended => "degenerate_extended",
            RegimeKind::Perturbative => "perturbative",
            RegimeKind::ZeroPotential => "zero_potential",
            RegimeKind::Adiabatic => "adiabatic",
            RegimeKind::Kicked => "kicked",
        }
    }
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegimeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RegimeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown regime '{s}'")))
    }
}

/// Action integral `alpha = int_0^t V dt / hbar` and extended phase
/// `theta = int_0^t Omega dt / hbar`, `Omega = sqrt(V^2 + (dE/2)^2)`.
#[derive(Clone, Debug)]
pub struct PhaseIntegrals<'a> {
    pub alpha: f64,
    pub theta: f64,
    params: SystemParams,
    pulse: &'a PulseSpec,
}

impl<'a> PhaseIntegrals<'a> {
    pub fn new(params: &SystemParams, pulse: &'a PulseSpec, t: f64) -> Self {
        PhaseIntegrals {
            alpha: pulse.integrated_strength(0.0, t, params.hbar),
            theta: theta(params, pulse, t),
            params: *params,
            pulse,
        }
    }

    /// `Omega(t)`; a kick contributes no pointwise field.
    pub fn omega_at(&self, t: f64) -> f64 {
        omega(&self.params, self.pulse.value_unchecked(t))
    }
}

fn omega(params: &SystemParams, v: f64) -> f64 {
    v.hypot(0.5 * params.delta_e)
}

/// `int_0^t Omega dt / hbar`. Outside the support `Omega = dE/2` exactly; a
/// kick adds `|alpha_k|`.
fn theta(params: &SystemParams, pulse: &PulseSpec, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let free_rate = params.half_splitting_rate();
    let (on, off) = pulse.support();
    let (lo, hi) = (on.max(0.0), off.min(t));
    let inside = (hi - lo).max(0.0);
    let mut total = free_rate * (t - inside);
    match pulse {
        PulseSpec::DeltaKick { alpha_k, t_k } => {
            if *t_k < t {
                total += alpha_k.abs();
            }
        }
        PulseSpec::Rectangular { v0, .. } => total += omega(params, *v0) * inside / params.hbar,
        _ if inside > 0.0 => {
            let panel = match pulse {
                PulseSpec::Gaussian { sigma, .. } => *sigma,
                _ => inside,
            };
            let f = |s: f64| omega(params, pulse.value_unchecked(s));
            let mut cuts = vec![lo];
            cuts.extend(pulse.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
            cuts.push(hi);
            for w in cuts.windows(2) {
                total += integrate_panels(f, w[0], w[1], panel, PULSE_QUAD_TOL) / params.hbar;
            }
        }
        _ => {}
    }
    total
}

fn sigma_x_rotation(angle: f64) -> Unitary2 {
    let (s, c) = angle.sin_cos();
    Unitary2::new(C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0))
}

/// `[[cos a, -i sin a], [-i sin a, cos a]]` with `a = int_0^t V dt / hbar`.
pub fn degenerate_u(pulse: &PulseSpec, t: f64, hbar: f64) -> Unitary2 {
    sigma_x_rotation(pulse.integrated_strength(0.0, t, hbar))
}

/// The degenerate form with `alpha` replaced by `theta`. `theta` carries the
/// sign of `alpha` so that `V -> -V` maps the result to `sz U sz`, as for
/// the exact propagator.
pub fn degenerate_extended_u(params: &SystemParams, pulse: &PulseSpec, t: f64) -> Unitary2 {
    let phases = PhaseIntegrals::new(params, pulse, t);
    let sign = if phases.alpha < 0.0 { -1.0 } else { 1.0 };
    sigma_x_rotation(sign * phases.theta)
}

/// `diag(e^{i t dE / 2 hbar}, e^{-i t dE / 2 hbar})`.
pub fn zero_potential_u(params: &SystemParams, t: f64) -> Unitary2 {
    let phase = params.half_splitting_rate() * t;
    Unitary2::diag(C64::from_polar(1.0, phase), C64::from_polar(1.0, -phase))
}

/// First-order propagator: free phases on the diagonal, and off-diagonal
/// `-i int_0^inf e^{+-i (t - 2t') dE / 2 hbar} V(t') dt' / hbar`.
pub fn perturbative_u(params: &SystemParams, pulse: &PulseSpec, t: f64) -> Unitary2 {
    let w = params.half_splitting_rate();
    let free = zero_potential_u(params, t);
    // I = int e^{-i 2 w t'} V(t') dt' / hbar; the two off-diagonals are
    // -i e^{i w t} I and -i e^{-i w t} conj(I).
    let integral = match pulse {
        PulseSpec::DeltaKick { alpha_k, t_k } => {
            C64::from_polar(*alpha_k, -2.0 * w * t_k)
        }
        PulseSpec::Rectangular { v0, t_start, width } => {
            let (lo, hi) = (t_start.max(0.0), t_start + width);
            if hi <= lo {
                C64::new(0.0, 0.0)
            } else {
                *v0 * exp_integral(2.0 * w, lo, hi) / params.hbar
            }
        }
        _ => {
            let (on, off) = pulse.support();
            let (lo, hi) = (on.max(0.0), off);
            if hi <= lo {
                C64::new(0.0, 0.0)
            } else {
                let tau = pulse.duration_tau().unwrap_or(hi - lo).max(f64::MIN_POSITIVE);
                let rate = (2.0 * w).max(1.0 / tau);
                let panel = 1.0 / rate;
                let mut cuts = vec![lo];
                cuts.extend(pulse.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
                cuts.push(hi);
                let mut acc = C64::new(0.0, 0.0);
                for c in cuts.windows(2) {
                    acc += oscillatory_integral(pulse, 2.0 * w, c[0], c[1], panel);
                }
                acc / params.hbar
            }
        }
    };
    let minus_i = C64::new(0.0, -1.0);
    Unitary2::new(
        free.u11,
        minus_i * C64::from_polar(1.0, w * t) * integral,
        minus_i * C64::from_polar(1.0, -w * t) * integral.conj(),
        free.u22,
    )
}

/// `int_a^b e^{-i k s} ds`, written to stay accurate as `k (b - a) -> 0`.
fn exp_integral(k: f64, a: f64, b: f64) -> C64 {
    let half = 0.5 * k * (b - a);
    let sinc = if half.abs() < 1e-8 { 1.0 - half * half / 6.0 } else { half.sin() / half };
    C64::from_polar((b - a) * sinc, -0.5 * k * (a + b))
}

/// `int_a^b V(s) e^{-i k s} ds` over panels no longer than `panel`. The
/// phase is taken relative to each panel's midpoint so that large `s` does
/// not inject roundoff into the integrand.
fn oscillatory_integral(pulse: &PulseSpec, k: f64, a: f64, b: f64, panel: f64) -> C64 {
    let n = ((b - a) / panel).ceil().clamp(1.0, (1u64 << 20) as f64) as usize;
    let h = (b - a) / n as f64;
    let tol = PULSE_QUAD_TOL / n as f64;
    (0..n)
        .map(|j| {
            let lo = a + h * j as f64;
            let hi = if j + 1 == n { b } else { a + h * (j + 1) as f64 };
            let mid = 0.5 * (lo + hi);
            let local = adaptive_simpson(
                |s: f64| C64::from_polar(pulse.value_unchecked(s), -k * (s - mid)),
                lo,
                hi,
                tol,
            );
            C64::from_polar(1.0, -k * mid) * local
        })
        .sum()
}

/// Adiabatic propagator, valid only when `V(t) = V(0)`.
pub fn adiabatic_u(params: &SystemParams, pulse: &PulseSpec, t: f64) -> Result<Unitary2> {
    let v0 = pulse.value_unchecked(0.0);
    let v = pulse.value_unchecked(t);
    let (on, off) = pulse.support();
    let outside = t < on || t > off || (pulse.is_kick() && t != on);
    let returned = (v - v0).abs() < 1e-9 * pulse.peak_magnitude() || (v0 == 0.0 && outside);
    if !returned {
        return Err(Error::PulseNotReturned { t });
    }
    let theta = theta(params, pulse, t);
    let om = omega(params, v);
    // Omega = 0 only for dE = 0 and V = 0; take the degenerate limit.
    let (split, field) = if om > 0.0 { (0.5 * params.delta_e / om, v / om) } else { (0.0, 1.0) };
    let (s, c) = theta.sin_cos();
    Ok(Unitary2::new(
        C64::new(c, split * s),
        C64::new(0.0, -field * s),
        C64::new(0.0, -field * s),
        C64::new(c, -split * s),
    ))
}

/// Free evolution to `t_k`, the exact kick, free evolution to `t`.
pub fn kicked_u(params: &SystemParams, kick: &PulseSpec, t: f64) -> Result<Unitary2> {
    let PulseSpec::DeltaKick { alpha_k, t_k } = *kick else {
        return Err(Error::InvalidPulse("kicked_u needs a delta kick".into()));
    };
    if t < t_k {
        return Err(Error::KickNotYetApplied { t, t_k });
    }
    let w = params.half_splitting_rate();
    let (s, c) = alpha_k.sin_cos();
    let minus_i = C64::new(0.0, -1.0);
    Ok(Unitary2::new(
        C64::from_polar(c, w * t),
        minus_i * C64::from_polar(s, w * (t - 2.0 * t_k)),
        minus_i * C64::from_polar(s, -w * (t - 2.0 * t_k)),
        C64::from_polar(c, -w * t),
    ))
}

/// Error of finite-width Gaussians against the ideal kick.
///
/// Each width is the equivalent width `tau`; the Gaussian has area
/// `alpha_k` and is centred on `t_k`. All widths are compared at the common
/// time `t_k + 8 sigma_max`, after the widest pulse has ended.
pub fn kick_convergence_study(
    params: &SystemParams,
    alpha_k: f64,
    t_k: f64,
    widths: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if widths.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidParams("widths must be positive".into()));
    }
    if widths.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParams("widths must be decreasing".into()));
    }
    let Some(&widest) = widths.first() else {
        return Ok(Vec::new());
    };
    let reach = crate::pulse::GAUSSIAN_CUTOFF_SIGMAS * widest / (2.0 * std::f64::consts::PI).sqrt();
    if t_k < reach {
        return Err(Error::InvalidParams(format!(
            "t_k = {t_k} must be at least {reach} so the widest pulse starts after t = 0"
        )));
    }
    let t_eval = t_k + reach;
    let reference = kicked_u(params, &PulseSpec::kick(alpha_k, t_k)?, t_eval)?;
    widths
        .iter()
        .map(|&width| {
            let pulse = PulseSpec::gaussian_with_area(alpha_k, width, t_k, params.hbar)?;
            let num = refine_final(params, &pulse, t_eval, 1e-12, 64)?;
            Ok((width, num.propagator.distance(&reference)))
        })
        .collect()
}

/// `(p_stay, p_transfer) = (|u_ii|^2, |u_ji|^2)` for a start in basis state
/// `initial` (1 or 2).
pub fn population_transfer(u: &Unitary2, initial: usize) -> Result<(f64, f64)> {
    match initial {
        1 => Ok((u.u11.norm_sqr(), u.u21.norm_sqr())),
        2 => Ok((u.u22.norm_sqr(), u.u12.norm_sqr())),
        _ => Err(Error::InvalidParams(format!("initial state index must be 1 or 2, got {initial}"))),
    }
}

/// The closed form for `kind` at time `t`. The kicked form replaces a
/// finite pulse by its equivalent kick at the centroid.
pub fn closed_form(kind: RegimeKind, params: &SystemParams, pulse: &PulseSpec, t: f64) -> Result<Unitary2> {
    match kind {
        RegimeKind::Degenerate => Ok(degenerate_u(pulse, t, params.hbar)),
        RegimeKind::DegenerateExtended => Ok(degenerate_extended_u(params, pulse, t)),
        RegimeKind::Perturbative => Ok(perturbative_u(params, pulse, t)),
        RegimeKind::ZeroPotential => Ok(zero_potential_u(params, t)),
        RegimeKind::Adiabatic => adiabatic_u(params, pulse, t),
        RegimeKind::Kicked => {
            let kick = if pulse.is_kick() { pulse.clone() } else { pulse.equivalent_kick(params.hbar) };
            kicked_u(params, &kick, t)
        }
    }
}
