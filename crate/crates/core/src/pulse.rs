//! Single-pulse external potentials `V(t)`.
//!
//! Every pulse has a finite support window `[t_on, t_off]`; outside it the
//! potential is exactly zero. Gaussians are truncated at `t_center +- 8 sigma`.
//! The pulse duration `tau` of a smooth pulse is its equivalent width
//! `int |V| dt / max |V|`, which is exact for rectangles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_panels, PULSE_QUAD_TOL};

/// Half-width of the Gaussian support window in units of sigma.
pub const GAUSSIAN_CUTOFF_SIGMAS: f64 = 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseSpec {
    Rectangular { v0: f64, t_start: f64, width: f64 },
    Gaussian { v_peak: f64, t_center: f64, sigma: f64 },
    /// `V(t) = alpha_k hbar delta(t - t_k)`; `alpha_k` is already `int V dt / hbar`.
    DeltaKick { alpha_k: f64, t_k: f64 },
    /// Linear interpolation between `(t, v)` samples, zero outside.
    Sampled { samples: Vec<(f64, f64)> },
}

/// Result of [`PulseSpec::derivative_at`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slope {
    Finite(f64),
    /// A jump in `V` (rectangle edges).
    NonDifferentiable,
}

impl Slope {
    pub fn finite(self) -> Option<f64> {
        match self {
            Slope::Finite(v) => Some(v),
            Slope::NonDifferentiable => None,
        }
    }
}

impl PulseSpec {
    pub fn rectangular(v0: f64, t_start: f64, width: f64) -> Result<Self> {
        let p = PulseSpec::Rectangular { v0, t_start, width };
        p.validate()?;
        Ok(p)
    }

    pub fn gaussian(v_peak: f64, t_center: f64, sigma: f64) -> Result<Self> {
        let p = PulseSpec::Gaussian { v_peak, t_center, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn kick(alpha_k: f64, t_k: f64) -> Result<Self> {
        let p = PulseSpec::DeltaKick { alpha_k, t_k };
        p.validate()?;
        Ok(p)
    }

    pub fn sampled(samples: Vec<(f64, f64)>) -> Result<Self> {
        let p = PulseSpec::Sampled { samples };
        p.validate()?;
        Ok(p)
    }

    /// Gaussian with `int V dt / hbar = area` and equivalent width `tau`.
    pub fn gaussian_with_area(area: f64, tau: f64, t_center: f64, hbar: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidPulse(format!("tau must be > 0, got {tau}")));
        }
        let sigma = tau / (2.0 * std::f64::consts::PI).sqrt();
        Self::gaussian(area * hbar / tau, t_center, sigma)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPulse(m));
        match self {
            PulseSpec::Rectangular { v0, t_start, width } => {
                if !(v0.is_finite() && t_start.is_finite() && width.is_finite()) {
                    return bad("rectangular parameters must be finite".into());
                }
                if *width < 0.0 {
                    return bad(format!("rectangular width must be >= 0, got {width}"));
                }
            }
            PulseSpec::Gaussian { v_peak, t_center, sigma } => {
                if !(v_peak.is_finite() && t_center.is_finite() && sigma.is_finite()) {
                    return bad("gaussian parameters must be finite".into());
                }
                if *sigma <= 0.0 {
                    return bad(format!("gaussian sigma must be > 0, got {sigma}"));
                }
            }
            PulseSpec::DeltaKick { alpha_k, t_k } => {
                if !(alpha_k.is_finite() && t_k.is_finite()) {
                    return bad("kick parameters must be finite".into());
                }
                if *t_k < 0.0 {
                    return bad(format!("kick time must be >= 0, got {t_k}"));
                }
            }
            PulseSpec::Sampled { samples } => {
                if samples.len() < 2 {
                    return bad("sampled pulse needs at least two samples".into());
                }
                if samples.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return bad("sampled pulse values must be finite".into());
                }
                if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return bad("sample times must be strictly increasing".into());
                }
            }
        }
        Ok(())
    }

    pub fn is_kick(&self) -> bool {
        matches!(self, PulseSpec::DeltaKick { .. })
    }

    /// `[t_on, t_off]`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            PulseSpec::Rectangular { t_start, width, .. } => (*t_start, t_start + width),
            PulseSpec::Gaussian { t_center, sigma, .. } => (
                t_center - GAUSSIAN_CUTOFF_SIGMAS * sigma,
                t_center + GAUSSIAN_CUTOFF_SIGMAS * sigma,
            ),
            PulseSpec::DeltaKick { t_k, .. } => (*t_k, *t_k),
            PulseSpec::Sampled { samples } => (samples[0].0, samples[samples.len() - 1].0),
        }
    }

    /// Times at which `V` has a kink, jump or kick; propagation steps are
    /// aligned to these.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            PulseSpec::Sampled { samples } => samples.iter().map(|s| s.0).collect(),
            PulseSpec::Gaussian { t_center, .. } => {
                let (a, b) = self.support();
                vec![a, *t_center, b]
            }
            _ => {
                let (a, b) = self.support();
                if a == b { vec![a] } else { vec![a, b] }
            }
        }
    }

    /// Whether `V` is constant on the open interval `(a, b)`, which must not
    /// contain a breakpoint.
    pub fn is_constant_on(&self, a: f64, b: f64) -> bool {
        let (on, off) = self.support();
        if b <= on || a >= off {
            return true;
        }
        match self {
            PulseSpec::Rectangular { .. } | PulseSpec::DeltaKick { .. } => true,
            PulseSpec::Gaussian { .. } => false,
            PulseSpec::Sampled { samples } => samples
                .windows(2)
                .find(|w| w[0].0 <= a && b <= w[1].0)
                .is_some_and(|w| w[0].1 == w[1].1),
        }
    }

    /// `max |V|` over the support (for a kick, `|alpha_k|`).
    pub fn peak_magnitude(&self) -> f64 {
        match self {
            PulseSpec::Rectangular { v0, .. } => v0.abs(),
            PulseSpec::Gaussian { v_peak, .. } => v_peak.abs(),
            PulseSpec::DeltaKick { alpha_k, .. } => alpha_k.abs(),
            PulseSpec::Sampled { samples } => samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max),
        }
    }

    /// Pointwise potential. Kicks have no pointwise value.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        match self {
            PulseSpec::DeltaKick { .. } => Err(Error::NoPointwiseValue),
            _ => Ok(self.value_unchecked(t)),
        }
    }

    /// Pointwise potential with kicks treated as zero everywhere.
    pub(crate) fn value_unchecked(&self, t: f64) -> f64 {
        match self {
            PulseSpec::Rectangular { v0, t_start, width } => {
                if t >= *t_start && t < t_start + width {
                    *v0
                } else {
                    0.0
                }
            }
            PulseSpec::Gaussian { v_peak, t_center, sigma } => {
                let z = (t - t_center) / sigma;
                if z.abs() <= GAUSSIAN_CUTOFF_SIGMAS {
                    v_peak * (-0.5 * z * z).exp()
                } else {
                    0.0
                }
            }
            PulseSpec::DeltaKick { .. } => 0.0,
            PulseSpec::Sampled { samples } => interpolate(samples, t),
        }
    }

    /// `int_{t_from}^{t_to} V dt / hbar`. A kick contributes `alpha_k` when
    /// `t_k` lies in `[t_from, t_to)`.
    pub fn integrated_strength(&self, t_from: f64, t_to: f64, hbar: f64) -> f64 {
        if t_to < t_from {
            return -self.integrated_strength(t_to, t_from, hbar);
        }
        match self {
            PulseSpec::DeltaKick { alpha_k, t_k } => {
                if *t_k >= t_from && *t_k < t_to {
                    *alpha_k
                } else {
                    0.0
                }
            }
            PulseSpec::Rectangular { v0, .. } => {
                let (lo, hi) = self.clip(t_from, t_to);
                v0 * (hi - lo).max(0.0) / hbar
            }
            PulseSpec::Gaussian { sigma, .. } => {
                let (lo, hi) = self.clip(t_from, t_to);
                if hi <= lo {
                    return 0.0;
                }
                integrate_panels(|t| self.value_unchecked(t), lo, hi, *sigma, PULSE_QUAD_TOL) / hbar
            }
            PulseSpec::Sampled { samples } => {
                sampled_integral(samples, t_from, t_to, |a, b, _| 0.5 * (a + b)) / hbar
            }
        }
    }

    /// `int |V| dt / hbar` over the full support.
    pub fn absolute_area(&self, hbar: f64) -> f64 {
        match self {
            PulseSpec::DeltaKick { alpha_k, .. } => alpha_k.abs(),
            PulseSpec::Sampled { samples } => {
                sampled_integral(samples, f64::NEG_INFINITY, f64::INFINITY, abs_trapezoid) / hbar
            }
            _ => self.integrated_strength(f64::NEG_INFINITY, f64::INFINITY, hbar).abs(),
        }
    }

    /// Characteristic duration `tau`.
    pub fn duration_tau(&self) -> Result<f64> {
        match self {
            PulseSpec::Rectangular { width, .. } => Ok(*width),
            PulseSpec::DeltaKick { .. } => Ok(0.0),
            _ => {
                let peak = self.peak_magnitude();
                if peak == 0.0 {
                    return Err(Error::DegeneratePulse("pulse is identically zero".into()));
                }
                Ok(self.absolute_area(1.0) / peak)
            }
        }
    }

    /// `dV/dt`. Rectangle edges are non-differentiable; sampled pulses use a
    /// central difference of the interpolant.
    pub fn derivative_at(&self, t: f64) -> Result<Slope> {
        match self {
            PulseSpec::DeltaKick { .. } => Err(Error::NoPointwiseValue),
            PulseSpec::Rectangular { v0, t_start, width } => {
                if *v0 != 0.0 && (t == *t_start || t == t_start + width) {
                    Ok(Slope::NonDifferentiable)
                } else {
                    Ok(Slope::Finite(0.0))
                }
            }
            PulseSpec::Gaussian { t_center, sigma, .. } => {
                let v = self.value_unchecked(t);
                Ok(Slope::Finite(-(t - t_center) / (sigma * sigma) * v))
            }
            PulseSpec::Sampled { samples } => {
                let spacing = samples
                    .windows(2)
                    .map(|w| w[1].0 - w[0].0)
                    .fold(f64::INFINITY, f64::min);
                let h = 1e-6 * spacing;
                let d = (interpolate(samples, t + h) - interpolate(samples, t - h)) / (2.0 * h);
                Ok(Slope::Finite(d))
            }
        }
    }

    /// Centroid `int t V dt / int V dt`; the place an equivalent kick acts.
    pub fn centroid(&self) -> f64 {
        match self {
            PulseSpec::DeltaKick { t_k, .. } => *t_k,
            PulseSpec::Gaussian { t_center, .. } => *t_center,
            PulseSpec::Rectangular { t_start, width, .. } => t_start + 0.5 * width,
            PulseSpec::Sampled { samples } => {
                let area = sampled_integral(samples, f64::NEG_INFINITY, f64::INFINITY, |a, b, _| {
                    0.5 * (a + b)
                });
                let (lo, hi) = self.support();
                if area == 0.0 {
                    return 0.5 * (lo + hi);
                }
                // exact first moment of each linear segment
                let moment: f64 = samples
                    .windows(2)
                    .map(|w| {
                        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                        let h = t1 - t0;
                        h * (v0 * (2.0 * t0 + t1) + v1 * (t0 + 2.0 * t1)) / 6.0
                    })
                    .sum();
                moment / area
            }
        }
    }

    /// The kick with the same integrated strength, placed at the centroid.
    pub fn equivalent_kick(&self, hbar: f64) -> PulseSpec {
        PulseSpec::DeltaKick {
            alpha_k: self.integrated_strength(f64::NEG_INFINITY, f64::INFINITY, hbar),
            t_k: self.centroid().max(0.0),
        }
    }

    /// The same pulse with time stretched by `lambda` about `t = 0`.
    pub fn dilated(&self, lambda: f64) -> PulseSpec {
        match self {
            PulseSpec::Rectangular { v0, t_start, width } => PulseSpec::Rectangular {
                v0: *v0,
                t_start: t_start * lambda,
                width: width * lambda,
            },
            PulseSpec::Gaussian { v_peak, t_center, sigma } => PulseSpec::Gaussian {
                v_peak: *v_peak,
                t_center: t_center * lambda,
                sigma: sigma * lambda,
            },
            PulseSpec::DeltaKick { alpha_k, t_k } => {
                PulseSpec::DeltaKick { alpha_k: *alpha_k, t_k: t_k * lambda }
            }
            PulseSpec::Sampled { samples } => PulseSpec::Sampled {
                samples: samples.iter().map(|(t, v)| (t * lambda, *v)).collect(),
            },
        }
    }

    /// The same pulse with `V` multiplied by `k`.
    pub fn scaled(&self, k: f64) -> PulseSpec {
        match self {
            PulseSpec::Rectangular { v0, t_start, width } => PulseSpec::Rectangular {
                v0: v0 * k,
                t_start: *t_start,
                width: *width,
            },
            PulseSpec::Gaussian { v_peak, t_center, sigma } => PulseSpec::Gaussian {
                v_peak: v_peak * k,
                t_center: *t_center,
                sigma: *sigma,
            },
            PulseSpec::DeltaKick { alpha_k, t_k } => {
                PulseSpec::DeltaKick { alpha_k: alpha_k * k, t_k: *t_k }
            }
            PulseSpec::Sampled { samples } => PulseSpec::Sampled {
                samples: samples.iter().map(|(t, v)| (*t, v * k)).collect(),
            },
        }
    }

    fn clip(&self, t_from: f64, t_to: f64) -> (f64, f64) {
        let (on, off) = self.support();
        (t_from.max(on), t_to.min(off))
    }
}

fn interpolate(samples: &[(f64, f64)], t: f64) -> f64 {
    let (first, last) = (samples[0], samples[samples.len() - 1]);
    if t < first.0 || t > last.0 {
        return 0.0;
    }
    // first index with sample time > t
    let k = samples.partition_point(|s| s.0 <= t);
    if k == 0 {
        return first.1;
    }
    if k == samples.len() {
        return last.1;
    }
    let ((t0, v0), (t1, v1)) = (samples[k - 1], samples[k]);
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// Exact integral of the linear interpolant over `[t_from, t_to]`, given a
/// rule for the mean value of a linear segment with end values `(a, b)`.
fn sampled_integral(
    samples: &[(f64, f64)],
    t_from: f64,
    t_to: f64,
    mean: impl Fn(f64, f64, f64) -> f64,
) -> f64 {
    let mut total = 0.0;
    for w in samples.windows(2) {
        let (t0, t1) = (w[0].0.max(t_from), w[1].0.min(t_to));
        if t1 <= t0 {
            continue;
        }
        let (a, b) = (interpolate(samples, t0), interpolate(samples, t1));
        total += mean(a, b, t1 - t0) * (t1 - t0);
    }
    total
}

/// Mean of `|v|` for `v` linear from `a` to `b`.
fn abs_trapezoid(a: f64, b: f64, _h: f64) -> f64 {
    if a * b >= 0.0 {
        0.5 * (a.abs() + b.abs())
    } else {
        0.5 * (a * a + b * b) / (a.abs() + b.abs())
    }
}
