//! Map coordinates, regime classification and the empirical regime atlas.
//!
//! A pulse is placed on the map at `x = int V dt / hbar` (field phase) and
//! `y = dE tau / 2 hbar` (splitting phase). "Much less than" is a
//! configurable ratio, 0.1 by default.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::refine_final;
use crate::pulse::{PulseSpec, Slope};
use crate::qubit::{SystemParams, Unitary2};
use crate::regimes::{closed_form, RegimeKind};

pub const DEFAULT_RATIO: f64 = 0.1;

/// Samples per support window when scanning the adiabaticity ratio.
const ADIABATIC_SCAN_POINTS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapCoordinates {
    /// Field phase `int V dt / hbar` over the whole pulse.
    pub x: f64,
    /// Splitting phase `dE tau / 2 hbar`.
    pub y: f64,
}

pub fn map_coordinates(params: &SystemParams, pulse: &PulseSpec) -> Result<MapCoordinates> {
    let x = pulse.integrated_strength(f64::NEG_INFINITY, f64::INFINITY, params.hbar);
    let tau = pulse.duration_tau()?;
    Ok(MapCoordinates { x, y: params.delta_e * tau / (2.0 * params.hbar) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeMargin {
    pub regime: RegimeKind,
    /// Distance from the validity threshold as a ratio; the regime applies
    /// iff this is below 1. Serialized as `null` when infinite.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub coords: MapCoordinates,
    pub ratio: f64,
    pub applicable: Vec<RegimeMargin>,
    /// Margins of every regime, applicable or not.
    pub margins: Vec<RegimeMargin>,
    /// Worst pointwise adiabaticity ratio over the pulse.
    pub adiabatic_pointwise: f64,
    pub central: bool,
    pub notes: Vec<String>,
}

impl RegimeReport {
    pub fn applies(&self, kind: RegimeKind) -> bool {
        self.applicable.iter().any(|m| m.regime == kind)
    }

    pub fn margin(&self, kind: RegimeKind) -> f64 {
        self.margins
            .iter()
            .find(|m| m.regime == kind)
            .map(|m| m.margin)
            .unwrap_or(f64::INFINITY)
    }

    pub fn applicable_kinds(&self) -> Vec<RegimeKind> {
        self.applicable.iter().map(|m| m.regime).collect()
    }
}

/// `hbar |dV/dt| dE / (V^2 + (dE/2)^2)^{3/2}`; infinite where `V` jumps or
/// for a kick.
pub fn adiabaticity_ratio(params: &SystemParams, pulse: &PulseSpec, t: f64) -> f64 {
    let slope = match pulse.derivative_at(t) {
        Ok(Slope::Finite(d)) => d,
        Ok(Slope::NonDifferentiable) | Err(_) => return f64::INFINITY,
    };
    let numerator = params.hbar * slope.abs() * params.delta_e;
    if numerator == 0.0 {
        return 0.0;
    }
    let v = pulse.value_unchecked(t);
    numerator / (v * v + 0.25 * params.delta_e * params.delta_e).powf(1.5)
}

/// Worst adiabaticity ratio over a dense scan of the pulse support.
pub fn max_adiabaticity_ratio(params: &SystemParams, pulse: &PulseSpec) -> f64 {
    match pulse {
        PulseSpec::DeltaKick { .. } => f64::INFINITY,
        PulseSpec::Rectangular { v0, .. } if *v0 != 0.0 => f64::INFINITY,
        PulseSpec::Rectangular { .. } => 0.0,
        _ => {
            let (on, off) = pulse.support();
            let n = ADIABATIC_SCAN_POINTS;
            (0..=n)
                .map(|i| adiabaticity_ratio(params, pulse, on + (off - on) * i as f64 / n as f64))
                .fold(0.0, f64::max)
        }
    }
}

fn quotient(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Place the pulse on the map and decide which closed forms apply.
pub fn classify(params: &SystemParams, pulse: &PulseSpec, ratio: f64) -> Result<RegimeReport> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParams(format!("classification ratio must be in (0, 1), got {ratio}")));
    }
    let coords = map_coordinates(params, pulse)?;
    let (ax, y) = (coords.x.abs(), coords.y);
    let two_pi = 2.0 * PI;
    let mut notes = Vec::new();

    let adiabatic_pointwise = max_adiabaticity_ratio(params, pulse);
    match pulse {
        PulseSpec::Rectangular { .. } => notes.push("adiabatic: non-differentiable edges".to_string()),
        PulseSpec::DeltaKick { .. } => notes.push("adiabatic: delta kick has no pointwise derivative".to_string()),
        _ => {}
    }
    let adiabatic = if matches!(pulse, PulseSpec::Rectangular { .. }) {
        f64::INFINITY
    } else {
        adiabatic_pointwise / ratio
    };

    let margins: Vec<RegimeMargin> = RegimeKind::ALL
        .into_iter()
        .map(|regime| {
            let margin = match regime {
                RegimeKind::Perturbative => ax / (ratio * two_pi),
                RegimeKind::Kicked => y / (ratio * two_pi),
                RegimeKind::Degenerate => {
                    quotient(y, ratio * ax).max(quotient(y * y, ratio * ax))
                }
                RegimeKind::DegenerateExtended => quotient(y, ax),
                RegimeKind::Adiabatic => adiabatic,
                RegimeKind::ZeroPotential => {
                    if coords.x == 0.0 { 0.0 } else { f64::INFINITY }
                }
            };
            RegimeMargin { regime, margin }
        })
        .collect();

    let applicable: Vec<RegimeMargin> = margins.iter().copied().filter(|m| m.margin < 1.0).collect();
    for m in &margins {
        if m.margin >= 0.5 && m.margin < 2.0 {
            notes.push(format!("{}: near boundary (margin {:.3})", m.regime, m.margin));
        }
    }
    let band = |v: f64| v >= ratio * two_pi && v <= two_pi / ratio;
    let central = applicable.is_empty() && band(ax) && band(y);
    if central {
        notes.push("central region: no closed form applies".to_string());
    }
    Ok(RegimeReport { coords, ratio, applicable, margins, adiabatic_pointwise, central, notes })
}

/// Pulse shape used to reach each atlas cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseFamily {
    #[default]
    Gaussian,
    Rectangular,
    /// Kicks always sit at `y = 0`; the y axis is ignored.
    Kick,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtlasSpec {
    /// x range in units of 2 pi.
    pub x_range: [f64; 2],
    /// y range in units of 2 pi.
    pub y_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub family: PulseFamily,
    pub delta_e: f64,
    pub hbar: f64,
    pub ratio: f64,
    /// Refinement target for the numerical reference.
    pub target_tol: f64,
    /// Starting steps per characteristic time.
    pub step_count: usize,
}

impl Default for AtlasSpec {
    fn default() -> Self {
        AtlasSpec {
            x_range: [1e-2, 1e2],
            y_range: [1e-2, 1e2],
            nx: 48,
            ny: 48,
            family: PulseFamily::Gaussian,
            delta_e: 1.0,
            hbar: 1.0,
            ratio: DEFAULT_RATIO,
            target_tol: 1e-8,
            step_count: 64,
        }
    }
}

impl AtlasSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for (name, r) in [("x_range", self.x_range), ("y_range", self.y_range)] {
            if !(r[0] >= 1e-3 && r[1] <= 1e3 && r[0] <= r[1]) {
                return bad(format!("{name} must lie within [1e-3, 1e3] (units of 2 pi), got {r:?}"));
            }
        }
        if self.nx == 0 || self.ny == 0 {
            return bad("grid dimensions must be positive".into());
        }
        if !(self.delta_e > 0.0 && self.delta_e.is_finite()) {
            return bad("atlas needs delta_e > 0".into());
        }
        SystemParams::new(self.delta_e, self.hbar)?;
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return bad(format!("ratio must be in (0, 1), got {}", self.ratio));
        }
        if !(self.target_tol >= 1e-13 && self.target_tol <= 1e-4) {
            return bad(format!("target_tol must be in [1e-13, 1e-4], got {}", self.target_tol));
        }
        if self.step_count < crate::propagator::MIN_STEP_COUNT {
            return bad("step_count must be >= 16".into());
        }
        Ok(())
    }

    pub fn params(&self) -> SystemParams {
        SystemParams { delta_e: self.delta_e, hbar: self.hbar }
    }

    pub fn x_axis(&self) -> Vec<f64> {
        log_axis(self.x_range, self.nx)
    }

    pub fn y_axis(&self) -> Vec<f64> {
        log_axis(self.y_range, self.ny)
    }

    /// Pulse landing on `(x, y)` and the time at which it is evaluated: the
    /// end of the support plus one free period `2 pi hbar / dE`.
    pub fn cell_pulse(&self, x: f64, y: f64) -> Result<(PulseSpec, f64)> {
        let period = 2.0 * PI * self.hbar / self.delta_e;
        let tau = 2.0 * y * self.hbar / self.delta_e;
        match self.family {
            PulseFamily::Gaussian => {
                let sigma = tau / (2.0 * PI).sqrt();
                let centre = crate::pulse::GAUSSIAN_CUTOFF_SIGMAS * sigma;
                let p = PulseSpec::gaussian_with_area(x, tau, centre, self.hbar)?;
                Ok((p, 2.0 * centre + period))
            }
            PulseFamily::Rectangular => {
                let start = 0.5 * tau;
                let p = PulseSpec::rectangular(x * self.hbar / tau, start, tau)?;
                Ok((p, start + tau + period))
            }
            PulseFamily::Kick => {
                let t_k = 0.5 * period;
                Ok((PulseSpec::kick(x, t_k)?, t_k + period))
            }
        }
    }
}

/// `n` points log-spaced over `range` (units of 2 pi), returned in absolute
/// units.
pub fn log_axis(range: [f64; 2], n: usize) -> Vec<f64> {
    let (lo, hi) = (range[0].ln(), range[1].ln());
    (0..n)
        .map(|i| {
            let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            2.0 * PI * (lo + (hi - lo) * f).exp()
        })
        .collect()
}

/// Errors of every closed form at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellErrors {
    /// `None` when the numerical reference could not be refined.
    pub numerical_estimate: Option<f64>,
    /// Frobenius distance to the numerical propagator, in `RegimeKind::ALL`
    /// order; NaN where unavailable.
    pub matrix_errors: [f64; 6],
    /// `|P2(closed) - P2(numerical)|` from state 1.
    pub transfer_errors: [f64; 6],
}

impl CellErrors {
    pub fn is_valid(&self) -> bool {
        self.numerical_estimate.is_some()
    }

    pub fn matrix_error(&self, kind: RegimeKind) -> f64 {
        self.matrix_errors[regime_index(kind)]
    }

    pub fn transfer_error(&self, kind: RegimeKind) -> f64 {
        self.transfer_errors[regime_index(kind)]
    }

    /// Smallest finite matrix error over all closed forms.
    pub fn best_error(&self) -> f64 {
        self.matrix_errors.iter().copied().filter(|e| e.is_finite()).fold(f64::INFINITY, f64::min)
    }
}

pub fn regime_index(kind: RegimeKind) -> usize {
    RegimeKind::ALL.iter().position(|k| *k == kind).expect("ALL is exhaustive")
}

/// Compare every closed form against a refined numerical propagator at
/// `t_eval`.
pub fn evaluate_cell(
    params: &SystemParams,
    pulse: &PulseSpec,
    t_eval: f64,
    target_tol: f64,
    step_count: usize,
) -> CellErrors {
    let nan = [f64::NAN; 6];
    let reference = match refine_final(params, pulse, t_eval, target_tol, step_count) {
        Ok(r) => r,
        Err(_) => {
            return CellErrors { numerical_estimate: None, matrix_errors: nan, transfer_errors: nan };
        }
    };
    let exact: Unitary2 = reference.propagator;
    let mut matrix_errors = nan;
    let mut transfer_errors = nan;
    for (i, kind) in RegimeKind::ALL.into_iter().enumerate() {
        if let Ok(u) = closed_form(kind, params, pulse, t_eval) {
            matrix_errors[i] = u.distance(&exact);
            transfer_errors[i] = (u.u21.norm_sqr() - exact.u21.norm_sqr()).abs();
        }
    }
    CellErrors { numerical_estimate: Some(reference.error_estimate), matrix_errors, transfer_errors }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtlasGrid {
    pub x_axis: Vec<f64>,
    pub y_axis: Vec<f64>,
    /// `cells[iy][ix]`.
    pub cells: Vec<Vec<CellErrors>>,
}

impl AtlasGrid {
    pub fn invalid_count(&self) -> usize {
        self.cells.iter().flatten().filter(|c| !c.is_valid()).count()
    }

    /// `(x, y, cell)` in row-major order (y outer).
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, &CellErrors)> {
        self.cells.iter().zip(&self.y_axis).flat_map(move |(row, &y)| {
            row.iter().zip(&self.x_axis).map(move |(c, &x)| (x, y, c))
        })
    }

    /// Matrix errors of one regime as `[iy][ix]`.
    pub fn matrix_error_field(&self, kind: RegimeKind) -> Vec<Vec<f64>> {
        self.cells.iter().map(|row| row.iter().map(|c| c.matrix_error(kind)).collect()).collect()
    }
}

/// Evaluate every cell of the grid, fanning cells out over `jobs` workers.
pub fn build_atlas(spec: &AtlasSpec, jobs: usize) -> Result<AtlasGrid> {
    spec.validate()?;
    let params = spec.params();
    let (x_axis, y_axis) = (spec.x_axis(), spec.y_axis());
    let points: Vec<(f64, f64)> =
        y_axis.iter().flat_map(|&y| x_axis.iter().map(move |&x| (x, y))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let flat: Vec<CellErrors> = pool.install(|| {
        points
            .par_iter()
            .map(|&(x, y)| {
                let (pulse, t_eval) = spec.cell_pulse(x, y)?;
                Ok(evaluate_cell(&params, &pulse, t_eval, spec.target_tol, spec.step_count))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let cells = flat.chunks(spec.nx).map(|r| r.to_vec()).collect();
    Ok(AtlasGrid { x_axis, y_axis, cells })
}
