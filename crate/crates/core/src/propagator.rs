//! Time-ordered evolution operator by products of exact per-step
//! exponentials.
//!
//! Each step of width `h` contributes `exp(-i H(t_mid) h / hbar)`, evaluated
//! in closed form through the Pauli decomposition of `H`. Later steps
//! multiply from the left, so earlier Hamiltonians act first. Steps are
//! aligned to the pulse breakpoints, and delta kicks are applied as the exact
//! jump `exp(-i alpha_k sx)` between two free segments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::PulseSpec;
use crate::qubit::{Complex2State, SystemParams, Unitary2, UNITARITY_TOL};

/// Upper bound on the total step count reached by refinement.
pub const MAX_REFINED_STEPS: usize = 1 << 22;
/// Smallest step count per characteristic time.
pub const MIN_STEP_COUNT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationSettings {
    /// Steps per characteristic time (see [`characteristic_time`]).
    pub step_count: usize,
    /// Target Frobenius error of the final propagator.
    pub tolerance: f64,
    /// Keep every `record_stride`-th step in the time series.
    pub record_stride: usize,
}

impl Default for PropagationSettings {
    fn default() -> Self {
        PropagationSettings { step_count: 64, tolerance: 1e-10, record_stride: 1 }
    }
}

impl PropagationSettings {
    pub fn validate(&self) -> Result<()> {
        if self.step_count < MIN_STEP_COUNT {
            return Err(Error::InvalidParams(format!(
                "step_count must be >= {MIN_STEP_COUNT}, got {}",
                self.step_count
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-4) {
            return Err(Error::InvalidParams(format!(
                "tolerance must be in (0, 1e-4], got {}",
                self.tolerance
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParams("record_stride must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    pub propagators: Vec<Unitary2>,
    pub states: Option<Vec<Complex2State>>,
    /// Total number of midpoint steps taken.
    pub steps: usize,
}

impl EvolutionRecord {
    pub fn final_propagator(&self) -> Unitary2 {
        *self.propagators.last().expect("record always holds U(0)")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("record always holds t = 0")
    }

    pub fn final_state(&self) -> Option<Complex2State> {
        self.states.as_ref().and_then(|s| s.last().copied())
    }
}

/// Outcome of step-doubling refinement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Refined {
    pub propagator: Unitary2,
    /// Frobenius distance between the last two refinement levels.
    pub error_estimate: f64,
    /// Step count per characteristic time of the accepted level.
    pub step_count: usize,
    pub steps: usize,
}

/// Time scale that the default step count resolves:
/// `min(tau, 2 pi hbar / max(dE, hbar / tau))`, falling back to the free
/// precession period (or the whole interval) when the pulse has no width.
pub fn characteristic_time(params: &SystemParams, pulse: &PulseSpec, span: f64) -> f64 {
    let two_pi_hbar = 2.0 * std::f64::consts::PI * params.hbar;
    let tau = pulse.duration_tau().unwrap_or(0.0);
    let t = if tau > 0.0 {
        tau.min(two_pi_hbar / params.delta_e.max(params.hbar / tau))
    } else if params.delta_e > 0.0 {
        two_pi_hbar / params.delta_e
    } else {
        span
    };
    t.min(span)
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    t0: f64,
    t1: f64,
    n: usize,
}

struct Grid {
    segments: Vec<Segment>,
    kick: Option<(f64, f64)>,
}

impl Grid {
    fn new(
        params: &SystemParams,
        pulse: &PulseSpec,
        t_from: f64,
        t_to: f64,
        step_count: usize,
        collapse_constant: bool,
    ) -> Grid {
        let span = t_to - t_from;
        let dt = characteristic_time(params, pulse, span) / step_count as f64;
        let mut cuts = vec![t_from];
        cuts.extend(pulse.breakpoints().into_iter().filter(|&b| b > t_from && b < t_to));
        cuts.push(t_to);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let segments = cuts
            .windows(2)
            .map(|w| Segment {
                t0: w[0],
                t1: w[1],
                // a constant Hamiltonian is integrated exactly by one step
                n: if collapse_constant && pulse.is_constant_on(w[0], w[1]) {
                    1
                } else {
                    (((w[1] - w[0]) / dt).ceil() as usize).max(1)
                },
            })
            .collect();
        let kick = match pulse {
            PulseSpec::DeltaKick { alpha_k, t_k } if *t_k >= t_from && *t_k < t_to => {
                Some((*t_k, *alpha_k))
            }
            _ => None,
        };
        Grid { segments, kick }
    }

    fn total_steps(&self) -> usize {
        self.segments.iter().map(|s| s.n).sum()
    }
}

/// `exp(-i (-(dE/2) sz + v sx) h / hbar)`.
#[inline]
fn step_matrix(params: &SystemParams, v: f64, h: f64) -> Unitary2 {
    let k = h / params.hbar;
    Unitary2::exp_i_pauli(0.0, [-v * k, 0.0, 0.5 * params.delta_e * k])
}

/// The exact kick jump `exp(-i alpha_k sx)`.
pub fn kick_matrix(alpha_k: f64) -> Unitary2 {
    Unitary2::exp_i_pauli(0.0, [-alpha_k, 0.0, 0.0])
}

/// Nearest matrix of the form `[[a, -conj b], [b, conj a]]` with
/// `|a|^2 + |b|^2 = 1`. Every factor of the product has this form exactly,
/// so this removes only accumulated rounding.
fn project_su2(u: &Unitary2) -> Unitary2 {
    let a = 0.5 * (u.u11 + u.u22.conj());
    let b = 0.5 * (u.u21 - u.u12.conj());
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / n, b / n);
    Unitary2::new(a, -b.conj(), b, a.conj())
}

/// Walk the grid, calling `visit(step_index, t, U)` after every
/// `stride`-th step and after the last one.
///
/// Steps are multiplied into blocks of about `sqrt(N)` factors and the
/// blocks are then chained, so rounding grows with `sqrt(N)` rather than
/// with `N`. Each block product is re-projected onto SU(2).
fn march(
    params: &SystemParams,
    pulse: &PulseSpec,
    grid: &Grid,
    stride: usize,
    mut visit: impl FnMut(usize, f64, &Unitary2),
) -> Unitary2 {
    let total = grid.total_steps();
    let block = ((total as f64).sqrt().ceil() as usize).max(16);
    let mut done = Unitary2::IDENTITY;
    let mut local = Unitary2::IDENTITY;
    let mut in_block = 0;
    let mut index = 0;
    for seg in &grid.segments {
        if let Some((t_k, alpha_k)) = grid.kick {
            if t_k == seg.t0 {
                local = kick_matrix(alpha_k) * local;
            }
        }
        let h = (seg.t1 - seg.t0) / seg.n as f64;
        for j in 0..seg.n {
            let t_mid = seg.t0 + (j as f64 + 0.5) * h;
            local = step_matrix(params, pulse.value_unchecked(t_mid), h) * local;
            index += 1;
            in_block += 1;
            if in_block == block {
                done = project_su2(&(local * done));
                local = Unitary2::IDENTITY;
                in_block = 0;
            }
            if index % stride == 0 || index == total {
                let t = if j + 1 == seg.n { seg.t1 } else { seg.t0 + (j + 1) as f64 * h };
                visit(index, t, &(local * done));
            }
        }
    }
    project_su2(&(local * done))
}

fn check_inputs(params: &SystemParams, pulse: &PulseSpec, t_from: f64, t_to: f64) -> Result<()> {
    params.validate()?;
    pulse.validate()?;
    if !(t_to > t_from) || !t_to.is_finite() || !t_from.is_finite() {
        return Err(Error::InvalidParams(format!(
            "propagation interval must be finite and non-empty, got [{t_from}, {t_to}]"
        )));
    }
    Ok(())
}

fn check_unitary(u: &Unitary2) -> Result<()> {
    let defect = u.unitarity_defect();
    if !u.is_finite() || !(defect < UNITARITY_TOL) {
        return Err(Error::PropagationDiverged { defect });
    }
    Ok(())
}

/// `U(t_to, t_from)` at a fixed step count per characteristic time.
pub fn propagate_interval(
    params: &SystemParams,
    pulse: &PulseSpec,
    t_from: f64,
    t_to: f64,
    step_count: usize,
) -> Result<Unitary2> {
    check_inputs(params, pulse, t_from, t_to)?;
    let grid = Grid::new(params, pulse, t_from, t_to, step_count.max(1), true);
    let u = march(params, pulse, &grid, usize::MAX, |_, _, _| {});
    check_unitary(&u)?;
    Ok(u)
}

/// `U(t)` on `[0, t_final]` at the settings' step count, recording every
/// `record_stride`-th step and always the final time.
pub fn propagate(
    params: &SystemParams,
    pulse: &PulseSpec,
    t_final: f64,
    settings: &PropagationSettings,
    initial: Option<&Complex2State>,
) -> Result<EvolutionRecord> {
    settings.validate()?;
    check_inputs(params, pulse, 0.0, t_final)?;
    if let Some(s) = initial {
        s.validate()?;
    }
    let grid = Grid::new(params, pulse, 0.0, t_final, settings.step_count, false);
    let total = grid.total_steps();
    let stride = settings.record_stride;
    let mut times = vec![0.0];
    let mut propagators = vec![Unitary2::IDENTITY];
    march(params, pulse, &grid, stride, |_, t, u| {
        times.push(t);
        propagators.push(*u);
    });
    check_unitary(propagators.last().unwrap())?;
    let states = initial.map(|s| propagators.iter().map(|u| u.mul_state(s)).collect());
    Ok(EvolutionRecord { times, propagators, states, steps: total })
}

/// Step doubling on the final propagator only, starting from `step_count`
/// steps per characteristic time.
pub fn refine_final(
    params: &SystemParams,
    pulse: &PulseSpec,
    t_final: f64,
    target_tol: f64,
    step_count: usize,
) -> Result<Refined> {
    check_inputs(params, pulse, 0.0, t_final)?;
    check_target(target_tol)?;
    let mut n = step_count.max(MIN_STEP_COUNT);
    let coarse_grid = Grid::new(params, pulse, 0.0, t_final, n, true);
    let mut coarse = march(params, pulse, &coarse_grid, usize::MAX, |_, _, _| {});
    let mut estimate = f64::INFINITY;
    loop {
        let fine_grid = Grid::new(params, pulse, 0.0, t_final, 2 * n, true);
        let steps = fine_grid.total_steps();
        if steps > MAX_REFINED_STEPS {
            return Err(Error::RefinementExhausted { steps, estimate });
        }
        let fine = march(params, pulse, &fine_grid, usize::MAX, |_, _, _| {});
        check_unitary(&fine)?;
        estimate = fine.distance(&coarse);
        if estimate < target_tol {
            return Ok(Refined { propagator: fine, error_estimate: estimate, step_count: 2 * n, steps });
        }
        coarse = fine;
        n *= 2;
    }
}

/// Refine until successive step doublings agree to `target_tol`, then
/// return the finer record along with the achieved estimate.
pub fn refine_to_tolerance(
    params: &SystemParams,
    pulse: &PulseSpec,
    t_final: f64,
    target_tol: f64,
    settings: &PropagationSettings,
    initial: Option<&Complex2State>,
) -> Result<(EvolutionRecord, f64)> {
    settings.validate()?;
    let refined = refine_final(params, pulse, t_final, target_tol, settings.step_count)?;
    let at_level = PropagationSettings { step_count: refined.step_count, ..*settings };
    let record = propagate(params, pulse, t_final, &at_level, initial)?;
    Ok((record, refined.error_estimate))
}

fn check_target(target_tol: f64) -> Result<()> {
    if !(target_tol >= 1e-13) {
        return Err(Error::InvalidParams(format!(
            "target tolerance must be >= 1e-13, got {target_tol}"
        )));
    }
    Ok(())
}
