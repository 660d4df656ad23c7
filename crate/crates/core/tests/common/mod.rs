#![allow(dead_code)]

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use pulsed_qubit::{PulseSpec, SystemParams, Unitary2};

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Fixed-step classical RK4 on `i hbar dU/dt = H(t) U`. Independent of the
/// library integrator; only meant for smooth pulses.
pub fn rk4_propagator(params: &SystemParams, pulse: &PulseSpec, t_final: f64, n: usize) -> Unitary2 {
    let rhs = |t: f64, u: &Unitary2| {
        let h = params.hamiltonian(pulse.value_at(t).unwrap());
        (h * *u).scale(-I / params.hbar)
    };
    let dt = t_final / n as f64;
    let mut u = Unitary2::IDENTITY;
    for k in 0..n {
        let t = k as f64 * dt;
        let k1 = rhs(t, &u);
        let k2 = rhs(t + 0.5 * dt, &(u + k1.scale((0.5 * dt).into())));
        let k3 = rhs(t + 0.5 * dt, &(u + k2.scale((0.5 * dt).into())));
        let k4 = rhs(t + dt, &(u + k3.scale(dt.into())));
        let sum = k1 + k2.scale(2.0.into()) + k3.scale(2.0.into()) + k4;
        u = u + sum.scale((dt / 6.0).into());
    }
    u
}

/// `exp(-i H t / hbar)` for the constant Hamiltonian with field `v`:
/// `cos(W t) I - i sin(W t) H / (hbar W)`, `W = sqrt(v^2 + dE^2/4) / hbar`.
pub fn constant_field_propagator(params: &SystemParams, v: f64, t: f64) -> Unitary2 {
    let omega = (v * v + 0.25 * params.delta_e * params.delta_e).sqrt();
    if omega == 0.0 {
        return Unitary2::IDENTITY;
    }
    let phase = omega * t / params.hbar;
    let h = params.hamiltonian(v);
    Unitary2::IDENTITY.scale(phase.cos().into()) - h.scale(I * (phase.sin() / omega))
}

/// Equivalent width of a Gaussian, `int |V| / max |V| = sigma sqrt(2 pi)`.
pub fn gaussian_tau(sigma: f64) -> f64 {
    sigma * (2.0 * std::f64::consts::PI).sqrt()
}

pub fn nonzero(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

pub fn gaussian_strategy() -> impl Strategy<Value = PulseSpec> {
    (nonzero(0.05, 2.0), 0.0..15.0f64, 0.2..3.0f64)
        .prop_map(|(v, c, s)| PulseSpec::gaussian(v, c, s).unwrap())
}

pub fn rectangular_strategy() -> impl Strategy<Value = PulseSpec> {
    (nonzero(0.05, 2.0), 0.0..10.0f64, 0.1..5.0f64)
        .prop_map(|(v, t0, w)| PulseSpec::rectangular(v, t0, w).unwrap())
}

pub fn kick_strategy() -> impl Strategy<Value = PulseSpec> {
    (nonzero(0.01, 3.0), 0.0..15.0f64).prop_map(|(a, t)| PulseSpec::kick(a, t).unwrap())
}

pub fn sampled_strategy() -> impl Strategy<Value = PulseSpec> {
    (0.0..5.0f64, prop::collection::vec((0.1..2.0f64, -1.5..1.5f64), 2..8)).prop_map(|(t0, steps)| {
        let mut t = t0;
        let mut samples = vec![(t, 0.0)];
        for (gap, v) in steps {
            t += gap;
            samples.push((t, v));
        }
        PulseSpec::sampled(samples).unwrap()
    })
}

pub fn finite_pulse_strategy() -> impl Strategy<Value = PulseSpec> {
    prop_oneof![gaussian_strategy(), rectangular_strategy(), sampled_strategy()]
}

pub fn any_pulse_strategy() -> impl Strategy<Value = PulseSpec> {
    prop_oneof![gaussian_strategy(), rectangular_strategy(), sampled_strategy(), kick_strategy()]
}
