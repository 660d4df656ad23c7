//! Library results against independent computations written here: erf
//! integrals, the constant-field Rabi formula, an RK4 integrator and
//! hand-evaluated formulas.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use libm::erf;

use common::*;
use pulsed_qubit::harness::{compare, RunConfig};
use pulsed_qubit::map::{adiabaticity_ratio, classify, map_coordinates};
use pulsed_qubit::propagator::{propagate, propagate_interval, refine_final};
use pulsed_qubit::regimes::{
    degenerate_extended_u, degenerate_u, kick_convergence_study, kicked_u, perturbative_u, population_transfer,
};
use pulsed_qubit::{Complex2State, PropagationSettings, PulseSpec, RegimeKind, SystemParams};

/// `int_a^b v exp(-(t - c)^2 / 2 s^2) dt` with the support cut at 8 sigma.
fn gaussian_integral(v: f64, c: f64, s: f64, a: f64, b: f64) -> f64 {
    let (a, b) = (a.max(c - 8.0 * s), b.min(c + 8.0 * s));
    if b <= a {
        return 0.0;
    }
    let z = |t: f64| (t - c) / (s * SQRT_2);
    v * s * (PI / 2.0).sqrt() * (erf(z(b)) - erf(z(a)))
}

#[test]
fn gaussian_strength_matches_erf() {
    let cases = [
        (1.0, 0.0, 1.0, f64::NEG_INFINITY, f64::INFINITY),
        (0.7, 3.0, 0.5, 2.0, 3.5),
        (-2.0, 10.0, 2.5, 0.0, 9.0),
        (0.3, 1.0, 0.1, 0.95, 40.0),
    ];
    for (v, c, s, a, b) in cases {
        let p = PulseSpec::gaussian(v, c, s).unwrap();
        let want = gaussian_integral(v, c, s, a, b);
        let got = p.integrated_strength(a, b, 1.0);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    let unit = PulseSpec::gaussian(1.0, 0.0, 1.0).unwrap().integrated_strength(f64::NEG_INFINITY, f64::INFINITY, 1.0);
    assert!((unit - (2.0 * PI).sqrt()).abs() < 1e-12);
}

#[test]
fn gaussian_equivalent_width() {
    for s in [0.3, 1.0, 4.0] {
        let tau = PulseSpec::gaussian(1.0, 2.0, s).unwrap().duration_tau().unwrap();
        assert!((tau - gaussian_tau(s)).abs() < 1e-12 * gaussian_tau(s));
    }
}

#[test]
fn gaussian_slope_at_one_sigma() {
    let p = PulseSpec::gaussian(1.0, 0.0, 1.0).unwrap();
    let d = p.derivative_at(1.0).unwrap().finite().unwrap();
    let h = 1e-6;
    let fd = (p.value_at(1.0 + h).unwrap() - p.value_at(1.0 - h).unwrap()) / (2.0 * h);
    assert!((d + (-0.5f64).exp()).abs() < 1e-15);
    assert!((fd - d).abs() < 1e-9);
}

#[test]
fn rectangular_pulse_matches_rabi_formula() {
    // Half transfer: P2 = (V/W)^2 sin^2(W t) = 1/2 with W = sqrt(2).
    let params = SystemParams::natural(2.0).unwrap();
    let t = PI / (2.0 * SQRT_2);
    let pulse = PulseSpec::rectangular(1.0, 0.0, t).unwrap();
    let u = refine_final(&params, &pulse, t, 1e-12, 64).unwrap().propagator;
    assert!((u.u21.norm_sqr() - 0.5).abs() < 1e-12);
    assert!(u.distance(&constant_field_propagator(&params, 1.0, t)) < 1e-12);

    for (v, de, w) in [(0.3, 1.0, 4.0), (-1.2, 0.4, 2.5), (2.0, 3.0, 0.7)] {
        let params = SystemParams::natural(de).unwrap();
        let pulse = PulseSpec::rectangular(v, 0.0, w).unwrap();
        let u = refine_final(&params, &pulse, w, 1e-12, 64).unwrap().propagator;
        assert!(u.distance(&constant_field_propagator(&params, v, w)) < 1e-12);
    }
}

#[test]
fn aligned_rectangle_is_exact_at_any_step_count() {
    // Piecewise-constant H with steps on the edges: every step exponential
    // is exact, so refinement changes nothing beyond rounding.
    let params = SystemParams::natural(1.0).unwrap();
    let pulse = PulseSpec::rectangular(0.8, 1.0, 2.0).unwrap();
    let exact = constant_field_propagator(&params, 0.0, 1.0)
        * constant_field_propagator(&params, 0.8, 2.0)
        * constant_field_propagator(&params, 0.0, 1.0);
    for n in [1, 2, 16, 64, 256] {
        let u = propagate_interval(&params, &pulse, 0.0, 4.0, n).unwrap();
        assert!(u.distance(&exact) < 1e-13, "n = {n}");
    }
}

#[test]
fn gaussian_propagation_matches_rk4() {
    let params = SystemParams::natural(1.3).unwrap();
    let pulse = PulseSpec::gaussian(0.9, 6.0, 1.5).unwrap();
    let t = 14.0;
    let rk4 = rk4_propagator(&params, &pulse, t, 200_000);
    let refined = refine_final(&params, &pulse, t, 1e-11, 64).unwrap();
    assert!(refined.error_estimate < 1e-11);
    assert!(refined.propagator.distance(&rk4) < 1e-9);
}

#[test]
fn refinement_estimate_meets_target() {
    let params = SystemParams::natural(1.0).unwrap();
    let pulse = PulseSpec::gaussian(0.5, 5.0, 1.0).unwrap();
    let r = refine_final(&params, &pulse, 12.0, 1e-10, 64).unwrap();
    assert!(r.error_estimate < 1e-10);
    let rk4 = rk4_propagator(&params, &pulse, 12.0, 100_000);
    assert!(r.propagator.distance(&rk4) < 1e-9);
}

#[test]
fn degenerate_form_matches_numerical_at_zero_splitting() {
    let params = SystemParams::natural(0.0).unwrap();
    let pulse = PulseSpec::gaussian_with_area(FRAC_PI_4, 2.0, 6.0, 1.0).unwrap();
    let t = 12.0;
    let num = refine_final(&params, &pulse, t, 1e-11, 64).unwrap().propagator;
    assert!(degenerate_u(&pulse, t, 1.0).distance(&num) < 1e-9);
    // cos / sin of pi / 4 by hand
    assert!((degenerate_u(&pulse, t, 1.0).u21.im + FRAC_PI_4.sin()).abs() < 1e-12);
}

#[test]
fn extended_beats_plain_degenerate_for_strong_short_pulse() {
    let params = SystemParams::natural(0.5).unwrap();
    let pulse = PulseSpec::rectangular(5.0, 0.0, 1.0).unwrap();
    let t = 1.0;
    let num = refine_final(&params, &pulse, t, 1e-12, 64).unwrap().propagator;
    let p_num = population_transfer(&num, 1).unwrap().1;
    let plain = population_transfer(&degenerate_u(&pulse, t, 1.0), 1).unwrap().1;
    let extended = population_transfer(&degenerate_extended_u(&params, &pulse, t), 1).unwrap().1;
    assert!((extended - p_num).abs() < (plain - p_num).abs());
}

#[test]
fn perturbative_error_is_second_order_in_area() {
    let params = SystemParams::natural(1.0).unwrap();
    let pulse = PulseSpec::gaussian_with_area(0.01, 2.0, 8.0, 1.0).unwrap();
    let t = 16.0;
    let num = refine_final(&params, &pulse, t, 1e-12, 64).unwrap().propagator;
    let err = perturbative_u(&params, &pulse, t).distance(&num);
    assert!(err < 1e-4, "{err}");
}

#[test]
fn slow_gaussian_returns_to_start() {
    // adiabaticity ratio below 0.01 everywhere, 100 times under the threshold
    let params = SystemParams::natural(1.0).unwrap();
    let pulse = PulseSpec::gaussian(1.0, 2000.0, 250.0).unwrap();
    assert!(classify(&params, &pulse, 0.1).unwrap().adiabatic_pointwise < 1e-2);
    let settings = PropagationSettings { record_stride: 1 << 20, ..Default::default() };
    let rec = propagate(&params, &pulse, 4000.0, &settings, Some(&Complex2State::upper())).unwrap();
    let (p1, p2) = rec.final_state().unwrap().populations();
    assert!((p2 - 1.0).abs() < 1e-3 && p1 < 1e-3);
}

#[test]
fn kicked_matches_numerical_kick() {
    let params = SystemParams::natural(1.0).unwrap();
    let kick = PulseSpec::kick(0.3, 0.5).unwrap();
    let num = refine_final(&params, &kick, 2.0, 1e-12, 64).unwrap().propagator;
    let free = |t: f64| constant_field_propagator(&params, 0.0, t);
    let by_hand = free(1.5) * pulsed_qubit::propagator::kick_matrix(0.3) * free(0.5);
    let closed = kicked_u(&params, &kick, 2.0).unwrap();
    assert!(closed.distance(&num) < 1e-10);
    assert!(closed.distance(&by_hand) < 1e-14);
}

#[test]
fn kick_limit_converges_linearly_in_width() {
    let params = SystemParams::natural(1.0).unwrap();
    let widths: Vec<f64> = (0..5).map(|k| 0.5 / 2f64.powi(k)).collect();
    let study = kick_convergence_study(&params, FRAC_PI_2, 4.0, &widths).unwrap();
    for w in study.windows(2) {
        let ratio = w[0].1 / w[1].1;
        assert!((1.5..=2.5).contains(&ratio), "ratio {ratio} between widths {} and {}", w[0].0, w[1].0);
    }
}

#[test]
fn map_coordinates_of_unit_gaussian() {
    let params = SystemParams::natural(0.0).unwrap();
    let c = map_coordinates(&params, &PulseSpec::gaussian(1.0, 0.0, 1.0).unwrap()).unwrap();
    assert!((c.x - (2.0 * PI).sqrt()).abs() < 1e-12);
    assert_eq!(c.y, 0.0);
}

#[test]
fn adiabaticity_ratio_at_steepest_point() {
    let params = SystemParams::natural(1.0).unwrap();
    let pulse = PulseSpec::gaussian(1.0, 50.0, 10.0).unwrap();
    let want = ((-0.5f64).exp() / 10.0) / ((-1.0f64).exp() + 0.25).powf(1.5);
    let got = adiabaticity_ratio(&params, &pulse, 60.0);
    assert!((got - want).abs() < 1e-12 * want);
    assert!((got - 0.12488).abs() < 1e-4);
}

fn run_config(text: &str) -> RunConfig {
    RunConfig::parse(text).unwrap()
}

fn regime(r: &pulsed_qubit::harness::ComparisonResult, kind: RegimeKind) -> &pulsed_qubit::harness::RegimeComparison {
    r.regimes.iter().find(|c| c.regime == kind).unwrap()
}

#[test]
fn compare_degenerate_without_splitting() {
    let r = compare(&run_config(
        r#"{"system": {"delta_e": 0.0},
            "pulse": {"shape": "sampled", "samples": [[0.5, 0.0], [1.0, 0.8], [2.0, -0.3], [3.0, 0.0]]},
            "t_final": 4.0}"#,
    ))
    .unwrap();
    assert!(regime(&r, RegimeKind::Degenerate).matrix_error.unwrap() < 1e-9);
}

#[test]
fn compare_small_area_perturbative() {
    let alpha: f64 = 0.05;
    let sigma = 2.0 / (2.0 * PI).sqrt();
    let v = alpha / (sigma * (2.0 * PI).sqrt());
    let r = compare(&run_config(&format!(
        r#"{{"system": {{"delta_e": 1.0}},
            "pulse": {{"shape": "gaussian", "v_peak": {v}, "t_center": 10.0, "sigma": {sigma}}},
            "t_final": 20.0}}"#
    )))
    .unwrap();
    let pert = regime(&r, RegimeKind::Perturbative);
    assert!(pert.applicable);
    assert!(pert.transfer_error.unwrap() < alpha * alpha);
}

#[test]
fn compare_slow_gaussian_adiabatic() {
    let r = compare(&run_config(
        r#"{"system": {"delta_e": 1.0},
            "pulse": {"shape": "gaussian", "v_peak": 1.0, "t_center": 2000.0, "sigma": 250.0},
            "t_final": 4000.0,
            "initial_state": {"a1": [0.0, 0.0], "a2": [1.0, 0.0]},
            "propagation": {"record_stride": 1048576, "tolerance": 1e-8}}"#,
    ))
    .unwrap();
    let ad = regime(&r, RegimeKind::Adiabatic);
    assert!(ad.validity_margin.unwrap() < 0.1);
    assert!(ad.transfer_error.unwrap() < 1e-3);
    for c in &r.regimes {
        if let Some(e) = c.transfer_error {
            assert!(e <= 2.0);
        }
    }
    for row in &r.time_series {
        assert!((row[1] + row[2] - 1.0).abs() < 1e-10);
    }
}
