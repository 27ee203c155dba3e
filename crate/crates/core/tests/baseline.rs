// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Lab-frame Gaussian baseline: step-size convergence, Bloch-norm witness
//! and norm preservation over the full pulse window.

use std::sync::OnceLock;

use ftgate::linalg::C64;
use ftgate::propagate::{simulate_gaussian_baseline, BaselineParams, BaselineResult};
use ftgate::linalg::StateVector;

fn product_zero() -> StateVector {
    let mut v = StateVector::zeros(32);
    v[0] = C64::new(1.0, 0.0);
    v
}

fn uncoupled() -> &'static BaselineResult {
    static CELL: OnceLock<BaselineResult> = OnceLock::new();
    CELL.get_or_init(|| simulate_gaussian_baseline(&BaselineParams::default()).unwrap())
}

fn coupled() -> &'static BaselineResult {
    static CELL: OnceLock<BaselineResult> = OnceLock::new();
    CELL.get_or_init(|| {
        simulate_gaussian_baseline(&BaselineParams {
            j: 0.01,
            ..BaselineParams::default()
        })
        .unwrap()
    })
}

fn bloch_norms(result: &BaselineResult) -> Vec<f64> {
    result
        .trajectory
        .qubit_bloch(&product_zero())
        .unwrap()
        .iter()
        .flatten()
        .map(|b| (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt())
        .collect()
}

#[test]
fn halving_dt_changes_final_fidelity_below_threshold() {
    let base = uncoupled();
    let halved = simulate_gaussian_baseline(&BaselineParams {
        dt: Some(0.5 * base.dt),
        ..BaselineParams::default()
    })
    .unwrap();
    assert_eq!(halved.steps, 2 * base.steps);
    let delta = (halved.final_fidelity - base.final_fidelity).abs();
    assert!(delta < 1e-4, "final fidelity moved by {delta}");
}

#[test]
fn uncoupled_product_state_stays_pure() {
    let norms = bloch_norms(uncoupled());
    let worst = norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-6, "Bloch norm deviates by {worst}");
}

#[test]
fn coupling_entangles_qubits() {
    let min = bloch_norms(coupled()).into_iter().fold(f64::INFINITY, f64::min);
    assert!(min < 0.9, "minimum Bloch norm {min}");
}

#[test]
fn states_keep_unit_norm_over_the_window() {
    let r = coupled();
    assert!(r.steps >= 100_000);
    for psi in r.trajectory.states(&product_zero()) {
        assert!((psi.norm() - 1.0).abs() <= 1e-9, "norm {}", psi.norm());
    }
}

#[test]
fn maximum_tracks_recorded_fidelity() {
    let r = uncoupled();
    let recorded = r.fidelity.iter().cloned().fold(0.0, f64::max);
    assert!(r.max_fidelity >= recorded);
    assert!(r.max_fidelity >= 0.9999, "{}", r.max_fidelity);
    assert!(r.time_of_max > 0.0 && r.time_of_max <= 440.0 + 1e-9);
}
