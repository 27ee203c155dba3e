// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Drift and control Hamiltonians for Ising-coupled spin chains, and the
//! geometric baseline fields. Units have `hbar = 1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::{local_sequence, Axis, GateName};
use crate::linalg::{
    hermiticity_defect, kron_embed, sigma_x, sigma_y, sigma_z, ComplexMatrix, C64, HERMITIAN_TOL,
};
use crate::propagate::PiecewisePulse;

/// `H(u) = H_0 + sum_m u_m H_m`.
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    num_qubits: usize,
    drift: ComplexMatrix,
    controls: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

impl HamiltonianModel {
    pub fn new(
        num_qubits: usize,
        drift: ComplexMatrix,
        controls: Vec<ComplexMatrix>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if num_qubits == 0 || num_qubits > 12 {
            return Err(invalid(format!("unsupported qubit count {num_qubits}")));
        }
        let dim = 1usize << num_qubits;
        if labels.len() != controls.len() {
            return Err(invalid("one label per control operator required"));
        }
        for m in std::iter::once(&drift).chain(controls.iter()) {
            if m.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.nrows(),
                });
            }
            let defect = hermiticity_defect(m);
            if !(defect <= HERMITIAN_TOL) {
                return Err(Error::NotHermitian(defect));
            }
        }
        Ok(Self {
            num_qubits,
            drift,
            controls,
            labels,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn drift(&self) -> &ComplexMatrix {
        &self.drift
    }

    pub fn controls(&self) -> &[ComplexMatrix] {
        &self.controls
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Writes `H_0 + sum_m u_m H_m` into `out`.
    pub fn generator_into(&self, amplitudes: &[f64], out: &mut ComplexMatrix) -> Result<()> {
        if amplitudes.len() != self.controls.len() {
            return Err(Error::DimensionMismatch {
                expected: self.controls.len(),
                found: amplitudes.len(),
            });
        }
        out.copy_from(&self.drift);
        for (h, &u) in self.controls.iter().zip(amplitudes) {
            if u != 0.0 {
                out.zip_apply(h, |o, v| *o += v * u);
            }
        }
        Ok(())
    }

    pub fn generator(&self, amplitudes: &[f64]) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
        self.generator_into(amplitudes, &mut out)?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalModelParams {
    pub omegas: Vec<f64>,
    pub j: f64,
}

impl Default for GlobalModelParams {
    fn default() -> Self {
        Self {
            omegas: vec![6.0, 8.0, 10.0, 12.0, 14.0],
            j: 1.0,
        }
    }
}

impl GlobalModelParams {
    /// Frequencies `center + (n - (count+1)/2) * delta_omega`, `n = 1..=count`.
    ///
    /// `(5, 10, 2)` gives the default `{6, 8, 10, 12, 14}`.
    pub fn evenly_spaced(count: usize, center: f64, delta_omega: f64, j: f64) -> Self {
        let mid = (count as f64 + 1.0) / 2.0;
        Self {
            omegas: (1..=count).map(|n| center + (n as f64 - mid) * delta_omega).collect(),
            j,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.omegas.is_empty() {
            return Err(invalid("omegas must not be empty"));
        }
        if self.omegas.iter().any(|w| !w.is_finite()) || !self.j.is_finite() {
            return Err(invalid("model parameters must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalModelParams {
    pub omega: f64,
    pub j: f64,
    pub num_qubits: usize,
}

impl Default for LocalModelParams {
    fn default() -> Self {
        Self {
            omega: 10.0,
            j: 1.0,
            num_qubits: 5,
        }
    }
}

impl LocalModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(invalid("Omega must be positive"));
        }
        if !self.j.is_finite() {
            return Err(invalid("J must be finite"));
        }
        if self.num_qubits == 0 {
            return Err(invalid("at least one qubit required"));
        }
        Ok(())
    }
}

fn collective(op: &ComplexMatrix, num_qubits: usize) -> ComplexMatrix {
    let dim = 1usize << num_qubits;
    (1..=num_qubits).fold(ComplexMatrix::zeros(dim, dim), |acc, q| {
        acc + kron_embed(op, q, num_qubits).expect("qubit index in range")
    })
}

/// `J sum_{n=1}^{N-1} sigma_z^(n) sigma_z^(n+1)`; diagonal.
pub fn ising_coupling(num_qubits: usize, j: f64) -> ComplexMatrix {
    let dim = 1usize << num_qubits;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let z = |q: usize| if idx >> (num_qubits - q) & 1 == 0 { 1.0 } else { -1.0 };
        let e: f64 = (1..num_qubits).map(|q| z(q) * z(q + 1)).sum();
        h[(idx, idx)] = C64::new(j * e, 0.0);
    }
    h
}

/// `-1/2 sum_n omega_n sigma_z^(n) + J-coupling`.
fn detuned_drift(omegas: &[f64], j: f64) -> ComplexMatrix {
    let n = omegas.len();
    let mut h = ising_coupling(n, j);
    for (q, &w) in omegas.iter().enumerate() {
        h -= kron_embed(&sigma_z(), q + 1, n).expect("qubit index in range") * C64::new(0.5 * w, 0.0);
    }
    h
}

/// Rotating-frame model with two global controls `sum sigma_x`, `sum sigma_y`.
pub fn build_global_optimal(params: &GlobalModelParams) -> Result<HamiltonianModel> {
    params.validate()?;
    let n = params.omegas.len();
    HamiltonianModel::new(
        n,
        detuned_drift(&params.omegas, params.j),
        vec![collective(&sigma_x(), n), collective(&sigma_y(), n)],
        vec!["sum_x".into(), "sum_y".into()],
    )
}

/// Fixed `Omega sum sigma_x` drive with one detuning control `sigma_z^(n)`
/// per qubit.
pub fn build_local_optimal(params: &LocalModelParams) -> Result<HamiltonianModel> {
    params.validate()?;
    let n = params.num_qubits;
    let drift = collective(&sigma_x(), n) * C64::new(params.omega, 0.0) + ising_coupling(n, params.j);
    let controls = (1..=n)
        .map(|q| kron_embed(&sigma_z(), q, n))
        .collect::<Result<Vec<_>>>()?;
    HamiltonianModel::new(n, drift, controls, (1..=n).map(|q| format!("z{q}")).collect())
}

/// Laboratory-frame model `H_0 + f(t) H_1` with `H_1 = sum sigma_x`.
pub fn build_lab_frame_global(omegas: &[f64], j: f64) -> Result<HamiltonianModel> {
    GlobalModelParams {
        omegas: omegas.to_vec(),
        j,
    }
    .validate()?;
    let n = omegas.len();
    HamiltonianModel::new(n, detuned_drift(omegas, j), vec![collective(&sigma_x(), n)], vec!["f".into()])
}

/// A scalar drive `f(t)` on `[0, duration]`.
pub trait ContinuousField {
    fn value(&self, t: f64) -> f64;
    fn duration(&self) -> f64;

    /// Single-control pulse sampled at the midpoint of each of `steps`
    /// uniform steps.
    fn sample_midpoints(&self, steps: usize) -> Result<PiecewisePulse> {
        let mut pulse = PiecewisePulse::uniform(1, steps, self.duration())?;
        let dt = self.duration() / steps as f64;
        for k in 0..steps {
            pulse.set_amplitude(0, k, self.value((k as f64 + 0.5) * dt))?;
        }
        Ok(pulse)
    }
}

/// Concurrent Gaussian pi-pulses on each carrier, centred at `t_F / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPiField {
    pub q: f64,
    pub omegas: Vec<f64>,
    pub t_final: f64,
}

impl GaussianPiField {
    /// Envelope of one pulse, `q sqrt(pi) exp(-q^2 (t - t_F/2)^2)`; its area
    /// over the real line is `pi`.
    pub fn envelope(&self, t: f64) -> f64 {
        let s = t - 0.5 * self.t_final;
        self.q * PI.sqrt() * (-(self.q * s).powi(2)).exp()
    }
}

impl ContinuousField for GaussianPiField {
    fn value(&self, t: f64) -> f64 {
        self.envelope(t) * self.omegas.iter().map(|w| (w * t).cos()).sum::<f64>()
    }

    fn duration(&self) -> f64 {
        self.t_final
    }
}

pub fn gaussian_pi_field(q: f64, omegas: &[f64], t_final: f64) -> Result<GaussianPiField> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(invalid("q must be positive"));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(invalid("t_F must be positive"));
    }
    if omegas.iter().any(|w| !w.is_finite()) {
        return Err(invalid("carrier frequencies must be finite"));
    }
    Ok(GaussianPiField {
        q,
        omegas: omegas.to_vec(),
        t_final,
    })
}

/// Transversal detuning schedule for the local model realizing the
/// x/n-axis decomposition of `gate` on every qubit.
///
/// An x-rotation by `a` runs with `u = 0` for `a / (2 Omega)`; an n-rotation
/// runs with `|u| = Omega` for `a / (2 sqrt(2) Omega)`. S and T use `u = -Omega`
/// so the evolution lands on the gate rather than its inverse.
pub fn local_geometric_schedule(gate: GateName, omega: f64, num_qubits: usize) -> Result<PiecewisePulse> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(invalid("Omega must be positive"));
    }
    if num_qubits == 0 {
        return Err(invalid("at least one qubit required"));
    }
    let sign = if matches!(gate, GateName::S | GateName::T) { -1.0 } else { 1.0 };
    let mut dts = Vec::new();
    let mut us = Vec::new();
    // The product's rightmost rotation acts first.
    for step in local_sequence(gate).iter().rev() {
        let (u, rate) = if step.axis == Axis::X {
            (0.0, 2.0 * omega)
        } else {
            (sign * omega, 2.0 * std::f64::consts::SQRT_2 * omega)
        };
        dts.push(step.angle.abs() / rate);
        us.push(u);
    }
    PiecewisePulse::new(dts, vec![us; num_qubits], None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::standard_gate;
    use crate::linalg::{hermitian_eigen, identity, kron_all};
    use crate::propagate::{fidelity_phase_invariant, propagate};

    #[test]
    fn evenly_spaced_frequencies() {
        assert_eq!(GlobalModelParams::evenly_spaced(5, 10.0, 2.0, 1.0), GlobalModelParams::default());
        assert_eq!(GlobalModelParams::evenly_spaced(3, 10.0, 2.0, 1.0).omegas, vec![8.0, 10.0, 12.0]);
    }

    #[test]
    fn global_drift_spectrum_matches_product_formula() {
        let m = build_global_optimal(&GlobalModelParams::default()).unwrap();
        assert_eq!(m.num_controls(), 2);
        let (mut values, _) = hermitian_eigen(m.drift());
        values.sort_by(f64::total_cmp);
        // Brute force over classical spin configurations.
        let omegas = [6.0, 8.0, 10.0, 12.0, 14.0];
        let mut energies: Vec<f64> = (0..32)
            .map(|idx: usize| {
                let z: Vec<f64> = (0..5).map(|q| if idx >> (4 - q) & 1 == 0 { 1.0 } else { -1.0 }).collect();
                let zeeman: f64 = omegas.iter().zip(&z).map(|(w, s)| -0.5 * w * s).sum();
                zeeman + (0..4).map(|q| z[q] * z[q + 1]).sum::<f64>()
            })
            .collect();
        energies.sort_by(f64::total_cmp);
        for (a, b) in values.iter().zip(&energies) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn uncoupled_global_drift_is_diagonal() {
        let m = build_global_optimal(&GlobalModelParams {
            j: 0.0,
            ..Default::default()
        })
        .unwrap();
        let d = m.drift();
        assert!(d.iter().enumerate().all(|(i, z)| i % 33 == 0 || *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn local_model_shape() {
        let m = build_local_optimal(&LocalModelParams::default()).unwrap();
        assert_eq!(m.num_controls(), 5);
        for h in m.controls() {
            assert!((0..32).all(|i| (0..32).all(|j| i == j || h[(i, j)].norm() == 0.0)));
        }
        assert!(m.drift().trace().norm() < 1e-12);

        let single = build_local_optimal(&LocalModelParams {
            omega: 10.0,
            j: 0.0,
            num_qubits: 1,
        })
        .unwrap();
        assert_eq!(*single.drift(), sigma_x() * C64::new(10.0, 0.0));
    }

    #[test]
    fn lab_frame_model() {
        let m = build_lab_frame_global(&[6.0, 8.0, 10.0, 12.0, 14.0], 0.0).unwrap();
        let h0 = m.drift();
        let h1 = &m.controls()[0];
        assert!((h0 * h1 - h1 * h0).norm() > 1.0);
        let other = build_lab_frame_global(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.0).unwrap();
        assert_eq!(other.controls()[0], *h1);

        let coupling = ising_coupling(5, 0.01);
        let (values, _) = hermitian_eigen(&coupling);
        let max = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!((max - 0.04).abs() < 1e-12);
    }

    #[test]
    fn generator_rejects_wrong_control_count() {
        let m = build_local_optimal(&LocalModelParams::default()).unwrap();
        assert!(matches!(m.generator(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn non_hermitian_model_rejected() {
        let mut bad = identity(2);
        bad[(0, 1)] = C64::new(1.0, 0.0);
        let r = HamiltonianModel::new(1, bad, vec![], vec![]);
        assert!(matches!(r, Err(Error::NotHermitian(_))));
    }

    #[test]
    fn gaussian_field_values() {
        let f = gaussian_pi_field(0.01, &[6.0, 8.0, 10.0, 12.0, 14.0], 440.0).unwrap();
        let suppression = f.envelope(0.0) / f.envelope(220.0);
        assert!((suppression - (-4.84f64).exp()).abs() < 1e-12);
        let carriers: f64 = f.omegas.iter().map(|w| (w * 220.0).cos()).sum();
        assert!((f.value(220.0) - 0.01 * PI.sqrt() * carriers).abs() < 1e-15);
        // Trapezoid quadrature of the envelope over a wide window.
        let n = 200_000;
        let h = 4000.0 / n as f64;
        let area: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * f.envelope(-1780.0 + i as f64 * h)
            })
            .sum::<f64>()
            * h;
        assert!((area - PI).abs() < 1e-9);
        assert!(gaussian_pi_field(0.0, &[1.0], 1.0).is_err());
    }

    #[test]
    fn local_schedule_durations() {
        let had = local_geometric_schedule(GateName::Had, 10.0, 5).unwrap();
        assert_eq!(had.num_steps(), 1);
        assert!((had.duration() - PI / 20.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(had.amplitude(3, 0), 10.0);
        let x = local_geometric_schedule(GateName::X, 10.0, 5).unwrap();
        assert!((x.duration() - PI / 20.0).abs() < 1e-15);
        assert_eq!(x.amplitude(0, 0), 0.0);
    }

    #[test]
    fn local_schedules_realize_gates_transversally() {
        for n in [1usize, 3] {
            let model = build_local_optimal(&LocalModelParams {
                omega: 10.0,
                j: 0.0,
                num_qubits: n,
            })
            .unwrap();
            for g in GateName::ALL {
                let pulse = local_geometric_schedule(g, 10.0, n).unwrap();
                let u = propagate(&model, &pulse, None).unwrap().unitary;
                let target = kron_all(&vec![standard_gate(g); n]);
                let f = fidelity_phase_invariant(&target, &u);
                assert!(f >= 1.0 - 1e-6, "{g} on {n} qubits: {f}");
            }
        }
    }
}
