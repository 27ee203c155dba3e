// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise-constant time evolution, trajectories and gate fidelities.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::codes::{logical_bloch, CodeSpec};
use crate::error::{invalid, Error, Result};
use crate::linalg::{
    expm_action_taylor, expm_hermitian_prop, identity, kron_all, mul_into, sigma_x, single_qubit_bloch,
    trace_adjoint_product, ComplexMatrix, StateVector,
};
use crate::models::{build_lab_frame_global, gaussian_pi_field, ContinuousField, HamiltonianModel};

/// Default cap on recorded trajectory samples.
pub const DEFAULT_MAX_SAMPLES: usize = 2000;

/// Control amplitudes `u[m][k]` held constant over steps of length `dt[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePulse {
    dt: Vec<f64>,
    amplitudes: Vec<Vec<f64>>,
    amplitude_bound: Option<f64>,
}

impl PiecewisePulse {
    pub fn new(dt: Vec<f64>, amplitudes: Vec<Vec<f64>>, amplitude_bound: Option<f64>) -> Result<Self> {
        if dt.is_empty() {
            return Err(invalid("a pulse needs at least one step"));
        }
        if dt.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(invalid("step durations must be positive and finite"));
        }
        if let Some(c) = amplitude_bound {
            if !(c >= 0.0) {
                return Err(invalid("amplitude bound must be non-negative"));
            }
        }
        for row in &amplitudes {
            if row.len() != dt.len() {
                return Err(Error::DimensionMismatch {
                    expected: dt.len(),
                    found: row.len(),
                });
            }
            if row.iter().any(|u| !u.is_finite()) {
                return Err(invalid("amplitudes must be finite"));
            }
            if let Some(c) = amplitude_bound {
                if row.iter().any(|u| u.abs() > c) {
                    return Err(invalid(format!("amplitude exceeds bound {c}")));
                }
            }
        }
        Ok(Self {
            dt,
            amplitudes,
            amplitude_bound,
        })
    }

    /// Zero amplitudes on `steps` equal steps spanning `t_final`.
    pub fn uniform(num_controls: usize, steps: usize, t_final: f64) -> Result<Self> {
        if steps == 0 {
            return Err(invalid("K must be at least 1"));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(invalid("t_F must be positive"));
        }
        Self::new(
            vec![t_final / steps as f64; steps],
            vec![vec![0.0; steps]; num_controls],
            None,
        )
    }

    pub fn with_amplitude_bound(mut self, bound: Option<f64>) -> Result<Self> {
        self.amplitude_bound = bound;
        Self::new(self.dt, self.amplitudes, self.amplitude_bound)
    }

    pub fn num_steps(&self) -> usize {
        self.dt.len()
    }

    pub fn num_controls(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dt(&self, k: usize) -> f64 {
        self.dt[k]
    }

    pub fn durations(&self) -> &[f64] {
        &self.dt
    }

    pub fn duration(&self) -> f64 {
        self.dt.iter().sum()
    }

    pub fn amplitude_bound(&self) -> Option<f64> {
        self.amplitude_bound
    }

    pub fn amplitude(&self, m: usize, k: usize) -> f64 {
        self.amplitudes[m][k]
    }

    /// Rows indexed by control.
    pub fn amplitudes(&self) -> &[Vec<f64>] {
        &self.amplitudes
    }

    /// All control values during step `k`.
    pub fn controls_at(&self, k: usize) -> Vec<f64> {
        self.amplitudes.iter().map(|row| row[k]).collect()
    }

    pub fn set_amplitude(&mut self, m: usize, k: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(invalid("amplitudes must be finite"));
        }
        if let Some(c) = self.amplitude_bound {
            if value.abs() > c {
                return Err(invalid(format!("amplitude {value} exceeds bound {c}")));
            }
        }
        self.amplitudes[m][k] = value;
        Ok(())
    }

    pub fn start_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.dt
            .iter()
            .map(|d| {
                let s = t;
                t += d;
                s
            })
            .collect()
    }

    pub fn max_abs_amplitude(&self) -> f64 {
        self.amplitudes.iter().flatten().fold(0.0, |a, u| a.max(u.abs()))
    }

    /// CSV with columns `k, t_start, dt, u_1, ..., u_M`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,t_start,dt");
        for m in 1..=self.num_controls() {
            let _ = write!(out, ",u_{m}");
        }
        out.push('\n');
        for (k, t) in self.start_times().into_iter().enumerate() {
            let _ = write!(out, "{},{:?},{:?}", k + 1, t, self.dt[k]);
            for row in &self.amplitudes {
                let _ = write!(out, ",{:?}", row[k]);
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`PiecewisePulse::to_csv`]; `t_start` is ignored.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| invalid("empty pulse CSV"))?;
        let columns = header.split(',').count();
        if columns < 3 {
            return Err(invalid("pulse CSV header needs k,t_start,dt"));
        }
        let m = columns - 3;
        let mut dt = Vec::new();
        let mut amps = vec![Vec::new(); m];
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns {
                return Err(invalid(format!("pulse CSV row {} has {} fields", i + 2, fields.len())));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| invalid(format!("pulse CSV row {}: {e}", i + 2)))
            };
            dt.push(parse(fields[2])?);
            for (c, row) in amps.iter_mut().enumerate() {
                row.push(parse(fields[3 + c])?);
            }
        }
        Self::new(dt, amps, None)
    }
}

/// `|Tr[W^dag U]| / N` is invariant under `U -> e^{i theta} U`; the strict
/// form keeps the phase.
pub fn fidelity_strict(w: &ComplexMatrix, u: &ComplexMatrix) -> f64 {
    assert_eq!(w.shape(), u.shape(), "fidelity of operators with different dimensions");
    trace_adjoint_product(w, u).re / w.nrows() as f64
}

pub fn fidelity_phase_invariant(w: &ComplexMatrix, u: &ComplexMatrix) -> f64 {
    assert_eq!(w.shape(), u.shape(), "fidelity of operators with different dimensions");
    trace_adjoint_product(w, u).norm() / w.nrows() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordOptions {
    pub max_samples: usize,
}

impl Default for RecordOptions {
    fn default() -> Self {
        Self {
            max_samples: DEFAULT_MAX_SAMPLES,
        }
    }
}

/// Sampled propagators `U(t_s)` starting from `U(0) = I`.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub propagators: Vec<ComplexMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn states(&self, initial: &StateVector) -> Vec<StateVector> {
        self.propagators.iter().map(|u| u * initial).collect()
    }

    /// `[sample][qubit] -> (x, y, z)`.
    pub fn qubit_bloch(&self, initial: &StateVector) -> Result<Vec<Vec<[f64; 3]>>> {
        let n = crate::linalg::qubit_count(initial.len())
            .ok_or_else(|| invalid("state length is not a power of two"))?;
        self.states(initial)
            .iter()
            .map(|psi| (1..=n).map(|q| single_qubit_bloch(psi, q)).collect())
            .collect()
    }

    pub fn logical_bloch(&self, initial: &StateVector, code: &CodeSpec) -> Result<Vec<[f64; 3]>> {
        self.states(initial).iter().map(|psi| logical_bloch(psi, code)).collect()
    }

    /// Columns `t`, per-qubit `x_n,y_n,z_n`, then `s_x,s_y,s_z` when a code
    /// is given.
    pub fn to_csv(&self, initial: &StateVector, code: Option<&CodeSpec>) -> Result<String> {
        let per_qubit = self.qubit_bloch(initial)?;
        let logical = match code {
            Some(c) => Some(self.logical_bloch(initial, c)?),
            None => None,
        };
        let n = per_qubit.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for q in 1..=n {
            let _ = write!(out, ",x_{q},y_{q},z_{q}");
        }
        if logical.is_some() {
            out.push_str(",s_x,s_y,s_z");
        }
        out.push('\n');
        for (s, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{t:?}");
            for b in &per_qubit[s] {
                let _ = write!(out, ",{:?},{:?},{:?}", b[0], b[1], b[2]);
            }
            if let Some(l) = &logical {
                let _ = write!(out, ",{:?},{:?},{:?}", l[s][0], l[s][1], l[s][2]);
            }
            out.push('\n');
        }
        Ok(out)
    }

    /// Propagator snapshots as `{t, dimension, entries: [[re, im], ...]}`.
    pub fn snapshots_json(&self) -> serde_json::Value {
        let records: Vec<_> = self
            .times
            .iter()
            .zip(&self.propagators)
            .map(|(t, u)| {
                serde_json::json!({
                    "t": t,
                    "dimension": u.nrows(),
                    "entries": matrix_entries(u),
                })
            })
            .collect();
        serde_json::Value::Array(records)
    }
}

/// Row-major `[re, im]` pairs.
pub fn matrix_entries(m: &ComplexMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

/// Indices `k` (steps completed) at which to sample, always including `0`
/// and `steps`.
fn sample_stride(steps: usize, max_samples: usize) -> usize {
    let slots = max_samples.max(2) - 1;
    steps.div_ceil(slots).max(1)
}

fn is_sample(k: usize, steps: usize, stride: usize) -> bool {
    k % stride == 0 || k == steps
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub unitary: ComplexMatrix,
    pub trajectory: Option<Trajectory>,
}

fn check_pulse(model: &HamiltonianModel, pulse: &PiecewisePulse) -> Result<()> {
    if pulse.num_controls() != model.num_controls() {
        return Err(Error::DimensionMismatch {
            expected: model.num_controls(),
            found: pulse.num_controls(),
        });
    }
    Ok(())
}

/// `exp(-i dt_k H(u_k))` for every step.
pub fn step_propagators(model: &HamiltonianModel, pulse: &PiecewisePulse) -> Result<Vec<ComplexMatrix>> {
    check_pulse(model, pulse)?;
    let mut h = ComplexMatrix::zeros(model.dim(), model.dim());
    (0..pulse.num_steps())
        .map(|k| {
            model.generator_into(&pulse.controls_at(k), &mut h)?;
            expm_hermitian_prop(&h, pulse.dt(k))
        })
        .collect()
}

/// `U = U_K ... U_1`, optionally sampling the partial products.
pub fn propagate(
    model: &HamiltonianModel,
    pulse: &PiecewisePulse,
    record: Option<RecordOptions>,
) -> Result<Propagation> {
    check_pulse(model, pulse)?;
    let steps = pulse.num_steps();
    let stride = record.map(|r| sample_stride(steps, r.max_samples));
    let mut trajectory = record.map(|_| Trajectory::default());
    let mut u = identity(model.dim());
    let mut next = u.clone();
    let mut h = u.clone();
    let mut t = 0.0;
    if let Some(tr) = trajectory.as_mut() {
        tr.times.push(t);
        tr.propagators.push(u.clone());
    }
    for k in 0..steps {
        model.generator_into(&pulse.controls_at(k), &mut h)?;
        let step = expm_hermitian_prop(&h, pulse.dt(k))?;
        mul_into(&step, &u, &mut next);
        std::mem::swap(&mut u, &mut next);
        t += pulse.dt(k);
        if let (Some(tr), Some(s)) = (trajectory.as_mut(), stride) {
            if is_sample(k + 1, steps, s) {
                tr.times.push(t);
                tr.propagators.push(u.clone());
            }
        }
    }
    Ok(Propagation {
        unitary: u,
        trajectory,
    })
}

/// `diag(d) + f sum_q X_q` acting on the columns of a dense block, where
/// `X_q` flips bit `masks[q]`.
struct DiagonalPlusFlips {
    diag: Vec<f64>,
    masks: Vec<usize>,
}

impl DiagonalPlusFlips {
    /// Requires a diagonal real drift and the collective `sum sigma_x` control.
    fn from_model(model: &HamiltonianModel) -> Result<Self> {
        let n = model.num_qubits();
        let dim = model.dim();
        let drift = model.drift();
        let diag: Vec<f64> = (0..dim).map(|i| drift[(i, i)].re).collect();
        let off_diagonal = (0..dim).any(|i| (0..dim).any(|j| i != j && drift[(i, j)].norm() > 0.0));
        let masks: Vec<usize> = (0..n).map(|q| 1 << q).collect();
        let mut flips = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for m in &masks {
                flips[(i ^ m, i)] += crate::linalg::ONE;
            }
        }
        if off_diagonal || model.controls().len() != 1 || model.controls()[0] != flips {
            return Err(invalid("lab-frame kernel needs a diagonal drift and a collective x control"));
        }
        Ok(Self { diag, masks })
    }

    fn apply(&self, f: f64, src: &ComplexMatrix, dst: &mut ComplexMatrix) {
        let n = self.diag.len();
        for (s, d) in src.as_slice().chunks_exact(n).zip(dst.as_mut_slice().chunks_exact_mut(n)) {
            for i in 0..n {
                let mut flipped = crate::linalg::ZERO;
                for m in &self.masks {
                    flipped += s[i ^ m];
                }
                d[i] = s[i] * self.diag[i] + flipped * f;
            }
        }
    }
}

/// Lab-frame Gaussian pi-pulse experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    pub omegas: Vec<f64>,
    pub j: f64,
    pub q: f64,
    pub t_final: f64,
    /// Defaults to `2 pi / (400 max omega)`.
    pub dt: Option<f64>,
    pub max_samples: usize,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            omegas: vec![6.0, 8.0, 10.0, 12.0, 14.0],
            j: 0.0,
            q: 0.01,
            t_final: 440.0,
            dt: None,
            max_samples: DEFAULT_MAX_SAMPLES,
        }
    }
}

impl BaselineParams {
    pub fn default_dt(omegas: &[f64]) -> f64 {
        let w = omegas.iter().fold(0.0f64, |a, w| a.max(w.abs()));
        2.0 * PI / (w.max(1.0) * 400.0)
    }

    pub fn resolved_dt(&self) -> f64 {
        self.dt.unwrap_or_else(|| Self::default_dt(&self.omegas))
    }
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub steps: usize,
    pub dt: f64,
    /// Phase-invariant fidelity against `X^(x n)` at the trajectory samples.
    pub fidelity: Vec<f64>,
    /// Maximum over every step, not just the samples.
    pub max_fidelity: f64,
    pub time_of_max: f64,
    pub final_fidelity: f64,
    pub trajectory: Trajectory,
}

/// Propagates the lab-frame model under concurrent Gaussian pi-pulses and
/// tracks the phase-invariant fidelity against the transversal `X` gate,
/// which is the logical `X` of the five-qubit code.
///
/// Steps use midpoint field samples and a Taylor-series action of the sparse
/// generator, which is far cheaper than a dense eigendecomposition at the
/// ~4e5 steps this experiment needs.
pub fn simulate_gaussian_baseline(params: &BaselineParams) -> Result<BaselineResult> {
    let model = build_lab_frame_global(&params.omegas, params.j)?;
    let field = gaussian_pi_field(params.q, &params.omegas, params.t_final)?;
    let dt_req = params.resolved_dt();
    if !(dt_req > 0.0 && dt_req.is_finite()) {
        return Err(invalid("dt must be positive"));
    }
    let steps = (params.t_final / dt_req).ceil() as usize;
    let dt = params.t_final / steps as f64;
    let n = params.omegas.len();
    let target = kron_all(&vec![sigma_x(); n]);

    let generator = DiagonalPlusFlips::from_model(&model)?;
    let b0 = generator.diag.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let b1 = generator.masks.len() as f64;

    let stride = sample_stride(steps, params.max_samples);
    let mut trajectory = Trajectory::default();
    let mut fidelity = Vec::new();
    let mut u = identity(model.dim());
    trajectory.times.push(0.0);
    trajectory.propagators.push(u.clone());
    fidelity.push(fidelity_phase_invariant(&target, &u));
    let mut best = (fidelity[0], 0.0);
    for k in 0..steps {
        let f = field.value((k as f64 + 0.5) * dt);
        if !f.is_finite() {
            return Err(Error::Numeric(format!("non-finite field at step {k}")));
        }
        expm_action_taylor(|src, dst| generator.apply(f, src, dst), b0 + f.abs() * b1, dt, &mut u);
        let t = (k + 1) as f64 * dt;
        let fid = fidelity_phase_invariant(&target, &u);
        if fid > best.0 {
            best = (fid, t);
        }
        if is_sample(k + 1, steps, stride) {
            trajectory.times.push(t);
            trajectory.propagators.push(u.clone());
            fidelity.push(fid);
        }
    }
    let final_fidelity = *fidelity.last().expect("at least the initial sample");
    Ok(BaselineResult {
        steps,
        dt,
        fidelity,
        max_fidelity: best.0,
        time_of_max: best.1,
        final_fidelity,
        trajectory,
    })
}
