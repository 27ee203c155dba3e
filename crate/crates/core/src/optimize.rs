// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Gate synthesis by iterative optimal control.
//!
//! Both algorithms maximize the strict fidelity `Re Tr[W^dag U] / N` using
//! the first-order increment
//!
//! ```text
//! g_mk = Im Tr[ W^dag U_K ... U_k H_m U_{k-1} ... U_1 ]
//! ```
//!
//! which equals `(N / dt_k) dF/du_mk` up to `O(dt_k ||H||)`. The sequential
//! algorithm updates one time step at a time, using the already-updated
//! propagators for earlier steps, so the fidelity can be kept nondecreasing
//! step by step. The global algorithm updates every step from the same
//! iterate.
//!
//! Updates are `du_mk = eps * g_mk / (N dt_k)`; with this scaling `eps ~ 1` is
//! close to a Newton step for unit-norm controls.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codes::{bitflip3_code, target_gate};
use crate::error::{invalid, Error, Result};
use crate::gates::GateName;
use crate::linalg::{
    expm_hermitian_prop, gate_error_metrics, identity, mul_into, trace_adjoint_product, trace_of_product,
    ComplexMatrix, GateErrorMetrics,
};
use crate::models::{build_global_optimal, GlobalModelParams, HamiltonianModel};
use crate::propagate::{fidelity_phase_invariant, fidelity_strict, step_propagators, PiecewisePulse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Sequential,
    Grape,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Sequential => "sequential",
            Algorithm::Grape => "grape",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(Algorithm::Sequential),
            "grape" => Ok(Algorithm::Grape),
            other => Err(invalid(format!("unknown algorithm '{other}' (expected sequential or grape)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub epsilon0: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    pub target_fidelity: f64,
    /// Sweeps for the sequential algorithm, iterations for the global one.
    /// `None` selects 5000 or 20000 respectively.
    pub max_iterations: Option<usize>,
    pub amplitude_bound: Option<f64>,
    pub rng_seed: u64,
    pub initial_guess_scale: f64,
    /// Alternate forward and backward sequential sweeps.
    pub alternate_sweeps: bool,
    /// Wall-clock limit in seconds, checked between sweeps or iterations.
    #[serde(default)]
    pub time_limit_secs: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            epsilon0: 4.0,
            backtrack_factor: 0.5,
            max_backtracks: 30,
            target_fidelity: 0.9999,
            max_iterations: None,
            amplitude_bound: None,
            rng_seed: 0,
            initial_guess_scale: 0.1,
            alternate_sweeps: false,
            time_limit_secs: None,
        }
    }
}

impl OptimizerConfig {
    pub const SEQUENTIAL_BUDGET: usize = 5000;
    pub const GRAPE_BUDGET: usize = 20000;

    /// Defaults with the initial-guess scale `0.1 Omega` used for the local model.
    pub fn for_local_model(omega: f64) -> Self {
        Self {
            initial_guess_scale: 0.1 * omega,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon0 > 0.0 && self.epsilon0.is_finite()) {
            return Err(invalid("epsilon0 must be positive"));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(invalid("backtrack_factor must lie in (0, 1)"));
        }
        if !(self.target_fidelity > 0.0 && self.target_fidelity <= 1.0) {
            return Err(invalid("target_fidelity must lie in (0, 1]"));
        }
        if let Some(c) = self.amplitude_bound {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(invalid("amplitude_bound must be non-negative"));
            }
        }
        if !(self.initial_guess_scale >= 0.0 && self.initial_guess_scale.is_finite()) {
            return Err(invalid("initial_guess_scale must be non-negative"));
        }
        if let Some(t) = self.time_limit_secs {
            if !(t > 0.0) {
                return Err(invalid("time_limit_secs must be positive"));
            }
        }
        Ok(())
    }

    pub fn budget(&self, algorithm: Algorithm) -> usize {
        self.max_iterations.unwrap_or(match algorithm {
            Algorithm::Sequential => Self::SEQUENTIAL_BUDGET,
            Algorithm::Grape => Self::GRAPE_BUDGET,
        })
    }
}

/// Outcome of one sweep or iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateReport {
    pub fidelity_before: f64,
    pub fidelity_after: f64,
    /// Time steps (sequential) or iterations (global) whose update was kept.
    pub accepted: usize,
}

fn check_inputs(model: &HamiltonianModel, target: &ComplexMatrix, pulse: &PiecewisePulse) -> Result<()> {
    if target.shape() != (model.dim(), model.dim()) {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: target.nrows(),
        });
    }
    if pulse.num_controls() != model.num_controls() {
        return Err(Error::DimensionMismatch {
            expected: model.num_controls(),
            found: pulse.num_controls(),
        });
    }
    Ok(())
}

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Numeric(format!("non-finite {what}")))
    }
}

/// Largest `eps >= 0` with `|u_m + eps d_m| <= bound` for every `m`.
fn max_step_within(bound: f64, u: &[f64], d: &[f64]) -> f64 {
    u.iter().zip(d).fold(f64::INFINITY, |acc, (&u, &d)| {
        if d == 0.0 {
            acc
        } else {
            let room = if d > 0.0 { bound - u } else { bound + u };
            acc.min((room / d.abs()).max(0.0))
        }
    })
}

fn stepped(u: &[f64], d: &[f64], eps: f64, bound: Option<f64>) -> Vec<f64> {
    u.iter()
        .zip(d)
        .map(|(&u, &d)| {
            let v = u + eps * d;
            match bound {
                Some(c) => v.clamp(-c, c),
                None => v,
            }
        })
        .collect()
}

/// The increments `g_mk` for all controls and steps, indexed `[m][k]`.
pub fn gradient(model: &HamiltonianModel, target: &ComplexMatrix, pulse: &PiecewisePulse) -> Result<Vec<Vec<f64>>> {
    check_inputs(model, target, pulse)?;
    let props = step_propagators(model, pulse)?;
    gradient_from_props(model, target, &props)
}

fn gradient_from_props(
    model: &HamiltonianModel,
    target: &ComplexMatrix,
    props: &[ComplexMatrix],
) -> Result<Vec<Vec<f64>>> {
    let dim = model.dim();
    let steps = props.len();
    // prefixes[k] = U_{k-1} ... U_0
    let mut prefixes = Vec::with_capacity(steps);
    let mut p = identity(dim);
    let mut tmp = identity(dim);
    for u in props {
        prefixes.push(p.clone());
        mul_into(u, &p, &mut tmp);
        std::mem::swap(&mut p, &mut tmp);
    }
    let mut g = vec![vec![0.0; steps]; model.num_controls()];
    let mut suffix = target.adjoint();
    let mut ps = identity(dim);
    for k in (0..steps).rev() {
        // suffix becomes W^dag U_{K-1} ... U_k
        mul_into(&suffix, &props[k], &mut tmp);
        std::mem::swap(&mut suffix, &mut tmp);
        mul_into(&prefixes[k], &suffix, &mut ps);
        for (m, h) in model.controls().iter().enumerate() {
            g[m][k] = finite(trace_of_product(&ps, h).im, "gradient")?;
        }
    }
    Ok(g)
}

/// Persistent state of the sequential algorithm across sweeps.
pub struct SequentialOptimizer<'a> {
    model: &'a HamiltonianModel,
    target: &'a ComplexMatrix,
    config: OptimizerConfig,
    pulse: PiecewisePulse,
    props: Vec<ComplexMatrix>,
    backward_next: bool,
    /// Last reported final-time fidelity.
    current: f64,
}

impl<'a> SequentialOptimizer<'a> {
    pub fn new(
        model: &'a HamiltonianModel,
        target: &'a ComplexMatrix,
        pulse: PiecewisePulse,
        config: OptimizerConfig,
    ) -> Result<Self> {
        config.validate()?;
        check_inputs(model, target, &pulse)?;
        let pulse = pulse.with_amplitude_bound(config.amplitude_bound)?;
        let props = step_propagators(model, &pulse)?;
        let current = finite(fidelity_strict(target, &ordered_product(&props)), "fidelity")?;
        Ok(Self {
            model,
            target,
            config,
            pulse,
            props,
            backward_next: false,
            current,
        })
    }

    pub fn pulse(&self) -> &PiecewisePulse {
        &self.pulse
    }

    pub fn into_pulse(self) -> PiecewisePulse {
        self.pulse
    }

    /// Final-time strict fidelity of the current pulse.
    pub fn fidelity(&self) -> f64 {
        self.current
    }

    /// One pass over all time steps. Each accepted step raises the fidelity
    /// as evaluated inside the sweep; if the recomputed end-of-sweep value
    /// still falls below the last reported one (round-off on near-stationary
    /// pulses) the whole sweep is discarded.
    pub fn sweep(&mut self) -> Result<UpdateReport> {
        let backward = self.config.alternate_sweeps && self.backward_next;
        self.backward_next = !self.backward_next;
        let saved = (self.pulse.clone(), self.props.clone());
        let mut report = if backward {
            self.sweep_backward()?
        } else {
            self.sweep_forward()?
        };
        report.fidelity_before = self.current;
        if report.fidelity_after < self.current {
            (self.pulse, self.props) = saved;
            report.fidelity_after = self.current;
            report.accepted = 0;
        }
        self.current = report.fidelity_after;
        Ok(report)
    }

    fn sweep_forward(&mut self) -> Result<UpdateReport> {
        let dim = self.model.dim();
        let steps = self.props.len();
        // suffix[k] = W^dag U_{K-1} ... U_k, suffix[K] = W^dag
        let mut suffix = vec![self.target.adjoint(); steps + 1];
        for k in (0..steps).rev() {
            let (head, tail) = suffix.split_at_mut(k + 1);
            mul_into(&tail[0], &self.props[k], &mut head[k]);
        }
        let before = suffix[0].trace().re / dim as f64;
        let mut prefix = identity(dim);
        let mut scratch = Scratch::new(dim);
        let mut accepted = 0;
        for k in 0..steps {
            // Tr[S_{k+1} U P] = Tr[(P S_{k+1}) U]
            mul_into(&prefix, &suffix[k + 1], &mut scratch.b);
            if self.update_step(k, &mut scratch)? {
                accepted += 1;
            }
            mul_into(&self.props[k], &prefix, &mut scratch.tmp);
            std::mem::swap(&mut prefix, &mut scratch.tmp);
        }
        let after = finite(trace_adjoint_product(self.target, &prefix).re / dim as f64, "fidelity")?;
        Ok(UpdateReport {
            fidelity_before: before,
            fidelity_after: after,
            accepted,
        })
    }

    fn sweep_backward(&mut self) -> Result<UpdateReport> {
        let dim = self.model.dim();
        let steps = self.props.len();
        // prefix[k] = U_{k-1} ... U_0
        let mut prefix = vec![identity(dim); steps + 1];
        for k in 0..steps {
            let (head, tail) = prefix.split_at_mut(k + 1);
            mul_into(&self.props[k], &head[k], &mut tail[0]);
        }
        let before = trace_adjoint_product(self.target, &prefix[steps]).re / dim as f64;
        let mut suffix = self.target.adjoint();
        let mut scratch = Scratch::new(dim);
        let mut accepted = 0;
        for k in (0..steps).rev() {
            // Tr[S U P_k] = Tr[(P_k S) U]
            mul_into(&prefix[k], &suffix, &mut scratch.b);
            if self.update_step(k, &mut scratch)? {
                accepted += 1;
            }
            mul_into(&suffix, &self.props[k], &mut scratch.tmp);
            std::mem::swap(&mut suffix, &mut scratch.tmp);
        }
        let after = finite(suffix.trace().re / dim as f64, "fidelity")?;
        Ok(UpdateReport {
            fidelity_before: before,
            fidelity_after: after,
            accepted,
        })
    }

    /// Line search on step `k` given `scratch.b` with
    /// `F(U') = Re Tr[b U'] / N`. Returns whether the step changed.
    fn update_step(&mut self, k: usize, scratch: &mut Scratch) -> Result<bool> {
        let dim = self.model.dim();
        let n = dim as f64;
        let dt = self.pulse.dt(k);
        mul_into(&scratch.b, &self.props[k], &mut scratch.c);
        let current = finite(scratch.c.trace().re / n, "fidelity")?;
        let mut direction = Vec::with_capacity(self.model.num_controls());
        for h in self.model.controls() {
            let g = finite(trace_of_product(&scratch.c, h).im, "gradient")?;
            direction.push(g / (n * dt));
        }
        if direction.iter().all(|d| *d == 0.0) {
            return Ok(false);
        }
        let u = self.pulse.controls_at(k);
        let bound = self.config.amplitude_bound;
        let mut eps = self.config.epsilon0;
        if let Some(c) = bound {
            eps = eps.min(max_step_within(c, &u, &direction));
        }
        if eps <= 0.0 {
            return Ok(false);
        }
        let mut best: Option<(f64, Vec<f64>, ComplexMatrix)> = None;
        for _ in 0..=self.config.max_backtracks {
            let candidate = stepped(&u, &direction, eps, bound);
            self.model.generator_into(&candidate, &mut scratch.h)?;
            let prop = expm_hermitian_prop(&scratch.h, dt)?;
            let f = finite(trace_of_product(&scratch.b, &prop).re / n, "fidelity")?;
            match &best {
                // First acceptable step found; one more halving is tried
                // because the first non-decreasing step can overshoot the
                // optimum by up to a factor of two.
                Some((fb, _, _)) => {
                    if f > *fb {
                        best = Some((f, candidate, prop));
                    }
                    break;
                }
                None if f > current => best = Some((f, candidate, prop)),
                None => {}
            }
            eps *= self.config.backtrack_factor;
        }
        match best {
            Some((_, values, prop)) => {
                for (m, v) in values.into_iter().enumerate() {
                    self.pulse.set_amplitude(m, k, v)?;
                }
                self.props[k] = prop;
                Ok(true)
            }
            None => Ok(false),
        }
    }
}

struct Scratch {
    b: ComplexMatrix,
    c: ComplexMatrix,
    h: ComplexMatrix,
    tmp: ComplexMatrix,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        let z = ComplexMatrix::zeros(dim, dim);
        Self {
            b: z.clone(),
            c: z.clone(),
            h: z.clone(),
            tmp: z,
        }
    }
}

/// Persistent state of the global algorithm across iterations.
pub struct GrapeOptimizer<'a> {
    model: &'a HamiltonianModel,
    target: &'a ComplexMatrix,
    config: OptimizerConfig,
    pulse: PiecewisePulse,
    props: Vec<ComplexMatrix>,
    fidelity: f64,
    last_eps: Option<f64>,
}

impl<'a> GrapeOptimizer<'a> {
    pub fn new(
        model: &'a HamiltonianModel,
        target: &'a ComplexMatrix,
        pulse: PiecewisePulse,
        config: OptimizerConfig,
    ) -> Result<Self> {
        config.validate()?;
        check_inputs(model, target, &pulse)?;
        let pulse = pulse.with_amplitude_bound(config.amplitude_bound)?;
        let props = step_propagators(model, &pulse)?;
        let fidelity = product_fidelity(target, &props);
        Ok(Self {
            model,
            target,
            config,
            pulse,
            props,
            fidelity,
            last_eps: None,
        })
    }

    pub fn pulse(&self) -> &PiecewisePulse {
        &self.pulse
    }

    pub fn into_pulse(self) -> PiecewisePulse {
        self.pulse
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    /// One simultaneous update of every amplitude.
    ///
    /// The line search starts at `epsilon0`, or at twice the last accepted
    /// scale once one exists, and backtracks until the fidelity increases.
    pub fn iterate(&mut self) -> Result<UpdateReport> {
        let n = self.model.dim() as f64;
        let before = self.fidelity;
        let g = gradient_from_props(self.model, self.target, &self.props)?;
        let direction: Vec<Vec<f64>> = g
            .iter()
            .map(|row| row.iter().enumerate().map(|(k, v)| v / (n * self.pulse.dt(k))).collect())
            .collect();
        let report = |after, accepted| UpdateReport {
            fidelity_before: before,
            fidelity_after: after,
            accepted,
        };
        if direction.iter().flatten().all(|d| *d == 0.0) {
            return Ok(report(before, 0));
        }
        let mut eps = self.last_eps.map_or(self.config.epsilon0, |e| 2.0 * e);
        if let Some(c) = self.config.amplitude_bound {
            let flat_u: Vec<f64> = self.pulse.amplitudes().iter().flatten().copied().collect();
            let flat_d: Vec<f64> = direction.iter().flatten().copied().collect();
            eps = eps.min(max_step_within(c, &flat_u, &flat_d));
        }
        if eps <= 0.0 {
            return Ok(report(before, 0));
        }
        for _ in 0..=self.config.max_backtracks {
            let mut candidate = self.pulse.clone();
            for (m, row) in direction.iter().enumerate() {
                let next = stepped(&self.pulse.amplitudes()[m], row, eps, self.config.amplitude_bound);
                for (k, v) in next.into_iter().enumerate() {
                    candidate.set_amplitude(m, k, v)?;
                }
            }
            let props = step_propagators(self.model, &candidate)?;
            let f = finite(product_fidelity(self.target, &props), "fidelity")?;
            if f > before {
                self.pulse = candidate;
                self.props = props;
                self.fidelity = f;
                self.last_eps = Some(eps);
                return Ok(report(f, 1));
            }
            eps *= self.config.backtrack_factor;
        }
        self.last_eps = None;
        Ok(report(before, 0))
    }
}

/// `props[K-1] ... props[0]`.
fn ordered_product(props: &[ComplexMatrix]) -> ComplexMatrix {
    let dim = props.first().map_or(0, |p| p.nrows());
    let mut u = identity(dim);
    let mut tmp = u.clone();
    for p in props {
        mul_into(p, &u, &mut tmp);
        std::mem::swap(&mut u, &mut tmp);
    }
    u
}

fn product_fidelity(target: &ComplexMatrix, props: &[ComplexMatrix]) -> f64 {
    fidelity_strict(target, &ordered_product(props))
}

/// One sequential sweep applied to `pulse` in place.
pub fn sequential_sweep(
    model: &HamiltonianModel,
    target: &ComplexMatrix,
    pulse: &mut PiecewisePulse,
    config: &OptimizerConfig,
) -> Result<UpdateReport> {
    let mut opt = SequentialOptimizer::new(model, target, pulse.clone(), config.clone())?;
    let report = opt.sweep()?;
    *pulse = opt.into_pulse();
    Ok(report)
}

/// One global iteration applied to `pulse` in place.
pub fn grape_iteration(
    model: &HamiltonianModel,
    target: &ComplexMatrix,
    pulse: &mut PiecewisePulse,
    config: &OptimizerConfig,
) -> Result<UpdateReport> {
    let mut opt = GrapeOptimizer::new(model, target, pulse.clone(), config.clone())?;
    let report = opt.iterate()?;
    *pulse = opt.into_pulse();
    Ok(report)
}

/// Seeded uniform amplitudes in `[-s, s]`, clipped to the bound if any.
pub fn initial_guess(
    num_controls: usize,
    steps: usize,
    t_final: f64,
    config: &OptimizerConfig,
) -> Result<PiecewisePulse> {
    config.validate()?;
    let mut pulse = PiecewisePulse::uniform(num_controls, steps, t_final)?;
    let s = match config.amplitude_bound {
        Some(c) => config.initial_guess_scale.min(c),
        None => config.initial_guess_scale,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    for m in 0..num_controls {
        for k in 0..steps {
            let v = if s > 0.0 { rng.random_range(-s..=s) } else { 0.0 };
            pulse.set_amplitude(m, k, v)?;
        }
    }
    pulse.with_amplitude_bound(config.amplitude_bound)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationRecord {
    pub algorithm: Algorithm,
    pub config: OptimizerConfig,
    pub t_final: f64,
    pub steps: usize,
    /// Entry 0 is the initial guess; one entry per sweep or iteration after.
    pub fidelity_history: Vec<f64>,
    pub iterations: usize,
    pub sweeps_to_target: Option<usize>,
    pub converged: bool,
    pub final_fidelity: f64,
    pub final_phase_invariant_fidelity: f64,
    pub metrics: GateErrorMetrics,
    pub wall_time_secs: f64,
    #[serde(skip)]
    pub pulse: Option<PiecewisePulse>,
}

/// Random initial guess followed by [`synthesize_from`].
pub fn synthesize(
    model: &HamiltonianModel,
    target: &ComplexMatrix,
    t_final: f64,
    steps: usize,
    config: &OptimizerConfig,
    algorithm: Algorithm,
) -> Result<OptimizationRecord> {
    let pulse = initial_guess(model.num_controls(), steps, t_final, config)?;
    synthesize_from(model, target, pulse, config, algorithm, &mut |_, _| {})
}

/// Runs sweeps or iterations until the target fidelity or the budget is
/// reached. `observer(iteration, fidelity)` is called after each one.
pub fn synthesize_from(
    model: &HamiltonianModel,
    target: &ComplexMatrix,
    pulse: PiecewisePulse,
    config: &OptimizerConfig,
    algorithm: Algorithm,
    observer: &mut dyn FnMut(usize, f64),
) -> Result<OptimizationRecord> {
    let start = Instant::now();
    let budget = config.budget(algorithm);
    let t_final = pulse.duration();
    let steps = pulse.num_steps();
    let mut history = Vec::new();
    let mut reached = None;
    let out_of_time = || config.time_limit_secs.is_some_and(|l| start.elapsed().as_secs_f64() >= l);
    let final_pulse = match algorithm {
        Algorithm::Sequential => {
            let mut opt = SequentialOptimizer::new(model, target, pulse, config.clone())?;
            history.push(opt.fidelity());
            if history[0] >= config.target_fidelity {
                reached = Some(0);
            }
            while reached.is_none() && history.len() <= budget && !out_of_time() {
                let r = opt.sweep()?;
                history.push(r.fidelity_after);
                observer(history.len() - 1, r.fidelity_after);
                if r.fidelity_after >= config.target_fidelity {
                    reached = Some(history.len() - 1);
                }
            }
            opt.into_pulse()
        }
        Algorithm::Grape => {
            let mut opt = GrapeOptimizer::new(model, target, pulse, config.clone())?;
            history.push(opt.fidelity());
            if history[0] >= config.target_fidelity {
                reached = Some(0);
            }
            while reached.is_none() && history.len() <= budget && !out_of_time() {
                let r = opt.iterate()?;
                history.push(r.fidelity_after);
                observer(history.len() - 1, r.fidelity_after);
                if r.fidelity_after >= config.target_fidelity {
                    reached = Some(history.len() - 1);
                }
                if r.accepted == 0 && r.fidelity_after < config.target_fidelity && stalled(&history) {
                    break;
                }
            }
            opt.into_pulse()
        }
    };
    let u = crate::propagate::propagate(model, &final_pulse, None)?.unitary;
    Ok(OptimizationRecord {
        algorithm,
        config: config.clone(),
        t_final,
        steps,
        iterations: history.len() - 1,
        sweeps_to_target: reached,
        converged: reached.is_some(),
        final_fidelity: fidelity_strict(target, &u),
        final_phase_invariant_fidelity: fidelity_phase_invariant(target, &u),
        metrics: gate_error_metrics(target, &u)?,
        fidelity_history: history,
        wall_time_secs: start.elapsed().as_secs_f64(),
        pulse: Some(final_pulse),
    })
}

/// A failed global line search from a fresh `epsilon0` after a failed warm
/// start means no descent is available at machine precision.
fn stalled(history: &[f64]) -> bool {
    let n = history.len();
    n >= 3 && history[n - 1] == history[n - 2] && history[n - 2] == history[n - 3]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    J,
    DeltaOmega,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::J => "J",
            SweepVariable::DeltaOmega => "delta_omega",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "J" | "j" => Ok(SweepVariable::J),
            "delta_omega" => Ok(SweepVariable::DeltaOmega),
            other => Err(invalid(format!("unknown sweep variable '{other}' (expected J or delta_omega)"))),
        }
    }
}

/// Iteration-count experiment on the three-qubit bit-flip code under global
/// control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    /// Coupling used while sweeping `delta_omega`.
    pub j: f64,
    /// Frequency spacing used while sweeping `J`.
    pub delta_omega: f64,
    pub center_omega: f64,
    pub gate: GateName,
    pub t_final: f64,
    pub steps: usize,
    pub seeds: Vec<u64>,
    pub config: OptimizerConfig,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            variable: SweepVariable::J,
            values: vec![0.5, 1.0, 2.0, 4.0],
            j: 2.0,
            delta_omega: 2.0,
            center_omega: 10.0,
            gate: GateName::X,
            t_final: 10.0,
            steps: 80,
            seeds: vec![1, 2, 3],
            config: OptimizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    /// Per seed; `None` when the budget ran out.
    pub iterations: Vec<Option<usize>>,
}

impl SweepRow {
    /// Median with non-converged runs ranked above every converged count;
    /// `None` when the median itself did not converge.
    pub fn median(&self) -> Option<f64> {
        let mut v: Vec<Option<usize>> = self.iterations.clone();
        if v.is_empty() {
            return None;
        }
        v.sort_by_key(|x| x.unwrap_or(usize::MAX));
        let mid = v.len() / 2;
        if v.len() % 2 == 1 {
            v[mid].map(|x| x as f64)
        } else {
            match (v[mid - 1], v[mid]) {
                (Some(a), Some(b)) => Some((a + b) as f64 / 2.0),
                _ => None,
            }
        }
    }
}

pub fn iteration_sweep_experiment(settings: &SweepSettings) -> Result<Vec<SweepRow>> {
    iteration_sweep_with_progress(settings, &mut |_, _, _| {})
}

/// As [`iteration_sweep_experiment`], calling `progress(value, seed, result)`
/// after each run.
pub fn iteration_sweep_with_progress(
    settings: &SweepSettings,
    progress: &mut dyn FnMut(f64, u64, Option<usize>),
) -> Result<Vec<SweepRow>> {
    if settings.values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("sweep values must be finite"));
    }
    if settings.seeds.is_empty() {
        return Err(invalid("at least one seed required"));
    }
    let code = bitflip3_code();
    let target = target_gate(&code, settings.gate)?.matrix;
    let mut rows = Vec::with_capacity(settings.values.len());
    for &value in &settings.values {
        let (delta, j) = match settings.variable {
            SweepVariable::J => (settings.delta_omega, value),
            SweepVariable::DeltaOmega => (value, settings.j),
        };
        let params = GlobalModelParams::evenly_spaced(code.num_qubits(), settings.center_omega, delta, j);
        let model = build_global_optimal(&params)?;
        let mut iterations = Vec::with_capacity(settings.seeds.len());
        for &seed in &settings.seeds {
            let config = OptimizerConfig {
                rng_seed: seed,
                ..settings.config.clone()
            };
            let record = synthesize(&model, &target, settings.t_final, settings.steps, &config, Algorithm::Sequential)?;
            progress(value, seed, record.sweeps_to_target);
            iterations.push(record.sweeps_to_target);
        }
        rows.push(SweepRow { value, iterations });
    }
    Ok(rows)
}

/// Columns `value, seed_<s>..., median`; non-converged runs print as `nc`.
pub fn sweep_csv(variable: SweepVariable, seeds: &[u64], rows: &[SweepRow]) -> String {
    let mut out = String::from(variable.as_str());
    for s in seeds {
        out.push_str(&format!(",seed_{s}"));
    }
    out.push_str(",median\n");
    let show = |x: Option<String>| x.unwrap_or_else(|| "nc".into());
    for r in rows {
        out.push_str(&format!("{:?}", r.value));
        for it in &r.iterations {
            out.push(',');
            out.push_str(&show(it.map(|v| v.to_string())));
        }
        out.push(',');
        out.push_str(&show(r.median().map(|m| format!("{m:?}"))));
        out.push('\n');
    }
    out
}
