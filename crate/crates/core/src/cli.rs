// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment driver behind the `ftgate` binary.
//!
//! Experiments are described by flat `key = value` files. Every run writes
//! into a fresh directory: `pulse.csv`, `trajectory.csv`, `metrics.json` and
//! `manifest.json`, the last holding the fully resolved configuration so the
//! run can be repeated from it alone.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::json;

use crate::codes::{bitflip3_code, five_qubit_code, target_gate, CodeKind, CodeSpec};
use crate::error::{Error, Result};
use crate::gates::{
    composite_ry_check, euler_pulse_length, euler_sequence, local_duration, local_sequence, physical_rotation,
    sequence_product, standard_gate, Axis, GateName, RotationStep,
};
use crate::linalg::{
    gate_error_metrics, identity, kron_all, max_abs_diff, sigma_x, unitarity_defect, ComplexMatrix, StateVector,
    C64,
};
use crate::models::{
    build_global_optimal, build_local_optimal, gaussian_pi_field, local_geometric_schedule, ContinuousField,
    GlobalModelParams, HamiltonianModel, LocalModelParams,
};
use crate::optimize::{
    initial_guess, iteration_sweep_with_progress, sweep_csv, synthesize_from, Algorithm, OptimizerConfig,
    SweepSettings, SweepVariable,
};
use crate::propagate::{
    fidelity_phase_invariant, propagate, simulate_gaussian_baseline, BaselineParams, RecordOptions,
    DEFAULT_MAX_SAMPLES,
};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "FTGATE_OUTPUT_ROOT";
pub const DEFAULT_OUTPUT_ROOT: &str = "ftgate-runs";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNCONVERGED: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Synthesize,
    BaselineGlobal,
    BaselineLocal,
    Sweep,
    Verify,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Synthesize => "synthesize",
            Mode::BaselineGlobal => "baseline-global",
            Mode::BaselineLocal => "baseline-local",
            Mode::Sweep => "sweep",
            Mode::Verify => "verify",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "synthesize" => Mode::Synthesize,
            "baseline-global" => Mode::BaselineGlobal,
            "baseline-local" => Mode::BaselineLocal,
            "sweep" => Mode::Sweep,
            "verify" => Mode::Verify,
            _ => return Err(format!("unknown mode '{s}'")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Global,
    Local,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Global => "global",
            ModelKind::Local => "local",
        }
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "global" => Ok(ModelKind::Global),
            "local" => Ok(ModelKind::Local),
            _ => Err(format!("unknown model '{s}' (expected global or local)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    Product0,
    Logical0,
    LogicalPlus,
}

impl InitialState {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitialState::Product0 => "product0",
            InitialState::Logical0 => "logical0",
            InitialState::LogicalPlus => "logical_plus",
        }
    }
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "product0" => Ok(InitialState::Product0),
            "logical0" => Ok(InitialState::Logical0),
            "logical_plus" => Ok(InitialState::LogicalPlus),
            _ => Err(format!("unknown initial_state '{s}' (expected product0, logical0 or logical_plus)")),
        }
    }
}

const KEYS: &[&str] = &[
    "mode",
    "code",
    "gate",
    "model",
    "omegas",
    "delta_omega",
    "center_omega",
    "J",
    "Omega",
    "t_F",
    "K",
    "algorithm",
    "epsilon0",
    "backtrack_factor",
    "max_backtracks",
    "target_fidelity",
    "max_iterations",
    "amplitude_bound",
    "seed",
    "initial_guess_scale",
    "alternate_sweeps",
    "time_limit",
    "q",
    "dt",
    "sweep_variable",
    "sweep_values",
    "seeds",
    "initial_state",
    "output_dir",
    "require_convergence",
    "max_samples",
];

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub code: CodeKind,
    pub gate: GateName,
    pub model: ModelKind,
    pub omegas: Vec<f64>,
    pub delta_omega: f64,
    pub center_omega: f64,
    pub j: f64,
    pub omega_rabi: f64,
    pub t_final: f64,
    pub steps: usize,
    pub algorithm: Algorithm,
    pub optimizer: OptimizerConfig,
    pub q: f64,
    pub dt: Option<f64>,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub initial_state: InitialState,
    pub output_dir: Option<PathBuf>,
    pub require_convergence: bool,
    pub max_samples: usize,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

struct RawConfig {
    values: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected key=value, found '{content}'")))?;
            let key = key.trim();
            let value = value.trim();
            if !KEYS.contains(&key) {
                return Err(config_err(line, format!("unknown key '{key}'")));
            }
            if value.is_empty() {
                return Err(config_err(line, format!("empty value for '{key}'")));
            }
            if values.insert(key.to_string(), (line, value.to_string())).is_some() {
                return Err(config_err(line, format!("duplicate key '{key}'")));
            }
        }
        Ok(Self { values })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| config_err(*line, format!("invalid value for '{key}': {e}"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<T>()
                        .map_err(|e| config_err(*line, format!("invalid entry '{s}' in '{key}': {e}")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn line(&self, key: &str) -> usize {
        self.values.get(key).map_or(0, |(l, _)| *l)
    }
}

impl ExperimentConfig {
    /// Parses and validates a config file. Errors carry the offending line;
    /// line 0 refers to the file as a whole.
    pub fn parse(text: &str) -> Result<Self> {
        let raw = RawConfig::parse(text)?;
        let mode: Mode = raw.get("mode")?.ok_or_else(|| config_err(0, "missing required key 'mode'"))?;
        let code: CodeKind = raw.get("code")?.unwrap_or(CodeKind::FiveQubit);
        let model: ModelKind = raw.get("model")?.unwrap_or(ModelKind::Global);
        let n = code.num_qubits();
        let delta_omega: f64 = raw.get("delta_omega")?.unwrap_or(2.0);
        let center_omega: f64 = raw.get("center_omega")?.unwrap_or(10.0);
        let omegas = match raw.list::<f64>("omegas")? {
            Some(w) => w,
            None => GlobalModelParams::evenly_spaced(n, center_omega, delta_omega, 0.0).omegas,
        };
        let j: f64 = raw.get("J")?.unwrap_or(match mode {
            Mode::BaselineGlobal => 0.0,
            _ => 1.0,
        });
        let omega_rabi: f64 = raw.get("Omega")?.unwrap_or(10.0);
        let (default_tf, default_k) = match (mode, code, model) {
            (Mode::BaselineGlobal, _, _) => (440.0, 0),
            (_, CodeKind::Bitflip3, _) => (10.0, 80),
            (_, CodeKind::FiveQubit, ModelKind::Local) => (30.0, 300),
            (_, CodeKind::FiveQubit, ModelKind::Global) => (125.0, 1250),
        };
        let t_final: f64 = raw.get("t_F")?.unwrap_or(default_tf);
        let steps: usize = raw.get("K")?.unwrap_or(default_k);
        let defaults = match model {
            ModelKind::Local => OptimizerConfig::for_local_model(omega_rabi),
            ModelKind::Global => OptimizerConfig::default(),
        };
        let algorithm: Algorithm = raw.get("algorithm")?.unwrap_or(Algorithm::Sequential);
        let mut optimizer = OptimizerConfig {
            epsilon0: raw.get("epsilon0")?.unwrap_or(defaults.epsilon0),
            backtrack_factor: raw.get("backtrack_factor")?.unwrap_or(defaults.backtrack_factor),
            max_backtracks: raw.get("max_backtracks")?.unwrap_or(defaults.max_backtracks),
            target_fidelity: raw.get("target_fidelity")?.unwrap_or(defaults.target_fidelity),
            max_iterations: raw.get("max_iterations")?.or(defaults.max_iterations),
            amplitude_bound: raw.get("amplitude_bound")?,
            rng_seed: raw.get("seed")?.unwrap_or(defaults.rng_seed),
            initial_guess_scale: raw.get("initial_guess_scale")?.unwrap_or(defaults.initial_guess_scale),
            alternate_sweeps: raw.get("alternate_sweeps")?.unwrap_or(false),
            time_limit_secs: raw.get("time_limit")?,
        };
        optimizer.max_iterations = Some(optimizer.budget(algorithm));
        let sweep_defaults = SweepSettings::default();
        let sweep_variable: SweepVariable = raw.get("sweep_variable")?.unwrap_or(SweepVariable::J);
        let config = Self {
            mode,
            code,
            gate: raw.get("gate")?.unwrap_or(GateName::X),
            model,
            omegas,
            delta_omega,
            center_omega,
            j,
            omega_rabi,
            t_final,
            steps,
            algorithm,
            optimizer,
            q: raw.get("q")?.unwrap_or(0.01),
            dt: raw.get("dt")?,
            sweep_variable,
            sweep_values: raw.list("sweep_values")?.unwrap_or(match sweep_variable {
                SweepVariable::J => sweep_defaults.values.clone(),
                SweepVariable::DeltaOmega => vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            }),
            seeds: raw.list("seeds")?.unwrap_or(sweep_defaults.seeds.clone()),
            initial_state: raw.get("initial_state")?.unwrap_or(match mode {
                Mode::BaselineGlobal => InitialState::Product0,
                _ => InitialState::Logical0,
            }),
            output_dir: raw.get::<String>("output_dir")?.map(PathBuf::from),
            require_convergence: raw.get("require_convergence")?.unwrap_or(false),
            max_samples: raw.get("max_samples")?.unwrap_or(DEFAULT_MAX_SAMPLES),
        };
        config.validate(&raw)?;
        Ok(config)
    }

    fn validate(&self, raw: &RawConfig) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_err(raw.line(key), format!("'{key}' must be positive")))
            }
        };
        positive("t_F", self.t_final)?;
        positive("Omega", self.omega_rabi)?;
        positive("q", self.q)?;
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        if !self.j.is_finite() {
            return Err(config_err(raw.line("J"), "'J' must be finite"));
        }
        if self.omegas.len() != self.code.num_qubits() && self.mode != Mode::BaselineGlobal {
            return Err(config_err(
                raw.line("omegas"),
                format!("'omegas' needs {} entries for code {}", self.code.num_qubits(), self.code),
            ));
        }
        if self.omegas.is_empty() || self.omegas.len() > 8 {
            return Err(config_err(raw.line("omegas"), "'omegas' needs between 1 and 8 entries"));
        }
        if matches!(self.mode, Mode::Synthesize) && self.steps == 0 {
            return Err(config_err(raw.line("K"), "'K' must be at least 1"));
        }
        if self.max_samples < 2 {
            return Err(config_err(raw.line("max_samples"), "'max_samples' must be at least 2"));
        }
        if self.mode == Mode::Sweep {
            if self.code != CodeKind::Bitflip3 {
                return Err(config_err(raw.line("code"), "sweep mode runs on code=bitflip3"));
            }
            if self.seeds.is_empty() {
                return Err(config_err(raw.line("seeds"), "'seeds' must not be empty"));
            }
        }
        if self.mode == Mode::BaselineLocal && self.model != ModelKind::Local && raw.values.contains_key("model") {
            return Err(config_err(raw.line("model"), "baseline-local uses model=local"));
        }
        self.optimizer
            .validate()
            .map_err(|e| config_err(0, format!("optimizer settings: {e}")))
    }

    /// Every key with its resolved value; parsing the result reproduces `self`.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("mode", self.mode.as_str().into());
        put("code", self.code.as_str().into());
        put("gate", self.gate.as_str().into());
        put("model", self.model.as_str().into());
        put("omegas", list(&self.omegas));
        put("delta_omega", format!("{:?}", self.delta_omega));
        put("center_omega", format!("{:?}", self.center_omega));
        put("J", format!("{:?}", self.j));
        put("Omega", format!("{:?}", self.omega_rabi));
        put("t_F", format!("{:?}", self.t_final));
        put("K", self.steps.to_string());
        put("algorithm", self.algorithm.as_str().into());
        let o = &self.optimizer;
        put("epsilon0", format!("{:?}", o.epsilon0));
        put("backtrack_factor", format!("{:?}", o.backtrack_factor));
        put("max_backtracks", o.max_backtracks.to_string());
        put("target_fidelity", format!("{:?}", o.target_fidelity));
        put("max_iterations", o.budget(self.algorithm).to_string());
        if let Some(c) = o.amplitude_bound {
            put("amplitude_bound", format!("{c:?}"));
        }
        put("seed", o.rng_seed.to_string());
        put("initial_guess_scale", format!("{:?}", o.initial_guess_scale));
        put("alternate_sweeps", o.alternate_sweeps.to_string());
        if let Some(t) = o.time_limit_secs {
            put("time_limit", format!("{t:?}"));
        }
        put("q", format!("{:?}", self.q));
        if let Some(dt) = self.dt {
            put("dt", format!("{dt:?}"));
        }
        put("sweep_variable", self.sweep_variable.as_str().into());
        put("sweep_values", list(&self.sweep_values));
        put(
            "seeds",
            self.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
        );
        put("initial_state", self.initial_state.as_str().into());
        if let Some(d) = &self.output_dir {
            put("output_dir", d.display().to_string());
        }
        put("require_convergence", self.require_convergence.to_string());
        put("max_samples", self.max_samples.to_string());
        m
    }

    pub fn to_config_text(&self) -> String {
        self.resolved().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Result of a run: exit status plus the run directory, if one was made.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub run_dir: Option<PathBuf>,
    pub summary: String,
}

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

/// Creates `dir` (and parents), failing if it already exists.
pub fn create_fresh_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        return Err(Error::InvalidArgument(format!(
            "output directory {} already exists; runs never overwrite",
            dir.display()
        )));
    }
    if let Some(parent) = dir.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::create_dir(dir)?;
    Ok(())
}

fn default_run_dir(config: &ExperimentConfig) -> PathBuf {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    output_root().join(format!(
        "{}-{}-{}-seed{}-{stamp}",
        config.mode.as_str(),
        config.code,
        config.gate,
        config.optimizer.rng_seed
    ))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn initial_vector(state: InitialState, code: &CodeSpec, num_qubits: usize) -> StateVector {
    match state {
        InitialState::Product0 => {
            let mut v = StateVector::zeros(1 << num_qubits);
            v[0] = C64::new(1.0, 0.0);
            v
        }
        InitialState::Logical0 => code.codeword(0).clone(),
        InitialState::LogicalPlus => code.logical_plus(),
    }
}

/// Reads a config file or a run manifest and executes it. `out` overrides
/// the configured output directory.
pub fn run_path(path: &Path, out: Option<&Path>) -> Result<RunOutcome> {
    let text = fs::read_to_string(path)?;
    let mut config = if text.trim_start().starts_with('{') {
        let manifest: serde_json::Value = serde_json::from_str(&text)?;
        let map = manifest
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| config_err(0, "manifest has no 'config' object"))?;
        let mut body = String::new();
        for (k, v) in map {
            let v = v.as_str().ok_or_else(|| config_err(0, format!("manifest value for '{k}' is not a string")))?;
            let _ = writeln!(body, "{k} = {v}");
        }
        let mut config = ExperimentConfig::parse(&body)?;
        // A manifest names the directory it was written to; reruns go elsewhere.
        if out.is_none() {
            config.output_dir = None;
        }
        config
    } else {
        ExperimentConfig::parse(&text)?
    };
    if let Some(o) = out {
        config.output_dir = Some(o.to_path_buf());
    }
    run_config(&config)
}

pub fn run_config(config: &ExperimentConfig) -> Result<RunOutcome> {
    if config.mode == Mode::Verify {
        let report = verify_suite();
        return Ok(RunOutcome {
            exit_code: if report.all_passed() { EXIT_OK } else { EXIT_FAILURE },
            run_dir: None,
            summary: report.render(),
        });
    }
    let dir = config.output_dir.clone().unwrap_or_else(|| default_run_dir(config));
    create_fresh_dir(&dir)?;
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "mode": config.mode.as_str(),
        "seed": config.optimizer.rng_seed,
        "config": config.resolved(),
    });
    write_json(&dir.join("manifest.json"), &manifest)?;
    let (exit_code, summary) = match config.mode {
        Mode::Synthesize => run_synthesize(config, &dir)?,
        Mode::BaselineGlobal => run_baseline_global(config, &dir)?,
        Mode::BaselineLocal => run_baseline_local(config, &dir)?,
        Mode::Sweep => run_sweep(config, &dir)?,
        Mode::Verify => unreachable!("handled above"),
    };
    Ok(RunOutcome {
        exit_code,
        run_dir: Some(dir),
        summary,
    })
}

fn build_model(config: &ExperimentConfig) -> Result<HamiltonianModel> {
    match config.model {
        ModelKind::Global => build_global_optimal(&GlobalModelParams {
            omegas: config.omegas.clone(),
            j: config.j,
        }),
        ModelKind::Local => build_local_optimal(&LocalModelParams {
            omega: config.omega_rabi,
            j: config.j,
            num_qubits: config.code.num_qubits(),
        }),
    }
}

fn run_synthesize(config: &ExperimentConfig, dir: &Path) -> Result<(i32, String)> {
    let code = config.code.build();
    let target = target_gate(&code, config.gate)?;
    write_json(&dir.join("target.json"), &target.to_json())?;
    let model = build_model(config)?;
    let pulse = initial_guess(model.num_controls(), config.steps, config.t_final, &config.optimizer)?;
    let mut observer = |i: usize, f: f64| {
        if i % 100 == 0 {
            eprintln!("iteration {i}: fidelity {f:.8}");
        }
    };
    let record = synthesize_from(&model, &target.matrix, pulse, &config.optimizer, config.algorithm, &mut observer)?;
    let pulse = record.pulse.clone().expect("synthesis returns its pulse");
    fs::write(dir.join("pulse.csv"), pulse.to_csv())?;
    let prop = propagate(&model, &pulse, Some(RecordOptions {
        max_samples: config.max_samples,
    }))?;
    let trajectory = prop.trajectory.expect("recording requested");
    let psi0 = initial_vector(config.initial_state, &code, code.num_qubits());
    fs::write(dir.join("trajectory.csv"), trajectory.to_csv(&psi0, Some(&code))?)?;
    let mut metrics = serde_json::to_value(&record)?;
    metrics["gate"] = json!(config.gate.as_str());
    metrics["code"] = json!(config.code.as_str());
    metrics["model"] = json!(config.model.as_str());
    write_json(&dir.join("metrics.json"), &metrics)?;
    let summary = format!(
        "converged={} fidelity={:.8} iterations={} hs_norm={:.6}",
        record.converged, record.final_fidelity, record.iterations, record.metrics.hs_norm
    );
    let code = if config.require_convergence && !record.converged {
        EXIT_UNCONVERGED
    } else {
        EXIT_OK
    };
    Ok((code, summary))
}

fn run_baseline_global(config: &ExperimentConfig, dir: &Path) -> Result<(i32, String)> {
    let params = BaselineParams {
        omegas: config.omegas.clone(),
        j: config.j,
        q: config.q,
        t_final: config.t_final,
        dt: config.dt,
        max_samples: config.max_samples,
    };
    let result = simulate_gaussian_baseline(&params)?;
    let field = gaussian_pi_field(config.q, &config.omegas, config.t_final)?;
    fs::write(dir.join("pulse.csv"), field.sample_midpoints(result.steps)?.to_csv())?;
    let n = config.omegas.len();
    let five = five_qubit_code();
    let code = (n == 5).then_some(&five);
    let psi0 = match (config.initial_state, code) {
        (InitialState::Product0, _) | (_, None) => initial_vector(InitialState::Product0, &five, n),
        (s, Some(c)) => initial_vector(s, c, n),
    };
    fs::write(dir.join("trajectory.csv"), result.trajectory.to_csv(&psi0, code)?)?;
    let mut fid = String::from("t,phase_invariant_fidelity\n");
    for (t, f) in result.trajectory.times.iter().zip(&result.fidelity) {
        let _ = writeln!(fid, "{t:?},{f:?}");
    }
    fs::write(dir.join("fidelity.csv"), fid)?;
    let bloch = result.trajectory.qubit_bloch(&psi0)?;
    let min_bloch_norm = bloch
        .iter()
        .flatten()
        .map(|b| (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt())
        .fold(f64::INFINITY, f64::min);
    let metrics = json!({
        "max_phase_invariant_fidelity": result.max_fidelity,
        "time_of_max": result.time_of_max,
        "final_phase_invariant_fidelity": result.final_fidelity,
        "steps": result.steps,
        "dt": result.dt,
        "min_qubit_bloch_norm": min_bloch_norm,
    });
    write_json(&dir.join("metrics.json"), &metrics)?;
    Ok((
        EXIT_OK,
        format!(
            "max_phase_invariant_fidelity={:.6} at t={:.3}",
            result.max_fidelity, result.time_of_max
        ),
    ))
}

fn run_baseline_local(config: &ExperimentConfig, dir: &Path) -> Result<(i32, String)> {
    let code = config.code.build();
    let n = code.num_qubits();
    let model = build_local_optimal(&LocalModelParams {
        omega: config.omega_rabi,
        j: config.j,
        num_qubits: n,
    })?;
    let pulse = local_geometric_schedule(config.gate, config.omega_rabi, n)?;
    fs::write(dir.join("pulse.csv"), pulse.to_csv())?;
    let prop = propagate(&model, &pulse, Some(RecordOptions {
        max_samples: config.max_samples,
    }))?;
    let trajectory = prop.trajectory.expect("recording requested");
    let psi0 = initial_vector(config.initial_state, &code, n);
    fs::write(dir.join("trajectory.csv"), trajectory.to_csv(&psi0, Some(&code))?)?;
    let transversal = kron_all(&vec![standard_gate(config.gate); n]);
    let logical = target_gate(&code, config.gate)?.matrix;
    let metrics = json!({
        "duration": pulse.duration(),
        "transversal_phase_invariant_fidelity": fidelity_phase_invariant(&transversal, &prop.unitary),
        "logical_phase_invariant_fidelity": fidelity_phase_invariant(&logical, &prop.unitary),
        "logical_metrics": gate_error_metrics(&logical, &prop.unitary)?,
    });
    write_json(&dir.join("metrics.json"), &metrics)?;
    Ok((
        EXIT_OK,
        format!(
            "transversal fidelity={:.8} logical fidelity={:.8}",
            metrics["transversal_phase_invariant_fidelity"], metrics["logical_phase_invariant_fidelity"]
        ),
    ))
}

fn sweep_settings(config: &ExperimentConfig) -> SweepSettings {
    SweepSettings {
        variable: config.sweep_variable,
        values: config.sweep_values.clone(),
        j: config.j,
        delta_omega: config.delta_omega,
        center_omega: config.center_omega,
        gate: config.gate,
        t_final: config.t_final,
        steps: config.steps,
        seeds: config.seeds.clone(),
        config: config.optimizer.clone(),
    }
}

fn run_sweep(config: &ExperimentConfig, dir: &Path) -> Result<(i32, String)> {
    let settings = sweep_settings(config);
    let rows = iteration_sweep_with_progress(&settings, &mut |v, s, r| {
        eprintln!("{} = {v}: seed {s} -> {}", settings.variable.as_str(), r.map_or("nc".into(), |x| x.to_string()));
    })?;
    let csv = sweep_csv(settings.variable, &settings.seeds, &rows);
    fs::write(dir.join("sweep.csv"), &csv)?;
    let metrics = json!({
        "variable": settings.variable.as_str(),
        "rows": rows.iter().map(|r| json!({
            "value": r.value,
            "iterations": r.iterations,
            "median": r.median(),
        })).collect::<Vec<_>>(),
    });
    write_json(&dir.join("metrics.json"), &metrics)?;
    let all = rows.iter().all(|r| r.median().is_some());
    let code = if config.require_convergence && !all {
        EXIT_UNCONVERGED
    } else {
        EXIT_OK
    };
    Ok((code, csv))
}

/// Named pass/fail checks.
#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<(String, bool, String)>,
}

impl VerifyReport {
    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push((name.into(), ok, detail.into()));
    }

    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.1).count()
    }

    pub fn all_passed(&self) -> bool {
        self.passed() == self.checks.len()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, ok, detail) in &self.checks {
            let _ = writeln!(out, "{} {name}: {detail}", if *ok { "PASS" } else { "FAIL" });
        }
        let _ = writeln!(out, "{}/{} checks passed", self.passed(), self.checks.len());
        out
    }
}

fn overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    fidelity_phase_invariant(a, b)
}

/// Built-in identity checks: decompositions, codes, targets, norm identity.
pub fn verify_suite() -> VerifyReport {
    let mut r = VerifyReport::default();
    for g in GateName::ALL {
        let f = overlap(&standard_gate(g), &sequence_product(&euler_sequence(g)));
        r.check(format!("euler {g}"), f >= 1.0 - 1e-10, format!("fidelity {f:.15}"));
    }
    for g in GateName::ALL {
        let f = overlap(&standard_gate(g), &sequence_product(&local_sequence(g)));
        r.check(format!("local {g}"), f >= 1.0 - 1e-10, format!("fidelity {f:.15}"));
    }
    let mut worst: f64 = 1.0;
    for i in 0..20 {
        let phi = -1.4 + 0.14 * i as f64;
        let u = 10.0 * phi.tan();
        if let Ok(m) = composite_ry_check(u, 10.0) {
            worst = worst.min(overlap(&physical_rotation(Axis::Y, 4.0 * phi), &m));
        } else {
            worst = 0.0;
        }
    }
    r.check("composite y rotation", worst >= 1.0 - 1e-10, format!("worst fidelity {worst:.15}"));
    for code in [five_qubit_code(), bitflip3_code()] {
        let d = max_abs_diff(&code.displaced_gram(), &identity(code.dim()));
        r.check(format!("{} gram", code.kind()), d <= 1e-9, format!("max deviation {d:e}"));
        let mut worst = 0.0f64;
        for g in GateName::ALL {
            worst = worst.max(target_gate(&code, g).map_or(f64::INFINITY, |t| unitarity_defect(&t.matrix)));
        }
        r.check(format!("{} targets unitary", code.kind()), worst <= 1e-9, format!("max defect {worst:e}"));
    }
    let five = five_qubit_code();
    let d = target_gate(&five, GateName::X)
        .map_or(f64::INFINITY, |t| max_abs_diff(&t.matrix, &kron_all(&vec![sigma_x(); 5])));
    r.check("five_qubit X transversal", d <= 1e-9, format!("max deviation {d:e}"));
    let mut worst = 0.0f64;
    for n in [2usize, 8, 32] {
        for s in 0..5 {
            let w = pseudo_random_unitary(n, s);
            let u = pseudo_random_unitary(n, s + 100);
            let f = crate::propagate::fidelity_strict(&w, &u);
            let hs = gate_error_metrics(&w, &u).map_or(f64::INFINITY, |m| m.hs_norm);
            worst = worst.max((hs * hs - 2.0 * n as f64 * (1.0 - f)).abs());
        }
    }
    r.check("norm identity", worst <= 1e-9, format!("max deviation {worst:e}"));
    r
}

/// Deterministic unitary from a product of rotations; avoids a dependency on
/// a random source inside the CLI.
fn pseudo_random_unitary(n: usize, seed: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let a = ((i * 31 + j * 17 + seed * 7) as f64 * 0.618).sin();
            let b = if i == j { 0.0 } else { ((i * 13 + j * 29 + seed * 11) as f64 * 0.414).cos() };
            h[(i, j)] = C64::new(a, b);
            h[(j, i)] = C64::new(a, -b);
        }
    }
    crate::linalg::expm_hermitian_prop(&h, 1.0).expect("Hermitian by construction")
}

fn step_label(s: &RotationStep) -> String {
    let axis = if s.axis == Axis::X {
        "x"
    } else if s.axis == Axis::Y {
        "y"
    } else if s.axis == Axis::Z {
        "z"
    } else {
        "n"
    };
    let frac = s.angle / PI;
    let angle = match frac {
        f if (f - 1.0).abs() < 1e-12 => "pi".to_string(),
        f if (f - 2.0).abs() < 1e-12 => "2pi".to_string(),
        f if (f - 0.5).abs() < 1e-12 => "pi/2".to_string(),
        f if (f - 1.5).abs() < 1e-12 => "3pi/2".to_string(),
        f if (f - 0.25).abs() < 1e-12 => "pi/4".to_string(),
        f => format!("{f}pi"),
    };
    format!("R{axis}({angle})")
}

fn sequence_label(steps: &[RotationStep]) -> String {
    steps.iter().map(step_label).collect::<Vec<_>>().join(" ")
}

/// `a + b/sqrt(2)` rendered compactly, e.g. `1/√2` or `2+2/√2`.
fn duration_label(steps: &[RotationStep]) -> String {
    let x: f64 = steps.iter().filter(|s| s.axis == Axis::X).map(|s| s.angle / PI).sum();
    let n: f64 = steps.iter().filter(|s| s.axis != Axis::X).map(|s| s.angle / PI).sum();
    let num = |v: f64| {
        if (v - v.round()).abs() < 1e-12 {
            format!("{}", v.round() as i64)
        } else {
            format!("{v}")
        }
    };
    match (x != 0.0, n != 0.0) {
        (true, false) => num(x),
        (false, true) => format!("{}/√2", num(n)),
        (true, true) => format!("{}+{}/√2", num(x), num(n)),
        (false, false) => "0".into(),
    }
}

pub fn table1_csv() -> String {
    let mut out = String::from("gate,sequence,pulse_length_pi,fidelity\n");
    for g in GateName::ALL {
        let seq = euler_sequence(g);
        let f = overlap(&standard_gate(g), &sequence_product(&seq));
        let _ = writeln!(out, "{g},{},{:.2},{f:?}", sequence_label(&seq), euler_pulse_length(&seq));
    }
    out
}

pub fn table2_csv() -> String {
    let mut out = String::from("gate,sequence,duration_pi_over_2Omega,duration_value,fidelity\n");
    for g in GateName::ALL {
        let seq = local_sequence(g);
        let f = overlap(&standard_gate(g), &sequence_product(&seq));
        let _ = writeln!(
            out,
            "{g},{},{},{:?},{f:?}",
            sequence_label(&seq),
            duration_label(&seq),
            local_duration(&seq)
        );
    }
    out
}

/// A finished synthesis run found on disk.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub model: ModelKind,
    pub gate: GateName,
    pub metrics: serde_json::Value,
}

/// Scans `root` for converged five-qubit synthesis runs in the standard
/// settings (global: J=1, t_F=125, K=1250; local: Omega=10, J=1, t_F=30,
/// K=300).
pub fn find_table3_runs(root: &Path) -> Vec<RunSummary> {
    let mut found = Vec::new();
    let Ok(entries) = fs::read_dir(root) else {
        return found;
    };
    let mut dirs: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    dirs.sort();
    for dir in dirs {
        let read = |name: &str| -> Option<serde_json::Value> {
            serde_json::from_str(&fs::read_to_string(dir.join(name)).ok()?).ok()
        };
        let (Some(manifest), Some(metrics)) = (read("manifest.json"), read("metrics.json")) else {
            continue;
        };
        let c = &manifest["config"];
        let field = |k: &str| c[k].as_str().unwrap_or("");
        let num = |k: &str| field(k).parse::<f64>().ok();
        if field("mode") != "synthesize" || field("code") != "five_qubit" || metrics["converged"] != json!(true) {
            continue;
        }
        let Ok(model) = field("model").parse::<ModelKind>() else { continue };
        let standard = match model {
            ModelKind::Global => {
                num("J") == Some(1.0) && num("t_F") == Some(125.0) && field("K") == "1250"
            }
            ModelKind::Local => {
                num("J") == Some(1.0) && num("Omega") == Some(10.0) && num("t_F") == Some(30.0) && field("K") == "300"
            }
        };
        let Ok(gate) = field("gate").parse::<GateName>() else { continue };
        if standard {
            found.push(RunSummary {
                dir: dir.clone(),
                model,
                gate,
                metrics,
            });
        }
    }
    found
}

/// Config text for the standard Table 3 synthesis of `gate` under `model`.
pub fn table3_config(model: ModelKind, gate: GateName, output_dir: Option<&Path>) -> String {
    let mut s = format!("mode = synthesize\ncode = five_qubit\nmodel = {}\ngate = {gate}\nJ = 1\n", model.as_str());
    match model {
        ModelKind::Global => s.push_str("t_F = 125\nK = 1250\n"),
        ModelKind::Local => s.push_str("Omega = 10\nt_F = 30\nK = 300\n"),
    }
    if let Some(d) = output_dir {
        let _ = writeln!(s, "output_dir = {}", d.display());
    }
    s
}

pub fn table3_csv(runs: &[RunSummary]) -> String {
    let mut out = String::from("setting,gate,fidelity,op_norm,hs_norm,max_elem,run\n");
    for model in [ModelKind::Global, ModelKind::Local] {
        for g in GateName::ALL {
            if let Some(r) = runs.iter().find(|r| r.model == model && r.gate == g) {
                let m = &r.metrics;
                let _ = writeln!(
                    out,
                    "{},{g},{},{},{},{},{}",
                    model.as_str(),
                    m["final_fidelity"],
                    m["metrics"]["op_norm"],
                    m["metrics"]["hs_norm"],
                    m["metrics"]["max_elem"],
                    r.dir.display()
                );
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    Table1,
    Table2,
    Table3,
    Fig9,
}

impl FromStr for TableId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "table1" => Ok(TableId::Table1),
            "table2" => Ok(TableId::Table2),
            "table3" => Ok(TableId::Table3),
            "fig9" => Ok(TableId::Fig9),
            _ => Err(format!("unknown table '{s}' (expected table1, table2, table3 or fig9)")),
        }
    }
}

/// Writes the requested artifact into `out` (created fresh) and returns
/// the exit status with a human-readable summary.
pub fn reproduce(table: TableId, out: &Path, runs_root: &Path, run_missing: bool) -> Result<RunOutcome> {
    match table {
        TableId::Table1 | TableId::Table2 => {
            create_fresh_dir(out)?;
            let (name, csv) = if table == TableId::Table1 {
                ("table1.csv", table1_csv())
            } else {
                ("table2.csv", table2_csv())
            };
            fs::write(out.join(name), &csv)?;
            Ok(RunOutcome {
                exit_code: EXIT_OK,
                run_dir: Some(out.to_path_buf()),
                summary: csv,
            })
        }
        TableId::Table3 => {
            let mut runs = find_table3_runs(runs_root);
            let missing: Vec<(ModelKind, GateName)> = [ModelKind::Global, ModelKind::Local]
                .into_iter()
                .flat_map(|m| GateName::ALL.into_iter().map(move |g| (m, g)))
                .filter(|(m, g)| !runs.iter().any(|r| r.model == *m && r.gate == *g))
                .collect();
            if !missing.is_empty() && !run_missing {
                let mut msg = format!(
                    "table3 needs converged synthesis runs under {}; missing {} of 14.\n\
                     Run each of these configs with `ftgate run <file>` (or pass --run-missing):\n",
                    runs_root.display(),
                    missing.len()
                );
                for (m, g) in &missing {
                    let _ = writeln!(msg, "--- {} {g}\n{}", m.as_str(), table3_config(*m, *g, None));
                }
                return Ok(RunOutcome {
                    exit_code: EXIT_UNCONVERGED,
                    run_dir: None,
                    summary: msg,
                });
            }
            for (m, g) in missing {
                let dir = runs_root.join(format!("table3-{}-{g}", m.as_str()));
                let config = ExperimentConfig::parse(&table3_config(m, g, Some(&dir)))?;
                let outcome = run_config(&config)?;
                eprintln!("{} {g}: {}", m.as_str(), outcome.summary);
            }
            runs = find_table3_runs(runs_root);
            create_fresh_dir(out)?;
            let csv = table3_csv(&runs);
            fs::write(out.join("table3.csv"), &csv)?;
            let complete = runs.len() >= 14;
            Ok(RunOutcome {
                exit_code: if complete { EXIT_OK } else { EXIT_UNCONVERGED },
                run_dir: Some(out.to_path_buf()),
                summary: csv,
            })
        }
        TableId::Fig9 => {
            create_fresh_dir(out)?;
            let mut summary = String::new();
            let base = SweepSettings::default();
            let j_sweep = SweepSettings {
                variable: SweepVariable::J,
                values: vec![0.5, 1.0, 2.0, 4.0],
                delta_omega: 2.0,
                ..base.clone()
            };
            let dw_sweep = SweepSettings {
                variable: SweepVariable::DeltaOmega,
                values: vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
                j: 2.0,
                ..base
            };
            for (settings, name) in [(j_sweep, "fig9_J.csv"), (dw_sweep, "fig9_delta_omega.csv")] {
                let rows = iteration_sweep_with_progress(&settings, &mut |v, s, r| {
                    eprintln!(
                        "{} = {v}: seed {s} -> {}",
                        settings.variable.as_str(),
                        r.map_or("nc".into(), |x| x.to_string())
                    );
                })?;
                let csv = sweep_csv(settings.variable, &settings.seeds, &rows);
                fs::write(out.join(name), &csv)?;
                summary.push_str(&csv);
            }
            Ok(RunOutcome {
                exit_code: EXIT_OK,
                run_dir: Some(out.to_path_buf()),
                summary,
            })
        }
    }
}

/// Maps library errors onto exit statuses: validation problems are 2,
/// everything else 1.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => EXIT_INVALID,
        _ => EXIT_FAILURE,
    }
}
