// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

//! C ABI over `ftgate`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` functions
//! and released with the matching `*_free`. Every fallible call returns an
//! [`FtgateStatus`]; on failure the message is available from
//! [`ftgate_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ftgate::codes::{target_gate, CodeKind};
use ftgate::gates::GateName;
use ftgate::models::{build_global_optimal, build_local_optimal, GlobalModelParams, HamiltonianModel, LocalModelParams};
use ftgate::optimize::{synthesize_from, Algorithm, OptimizerConfig};
use ftgate::propagate::{fidelity_phase_invariant, fidelity_strict, propagate, PiecewisePulse};
use ftgate::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtgateStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotHermitian = 4,
    NotUnitary = 5,
    Numeric = 6,
    Io = 7,
    Panic = 8,
    Other = 9,
}

/// Logical target unitary for a code and gate.
pub struct FtgateTarget {
    inner: ftgate::codes::TargetGate,
}

/// Drift plus control Hamiltonians.
pub struct FtgateModel {
    inner: HamiltonianModel,
}

/// Piecewise-constant control amplitudes.
pub struct FtgatePulse {
    inner: PiecewisePulse,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> FtgateStatus {
    match err {
        Error::InvalidArgument(_) | Error::Config { .. } | Error::CodeConstruction(_) => FtgateStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => FtgateStatus::DimensionMismatch,
        Error::NotHermitian(_) => FtgateStatus::NotHermitian,
        Error::NotUnitary(_) => FtgateStatus::NotUnitary,
        Error::Numeric(_) => FtgateStatus::Numeric,
        Error::Io(_) | Error::Json(_) => FtgateStatus::Io,
        _ => FtgateStatus::Other,
    }
}

fn fail(status: FtgateStatus, message: impl Into<String>) -> FtgateStatus {
    set_error(message.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), FtgateStatus>) -> FtgateStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FtgateStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(FtgateStatus::Panic, "internal panic"),
    }
}

trait IntoStatus<T> {
    fn status(self) -> Result<T, FtgateStatus>;
}

impl<T> IntoStatus<T> for ftgate::Result<T> {
    fn status(self) -> Result<T, FtgateStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, FtgateStatus> {
    if p.is_null() {
        return Err(fail(FtgateStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(FtgateStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, FtgateStatus> {
    p.as_ref()
        .ok_or_else(|| fail(FtgateStatus::NullPointer, format!("{what} is null")))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, FtgateStatus> {
    p.as_mut()
        .ok_or_else(|| fail(FtgateStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), FtgateStatus> {
    if p.is_null() {
        Err(fail(FtgateStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, FtgateStatus>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>()
        .map_err(|e| fail(FtgateStatus::InvalidArgument, format!("{what}: {e}")))
}

/// Message for the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ftgate_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ftgate_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds the logical target for `code` ("five_qubit", "bitflip3") and
/// `gate` ("I", "X", "Y", "Z", "S", "T", "Had").
///
/// # Safety
/// `code` and `gate` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ftgate_target_new(
    code: *const c_char,
    gate: *const c_char,
    out: *mut *mut FtgateTarget,
) -> FtgateStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let kind: CodeKind = parse(c_str(code, "code")?, "code")?;
        let name: GateName = parse(c_str(gate, "gate")?, "gate")?;
        let inner = target_gate(&kind.build(), name).status()?;
        *out = Box::into_raw(Box::new(FtgateTarget { inner }));
        Ok(())
    })
}

/// Hilbert-space dimension of a target, 0 for a null handle.
///
/// # Safety
/// `target` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ftgate_target_dim(target: *const FtgateTarget) -> usize {
    target.as_ref().map_or(0, |t| t.inner.dim())
}

/// Copies the row-major entries into `re` and `im`, each of length `len`,
/// which must equal `dim * dim`.
///
/// # Safety
/// `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ftgate_target_entries(
    target: *const FtgateTarget,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> FtgateStatus {
    guard(|| {
        let t = handle(target, "target")?;
        out_ptr(re, "re")?;
        out_ptr(im, "im")?;
        let n = t.inner.dim();
        if len != n * n {
            return Err(fail(
                FtgateStatus::DimensionMismatch,
                format!("buffer length {len}, expected {}", n * n),
            ));
        }
        for r in 0..n {
            for c in 0..n {
                let z = t.inner.matrix[(r, c)];
                *re.add(r * n + c) = z.re;
                *im.add(r * n + c) = z.im;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `target` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ftgate_target_free(target: *mut FtgateTarget) {
    if !target.is_null() {
        drop(Box::from_raw(target));
    }
}

/// Global-control model: `-1/2 sum omega_n Z_n + J sum Z_n Z_{n+1}` with
/// collective X and Y controls.
///
/// # Safety
/// `omegas` must point to `count` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ftgate_model_global_new(
    omegas: *const f64,
    count: usize,
    j: f64,
    out: *mut *mut FtgateModel,
) -> FtgateStatus {
    guard(|| {
        out_ptr(out, "out")?;
        out_ptr(omegas.cast_mut(), "omegas")?;
        let params = GlobalModelParams {
            omegas: std::slice::from_raw_parts(omegas, count).to_vec(),
            j,
        };
        let inner = build_global_optimal(&params).status()?;
        *out = Box::into_raw(Box::new(FtgateModel { inner }));
        Ok(())
    })
}

/// Local-control model: `Omega sum X_n + J sum Z_n Z_{n+1}` with one Z
/// control per qubit.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ftgate_model_local_new(
    omega: f64,
    j: f64,
    num_qubits: usize,
    out: *mut *mut FtgateModel,
) -> FtgateStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let inner = build_local_optimal(&LocalModelParams { omega, j, num_qubits }).status()?;
        *out = Box::into_raw(Box::new(FtgateModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ftgate_model_num_controls(model: *const FtgateModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.num_controls())
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ftgate_model_dim(model: *const FtgateModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dim())
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ftgate_model_free(model: *mut FtgateModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Zero pulse with `steps` equal steps spanning `t_final`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ftgate_pulse_new(
    num_controls: usize,
    steps: usize,
    t_final: f64,
    out: *mut *mut FtgatePulse,
) -> FtgateStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let inner = PiecewisePulse::uniform(num_controls, steps, t_final).status()?;
        *out = Box::into_raw(Box::new(FtgatePulse { inner }));
        Ok(())
    })
}

/// # Safety
/// `pulse` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ftgate_pulse_num_steps(pulse: *const FtgatePulse) -> usize {
    pulse.as_ref().map_or(0, |p| p.inner.num_steps())
}

/// # Safety
/// `pulse` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ftgate_pulse_set_amplitude(
    pulse: *mut FtgatePulse,
    control: usize,
    step: usize,
    value: f64,
) -> FtgateStatus {
    guard(|| {
        let p = handle_mut(pulse, "pulse")?;
        if control >= p.inner.num_controls() || step >= p.inner.num_steps() {
            return Err(fail(FtgateStatus::InvalidArgument, "control or step out of range"));
        }
        p.inner.set_amplitude(control, step, value).status()
    })
}

/// # Safety
/// `pulse` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ftgate_pulse_get_amplitude(
    pulse: *const FtgatePulse,
    control: usize,
    step: usize,
    out: *mut f64,
) -> FtgateStatus {
    guard(|| {
        let p = handle(pulse, "pulse")?;
        out_ptr(out, "out")?;
        if control >= p.inner.num_controls() || step >= p.inner.num_steps() {
            return Err(fail(FtgateStatus::InvalidArgument, "control or step out of range"));
        }
        *out = p.inner.amplitude(control, step);
        Ok(())
    })
}

/// Pulse as CSV; release the string with [`ftgate_string_free`].
///
/// # Safety
/// `pulse` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ftgate_pulse_to_csv(pulse: *const FtgatePulse, out: *mut *mut c_char) -> FtgateStatus {
    guard(|| {
        let p = handle(pulse, "pulse")?;
        out_ptr(out, "out")?;
        *out = CString::new(p.inner.to_csv())
            .map_err(|_| fail(FtgateStatus::Other, "CSV contains NUL"))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `pulse` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ftgate_pulse_free(pulse: *mut FtgatePulse) {
    if !pulse.is_null() {
        drop(Box::from_raw(pulse));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ftgate_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Fidelity of the pulse's propagator against the target: `Re Tr[W^dag U]/N`
/// when `phase_invariant` is false, `|Tr[W^dag U]|/N` otherwise.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ftgate_fidelity(
    model: *const FtgateModel,
    target: *const FtgateTarget,
    pulse: *const FtgatePulse,
    phase_invariant: bool,
    out: *mut f64,
) -> FtgateStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let t = handle(target, "target")?;
        let p = handle(pulse, "pulse")?;
        out_ptr(out, "out")?;
        if m.inner.dim() != t.inner.dim() {
            return Err(fail(
                FtgateStatus::DimensionMismatch,
                format!("model dimension {} vs target {}", m.inner.dim(), t.inner.dim()),
            ));
        }
        let u = propagate(&m.inner, &p.inner, None).status()?.unitary;
        *out = if phase_invariant {
            fidelity_phase_invariant(&t.inner.matrix, &u)
        } else {
            fidelity_strict(&t.inner.matrix, &u)
        };
        Ok(())
    })
}

/// Optimizer settings; start from [`ftgate_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FtgateOptions {
    /// 0 = sequential, 1 = GRAPE.
    pub algorithm: u32,
    pub epsilon0: f64,
    pub target_fidelity: f64,
    /// 0 selects the algorithm's default budget.
    pub max_iterations: usize,
    /// Non-positive means unbounded.
    pub amplitude_bound: f64,
    pub seed: u64,
}

#[no_mangle]
pub extern "C" fn ftgate_options_default() -> FtgateOptions {
    let d = OptimizerConfig::default();
    FtgateOptions {
        algorithm: 0,
        epsilon0: d.epsilon0,
        target_fidelity: d.target_fidelity,
        max_iterations: 0,
        amplitude_bound: 0.0,
        seed: d.rng_seed,
    }
}

/// Optimizes `pulse` in place toward `target`. `out_fidelity` and
/// `out_converged` may be null.
///
/// # Safety
/// Handles must be live; non-null out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ftgate_optimize(
    model: *const FtgateModel,
    target: *const FtgateTarget,
    pulse: *mut FtgatePulse,
    options: FtgateOptions,
    out_fidelity: *mut f64,
    out_converged: *mut bool,
) -> FtgateStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let t = handle(target, "target")?;
        let p = handle_mut(pulse, "pulse")?;
        let algorithm = match options.algorithm {
            0 => Algorithm::Sequential,
            1 => Algorithm::Grape,
            a => return Err(fail(FtgateStatus::InvalidArgument, format!("unknown algorithm {a}"))),
        };
        let config = OptimizerConfig {
            epsilon0: options.epsilon0,
            target_fidelity: options.target_fidelity,
            max_iterations: (options.max_iterations > 0).then_some(options.max_iterations),
            amplitude_bound: (options.amplitude_bound > 0.0).then_some(options.amplitude_bound),
            rng_seed: options.seed,
            ..OptimizerConfig::default()
        };
        let start = p.inner.clone().with_amplitude_bound(config.amplitude_bound).status()?;
        let record = synthesize_from(&m.inner, &t.inner.matrix, start, &config, algorithm, &mut |_, _| {}).status()?;
        if let Some(result) = record.pulse {
            p.inner = result;
        }
        if !out_fidelity.is_null() {
            *out_fidelity = record.final_fidelity;
        }
        if !out_converged.is_null() {
            *out_converged = record.converged;
        }
        Ok(())
    })
}
