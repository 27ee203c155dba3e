// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Stabilizer codes and fault-tolerant logical target gates.
//!
//! A [`CodeSpec`] pairs the two code words with a list of correctable errors
//! `E` whose displaced code words `E|0_L>, E|1_L>` form an orthonormal basis
//! of the register. The logical version of a single-qubit gate `g` is then
//!
//! ```text
//! W = sum_E  E ( sum_ab g_ab |a_L><b_L| ) E^dag
//! ```
//!
//! which acts as `g` inside every error-displaced copy of the code space, so
//! a single error on the input stays a single error on the output.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::{standard_gate, GateName};
use crate::linalg::{
    identity, kron_embed, max_abs_diff, sigma_x, unitarity_defect, ComplexMatrix, StateVector, C64,
};

/// Tolerance on the displaced-codeword Gram matrix and on target unitarity.
pub const CODE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeKind {
    FiveQubit,
    Bitflip3,
}

impl CodeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CodeKind::FiveQubit => "five_qubit",
            CodeKind::Bitflip3 => "bitflip3",
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            CodeKind::FiveQubit => 5,
            CodeKind::Bitflip3 => 3,
        }
    }

    pub fn build(&self) -> CodeSpec {
        match self {
            CodeKind::FiveQubit => five_qubit_code(),
            CodeKind::Bitflip3 => bitflip3_code(),
        }
    }
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "five_qubit" => Ok(CodeKind::FiveQubit),
            "bitflip3" => Ok(CodeKind::Bitflip3),
            other => Err(invalid(format!("unknown code '{other}' (expected five_qubit or bitflip3)"))),
        }
    }
}

/// A correctable error operator with a printable label such as `X2` or `X1X4`.
#[derive(Debug, Clone)]
pub struct ErrorOperator {
    pub label: String,
    pub matrix: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct CodeSpec {
    kind: CodeKind,
    num_qubits: usize,
    codeword_0: StateVector,
    codeword_1: StateVector,
    error_basis: Vec<ErrorOperator>,
}

impl CodeSpec {
    /// Validates that the displaced code words are an orthonormal basis.
    pub fn new(
        kind: CodeKind,
        num_qubits: usize,
        codeword_0: StateVector,
        codeword_1: StateVector,
        error_basis: Vec<ErrorOperator>,
    ) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if codeword_0.len() != dim || codeword_1.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: codeword_0.len().max(codeword_1.len()),
            });
        }
        if 2 * error_basis.len() != dim {
            return Err(Error::CodeConstruction(format!(
                "{} error operators cannot span a {dim}-dimensional register",
                error_basis.len()
            )));
        }
        if let Some(e) = error_basis.iter().find(|e| e.matrix.shape() != (dim, dim)) {
            return Err(Error::CodeConstruction(format!("error operator {} has wrong shape", e.label)));
        }
        let code = Self {
            kind,
            num_qubits,
            codeword_0,
            codeword_1,
            error_basis,
        };
        let defect = max_abs_diff(&code.displaced_gram(), &identity(dim));
        if defect > CODE_TOL {
            return Err(Error::CodeConstruction(format!(
                "displaced code words are not orthonormal (Gram defect {defect:e})"
            )));
        }
        Ok(code)
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn codeword(&self, bit: usize) -> &StateVector {
        if bit == 0 {
            &self.codeword_0
        } else {
            &self.codeword_1
        }
    }

    pub fn error_basis(&self) -> &[ErrorOperator] {
        &self.error_basis
    }

    /// Columns `E|0_L>, E|1_L>` for each `E` in order.
    pub fn displaced_basis(&self) -> ComplexMatrix {
        let dim = self.dim();
        let mut v = ComplexMatrix::zeros(dim, dim);
        for (e, op) in self.error_basis.iter().enumerate() {
            v.set_column(2 * e, &(&op.matrix * &self.codeword_0));
            v.set_column(2 * e + 1, &(&op.matrix * &self.codeword_1));
        }
        v
    }

    pub fn displaced_gram(&self) -> ComplexMatrix {
        let v = self.displaced_basis();
        v.adjoint() * v
    }

    /// `(|0_L> + |1_L>)/sqrt(2)`.
    pub fn logical_plus(&self) -> StateVector {
        (&self.codeword_0 + &self.codeword_1) * C64::new(FRAC_1_SQRT_2, 0.0)
    }
}

const FIVE_QUBIT_ZERO: [(&str, f64); 16] = [
    ("00000", 1.0),
    ("10010", 1.0),
    ("01001", 1.0),
    ("10100", 1.0),
    ("01010", 1.0),
    ("11011", -1.0),
    ("00110", -1.0),
    ("11000", -1.0),
    ("11101", -1.0),
    ("00011", -1.0),
    ("11110", -1.0),
    ("01111", -1.0),
    ("10001", -1.0),
    ("01100", -1.0),
    ("10111", -1.0),
    // Sign fixed from the commonly reprinted listing so that the words are
    // stabilized by the cyclic XZZXI generators.
    ("00101", 1.0),
];

const FIVE_QUBIT_ONE: [(&str, f64); 16] = [
    ("11111", 1.0),
    ("01101", 1.0),
    ("10110", 1.0),
    ("01011", 1.0),
    ("10101", 1.0),
    ("00100", -1.0),
    ("11001", -1.0),
    ("00111", -1.0),
    ("00010", -1.0),
    ("11100", -1.0),
    ("00001", -1.0),
    ("10000", -1.0),
    ("01110", -1.0),
    ("10011", -1.0),
    ("01000", -1.0),
    ("11010", 1.0),
];

fn superposition(terms: &[(&str, f64)], scale: f64) -> StateVector {
    let dim = 1usize << terms[0].0.len();
    let mut v = StateVector::zeros(dim);
    for (bits, sign) in terms {
        let idx = usize::from_str_radix(bits, 2).expect("bit string literal");
        v[idx] += C64::new(sign * scale, 0.0);
    }
    v
}

fn basis_state(bits: &str) -> StateVector {
    superposition(&[(bits, 1.0)], 1.0)
}

fn x_on(qubits: &[usize], num_qubits: usize) -> ErrorOperator {
    let mut m = identity(1 << num_qubits);
    for &q in qubits {
        m = &m * kron_embed(&sigma_x(), q, num_qubits).expect("valid qubit index");
    }
    let label = if qubits.is_empty() {
        "I".to_string()
    } else {
        qubits.iter().map(|q| format!("X{q}")).collect()
    };
    ErrorOperator { label, matrix: m }
}

/// Five-qubit perfect code with the bit-flip error basis
/// `{I} u {X_n} u {X_n X_m : n > m}`.
pub fn five_qubit_code() -> CodeSpec {
    let mut basis = vec![x_on(&[], 5)];
    basis.extend((1..=5).map(|n| x_on(&[n], 5)));
    for m in 1..=5 {
        for n in (m + 1)..=5 {
            basis.push(x_on(&[m, n], 5));
        }
    }
    CodeSpec::new(
        CodeKind::FiveQubit,
        5,
        superposition(&FIVE_QUBIT_ZERO, 0.25),
        superposition(&FIVE_QUBIT_ONE, 0.25),
        basis,
    )
    .expect("five-qubit code words are orthonormal under single and double bit flips")
}

/// Three-qubit bit-flip code, `|0_L> = |000>`, `|1_L> = |111>`.
pub fn bitflip3_code() -> CodeSpec {
    let mut basis = vec![x_on(&[], 3)];
    basis.extend((1..=3).map(|n| x_on(&[n], 3)));
    CodeSpec::new(CodeKind::Bitflip3, 3, basis_state("000"), basis_state("111"), basis)
        .expect("bit-flip code words are distinct basis states")
}

/// Target unitary for a logical gate on a code.
#[derive(Debug, Clone)]
pub struct TargetGate {
    pub gate_name: Option<GateName>,
    pub code: CodeKind,
    pub matrix: ComplexMatrix,
}

#[derive(Serialize)]
struct TargetGateJson<'a> {
    gate: Option<&'a str>,
    code: &'a str,
    dimension: usize,
    /// Row-major `[re, im]` pairs.
    entries: Vec<[f64; 2]>,
}

impl TargetGate {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.matrix[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        serde_json::to_value(TargetGateJson {
            gate: self.gate_name.map(|g| g.as_str()),
            code: self.code.as_str(),
            dimension: n,
            entries,
        })
        .expect("plain data serializes")
    }
}

/// Lift a 2x2 unitary to the fault-tolerant logical operator on `code`.
pub fn logical_gate(code: &CodeSpec, g: &ComplexMatrix) -> Result<ComplexMatrix> {
    if g.shape() != (2, 2) {
        return Err(invalid("logical gate must be built from a 2x2 operator"));
    }
    let defect = unitarity_defect(g);
    if defect > CODE_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let dim = code.dim();
    let v = code.displaced_basis();
    let gram_defect = max_abs_diff(&(v.adjoint() * &v), &identity(dim));
    if gram_defect > CODE_TOL {
        return Err(Error::CodeConstruction(format!(
            "displaced code words are not orthonormal (Gram defect {gram_defect:e})"
        )));
    }
    // W = V (I (x) g) V^dag
    let blocks = identity(dim / 2).kronecker(g);
    let w = &v * blocks * v.adjoint();
    let defect = unitarity_defect(&w);
    if defect > CODE_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(w)
}

pub fn target_gate(code: &CodeSpec, name: GateName) -> Result<TargetGate> {
    Ok(TargetGate {
        gate_name: Some(name),
        code: code.kind(),
        matrix: logical_gate(code, &standard_gate(name))?,
    })
}

/// Bloch vector of a register state projected onto the logical subspace.
///
/// `s_z(|0_L>) = -1`: logical `|1>` sits at the north pole.
pub fn logical_bloch(state: &StateVector, code: &CodeSpec) -> Result<[f64; 3]> {
    if state.len() != code.dim() {
        return Err(Error::DimensionMismatch {
            expected: code.dim(),
            found: state.len(),
        });
    }
    let a0 = code.codeword(0).dotc(state);
    let a1 = code.codeword(1).dotc(state);
    // <0_L|psi><psi|1_L>
    let coherence = a0 * a1.conj();
    Ok([2.0 * coherence.re + 0.0, -2.0 * coherence.im + 0.0, a1.norm_sqr() - a0.norm_sqr() + 0.0])
}
