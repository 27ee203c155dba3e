// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-qubit rotations, the elementary gate set and its geometric
//! decompositions.
//!
//! Rotations follow `R_n(a) = exp(+i a/2 n.sigma)`, so `R_x(pi) = i sigma_x`.
//! A sequence `[A, B, C]` denotes the product `A B C`: `C` acts first.
//! Decompositions are exact only up to a global phase.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{identity, sigma_x, sigma_y, sigma_z, ComplexMatrix, C64};

/// Unit rotation axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis([f64; 3]);

impl Axis {
    pub const X: Axis = Axis([1.0, 0.0, 0.0]);
    pub const Y: Axis = Axis([0.0, 1.0, 0.0]);
    pub const Z: Axis = Axis([0.0, 0.0, 1.0]);
    /// `(1, 0, 1)/sqrt(2)`, the Hadamard axis.
    pub const N: Axis = Axis([FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]);

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(invalid(format!("rotation axis has norm {norm}, expected 1")));
        }
        Ok(Axis([x, y, z]))
    }

    /// Normalizes a nonzero direction.
    pub fn from_direction(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("rotation direction must be nonzero and finite"));
        }
        Ok(Axis([x / norm, y / norm, z / norm]))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    /// `n . sigma`.
    pub fn pauli_component(&self) -> ComplexMatrix {
        let [x, y, z] = self.0;
        sigma_x() * C64::new(x, 0.0) + sigma_y() * C64::new(y, 0.0) + sigma_z() * C64::new(z, 0.0)
    }
}

/// `exp(i angle/2 n.sigma)`.
pub fn rotation(axis: Axis, angle: f64) -> ComplexMatrix {
    let c = (angle / 2.0).cos();
    let s = (angle / 2.0).sin();
    identity(2) * C64::new(c, 0.0) + axis.pauli_component() * C64::new(0.0, s)
}

/// `exp(-i angle/2 n.sigma)`: the rotation produced by evolving under
/// `H = (angle / 2t) n.sigma` for time `t`.
pub fn physical_rotation(axis: Axis, angle: f64) -> ComplexMatrix {
    rotation(axis, -angle)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationStep {
    pub axis: Axis,
    pub angle: f64,
}

impl RotationStep {
    pub fn new(axis: Axis, angle: f64) -> Result<Self> {
        if !angle.is_finite() {
            return Err(invalid("rotation angle must be finite"));
        }
        Ok(Self { axis, angle })
    }

    pub fn matrix(&self) -> ComplexMatrix {
        rotation(self.axis, self.angle)
    }
}

/// Product of a sequence as written (the last step acts first).
pub fn sequence_product(steps: &[RotationStep]) -> ComplexMatrix {
    steps.iter().fold(identity(2), |acc, s| acc * s.matrix())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateName {
    I,
    X,
    Y,
    Z,
    S,
    T,
    Had,
}

impl GateName {
    pub const ALL: [GateName; 7] = [
        GateName::I,
        GateName::X,
        GateName::Y,
        GateName::Z,
        GateName::S,
        GateName::T,
        GateName::Had,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            GateName::I => "I",
            GateName::X => "X",
            GateName::Y => "Y",
            GateName::Z => "Z",
            GateName::S => "S",
            GateName::T => "T",
            GateName::Had => "Had",
        }
    }
}

impl fmt::Display for GateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(GateName::I),
            "X" => Ok(GateName::X),
            "Y" => Ok(GateName::Y),
            "Z" => Ok(GateName::Z),
            "S" => Ok(GateName::S),
            "T" => Ok(GateName::T),
            "Had" | "H" => Ok(GateName::Had),
            other => Err(invalid(format!("unknown gate '{other}' (expected I, X, Y, Z, S, T, Had)"))),
        }
    }
}

pub fn standard_gate(name: GateName) -> ComplexMatrix {
    match name {
        GateName::I => identity(2),
        GateName::X => sigma_x(),
        GateName::Y => sigma_y(),
        GateName::Z => sigma_z(),
        GateName::S => rotation(Axis::Z, PI / 2.0),
        GateName::T => rotation(Axis::Z, PI / 4.0),
        GateName::Had => rotation(Axis::N, PI),
    }
}

fn steps(list: &[(Axis, f64)]) -> Vec<RotationStep> {
    list.iter().map(|&(axis, angle)| RotationStep { axis, angle }).collect()
}

/// x/y Euler decomposition of each elementary gate.
pub fn euler_sequence(name: GateName) -> Vec<RotationStep> {
    use Axis as A;
    match name {
        GateName::X => steps(&[(A::X, PI)]),
        GateName::Y => steps(&[(A::Y, PI)]),
        GateName::Z => steps(&[(A::X, PI), (A::Y, PI)]),
        GateName::I => steps(&[(A::X, 2.0 * PI)]),
        GateName::S => steps(&[(A::X, 1.5 * PI), (A::Y, PI / 2.0), (A::X, PI / 2.0)]),
        GateName::T => steps(&[(A::X, 1.5 * PI), (A::Y, PI / 4.0), (A::X, PI / 2.0)]),
        GateName::Had => steps(&[(A::Y, PI / 2.0), (A::X, PI)]),
    }
}

/// Decomposition into rotations about `x` and `n = (1,0,1)/sqrt(2)`, the two
/// axes reachable with a fixed x-field and detuning `u in {0, Omega}`.
pub fn local_sequence(name: GateName) -> Vec<RotationStep> {
    use Axis as A;
    match name {
        GateName::X => steps(&[(A::X, PI)]),
        GateName::Y => steps(&[(A::X, PI), (A::N, PI), (A::X, PI), (A::N, PI)]),
        GateName::Z => steps(&[(A::N, PI), (A::X, PI), (A::N, PI)]),
        GateName::I => steps(&[(A::X, 2.0 * PI)]),
        GateName::S => steps(&[(A::N, PI), (A::X, PI / 2.0), (A::N, PI)]),
        GateName::T => steps(&[(A::N, PI), (A::X, PI / 4.0), (A::N, PI)]),
        GateName::Had => steps(&[(A::N, PI)]),
    }
}

/// Total rotation angle of an Euler sequence in units of `pi`.
pub fn euler_pulse_length(steps: &[RotationStep]) -> f64 {
    steps.iter().map(|s| s.angle.abs()).sum::<f64>() / PI
}

/// Duration of a local sequence in units of `pi / (2 Omega)`.
///
/// With `H = Omega sigma_x + u sigma_z` the rotation rate is
/// `2 sqrt(Omega^2 + u^2)`, so an x-rotation by `pi` takes one unit and an
/// n-rotation by `pi` takes `1/sqrt(2)`.
pub fn local_duration(steps: &[RotationStep]) -> f64 {
    steps
        .iter()
        .map(|s| {
            let [nx, _, nz] = s.axis.components();
            // |u| / Omega = nz / nx on the x-z great circle
            let rate = (1.0 + (nz / nx).powi(2)).sqrt();
            s.angle.abs() / PI / rate
        })
        .sum()
}

/// `R_x(pi) R_n(pi) R_x(pi) R_n(pi)` for `n = cos(phi) x + sin(phi) z` with
/// `cos(phi) = Omega / Omega_0`, `sin(phi) = u / Omega_0`.
///
/// Equals [`physical_rotation`]`(Y, 4 phi)` up to a global phase.
pub fn composite_ry_check(u: f64, omega: f64) -> Result<ComplexMatrix> {
    let omega0 = (omega * omega + u * u).sqrt();
    if !(omega0 > 0.0 && omega0.is_finite()) {
        return Err(invalid("composite rotation needs Omega and u not both zero"));
    }
    let n = Axis::new(omega / omega0, 0.0, u / omega0)?;
    let rx = rotation(Axis::X, PI);
    let rn = rotation(n, PI);
    Ok(&rx * &rn * &rx * &rn)
}

/// Angle `phi` with `cos(phi) = Omega/Omega_0`, `sin(phi) = u/Omega_0`.
pub fn detuning_angle(u: f64, omega: f64) -> f64 {
    u.atan2(omega)
}

/// `|Tr[a^dag b]| / N`.
#[cfg(test)]
pub(crate) fn phase_invariant_overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    crate::linalg::trace_adjoint_product(a, b).norm() / a.nrows() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_defect, I};

    #[test]
    fn zero_rotation_is_identity() {
        for axis in [Axis::X, Axis::Y, Axis::Z, Axis::N] {
            assert!(max_abs_diff(&rotation(axis, 0.0), &identity(2)) < 1e-15);
        }
    }

    #[test]
    fn x_rotation_by_pi_is_i_sigma_x() {
        let expected = sigma_x() * I;
        assert!(max_abs_diff(&rotation(Axis::X, PI), &expected) < 1e-15);
    }

    #[test]
    fn n_rotation_by_pi_is_hadamard_up_to_phase() {
        let had = ComplexMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
        ) * C64::new(FRAC_1_SQRT_2, 0.0);
        assert!((phase_invariant_overlap(&had, &rotation(Axis::N, PI)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn axis_must_be_unit() {
        assert!(Axis::new(1.0, 1.0, 0.0).is_err());
        assert!(Axis::new(0.6, 0.0, 0.8).is_ok());
        assert!(Axis::from_direction(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn standard_gates() {
        assert_eq!(standard_gate(GateName::I), identity(2));
        let t = standard_gate(GateName::T);
        assert!((phase_invariant_overlap(&t, &rotation(Axis::Z, PI / 4.0)) - 1.0).abs() < 1e-12);
        let h = standard_gate(GateName::Had);
        assert!((phase_invariant_overlap(&identity(2), &(&h * &h)) - 1.0).abs() < 1e-12);
        for g in GateName::ALL {
            assert!(unitarity_defect(&standard_gate(g)) < 1e-12);
        }
    }

    #[test]
    fn euler_table_products() {
        for g in GateName::ALL {
            let f = phase_invariant_overlap(&standard_gate(g), &sequence_product(&euler_sequence(g)));
            assert!(f >= 1.0 - 1e-10, "{g}: {f}");
        }
        assert_eq!(euler_sequence(GateName::X), vec![RotationStep { axis: Axis::X, angle: PI }]);
    }

    #[test]
    fn euler_pulse_lengths() {
        let expect = [
            (GateName::X, 1.0),
            (GateName::Y, 1.0),
            (GateName::Z, 2.0),
            (GateName::I, 2.0),
            (GateName::S, 2.5),
            (GateName::T, 2.25),
            (GateName::Had, 1.5),
        ];
        for (g, len) in expect {
            assert!((euler_pulse_length(&euler_sequence(g)) - len).abs() < 1e-12, "{g}");
        }
    }

    #[test]
    fn local_table_products_and_durations() {
        let sqrt2 = 2f64.sqrt();
        let expect = [
            (GateName::X, 1.0),
            (GateName::Y, 2.0 + sqrt2),
            (GateName::Z, 1.0 + sqrt2),
            (GateName::I, 2.0),
            (GateName::S, 0.5 + sqrt2),
            (GateName::T, 0.25 + sqrt2),
            (GateName::Had, FRAC_1_SQRT_2),
        ];
        for (g, duration) in expect {
            let seq = local_sequence(g);
            let f = phase_invariant_overlap(&standard_gate(g), &sequence_product(&seq));
            assert!(f >= 1.0 - 1e-10, "{g}: {f}");
            assert!((local_duration(&seq) - duration).abs() < 1e-12, "{g}");
        }
    }

    #[test]
    fn z_from_three_local_rotations() {
        let rn = rotation(Axis::N, PI);
        let p = &rn * rotation(Axis::X, PI) * &rn;
        assert!((phase_invariant_overlap(&sigma_z(), &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_composes_and_is_special_unitary() {
        let axis = Axis::from_direction(0.3, -0.5, 0.8).unwrap();
        let a = rotation(axis, 0.7);
        let b = rotation(axis, -2.1);
        assert!(max_abs_diff(&(&a * &b), &rotation(axis, 0.7 - 2.1)) < 1e-12);
        assert!(unitarity_defect(&a) < 1e-12);
        assert!((a.determinant().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composite_ry_special_cases() {
        // u = Omega: phi = pi/4, product is a pi rotation about y.
        let p = composite_ry_check(10.0, 10.0).unwrap();
        assert!((phase_invariant_overlap(&rotation(Axis::Y, PI), &p) - 1.0).abs() < 1e-10);
        // u = 0: four x rotations by pi.
        let p = composite_ry_check(0.0, 3.0).unwrap();
        assert!((phase_invariant_overlap(&identity(2), &p) - 1.0).abs() < 1e-10);
        // phi = pi/8 gives a quarter turn about y.
        let p = composite_ry_check(10.0 * (PI / 8.0).tan(), 10.0).unwrap();
        assert!((phase_invariant_overlap(&physical_rotation(Axis::Y, PI / 2.0), &p) - 1.0).abs() < 1e-10);
        assert!(composite_ry_check(0.0, 0.0).is_err());
    }

    #[test]
    fn composite_ry_sense_in_plus_convention() {
        // In the exp(+i a/2 n.sigma) convention the product turns the other way.
        let phi: f64 = 0.3;
        let p = composite_ry_check(10.0 * phi.tan(), 10.0).unwrap();
        assert!((phase_invariant_overlap(&rotation(Axis::Y, -4.0 * phi), &p) - 1.0).abs() < 1e-10);
        let wrong_sense = phase_invariant_overlap(&rotation(Axis::Y, 4.0 * phi), &p);
        assert!((wrong_sense - (4.0 * phi).cos().abs()).abs() < 1e-10);
    }

    #[test]
    fn gate_names_parse() {
        for g in GateName::ALL {
            assert_eq!(g.as_str().parse::<GateName>().unwrap(), g);
        }
        assert!("CNOT".parse::<GateName>().is_err());
    }

    proptest::proptest! {
        #[test]
        fn composite_ry_identity_for_any_detuning(u in -50.0f64..50.0, omega in 0.1f64..50.0) {
            let phi = detuning_angle(u, omega);
            let p = composite_ry_check(u, omega).unwrap();
            let f = phase_invariant_overlap(&physical_rotation(Axis::Y, 4.0 * phi), &p);
            proptest::prop_assert!(f >= 1.0 - 1e-10);
        }
    }
}
