//! Symmetric unbiased six-port beamsplitters ("tritters") and the
//! protocol's phase settings.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linalg::ComplexMatrix;
use super::omega_pow;
use crate::error::{QkdError, Result};

/// Three phase-shifter settings in radians, one per exit port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseVector([f64; 3]);

impl PhaseVector {
    pub fn new(phases: [f64; 3]) -> Result<Self> {
        if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(QkdError::InvalidInput(format!("phase {bad} is not finite")));
        }
        Ok(Self(phases))
    }

    pub const fn zero() -> Self {
        Self([0.0; 3])
    }

    pub fn phases(&self) -> [f64; 3] {
        self.0
    }

    pub fn get(&self, port: usize) -> f64 {
        self.0[port]
    }

    /// Phases reduced into `[0, 2π)`.
    pub fn canonical(&self) -> [f64; 3] {
        self.0.map(|p| p.rem_euclid(TAU))
    }

    /// Component-wise equality modulo 2π.
    pub fn eq_mod_2pi(&self, other: &PhaseVector, tol: f64) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| {
            let d = (a - b).rem_euclid(TAU);
            d <= tol || TAU - d <= tol
        })
    }
}

impl fmt::Display for PhaseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// `U[k][l] = α^{kl} e^{iφ_l} / √3` with `k` the input port and `l` the exit port.
pub fn tritter_unitary(phases: &PhaseVector) -> ComplexMatrix {
    let norm = 1.0 / 3f64.sqrt();
    ComplexMatrix::from_fn(3, 3, |k, l| {
        omega_pow(k * l) * Complex64::from_polar(norm, phases.get(l))
    })
}

/// The three measurement settings available to each party.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub alice: [PhaseVector; 3],
    pub bob: [PhaseVector; 3],
}

impl Settings {
    /// Alice's setting `k` (1-based, as announced publicly).
    pub fn alice(&self, k: u8) -> &PhaseVector {
        &self.alice[usize::from(k) - 1]
    }

    pub fn bob(&self, k: u8) -> &PhaseVector {
        &self.bob[usize::from(k) - 1]
    }
}

impl Default for Settings {
    fn default() -> Self {
        standard_settings()
    }
}

/// The protocol's fixed settings. Group one uses settings 1 and 2 on both
/// sides for the Bell test; setting 3 on both sides generates key.
pub fn standard_settings() -> Settings {
    Settings {
        alice: [
            PhaseVector([0.0, 0.0, 0.0]),
            PhaseVector([0.0, PI / 3.0, -PI / 3.0]),
            PhaseVector([PI, 0.0, -PI]),
        ],
        bob: [
            PhaseVector([0.0, PI / 6.0, -PI / 6.0]),
            PhaseVector([0.0, -PI / 6.0, PI / 6.0]),
            PhaseVector([-PI, 0.0, PI]),
        ],
    }
}
