//! Two-qutrit states used by the protocol.

use num_complex::Complex64;

use super::linalg::ComplexVector;
use super::omega_pow;
use crate::error::{QkdError, Result};

/// Flat index of `|ab⟩` in the two-qutrit space.
pub const fn pair_index(a: usize, b: usize) -> usize {
    3 * a + b
}

fn diagonal_state(phase_step: usize) -> ComplexVector {
    let norm = 1.0 / 3f64.sqrt();
    let mut v = ComplexVector::zeros(9);
    for k in 0..3 {
        v[pair_index(k, k)] = omega_pow(phase_step * k) * Complex64::new(norm, 0.0);
    }
    v
}

/// `(|00⟩ + |11⟩ + |22⟩) / √3`.
pub fn max_entangled_state() -> ComplexVector {
    diagonal_state(0)
}

/// `|χ₁⟩ = (|00⟩ + α|11⟩ + α²|22⟩)/√3` and `|χ₂⟩ = (|00⟩ + α²|11⟩ + α|22⟩)/√3`.
pub fn chi_state(k: u8) -> Result<ComplexVector> {
    match k {
        1 => Ok(diagonal_state(1)),
        2 => Ok(diagonal_state(2)),
        _ => Err(QkdError::InvalidInput(format!(
            "chi state index must be 1 or 2, got {k}"
        ))),
    }
}
