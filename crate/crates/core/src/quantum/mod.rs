//! Small dense complex linear algebra, tritter unitaries and the protocol's
//! entangled two-qutrit states.

pub mod linalg;
pub mod states;
pub mod tritter;

use num_complex::Complex64;

pub use linalg::{
    gram_of, inv_sqrt, psd_sqrt, tensor, vectors_from_gram, ComplexMatrix, ComplexVector, Tensor,
};
pub use states::{chi_state, max_entangled_state, pair_index};
pub use tritter::{standard_settings, tritter_unitary, PhaseVector, Settings};

const HALF_SQRT3: f64 = 0.866_025_403_784_438_6;

/// `α = e^{2πi/3}`.
pub const OMEGA: Complex64 = Complex64::new(-0.5, HALF_SQRT3);

/// `α^n`, exact up to the rounding of the stored constants.
pub fn omega_pow(n: usize) -> Complex64 {
    match n % 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => OMEGA,
        _ => Complex64::new(-0.5, -HALF_SQRT3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_matches_polar_form() {
        let polar = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((OMEGA - polar).norm() < 1e-15);
        assert!((omega_pow(2) - OMEGA * OMEGA).norm() < 1e-15);
        assert!((omega_pow(0) + omega_pow(1) + omega_pow(2)).norm() < 1e-15);
        assert_eq!(omega_pow(7), OMEGA);
    }
}
