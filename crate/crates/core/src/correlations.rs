//! Joint outcome statistics, the complex correlation function and the
//! qutrit Bell quantity.
//!
//! Outcome `k` of either party carries the complex value `α^k`; the
//! correlation function is the expectation of the product of the two
//! values. Outcomes themselves are stored as integers `0..3`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QkdError, Result};
use crate::quantum::{
    omega_pow, pair_index, tritter_unitary, ComplexMatrix, ComplexVector, PhaseVector, Settings,
};

/// Negative probabilities down to this value are rounding dust and are
/// clamped to zero.
pub const PROB_DUST: f64 = 1e-12;

/// Allowed deviation of a probability table's total from one.
pub const PROB_SUM_TOL: f64 = 1e-10;

/// Allowed deviation of an input state's norm from one.
pub const STATE_NORM_TOL: f64 = 1e-8;

/// `P(a, b)` for Alice's outcome `a` and Bob's outcome `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointProbTable {
    p: [[f64; 3]; 3],
}

impl JointProbTable {
    /// Validates and clamps a raw table.
    pub fn new(raw: [[f64; 3]; 3]) -> Result<Self> {
        let mut p = raw;
        for (a, row) in p.iter_mut().enumerate() {
            for (b, x) in row.iter_mut().enumerate() {
                if !x.is_finite() || *x < -PROB_DUST {
                    return Err(QkdError::NegativeProbability { a, b, value: *x });
                }
                *x = x.max(0.0);
            }
        }
        let total: f64 = p.iter().flatten().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(QkdError::InvalidInput(format!(
                "joint probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { p })
    }

    pub fn uniform() -> Self {
        Self {
            p: [[1.0 / 9.0; 3]; 3],
        }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.p[a][b]
    }

    pub fn as_array(&self) -> &[[f64; 3]; 3] {
        &self.p
    }

    /// Entries in `3a + b` order.
    pub fn flat(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for a in 0..3 {
            for b in 0..3 {
                out[pair_index(a, b)] = self.p[a][b];
            }
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }
}

/// Complex correlation `Q`; `|Q| ≤ 1` for any valid table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationValue(pub Complex64);

impl CorrelationValue {
    pub fn value(&self) -> Complex64 {
        self.0
    }

    /// Attenuates by a real visibility factor.
    pub fn scaled(&self, visibility: f64) -> Self {
        Self(self.0 * visibility)
    }
}

fn local_unitary(phases_a: &PhaseVector, phases_b: &PhaseVector) -> ComplexMatrix {
    tritter_unitary(phases_a).tensor(&tritter_unitary(phases_b))
}

/// `P(a, b) = |⟨ab| U_A ⊗ U_B |state⟩|²`.
pub fn joint_probs(
    state: &ComplexVector,
    phases_a: &PhaseVector,
    phases_b: &PhaseVector,
) -> Result<JointProbTable> {
    if state.dim() != 9 {
        return Err(QkdError::InvalidInput(format!(
            "two-qutrit state must have dimension 9, got {}",
            state.dim()
        )));
    }
    if !state.is_normalized(STATE_NORM_TOL) {
        return Err(QkdError::Unnormalized { norm: state.norm() });
    }
    let out = local_unitary(phases_a, phases_b).apply(state);
    let mut raw = [[0.0; 3]; 3];
    for (a, row) in raw.iter_mut().enumerate() {
        for (b, x) in row.iter_mut().enumerate() {
            *x = out[pair_index(a, b)].norm_sqr();
        }
    }
    JointProbTable::new(raw)
}

/// Same as [`joint_probs`] for a two-qutrit density matrix:
/// `P(a, b) = ⟨ab| U ρ U† |ab⟩`.
pub fn joint_probs_density(
    rho: &ComplexMatrix,
    phases_a: &PhaseVector,
    phases_b: &PhaseVector,
) -> Result<JointProbTable> {
    if rho.rows() != 9 || rho.cols() != 9 {
        return Err(QkdError::InvalidInput("density matrix must be 9x9".into()));
    }
    let u = local_unitary(phases_a, phases_b);
    let rotated = u.matmul(rho).matmul(&u.adjoint());
    let mut raw = [[0.0; 3]; 3];
    for (a, row) in raw.iter_mut().enumerate() {
        for (b, x) in row.iter_mut().enumerate() {
            let i = pair_index(a, b);
            *x = rotated[(i, i)].re;
        }
    }
    JointProbTable::new(raw)
}

/// `Q = Σ_{a,b} α^{a+b} P(a, b)`.
pub fn correlation_q(table: &JointProbTable) -> CorrelationValue {
    let mut q = Complex64::new(0.0, 0.0);
    for a in 0..3 {
        for b in 0..3 {
            q += omega_pow(a + b) * table.get(a, b);
        }
    }
    CorrelationValue(q)
}

/// Closed-form correlation of the maximally entangled state:
/// the mean of `e^{i(Δ^A_{xy} + Δ^B_{xy})}` over the cyclic port pairs
/// `(0,1), (1,2), (2,0)`, where `Δ_{xy} = φ_x − φ_y`.
pub fn correlation_q_closed(phases_a: &PhaseVector, phases_b: &PhaseVector) -> CorrelationValue {
    let q: Complex64 = [(0, 1), (1, 2), (2, 0)]
        .iter()
        .map(|&(x, y)| {
            let exponent = phases_a.get(x) - phases_a.get(y) + phases_b.get(x) - phases_b.get(y);
            Complex64::from_polar(1.0, exponent)
        })
        .sum();
    CorrelationValue(q / 3.0)
}

/// `S = Im(−α² Q₁₁ + α Q₁₂ + α² Q₂₁ − α² Q₂₂)`.
pub fn bell_s(
    q11: CorrelationValue,
    q12: CorrelationValue,
    q21: CorrelationValue,
    q22: CorrelationValue,
) -> f64 {
    let [c11, c12, c21, c22] = bell_coefficients();
    (c11 * q11.0 + c12 * q12.0 + c21 * q21.0 + c22 * q22.0).im
}

/// Coefficients of `Q₁₁, Q₁₂, Q₂₁, Q₂₂` inside the Bell quantity.
pub fn bell_coefficients() -> [Complex64; 4] {
    let a2 = omega_pow(2);
    [-a2, omega_pow(1), a2, -a2]
}

/// Local-realistic bound, quantum value and critical visibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub lr_bound: f64,
    pub qm_value: f64,
    pub v0: f64,
}

pub fn thresholds() -> Thresholds {
    let sqrt3 = 3f64.sqrt();
    Thresholds {
        lr_bound: sqrt3,
        qm_value: 2.0 / 3.0 * (2.0 + sqrt3),
        v0: (6.0 * sqrt3 - 9.0) / 2.0,
    }
}

/// The Bell quantity with an optional visibility attenuation applied to
/// every correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellStatistic {
    pub s: f64,
    pub visibility: f64,
}

impl BellStatistic {
    /// Evaluates `S` on the maximally entangled state for the given
    /// settings, with correlations scaled by `visibility`.
    pub fn from_settings(settings: &Settings, visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(QkdError::InvalidInput(format!(
                "visibility must lie in [0, 1], got {visibility}"
            )));
        }
        let q = |k: u8, l: u8| {
            correlation_q_closed(settings.alice(k), settings.bob(l)).scaled(visibility)
        };
        Ok(Self {
            s: bell_s(q(1, 1), q(1, 2), q(2, 1), q(2, 2)),
            visibility,
        })
    }

    pub fn violates_local_realism(&self) -> bool {
        self.s > thresholds().lr_bound
    }
}
