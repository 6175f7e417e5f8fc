//! Square-root measurement for Eve's ancilla discrimination.
//!
//! For states `|e_i⟩` let `Φ = Σ_i |e_i⟩⟨e_i|`. The measurement directions
//! are `|ω_i⟩ = Φ^{-1/2}|e_i⟩`. When the states are linearly independent the
//! directions are orthonormal and Eve performs an ordinary projective
//! measurement; otherwise the pseudo-inverse root yields a POVM on the span.

use crate::error::{QkdError, Result};
use crate::quantum::{inv_sqrt, ComplexMatrix, ComplexVector};

/// Eigenvalues of `Φ` below this fraction of the largest count as zero.
const RELATIVE_RANK_TOL: f64 = 1e-10;

fn frame_operator(states: &[ComplexVector]) -> ComplexMatrix {
    let dim = states[0].dim();
    states
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, s| &acc + &s.outer(s))
}

/// Returns `(Φ^{-1/2}, rank)`.
fn frame_inv_sqrt(states: &[ComplexVector]) -> Result<(ComplexMatrix, usize)> {
    let phi = frame_operator(states);
    let (values, _) = phi.hermitian_eigen()?;
    let largest = values.last().copied().unwrap_or(0.0);
    if largest <= 0.0 {
        return Err(QkdError::DegenerateDiscrimination {
            rank: 0,
            dim: states.len(),
        });
    }
    let cutoff = largest * RELATIVE_RANK_TOL;
    let rank = values.iter().filter(|&&l| l > cutoff).count();
    Ok((inv_sqrt(&phi, cutoff)?, rank))
}

/// Orthonormal square-root measurement directions for three linearly
/// independent states.
pub fn srm_directions(states: &[ComplexVector; 3]) -> Result<[ComplexVector; 3]> {
    let (root, rank) = frame_inv_sqrt(states)?;
    if rank < states.len() {
        return Err(QkdError::DegenerateDiscrimination {
            rank,
            dim: states.len(),
        });
    }
    Ok([
        root.apply(&states[0]),
        root.apply(&states[1]),
        root.apply(&states[2]),
    ])
}

/// `probs[i][j]`: probability that the square-root measurement reports `j`
/// when the ancilla is in state `i`. Defined for any set of nonzero states,
/// including rank-deficient ones.
pub fn srm_outcome_probabilities(states: &[ComplexVector; 3]) -> Result<[[f64; 3]; 3]> {
    if let Some(i) = states.iter().position(|s| s.norm_sqr() == 0.0) {
        return Err(QkdError::InvalidInput(format!(
            "state {i} is zero and cannot be discriminated"
        )));
    }
    let (root, _) = frame_inv_sqrt(states)?;
    let directions: Vec<ComplexVector> = states.iter().map(|s| root.apply(s)).collect();
    let mut probs = [[0.0; 3]; 3];
    for (i, s) in states.iter().enumerate() {
        let norm = s.norm_sqr();
        for (j, w) in directions.iter().enumerate() {
            probs[i][j] = w.inner(s).norm_sqr() / norm;
        }
    }
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{gram_of, vectors_from_gram};
    use num_complex::Complex64;

    fn symmetric_states(overlap: f64) -> [ComplexVector; 3] {
        let g = ComplexMatrix::from_fn(3, 3, |i, j| {
            Complex64::new(if i == j { 1.0 } else { overlap }, 0.0)
        });
        let v = vectors_from_gram(&g).unwrap();
        [v[0].clone(), v[1].clone(), v[2].clone()]
    }

    #[test]
    fn orthonormal_inputs_are_their_own_directions() {
        let states = [
            ComplexVector::basis(3, 0),
            ComplexVector::basis(3, 1),
            ComplexVector::basis(3, 2),
        ];
        let dirs = srm_directions(&states).unwrap();
        for (d, s) in dirs.iter().zip(&states) {
            assert!((d.inner(s).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn success_probability_at_half_overlap() {
        let states = symmetric_states(0.5);
        let dirs = srm_directions(&states).unwrap();
        assert!(gram_of(&dirs).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-10);
        // ((1/3)√2 + (2/3)√0.5)² = 8/9
        let expected = 8.0 / 9.0;
        for (d, s) in dirs.iter().zip(&states) {
            assert!((d.inner(s).norm_sqr() / s.norm_sqr() - expected).abs() < 1e-9);
        }
        let probs = srm_outcome_probabilities(&states).unwrap();
        for (i, row) in probs.iter().enumerate() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (j, &p) in row.iter().enumerate() {
                let e = if i == j {
                    expected
                } else {
                    (1.0 - expected) / 2.0
                };
                assert!((p - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn identical_states_are_degenerate() {
        let states = symmetric_states(1.0);
        match srm_directions(&states) {
            Err(QkdError::DegenerateDiscrimination { rank, .. }) => assert_eq!(rank, 1),
            other => panic!("expected degenerate error, got {other:?}"),
        }
        let probs = srm_outcome_probabilities(&states).unwrap();
        for row in probs {
            for p in row {
                assert!((p - 1.0 / 3.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn planar_trine_reports_rank_two() {
        let states = symmetric_states(-0.5);
        assert!(matches!(
            srm_directions(&states),
            Err(QkdError::DegenerateDiscrimination { rank: 2, .. })
        ));
        let probs = srm_outcome_probabilities(&states).unwrap();
        assert!((probs[0][0] - 2.0 / 3.0).abs() < 1e-9);
    }
}
