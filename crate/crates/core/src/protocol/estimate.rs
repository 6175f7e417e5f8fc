//! Finite-sample Bell estimate and the abort rule.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::transcript::{Group, TrialRecord};
use crate::correlations::{bell_coefficients, thresholds};
use crate::quantum::omega_pow;

/// Estimate of the Bell quantity from the Bell-test group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellEstimate {
    pub s: f64,
    pub std_error: f64,
    /// Estimated correlations `Q̂_kl` for `k, l ∈ {1, 2}`.
    pub q: [[Complex64; 2]; 2],
    pub trials: u64,
}

/// Estimates `S` from empirical outcome frequencies.
///
/// Each Bell-test trial under settings `(k, l)` contributes the real score
/// `x = Im(c_kl α^{a+b})`, so `Ŝ = Σ_kl mean_kl(x)` and, treating the four
/// settings pairs as independent multinomial samples,
/// `Var(Ŝ) = Σ_kl Var_kl(x) / N_kl`. Returns `None` when any of the four
/// settings pairs has no trials.
pub fn estimate_bell(records: &[TrialRecord]) -> Option<BellEstimate> {
    let mut counts = [[[0u64; 9]; 2]; 2];
    for r in records.iter().filter(|r| r.group() == Group::BellTest) {
        let k = usize::from(r.alice_setting) - 1;
        let l = usize::from(r.bob_setting) - 1;
        counts[k][l][3 * usize::from(r.alice_outcome) + usize::from(r.bob_outcome)] += 1;
    }

    let coeffs = bell_coefficients();
    let mut s = 0.0;
    let mut variance = 0.0;
    let mut q = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut trials = 0;
    for k in 0..2 {
        for l in 0..2 {
            let n: u64 = counts[k][l].iter().sum();
            if n == 0 {
                return None;
            }
            trials += n;
            let c = coeffs[2 * k + l];
            let (mut mean, mut second) = (0.0, 0.0);
            for (ab, &count) in counts[k][l].iter().enumerate() {
                let freq = count as f64 / n as f64;
                let phase = omega_pow(ab / 3 + ab % 3);
                q[k][l] += phase * freq;
                let x = (c * phase).im;
                mean += x * freq;
                second += x * x * freq;
            }
            s += mean;
            variance += (second - mean * mean).max(0.0) / n as f64;
        }
    }
    Some(BellEstimate {
        s,
        std_error: variance.sqrt(),
        q,
        trials,
    })
}

/// Abort when the Bell quantity is not convincingly above
/// `v_threshold · S_qm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbortPolicy {
    pub v_threshold: f64,
    pub n_sigma: f64,
}

impl Default for AbortPolicy {
    fn default() -> Self {
        Self {
            v_threshold: thresholds().v0,
            n_sigma: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbortDecision {
    pub aborted: bool,
    pub reason: String,
}

/// Aborts iff `s + n_sigma·σ < v_threshold · (2/3)(2 + √3)`.
pub fn abort_decision(s_estimate: f64, s_std_error: f64, policy: &AbortPolicy) -> AbortDecision {
    let bound = policy.v_threshold * thresholds().qm_value;
    let upper = s_estimate + policy.n_sigma * s_std_error.max(0.0);
    if upper < bound {
        AbortDecision {
            aborted: true,
            reason: format!(
                "Bell quantity {s_estimate:.6} + {}σ ({:.6}) is below {bound:.6}",
                policy.n_sigma, s_std_error
            ),
        }
    } else {
        AbortDecision {
            aborted: false,
            reason: String::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_violation_passes() {
        let d = abort_decision(2.488, 0.01, &AbortPolicy::default());
        assert!(!d.aborted);
        assert!(d.reason.is_empty());
    }

    #[test]
    fn local_value_aborts() {
        let d = abort_decision(1.0, 0.01, &AbortPolicy::default());
        assert!(d.aborted);
        assert!(!d.reason.is_empty());
    }

    #[test]
    fn just_above_bound_passes() {
        assert!(!abort_decision(1.74, 0.005, &AbortPolicy::default()).aborted);
        // Default bound equals √3.
        let bound = AbortPolicy::default().v_threshold * thresholds().qm_value;
        assert!((bound - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn uncertainty_can_save_a_low_estimate() {
        let policy = AbortPolicy::default();
        assert!(abort_decision(1.70, 0.005, &policy).aborted);
        assert!(!abort_decision(1.70, 0.02, &policy).aborted);
    }

    #[test]
    fn estimate_needs_every_pair() {
        let r = TrialRecord {
            index: 0,
            alice_setting: 1,
            bob_setting: 1,
            alice_outcome: 0,
            bob_outcome: 0,
            eve_subspace: None,
            eve_guess: None,
        };
        assert!(estimate_bell(&[r]).is_none());
    }
}
