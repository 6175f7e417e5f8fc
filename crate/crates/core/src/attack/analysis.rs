//! Closed-form error rates and mutual informations under the attack, and
//! the explicit-state computation of the same subspace quantities.

use serde::Serialize;

use super::{srm_outcome_probabilities, subspace_members, transformed_ancillas, AttackParams};
use crate::error::Result;
use crate::information::{mutual_information_nats, LogBase};

/// Subspaces whose probability falls below this are treated as empty.
pub const EMPTY_SUBSPACE: f64 = 1e-14;

/// Per-subspace quantities for the key settings. Index 0 is the subspace of
/// correct key pairs; 1 and 2 are the two wrong-key subspaces. `lam_tilde`
/// and `w` are `None` for empty subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubspaceAnalysis {
    pub p: [f64; 3],
    pub lam_tilde: [Option<f64>; 3],
    pub w: [Option<f64>; 3],
}

/// Square-root-measurement success probability for three symmetric
/// equiprobable states with pairwise real overlap `lam_tilde`.
pub fn w_from_overlap(lam_tilde: f64) -> f64 {
    let l = lam_tilde.clamp(-0.5, 1.0);
    w_from_factors(1.0 - l, 1.0 + 2.0 * l)
}

/// `W` from the Gram eigenvalue factors `1 − λ̃` and `1 + 2λ̃`. The square
/// root amplifies rounding in either factor near zero, so callers that know
/// them in closed form pass them directly.
fn w_from_factors(one_minus: f64, one_plus_two: f64) -> f64 {
    // Expanded square of (√(1+2λ̃) + 2√(1−λ̃))/3.
    (3.0 + 2.0 * one_minus.max(0.0) + 4.0 * (one_plus_two.max(0.0) * one_minus.max(0.0)).sqrt())
        / 9.0
}

/// Closed forms for the subspace probabilities, overlaps and Eve's success
/// probabilities.
pub fn subspace_analysis(params: &AttackParams) -> SubspaceAnalysis {
    let f = params.f();
    let v = params.visibility();
    let p_correct = (1.0 + 2.0 * v) / 3.0;
    let p_wrong = (1.0 - v) / 3.0;

    // Factors 1 − λ̃ and 1 + 2λ̃ per subspace, free of cancellation at the
    // degenerate edges f = 1, f = 0 and λ = 1.
    let correct = (p_correct > EMPTY_SUBSPACE).then(|| {
        let d = 1.0 + 2.0 * v;
        (1.5 * (1.0 - f) / d, 3.0 * (f + 2.0 * v) / d)
    });
    let wrong = (p_wrong > EMPTY_SUBSPACE).then(|| {
        let d = 1.0 - v;
        (1.5 * (1.0 - f) / d, 3.0 * (f - v) / d)
    });
    let factors = [correct, wrong, wrong];
    SubspaceAnalysis {
        p: [p_correct, p_wrong, p_wrong],
        lam_tilde: factors.map(|x| x.map(|(m, _)| (1.0 - m).clamp(-0.5, 1.0))),
        w: factors.map(|x| x.map(|(m, q)| w_from_factors(m, q))),
    }
}

/// The same quantities read off the explicitly constructed transformed
/// ancillas: norms for the probabilities, normalized overlaps for `λ̃`, and
/// the square-root measurement's diagonal hit rate for `W`.
pub fn subspace_analysis_explicit(params: &AttackParams) -> Result<SubspaceAnalysis> {
    let tilde = transformed_ancillas(params)?;
    let mut out = SubspaceAnalysis {
        p: [0.0; 3],
        lam_tilde: [None; 3],
        w: [None; 3],
    };
    for i in 0..3 {
        let members = subspace_members(i).map(|(a, b)| tilde.get(a, b).clone());
        let total: f64 = members.iter().map(|m| m.norm_sqr()).sum();
        out.p[i] = total;
        if total <= EMPTY_SUBSPACE {
            continue;
        }
        let overlap = members[0].inner(&members[1]).re / (members[0].norm() * members[1].norm());
        out.lam_tilde[i] = Some(overlap);
        let probs = srm_outcome_probabilities(&members)?;
        out.w[i] = Some((0..3).map(|j| probs[j][j]).sum::<f64>() / 3.0);
    }
    Ok(out)
}

/// Eve's probability of misidentifying Alice's key symbol, `Σ P_i (1 − W_i)`.
pub fn eve_error(params: &AttackParams) -> f64 {
    1.0 - eve_correct_rate(params)
}

/// `Σ P_i W_i` over occupied subspaces.
pub fn eve_correct_rate(params: &AttackParams) -> f64 {
    let a = subspace_analysis(params);
    a.p.iter()
        .zip(a.w.iter())
        .filter_map(|(p, w)| w.map(|w| p * w))
        .sum()
}

/// Alice–Bob key error rate `2(1 − Fλ)/3`.
pub fn ab_error(params: &AttackParams) -> f64 {
    2.0 * (1.0 - params.visibility()) / 3.0
}

/// Joint distribution of Alice's and Bob's raw key outcomes: correct pairs
/// each `(1 + 2V)/9`, the six error pairs each `(1 − V)/9`.
pub fn key_joint_table(params: &AttackParams) -> Vec<Vec<f64>> {
    let v = params.visibility();
    (0..3)
        .map(|a| {
            (0..3)
                .map(|b| {
                    if (a + b) % 3 == 0 {
                        (1.0 + 2.0 * v) / 9.0
                    } else {
                        (1.0 - v) / 9.0
                    }
                })
                .collect()
        })
        .collect()
}

/// `I(A;B) = H(A) + H(B) − H(A,B)` of the raw key outcomes.
pub fn mutual_info_ab(params: &AttackParams, base: LogBase) -> f64 {
    base.from_nats(mutual_information_nats(&key_joint_table(params)))
        .max(0.0)
}

/// `I(A;E)` where Eve learns the subspace exactly and then guesses Alice's
/// symbol correctly with probability `W_i`, erring to each alternative with
/// probability `(1 − W_i)/2`:
///
/// ```text
/// I(A;E) = Σ_i P_i (log 3 + W_i log W_i + (1 − W_i) log((1 − W_i)/2))
/// ```
pub fn mutual_info_ae(params: &AttackParams, base: LogBase) -> f64 {
    let a = subspace_analysis(params);
    // Per subspace: W ln(3W) + (1 − W) ln(3(1 − W)/2), which vanishes
    // exactly at W = 1/3.
    let per_subspace = |w: f64| {
        let miss = 1.0 - w;
        let term = |p: f64, x: f64| if p > 0.0 { p * x.ln() } else { 0.0 };
        term(w, 3.0 * w) + term(miss, 1.5 * miss)
    };
    let nats: f64 =
        a.p.iter()
            .zip(a.w.iter())
            .filter_map(|(p, w)| w.map(|w| p * per_subspace(w)))
            .sum();
    base.from_nats(nats).max(0.0)
}
