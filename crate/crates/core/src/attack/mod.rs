//! Eve's symmetric incoherent attack.
//!
//! Eve controls the source and emits a tripartite state
//!
//! ```text
//! |ψ_ABE⟩ = √(F/3) Σ_k |kk⟩|E_kk⟩ + √(G/6) Σ_{k≠l} |kl⟩|E_kl⟩,   F + G = 1
//! ```
//!
//! with unit diagonal ancillas of pairwise real overlap `λ` and six
//! orthonormal off-diagonal ancillas orthogonal to the diagonal block. The
//! reduced Alice–Bob state is the symmetric noise mixture
//! `A|ψ⟩⟨ψ| + B|χ₁⟩⟨χ₁| + B|χ₂⟩⟨χ₂| + D·I/9`, whose correlation functions
//! are those of `|ψ⟩` scaled by the visibility `V = Fλ`.
//!
//! Everything here exists twice: closed forms in [`analysis`] and an
//! explicit 81-dimensional construction in this module that the closed
//! forms are checked against.

pub mod analysis;
pub mod discrimination;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QkdError, Result};
use crate::quantum::{
    chi_state, max_entangled_state, omega_pow, pair_index, standard_settings, vectors_from_gram,
    ComplexMatrix, ComplexVector, PhaseVector,
};

pub use analysis::{
    ab_error, eve_correct_rate, eve_error, mutual_info_ab, mutual_info_ae, subspace_analysis,
    subspace_analysis_explicit, w_from_overlap, SubspaceAnalysis,
};
pub use discrimination::{srm_directions, srm_outcome_probabilities};

/// Dimension of Eve's ancilla space: three for the diagonal block plus six
/// orthonormal directions for the off-diagonal terms.
pub const ANCILLA_DIM: usize = 9;

/// Dimension of the Alice ⊗ Bob ⊗ ancilla space.
pub const TRIPARTITE_DIM: usize = 9 * ANCILLA_DIM;

const EDGE_TOL: f64 = 1e-12;

/// Off-diagonal pairs in the order their ancillas occupy ancilla basis
/// vectors `3..9`.
pub const OFF_DIAGONAL: [(usize, usize); 6] = [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)];

/// Eve's two attack parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttackParams {
    f: f64,
    lam: f64,
}

impl AttackParams {
    /// `f` is the weight of the diagonal block, in `[0, 1]`; `lam` the
    /// overlap of the diagonal ancillas, in `[−1/2, 1]` (the range where
    /// three symmetric unit vectors exist).
    pub fn new(f: f64, lam: f64) -> Result<Self> {
        if !f.is_finite() || !(-EDGE_TOL..=1.0 + EDGE_TOL).contains(&f) {
            return Err(QkdError::InvalidInput(format!(
                "F must lie in [0, 1], got {f}"
            )));
        }
        if !lam.is_finite() {
            return Err(QkdError::InvalidInput(format!(
                "lambda must be finite, got {lam}"
            )));
        }
        if !(-0.5 - EDGE_TOL..=1.0 + EDGE_TOL).contains(&lam) {
            return Err(QkdError::InfeasibleGram {
                min_eigenvalue: (1.0 + 2.0 * lam).min(1.0 - lam),
            });
        }
        Ok(Self {
            f: f.clamp(0.0, 1.0),
            lam: lam.clamp(-0.5, 1.0),
        })
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn g(&self) -> f64 {
        1.0 - self.f
    }

    pub fn lam(&self) -> f64 {
        self.lam
    }

    /// `V = Fλ`, the factor by which every correlation function shrinks.
    pub fn visibility(&self) -> f64 {
        self.f * self.lam
    }
}

/// Weights of the reduced-state mixture; `b == c` for a real visibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl NoiseCoefficients {
    pub fn visibility(&self) -> f64 {
        self.a - self.b
    }

    /// `A|ψ⟩⟨ψ| + B|χ₁⟩⟨χ₁| + C|χ₂⟩⟨χ₂| + D·I/9`.
    pub fn mixture(&self) -> ComplexMatrix {
        let psi = max_entangled_state();
        let chi1 = chi_state(1).expect("valid index");
        let chi2 = chi_state(2).expect("valid index");
        let r = |x: f64| Complex64::new(x, 0.0);
        let mut rho = psi.outer(&psi).scale(r(self.a));
        rho = &rho + &chi1.outer(&chi1).scale(r(self.b));
        rho = &rho + &chi2.outer(&chi2).scale(r(self.c));
        &rho + &ComplexMatrix::identity(9).scale(r(self.d / 9.0))
    }
}

/// Solves `A + 2B + D = 1`, `A − B = Fλ`, `D = 3(1 − F)/2`.
pub fn coefficients(params: &AttackParams) -> NoiseCoefficients {
    let (f, v) = (params.f, params.visibility());
    let b = (3.0 * f - 1.0 - 2.0 * v) / 6.0;
    NoiseCoefficients {
        a: (3.0 * f - 1.0 + 4.0 * v) / 6.0,
        b,
        c: b,
        d: 1.5 * (1.0 - f),
    }
}

/// Eve's nine ancilla states `|E_ab⟩`, indexed by `3a + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AncillaStates(Vec<ComplexVector>);

impl AncillaStates {
    pub fn get(&self, a: usize, b: usize) -> &ComplexVector {
        &self.0[pair_index(a, b)]
    }

    pub fn as_slice(&self) -> &[ComplexVector] {
        &self.0
    }
}

/// Realizes the ancilla states: the diagonal block from its Gram matrix
/// (unit diagonal, off-diagonal `λ`) in basis vectors `0..3`, and the
/// off-diagonal ancillas as basis vectors `3..9`.
pub fn build_ancilla_states(params: &AttackParams) -> Result<AncillaStates> {
    let lam = params.lam;
    let gram = ComplexMatrix::from_fn(3, 3, |i, j| {
        Complex64::new(if i == j { 1.0 } else { lam }, 0.0)
    });
    let diagonal = vectors_from_gram(&gram)?;

    let mut states = vec![ComplexVector::zeros(ANCILLA_DIM); 9];
    for (k, v) in diagonal.iter().enumerate() {
        let target = &mut states[pair_index(k, k)];
        for i in 0..3 {
            target[i] = v[i];
        }
    }
    for (slot, &(a, b)) in OFF_DIAGONAL.iter().enumerate() {
        states[pair_index(a, b)] = ComplexVector::basis(ANCILLA_DIM, 3 + slot);
    }
    Ok(AncillaStates(states))
}

fn term_weight(params: &AttackParams, a: usize, b: usize) -> f64 {
    if a == b {
        (params.f / 3.0).sqrt()
    } else {
        (params.g() / 6.0).sqrt()
    }
}

/// Pure state of Alice's qutrit, Bob's qutrit and Eve's ancilla; the
/// component `|ab⟩|e⟩` sits at `(3a + b)·9 + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteState {
    vector: ComplexVector,
}

impl TripartiteState {
    pub fn vector(&self) -> &ComplexVector {
        &self.vector
    }

    /// Eve's (unnormalized) conditional ancilla for Alice–Bob ket `|ab⟩`.
    pub fn ancilla_block(&self, a: usize, b: usize) -> ComplexVector {
        ancilla_block(&self.vector, a, b)
    }

    /// Partial trace over the ancilla.
    pub fn reduced_state(&self) -> ComplexMatrix {
        let blocks: Vec<ComplexVector> = (0..9)
            .map(|i| self.vector.slice(i * ANCILLA_DIM, ANCILLA_DIM))
            .collect();
        ComplexMatrix::from_fn(9, 9, |i, j| blocks[j].inner(&blocks[i]))
    }

    /// Applies `U_A ⊗ U_B ⊗ I`.
    pub fn apply_local(&self, phases_a: &PhaseVector, phases_b: &PhaseVector) -> ComplexVector {
        let u = crate::quantum::tritter_unitary(phases_a)
            .tensor(&crate::quantum::tritter_unitary(phases_b));
        let mut out = ComplexVector::zeros(TRIPARTITE_DIM);
        for i in 0..9 {
            for j in 0..9 {
                let coeff = u[(i, j)];
                for e in 0..ANCILLA_DIM {
                    out[i * ANCILLA_DIM + e] += coeff * self.vector[j * ANCILLA_DIM + e];
                }
            }
        }
        out
    }
}

/// The ancilla block attached to `|ab⟩` in a tripartite vector.
pub fn ancilla_block(vector: &ComplexVector, a: usize, b: usize) -> ComplexVector {
    vector.slice(pair_index(a, b) * ANCILLA_DIM, ANCILLA_DIM)
}

pub fn build_tripartite(params: &AttackParams) -> Result<TripartiteState> {
    let ancillas = build_ancilla_states(params)?;
    let mut vector = ComplexVector::zeros(TRIPARTITE_DIM);
    for a in 0..3 {
        for b in 0..3 {
            let w = Complex64::new(term_weight(params, a, b), 0.0);
            let offset = pair_index(a, b) * ANCILLA_DIM;
            for (e, amp) in ancillas.get(a, b).entries().iter().enumerate() {
                vector[offset + e] = w * amp;
            }
        }
    }
    Ok(TripartiteState { vector })
}

/// Eve's unnormalized conditional ancillas `|Ẽ_ab⟩` after Alice and Bob
/// apply the given settings:
///
/// ```text
/// |Ẽ_ab⟩ = ⅓ Σ_{k,l} c_kl α^{ak + bl} e^{i(φ^A_k + φ^B_l)} |E_kl⟩
/// ```
///
/// with `c_kk = √(F/3)` and `c_kl = √(G/6)` for `k ≠ l`.
pub fn transformed_ancillas_for(
    params: &AttackParams,
    phases_a: &PhaseVector,
    phases_b: &PhaseVector,
) -> Result<AncillaStates> {
    let ancillas = build_ancilla_states(params)?;
    let mut out = Vec::with_capacity(9);
    for a in 0..3 {
        for b in 0..3 {
            let mut acc = ComplexVector::zeros(ANCILLA_DIM);
            for k in 0..3 {
                for l in 0..3 {
                    let phase = Complex64::from_polar(
                        term_weight(params, k, l) / 3.0,
                        phases_a.get(k) + phases_b.get(l),
                    );
                    let coeff = omega_pow(a * k + b * l) * phase;
                    acc = &acc + &ancillas.get(k, l).scale(coeff);
                }
            }
            out.push(acc);
        }
    }
    Ok(AncillaStates(out))
}

/// [`transformed_ancillas_for`] at the key-generation settings (3, 3).
pub fn transformed_ancillas(params: &AttackParams) -> Result<AncillaStates> {
    let s = standard_settings();
    transformed_ancillas_for(params, s.alice(3), s.bob(3))
}

/// Subspace index of the Alice–Bob outcome `(a, b)` under the key
/// settings: 0 for the correct pairs `{(0,0),(1,2),(2,1)}`, 1 for
/// `{(1,1),(2,0),(0,2)}`, 2 for `{(2,2),(1,0),(0,1)}`.
pub const fn subspace_of(a: usize, b: usize) -> usize {
    (2 * (a + b)) % 3
}

/// Members of subspace `i` ordered by Alice's outcome.
pub const fn subspace_members(i: usize) -> [(usize, usize); 3] {
    let b0 = (2 * i) % 3;
    [(0, b0), (1, (b0 + 2) % 3), (2, (b0 + 1) % 3)]
}
