//! Seeded Monte Carlo simulation of the protocol.
//!
//! Each trial draws a settings pair, samples Alice's and Bob's outcomes by
//! the Born rule from the source state, and, under an attack with the key
//! settings, samples Eve's square-root-measurement result on her ancilla.
//! Trials then split into the Bell-test group, the key group and discarded
//! mixed settings.
//!
//! Randomness: trial `i` draws from ChaCha8 keyed by the 64-bit seed with
//! stream number `i`, so any sharding of trials across workers reproduces
//! the serial transcript exactly.

pub mod estimate;
pub mod transcript;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::attack::{
    build_tripartite, srm_outcome_probabilities, subspace_members, transformed_ancillas,
    AttackParams, ANCILLA_DIM,
};
use crate::correlations::joint_probs;
use crate::error::{QkdError, Result};
use crate::quantum::{max_entangled_state, pair_index, standard_settings};

pub use estimate::{abort_decision, estimate_bell, AbortDecision, AbortPolicy, BellEstimate};
pub use transcript::{
    bob_remap, extract_key, read_records, write_records, Group, Role, TrialRecord, KEY_SETTING,
};

const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Honest,
    Attack(AttackParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    trials: u64,
    seed: u64,
    source: Source,
    /// `weights[k][l]` for Alice's setting `k + 1` and Bob's `l + 1`.
    setting_weights: [[f64; 3]; 3],
    workers: Option<usize>,
    abort_policy: AbortPolicy,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64, source: Source) -> Result<Self> {
        if trials == 0 {
            return Err(QkdError::InvalidInput("trials must be at least 1".into()));
        }
        Ok(Self {
            trials,
            seed,
            source,
            setting_weights: [[1.0 / 9.0; 3]; 3],
            workers: None,
            abort_policy: AbortPolicy::default(),
        })
    }

    pub fn with_setting_weights(mut self, weights: [[f64; 3]; 3]) -> Result<Self> {
        if weights.iter().flatten().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(QkdError::InvalidInput(
                "setting weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().flatten().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(QkdError::InvalidInput(format!(
                "setting weights sum to {total}, expected 1"
            )));
        }
        self.setting_weights = weights;
        Ok(self)
    }

    /// Number of worker threads; `None` uses the global pool.
    pub fn with_workers(mut self, workers: Option<usize>) -> Result<Self> {
        if workers == Some(0) {
            return Err(QkdError::InvalidInput("workers must be at least 1".into()));
        }
        self.workers = workers;
        Ok(self)
    }

    pub fn with_abort_policy(mut self, policy: AbortPolicy) -> Self {
        self.abort_policy = policy;
        self
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn setting_weights(&self) -> &[[f64; 3]; 3] {
        &self.setting_weights
    }
}

/// Outcome distributions of a source, precomputed once per run.
#[derive(Debug, Clone)]
pub struct SourceModel {
    /// `joint[k][l][3a + b]` for settings `(k + 1, l + 1)`.
    joint: [[[f64; 9]; 3]; 3],
    /// Under the key settings: Eve's guess distribution given Alice–Bob
    /// outcome `3a + b`, or `None` for an honest source.
    eve: Option<[[f64; 3]; 9]>,
}

impl SourceModel {
    pub fn new(source: &Source) -> Result<Self> {
        match source {
            Source::Honest => Self::honest(),
            Source::Attack(params) => Self::attack(params),
        }
    }

    fn honest() -> Result<Self> {
        let settings = standard_settings();
        let psi = max_entangled_state();
        let mut joint = [[[0.0; 9]; 3]; 3];
        for (row, alice) in joint.iter_mut().zip(&settings.alice) {
            for (cell, bob) in row.iter_mut().zip(&settings.bob) {
                *cell = joint_probs(&psi, alice, bob)?.flat();
            }
        }
        Ok(Self { joint, eve: None })
    }

    /// Born-rule probabilities read off the explicit tripartite state.
    fn attack(params: &AttackParams) -> Result<Self> {
        let settings = standard_settings();
        let state = build_tripartite(params)?;
        let mut joint = [[[0.0; 9]; 3]; 3];
        for (row, alice) in joint.iter_mut().zip(&settings.alice) {
            for (cell, bob) in row.iter_mut().zip(&settings.bob) {
                let rotated = state.apply_local(alice, bob);
                for (ab, p) in cell.iter_mut().enumerate() {
                    *p = rotated.slice(ab * ANCILLA_DIM, ANCILLA_DIM).norm_sqr();
                }
            }
        }

        let tilde = transformed_ancillas(params)?;
        let mut eve = [[1.0 / 3.0; 3]; 9];
        for i in 0..3 {
            let members = subspace_members(i);
            let states = members.map(|(a, b)| tilde.get(a, b).clone());
            if states.iter().any(|s| s.norm_sqr() == 0.0) {
                // Empty subspace: never sampled.
                continue;
            }
            let probs = srm_outcome_probabilities(&states)?;
            for (j, &(a, b)) in members.iter().enumerate() {
                eve[pair_index(a, b)] = probs[j];
            }
        }
        Ok(Self {
            joint,
            eve: Some(eve),
        })
    }

    pub fn joint(&self, alice_setting: u8, bob_setting: u8) -> &[f64; 9] {
        &self.joint[usize::from(alice_setting) - 1][usize::from(bob_setting) - 1]
    }
}

/// Index of the first cumulative weight exceeding `u`, skipping zero
/// weights so rounding can never select an impossible outcome.
fn sample_index(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if target < acc {
            return i;
        }
    }
    last
}

fn simulate_trial(
    base: &ChaCha8Rng,
    index: u64,
    weights: &[f64; 9],
    model: &SourceModel,
) -> TrialRecord {
    let mut rng = base.clone();
    rng.set_stream(index);

    let pair = sample_index(weights, rng.random::<f64>());
    let (alice_setting, bob_setting) = ((pair / 3 + 1) as u8, (pair % 3 + 1) as u8);
    let ab = sample_index(model.joint(alice_setting, bob_setting), rng.random::<f64>());
    let (a, b) = (ab / 3, ab % 3);

    let mut record = TrialRecord {
        index,
        alice_setting,
        bob_setting,
        alice_outcome: a as u8,
        bob_outcome: b as u8,
        eve_subspace: None,
        eve_guess: None,
    };
    if let (Some(eve), Group::Key) = (&model.eve, record.group()) {
        let guess = sample_index(&eve[ab], rng.random::<f64>());
        record.eve_subspace = Some(crate::attack::subspace_of(a, b) as u8);
        record.eve_guess = Some(guess as u8);
    }
    record
}

fn simulate_records(config: &SimConfig, model: &SourceModel) -> Result<Vec<TrialRecord>> {
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights = [0.0; 9];
    for (k, row) in config.setting_weights.iter().enumerate() {
        for (l, w) in row.iter().enumerate() {
            weights[3 * k + l] = *w;
        }
    }
    let work = || -> Vec<TrialRecord> {
        (0..config.trials)
            .into_par_iter()
            .map(|i| simulate_trial(&base, i, &weights, model))
            .collect()
    };
    match config.workers {
        None => Ok(work()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| QkdError::InvalidInput(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

/// Full output of one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTranscript {
    pub records: Vec<TrialRecord>,
    pub bell: Option<BellEstimate>,
    pub sifted_key_alice: Vec<u8>,
    pub sifted_key_bob: Vec<u8>,
    /// Present only under an attack.
    pub sifted_key_eve: Option<Vec<u8>>,
    /// `None` when no key-setting trials occurred.
    pub qber: Option<f64>,
    pub aborted: bool,
    pub abort_reason: String,
}

impl ProtocolTranscript {
    pub fn s_estimate(&self) -> Option<f64> {
        self.bell.map(|b| b.s)
    }

    pub fn s_std_error(&self) -> Option<f64> {
        self.bell.map(|b| b.std_error)
    }

    pub fn key_length(&self) -> usize {
        self.sifted_key_alice.len()
    }

    /// Fraction of key positions where Eve's guess equals Alice's trit.
    pub fn eve_agreement(&self) -> Option<f64> {
        let eve = self.sifted_key_eve.as_ref()?;
        if eve.is_empty() {
            return None;
        }
        let hits = eve
            .iter()
            .zip(&self.sifted_key_alice)
            .filter(|(e, a)| e == a)
            .count();
        Some(hits as f64 / eve.len() as f64)
    }

    pub fn write_records<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        write_records(out, &self.records)
    }
}

/// Key/value summary of a run, serialized as the JSON summary block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptSummary {
    pub trials: u64,
    pub seed: u64,
    pub source: &'static str,
    pub f: Option<f64>,
    pub lam: Option<f64>,
    pub bell_test_trials: u64,
    pub s_estimate: Option<f64>,
    pub s_std_error: Option<f64>,
    pub key_length: usize,
    pub qber: Option<f64>,
    pub eve_agreement: Option<f64>,
    pub aborted: bool,
    pub abort_reason: String,
}

impl TranscriptSummary {
    pub fn new(config: &SimConfig, transcript: &ProtocolTranscript) -> Self {
        let (source, f, lam) = match config.source {
            Source::Honest => ("honest", None, None),
            Source::Attack(p) => ("attack", Some(p.f()), Some(p.lam())),
        };
        Self {
            trials: config.trials,
            seed: config.seed,
            source,
            f,
            lam,
            bell_test_trials: transcript.bell.map_or(0, |b| b.trials),
            s_estimate: transcript.s_estimate(),
            s_std_error: transcript.s_std_error(),
            key_length: transcript.key_length(),
            qber: transcript.qber,
            eve_agreement: transcript.eve_agreement(),
            aborted: transcript.aborted,
            abort_reason: transcript.abort_reason.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary is always serializable")
    }
}

/// Runs the protocol end to end: simulate, sift, estimate and decide.
pub fn run(config: &SimConfig) -> Result<ProtocolTranscript> {
    let model = SourceModel::new(&config.source)?;
    let records = simulate_records(config, &model)?;

    let key_records: Vec<TrialRecord> = records
        .iter()
        .filter(|r| r.group() == Group::Key)
        .copied()
        .collect();
    let sifted_key_alice = extract_key(&key_records, Role::Alice)?;
    let sifted_key_bob = extract_key(&key_records, Role::Bob)?;
    let sifted_key_eve = match config.source {
        Source::Honest => None,
        Source::Attack(_) => Some(extract_key(&key_records, Role::Eve)?),
    };
    let qber = (!sifted_key_alice.is_empty()).then(|| {
        let errors = sifted_key_alice
            .iter()
            .zip(&sifted_key_bob)
            .filter(|(a, b)| a != b)
            .count();
        errors as f64 / sifted_key_alice.len() as f64
    });

    let bell = estimate_bell(&records);
    let decision = match bell {
        Some(b) => abort_decision(b.s, b.std_error, &config.abort_policy),
        None => AbortDecision {
            aborted: true,
            reason: "no Bell-test data for at least one settings pair".into(),
        },
    };

    Ok(ProtocolTranscript {
        records,
        bell,
        sifted_key_alice,
        sifted_key_bob,
        sifted_key_eve,
        qber,
        aborted: decision.aborted,
        abort_reason: decision.reason,
    })
}
