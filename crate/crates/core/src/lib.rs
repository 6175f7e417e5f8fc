//! Simulation and security analysis of an entanglement-based key
//! distribution protocol over pairs of qutrits.
//!
//! Alice and Bob share `(|00⟩ + |11⟩ + |22⟩)/√3` and measure after tunable
//! tritters. Two settings per side feed a Bell test whose quantity `S`
//! reaches `(2/3)(2 + √3)` quantum mechanically against a local-realistic
//! bound of `√3`; the third setting on both sides yields perfectly
//! correlated trits for the key. The crate models a symmetric incoherent
//! attack analytically and with an explicit tripartite state, sweeps its
//! parameters, and simulates full protocol runs.

pub mod attack;
pub mod cli;
pub mod correlations;
pub mod error;
pub mod information;
pub mod protocol;
pub mod quantum;
pub mod sweep;

pub use error::{QkdError, Result};
