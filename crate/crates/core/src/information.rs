//! Shannon entropy and mutual information over finite joint tables.

use serde::Serialize;

use crate::error::{QkdError, Result};

/// Logarithm base for entropies. Base 3 measures information in trits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogBase(f64);

impl LogBase {
    pub const TRIT: LogBase = LogBase(3.0);
    pub const BIT: LogBase = LogBase(2.0);
    pub const NAT: LogBase = LogBase(std::f64::consts::E);

    pub fn new(base: f64) -> Result<Self> {
        if !base.is_finite() || base <= 0.0 || base == 1.0 {
            return Err(QkdError::InvalidInput(format!(
                "logarithm base must be positive and not 1, got {base}"
            )));
        }
        Ok(Self(base))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Converts a value measured in nats into this base.
    pub fn from_nats(&self, nats: f64) -> f64 {
        nats / self.0.ln()
    }
}

impl Default for LogBase {
    fn default() -> Self {
        Self::TRIT
    }
}

/// `x ln x` with the convention `0 ln 0 = 0`.
pub fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Shannon entropy in nats.
pub fn entropy_nats<'a>(probs: impl IntoIterator<Item = &'a f64>) -> f64 {
    -probs.into_iter().map(|&p| xlogx(p)).sum::<f64>()
}

/// `H(X) + H(Y) − H(X, Y)` for a joint table `joint[x][y]`, in nats.
pub fn mutual_information_nats(joint: &[Vec<f64>]) -> f64 {
    let cols = joint.first().map_or(0, Vec::len);
    let row_marginal: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let col_marginal: Vec<f64> = (0..cols)
        .map(|j| joint.iter().map(|r| r[j]).sum())
        .collect();
    let h_joint = entropy_nats(joint.iter().flatten());
    entropy_nats(&row_marginal) + entropy_nats(&col_marginal) - h_joint
}
