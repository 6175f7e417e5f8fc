//! Trial records, key sifting and the line-delimited transcript format.
//!
//! One trial per line, comma separated:
//!
//! ```text
//! trial,alice_setting,bob_setting,alice_outcome,bob_outcome,eve_subspace,eve_guess
//! 17,3,3,1,2,0,1
//! 18,1,2,0,0,-,-
//! ```
//!
//! Settings are 1-based, outcomes and Eve's fields 0-based; `-` marks an
//! absent Eve field.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};

pub const RECORD_HEADER: &str =
    "trial,alice_setting,bob_setting,alice_outcome,bob_outcome,eve_subspace,eve_guess";

/// Setting index used for key generation on both sides.
pub const KEY_SETTING: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub alice_setting: u8,
    pub bob_setting: u8,
    pub alice_outcome: u8,
    pub bob_outcome: u8,
    pub eve_subspace: Option<u8>,
    pub eve_guess: Option<u8>,
}

/// Which public-discussion group a trial falls into once settings are
/// announced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    /// Both settings in {1, 2}: outcomes are revealed for the Bell test.
    BellTest,
    /// Both settings equal 3: outcomes form the raw key.
    Key,
    /// Any other combination.
    Discarded,
}

impl TrialRecord {
    pub fn group(&self) -> Group {
        match (self.alice_setting, self.bob_setting) {
            (1 | 2, 1 | 2) => Group::BellTest,
            (KEY_SETTING, KEY_SETTING) => Group::Key,
            _ => Group::Discarded,
        }
    }

    pub fn to_line(&self) -> String {
        let opt = |x: Option<u8>| x.map_or_else(|| "-".to_string(), |v| v.to_string());
        let mut line = String::with_capacity(24);
        write!(
            line,
            "{},{},{},{},{},{},{}",
            self.index,
            self.alice_setting,
            self.bob_setting,
            self.alice_outcome,
            self.bob_outcome,
            opt(self.eve_subspace),
            opt(self.eve_guess)
        )
        .expect("writing to a String cannot fail");
        line
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let bad = || QkdError::InvalidInput(format!("malformed transcript line: {line:?}"));
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 7 {
            return Err(bad());
        }
        let small = |s: &str, lo: u8, hi: u8| -> Result<u8> {
            s.parse::<u8>()
                .ok()
                .filter(|v| (lo..=hi).contains(v))
                .ok_or_else(bad)
        };
        let eve = |s: &str| -> Result<Option<u8>> {
            if s == "-" {
                Ok(None)
            } else {
                small(s, 0, 2).map(Some)
            }
        };
        Ok(Self {
            index: fields[0].parse().map_err(|_| bad())?,
            alice_setting: small(fields[1], 1, 3)?,
            bob_setting: small(fields[2], 1, 3)?,
            alice_outcome: small(fields[3], 0, 2)?,
            bob_outcome: small(fields[4], 0, 2)?,
            eve_subspace: eve(fields[5])?,
            eve_guess: eve(fields[6])?,
        })
    }
}

pub fn write_records<W: Write>(mut out: W, records: &[TrialRecord]) -> io::Result<()> {
    writeln!(out, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.to_line())?;
    }
    Ok(())
}

/// Reads records written by [`write_records`]; the header and blank lines
/// are skipped.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<TrialRecord>> {
    let mut records = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| QkdError::InvalidInput(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed == RECORD_HEADER || trimmed.starts_with('#') {
            continue;
        }
        records.push(TrialRecord::parse_line(trimmed)?);
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Alice,
    Bob,
    Eve,
}

/// Bob's outcome mapped onto Alice's symbol: under the key settings only
/// `(0,0), (1,2), (2,1)` occur, so `0→0, 1→2, 2→1`.
pub const fn bob_remap(outcome: u8) -> u8 {
    (3 - outcome) % 3
}

/// Key trits held by one party for a run of key-setting records.
pub fn extract_key(records: &[TrialRecord], role: Role) -> Result<Vec<u8>> {
    records
        .iter()
        .map(|r| {
            if r.group() != Group::Key {
                return Err(QkdError::NonKeyRecord {
                    index: r.index as usize,
                });
            }
            match role {
                Role::Alice => Ok(r.alice_outcome),
                Role::Bob => Ok(bob_remap(r.bob_outcome)),
                Role::Eve => r.eve_guess.ok_or_else(|| {
                    QkdError::InvalidInput(format!("record {} has no Eve outcome", r.index))
                }),
            }
        })
        .collect()
}
