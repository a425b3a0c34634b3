use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::optimize::Rounding;
use super::partition::Subset;
use crate::error::{Error, Result};

pub const POLICY_VERSION: u32 = 1;

/// One learned cell: keep probability `s` plus the dev-set evidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyEntry {
    pub etype: String,
    pub subset: Subset,
    pub s: f64,
    pub tp: u64,
    pub fp: u64,
    pub precision: f64,
}

/// Keep probabilities for (type, subset) cells absent from `entries`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UnseenDefaults {
    pub only_a: f64,
    pub both: f64,
    pub only_b: f64,
}

impl UnseenDefaults {
    pub fn get(&self, subset: Subset) -> f64 {
        match subset {
            Subset::OnlyA => self.only_a,
            Subset::Both => self.both,
            Subset::OnlyB => self.only_b,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CreationStats {
    pub dev_sentences: usize,
    pub gold_total: u64,
    /// Optimal value of the selection objective.
    pub objective_f: f64,
    /// F of the applied policy on the dev set, after overlap arbitration.
    pub dev_f: f64,
    /// Which candidate won the dev-set check; see `PolicyChoice`.
    pub selection: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolicyMetadata {
    pub dev_name: String,
    pub created: CreationStats,
    pub system_names: Vec<String>,
}

/// Learned keep probabilities per (error type, subset).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionPolicy {
    pub version: u32,
    pub beta: f64,
    pub min_samples: u64,
    pub rounding: Rounding,
    pub unseen: UnseenDefaults,
    pub entries: Vec<PolicyEntry>,
    pub metadata: PolicyMetadata,
}

impl SelectionPolicy {
    pub fn new(beta: f64, min_samples: u64, rounding: Rounding, entries: Vec<PolicyEntry>) -> Self {
        SelectionPolicy {
            version: POLICY_VERSION,
            beta,
            min_samples,
            rounding,
            unseen: UnseenDefaults::default(),
            entries,
            metadata: PolicyMetadata {
                created: CreationStats {
                    selection: "optimized".into(),
                    ..Default::default()
                },
                ..Default::default()
            },
        }
    }

    /// Keep probability for a cell, falling back to the unseen defaults.
    pub fn value(&self, etype: &str, subset: Subset) -> f64 {
        self.entries
            .iter()
            .find(|e| e.subset == subset && e.etype == etype)
            .map_or_else(|| self.unseen.get(subset), |e| e.s)
    }

    pub(crate) fn lookup(&self) -> PolicyLookup<'_> {
        PolicyLookup {
            map: self
                .entries
                .iter()
                .map(|e| ((e.etype.as_str(), e.subset), e.s))
                .collect(),
            unseen: self.unseen,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.is_nan() || self.beta <= 0.0 {
            return Err(Error::InvalidInput(format!("policy beta {} must be > 0", self.beta)));
        }
        if self.version != POLICY_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported policy version {}",
                self.version
            )));
        }
        let unseen = [self.unseen.only_a, self.unseen.both, self.unseen.only_b];
        for s in self.entries.iter().map(|e| e.s).chain(unseen) {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidInput(format!("keep probability {s} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let policy: SelectionPolicy = serde_json::from_str(text)?;
        policy.validate()?;
        Ok(policy)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub(crate) struct PolicyLookup<'a> {
    map: HashMap<(&'a str, Subset), f64>,
    unseen: UnseenDefaults,
}

impl PolicyLookup<'_> {
    pub(crate) fn get(&self, etype: &str, subset: Subset) -> f64 {
        self.map
            .get(&(etype, subset))
            .copied()
            .unwrap_or_else(|| self.unseen.get(subset))
    }
}
