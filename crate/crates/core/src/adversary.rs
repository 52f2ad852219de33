//! Behavior programs for the watched miner and colluding UE selection.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::UeId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error("collusion fraction {0} must lie in [0,1]")]
    FractionOutOfRange(f64),
    #[error("behavior spans must be positive")]
    ZeroSpan,
    #[error("tamper probability {0} must lie in [0,1]")]
    TamperProbOutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BehaviorKind {
    AlwaysHonest,
    /// Honest before `start_round`, malicious from then on.
    LateOnset { start_round: u64 },
    /// Honest for `honest_prefix` rounds, then alternating malicious and
    /// honest spans.
    Oscillating {
        honest_prefix: u64,
        malicious_span: u64,
        honest_span: u64,
    },
}

impl BehaviorKind {
    pub const LATE_ONSET: BehaviorKind = BehaviorKind::LateOnset { start_round: 20 };
    pub const OSCILLATING: BehaviorKind = BehaviorKind::Oscillating {
        honest_prefix: 20,
        malicious_span: 15,
        honest_span: 5,
    };

    pub fn name(&self) -> &'static str {
        match self {
            BehaviorKind::AlwaysHonest => "honest",
            BehaviorKind::LateOnset { .. } => "late-onset",
            BehaviorKind::Oscillating { .. } => "oscillating",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorProgram {
    pub kind: BehaviorKind,
    /// Per-record tamper probability while malicious and managing.
    pub tamper_prob: f64,
    pub tamper_as_manager: bool,
    /// Approve every draft unconditionally while malicious and verifying.
    pub lie_as_verifier: bool,
}

impl Default for BehaviorProgram {
    fn default() -> Self {
        BehaviorProgram::new(BehaviorKind::LATE_ONSET)
    }
}

impl BehaviorProgram {
    pub fn new(kind: BehaviorKind) -> Self {
        BehaviorProgram {
            kind,
            tamper_prob: 1.0,
            tamper_as_manager: true,
            lie_as_verifier: true,
        }
    }

    pub fn honest() -> Self {
        BehaviorProgram::new(BehaviorKind::AlwaysHonest)
    }

    pub fn validate(&self) -> Result<(), AdversaryError> {
        if !(0.0..=1.0).contains(&self.tamper_prob) {
            return Err(AdversaryError::TamperProbOutOfRange(self.tamper_prob));
        }
        if let BehaviorKind::Oscillating {
            malicious_span,
            honest_span,
            ..
        } = self.kind
        {
            if malicious_span == 0 || honest_span == 0 {
                return Err(AdversaryError::ZeroSpan);
            }
        }
        Ok(())
    }

    pub fn is_malicious(&self, round: u64) -> bool {
        is_malicious(&self.kind, round)
    }

    pub fn tampers_at(&self, round: u64) -> bool {
        self.tamper_as_manager && self.is_malicious(round)
    }

    pub fn lies_at(&self, round: u64) -> bool {
        self.lie_as_verifier && self.is_malicious(round)
    }
}

pub fn is_malicious(kind: &BehaviorKind, round: u64) -> bool {
    match *kind {
        BehaviorKind::AlwaysHonest => false,
        BehaviorKind::LateOnset { start_round } => round >= start_round,
        BehaviorKind::Oscillating {
            honest_prefix,
            malicious_span,
            honest_span,
        } => {
            if round < honest_prefix {
                return false;
            }
            (round - honest_prefix) % (malicious_span + honest_span) < malicious_span
        }
    }
}

/// The colluding UEs for one run, fixed at start.
#[derive(Debug, Clone, PartialEq)]
pub struct CollusionPlan {
    pub fraction: f64,
    pub colluders: BTreeSet<UeId>,
}

impl CollusionPlan {
    pub fn contains(&self, ue: UeId) -> bool {
        self.colluders.contains(&ue)
    }

    pub fn len(&self) -> usize {
        self.colluders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colluders.is_empty()
    }

    /// Dense membership mask indexed by UE id.
    pub fn mask(&self, ue_count: usize) -> Vec<bool> {
        let mut mask = vec![false; ue_count];
        for ue in &self.colluders {
            if let Some(slot) = mask.get_mut(ue.index()) {
                *slot = true;
            }
        }
        mask
    }
}

pub fn colluder_count(ue_count: usize, fraction: f64) -> usize {
    ((fraction * ue_count as f64).round() as usize).min(ue_count)
}

/// Draws `round(fraction * |ues|)` colluders uniformly without replacement.
pub fn select_colluders<R: Rng + ?Sized>(
    ues: &[UeId],
    fraction: f64,
    rng: &mut R,
) -> Result<CollusionPlan, AdversaryError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(AdversaryError::FractionOutOfRange(fraction));
    }
    let count = colluder_count(ues.len(), fraction);
    let colluders = sample(rng, ues.len(), count)
        .into_iter()
        .map(|i| ues[i])
        .collect();
    Ok(CollusionPlan {
        fraction,
        colluders,
    })
}
