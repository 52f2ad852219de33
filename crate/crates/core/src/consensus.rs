//! The enhanced dPoS round: election, manager rotation, verifier bands,
//! 2/3-majority commit and UE feedback.


use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::BehaviorProgram;
use crate::chain::Block;
use crate::reputation::{Interaction, InteractionLedger, ReputationError};
use crate::{MinerId, UeId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConsensusError {
    #[error("{candidates} candidates cannot fill {required} active slots")]
    TooFewCandidates { candidates: usize, required: usize },
    #[error("no active miners to rotate through")]
    EmptyActiveSet,
    #[error("verifier {verifier} holds type {held} but attempted contract {attempted}")]
    WrongContractType {
        verifier: MinerId,
        held: u32,
        attempted: u32,
    },
    #[error("verifier {0} submitted more than one verdict")]
    DuplicateVerdict(MinerId),
    #[error("at least one verifier is required")]
    NoVerifiers,
    #[error("at least one verifier type is required")]
    NoVerifierTypes,
    #[error("phase {to:?} cannot follow {from:?}")]
    PhaseOrder { from: Phase, to: Phase },
    #[error(transparent)]
    Ledger(#[from] ReputationError),
}

/// Smallest approval count that commits: `ceil(2n/3)`.
pub fn quorum_size(verifier_count: u32) -> u32 {
    (2 * u64::from(verifier_count)).div_ceil(3) as u32
}

/// Reputation values are compared at this resolution so floating noise in
/// aggregation does not reorder miners that are equal in substance.
const RANK_RESOLUTION: f64 = 1e-9;

fn rank_key(reputation: f64) -> i64 {
    (reputation / RANK_RESOLUTION).round() as i64
}

/// Orders miners by reputation descending, ties by ascending id.
pub fn rank_by_reputation(reputations: &[(MinerId, f64)]) -> Vec<MinerId> {
    let mut keyed: Vec<(i64, MinerId)> = reputations
        .iter()
        .map(|(id, rep)| (rank_key(*rep), *id))
        .collect();
    keyed.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, id)| id).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinerProfile {
    pub id: MinerId,
    pub reputation: f64,
    pub active: bool,
    pub behavior: BehaviorProgram,
}

impl MinerProfile {
    pub fn honest(id: MinerId, reputation: f64) -> Self {
        MinerProfile {
            id,
            reputation,
            active: false,
            behavior: BehaviorProgram::honest(),
        }
    }
}

/// Outcome of the election: both lists in descending reputation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Election {
    pub active: Vec<MinerId>,
    pub standby: Vec<MinerId>,
}

impl Election {
    /// Splits a full ranking into the top `active_count` and the rest.
    pub fn from_ranking(mut ranking: Vec<MinerId>, active_count: usize) -> Result<Self, ConsensusError> {
        if ranking.len() < active_count {
            return Err(ConsensusError::TooFewCandidates {
                candidates: ranking.len(),
                required: active_count,
            });
        }
        let standby = ranking.split_off(active_count);
        Ok(Election {
            active: ranking,
            standby,
        })
    }

    pub fn is_active(&self, miner: MinerId) -> bool {
        self.active.contains(&miner)
    }

    /// Active then standby, i.e. every miner by descending reputation.
    pub fn ranked(&self) -> impl Iterator<Item = MinerId> + '_ {
        self.active.iter().chain(self.standby.iter()).copied()
    }
}

pub fn elect_miners(candidates: &[MinerProfile], active_count: usize) -> Result<Election, ConsensusError> {
    let reps: Vec<(MinerId, f64)> = candidates.iter().map(|c| (c.id, c.reputation)).collect();
    Election::from_ranking(rank_by_reputation(&reps), active_count)
}

pub fn rotate_manager(active: &[MinerId], round: u64) -> Result<MinerId, ConsensusError> {
    if active.is_empty() {
        return Err(ConsensusError::EmptyActiveSet);
    }
    Ok(active[(round % active.len() as u64) as usize])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractSpec {
    pub type_index: u32,
    pub size_bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifierAssignment {
    pub miner: MinerId,
    pub type_index: u32,
    pub contract: ContractSpec,
}

/// Band sizes for `n` verifiers over `types` contiguous bands; sizes differ
/// by at most one, larger bands first.
pub fn band_sizes(n: usize, types: u32) -> Vec<usize> {
    let types = types as usize;
    let (base, extra) = (n / types, n % types);
    (0..types).map(|i| base + usize::from(i < extra)).collect()
}

/// Assigns every miner except the manager to a reputation band; band `i`
/// receives contract `i`.
pub fn assign_verifiers(
    election: &Election,
    manager: MinerId,
    types: u32,
    contract_bytes: u64,
) -> Result<Vec<VerifierAssignment>, ConsensusError> {
    if types == 0 {
        return Err(ConsensusError::NoVerifierTypes);
    }
    let verifiers: Vec<MinerId> = election.ranked().filter(|m| *m != manager).collect();
    let sizes = band_sizes(verifiers.len(), types);
    let mut out = Vec::with_capacity(verifiers.len());
    let mut it = verifiers.into_iter();
    for (type_index, size) in sizes.into_iter().enumerate() {
        let contract = ContractSpec {
            type_index: type_index as u32,
            size_bytes: contract_bytes,
        };
        for miner in it.by_ref().take(size) {
            out.push(VerifierAssignment {
                miner,
                type_index: type_index as u32,
                contract,
            });
        }
    }
    Ok(out)
}

/// Verdict of one verifier on a draft.
///
/// `audit` lists the record indices this verifier checks. An honest verifier
/// approves iff none of them is tampered; a colluding verifier approves
/// unconditionally. A verdict on another type's contract is discarded.
pub fn verify_block(
    draft: &Block,
    assignment: &VerifierAssignment,
    attempted: &ContractSpec,
    audit: &[usize],
    colluding: bool,
) -> Result<bool, ConsensusError> {
    if attempted.type_index != assignment.type_index {
        return Err(ConsensusError::WrongContractType {
            verifier: assignment.miner,
            held: assignment.type_index,
            attempted: attempted.type_index,
        });
    }
    if colluding {
        return Ok(true);
    }
    Ok(!audit
        .iter()
        .filter_map(|i| draft.data_records.get(*i))
        .any(|r| r.tampered))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommitOutcome {
    pub commit: bool,
    pub approvals: u32,
    pub required: u32,
}

pub fn commit_decision(verdicts: &[(MinerId, bool)], verifier_count: u32) -> Result<CommitOutcome, ConsensusError> {
    if verifier_count == 0 {
        return Err(ConsensusError::NoVerifiers);
    }
    let mut ids: Vec<MinerId> = verdicts.iter().map(|(m, _)| *m).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(ConsensusError::DuplicateVerdict(w[0]));
    }
    let approvals = verdicts.iter().map(|(_, a)| u32::from(*a)).sum();
    let required = quorum_size(verifier_count);
    Ok(CommitOutcome {
        commit: approvals >= required,
        approvals,
        required,
    })
}

/// Feedback from UEs on the round's block. Honest producers rate the
/// manager negatively iff their own record was tampered; colluders always
/// rate positively. `hops[ue]` is the report distance of each UE.
pub fn feedback_phase(
    block: &Block,
    colluders: &[bool],
    hops: &[u32],
    round: u64,
    ledger: &mut InteractionLedger,
) -> Result<Vec<(UeId, Interaction)>, ConsensusError> {
    let mut emitted = Vec::with_capacity(block.data_records.len());
    for rec in &block.data_records {
        let ue = rec.producer;
        let colluding = colluders.get(ue.index()).copied().unwrap_or(false);
        let event = Interaction {
            round,
            positive: colluding || !rec.tampered,
            hops: hops.get(ue.index()).copied().unwrap_or(1),
        };
        ledger.record(ue, block.manager, event)?;
        emitted.push((ue, event));
    }
    Ok(emitted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    Collect,
    Draft,
    Verify,
    Commit,
    Feedback,
}

/// Phase tracker for one round; phases only move forward.
#[derive(Debug, Clone)]
pub struct RoundState {
    pub round: u64,
    pub manager: MinerId,
    phase: Phase,
    pub draft: Option<Block>,
    pub verdicts: Vec<(MinerId, bool)>,
}

impl RoundState {
    pub fn new(round: u64, manager: MinerId) -> Self {
        RoundState {
            round,
            manager,
            phase: Phase::Collect,
            draft: None,
            verdicts: Vec::new(),
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn advance(&mut self, to: Phase) -> Result<(), ConsensusError> {
        if to as u8 != self.phase as u8 + 1 {
            return Err(ConsensusError::PhaseOrder {
                from: self.phase,
                to,
            });
        }
        self.phase = to;
        Ok(())
    }
}
