//! Generators and trial drivers shared by the property and acceptance suites.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use dposim_core::chain::{Block, ChainState, DataShareRecord, ReputationRecord};
use dposim_core::consensus::{
    assign_verifiers, commit_decision, quorum_size, rotate_manager, verify_block, Election,
};
use dposim_core::reputation::{Interaction, Opinion};
use dposim_core::{MinerId, UeId};

pub fn random_record<R: Rng>(rng: &mut R, round: u64) -> DataShareRecord {
    let producer = rng.gen_range(0..1000);
    DataShareRecord {
        producer: UeId(producer),
        consumer: UeId((producer + rng.gen_range(1..1000)) % 1000),
        payload_digest: rng.gen(),
        round,
        tampered: false,
    }
}

pub fn random_reputation_record<R: Rng>(rng: &mut R, round: u64) -> ReputationRecord {
    let b: f64 = rng.gen_range(0.0..0.3);
    let d = 0.3 - b;
    ReputationRecord {
        rater: UeId(rng.gen_range(0..1000)),
        ratee: MinerId(rng.gen_range(0..100)),
        opinion: Opinion {
            belief: b,
            disbelief: d,
            uncertainty: 0.7,
            base_rate: 0.5,
        },
        round,
    }
}

/// A valid chain of `len` blocks after genesis.
pub fn random_chain<R: Rng>(rng: &mut R, len: usize) -> ChainState {
    let mut chain = ChainState::new();
    for h in 1..=len as u64 {
        let data = (0..rng.gen_range(0..6)).map(|_| random_record(rng, h)).collect();
        let reps = (0..rng.gen_range(0..3))
            .map(|_| random_reputation_record(rng, h))
            .collect();
        let tip = chain.tip();
        let mut block = Block::draft(h, tip.own_hash, MinerId(rng.gen_range(0..100)), data, reps);
        block.verifier_count = 9;
        block.approvals = 6 + rng.gen_range(0..4);
        chain.append(block).expect("well-formed block appends");
    }
    chain
}

/// Changes one hashed field of `block`. Falls back to a header field when
/// the block has no record of the chosen kind.
pub fn mutate_block<R: Rng>(rng: &mut R, block: &mut Block) {
    let choice = rng.gen_range(0..9);
    let nd = block.data_records.len();
    let nr = block.reputation_records.len();
    match choice {
        0 if nd > 0 => {
            let i = rng.gen_range(0..nd);
            block.data_records[i].payload_digest ^= 1 << rng.gen_range(0..64);
        }
        1 if nd > 0 => {
            let i = rng.gen_range(0..nd);
            block.data_records[i].tampered = !block.data_records[i].tampered;
        }
        2 if nd > 0 => {
            let i = rng.gen_range(0..nd);
            block.data_records[i].producer.0 ^= 1 << rng.gen_range(0..32);
        }
        3 if nd > 0 => {
            block.data_records.remove(rng.gen_range(0..nd));
        }
        4 if nr > 0 => {
            let i = rng.gen_range(0..nr);
            let o = &mut block.reputation_records[i].opinion;
            o.belief = f64::from_bits(o.belief.to_bits() ^ 1);
        }
        5 if nr > 0 => {
            let i = rng.gen_range(0..nr);
            block.reputation_records[i].round += 1;
        }
        6 => block.manager.0 ^= 1 << rng.gen_range(0..32),
        7 => block.height ^= 1 << rng.gen_range(0..64),
        _ => block.parent_hash ^= 1 << rng.gen_range(0..64),
    }
}

/// Interaction history with non-decreasing rounds in `0..horizon`.
pub fn random_history<R: Rng>(rng: &mut R, len: usize, horizon: u64, max_hops: u32) -> Vec<Interaction> {
    let mut rounds: Vec<u64> = (0..len).map(|_| rng.gen_range(0..horizon)).collect();
    rounds.sort_unstable();
    rounds
        .into_iter()
        .map(|round| Interaction {
            round,
            positive: rng.gen_bool(0.5),
            hops: rng.gen_range(1..=max_hops),
        })
        .collect()
}

/// Plain count of positive and negative events.
pub fn count_evidence(events: &[Interaction]) -> (f64, f64) {
    let pos = events.iter().filter(|e| e.positive).count() as f64;
    (pos, events.len() as f64 - pos)
}

#[derive(Debug)]
pub struct SafetyTrial {
    pub verifiers: u32,
    pub colluders: u32,
    pub approvals: u32,
    pub committed: bool,
}

/// One round with a tampered draft, `colluders < ceil(n/3)` verifiers
/// approving unconditionally and every honest verifier auditing every record.
pub fn safety_trial<R: Rng>(rng: &mut R) -> SafetyTrial {
    let miners = rng.gen_range(2..=301u32);
    let mut ranking: Vec<MinerId> = (0..miners).map(MinerId).collect();
    ranking.shuffle(rng);
    let active = rng.gen_range(1..=miners as usize);
    let election = Election::from_ranking(ranking, active).expect("non-empty");
    let manager = rotate_manager(&election.active, rng.gen()).expect("active set non-empty");
    let types = rng.gen_range(1..=10);
    let assignments = assign_verifiers(&election, manager, types, 1024).expect("types > 0");
    let n = assignments.len() as u32;
    let max_colluders = n.div_ceil(3).saturating_sub(1);
    let f = rng.gen_range(0..=max_colluders);
    let mut colluding = vec![false; assignments.len()];
    for i in rand::seq::index::sample(rng, assignments.len(), f as usize) {
        colluding[i] = true;
    }

    let mut records: Vec<DataShareRecord> = (0..rng.gen_range(1..50)).map(|_| random_record(rng, 0)).collect();
    let hit = rng.gen_range(0..records.len());
    records[hit].tampered = true;
    let draft = Block::draft(1, 0, manager, records, Vec::new());
    let full: Vec<usize> = (0..draft.data_records.len()).collect();
    let verdicts: Vec<(MinerId, bool)> = assignments
        .iter()
        .zip(&colluding)
        .map(|(a, c)| (a.miner, verify_block(&draft, a, &a.contract, &full, *c).expect("own contract")))
        .collect();
    let outcome = commit_decision(&verdicts, n).expect("distinct verifiers");
    SafetyTrial {
        verifiers: n,
        colluders: f,
        approvals: outcome.approvals,
        committed: outcome.commit,
    }
}

/// Commit outcome for `approvals` of `n` against the closed-form bound.
pub fn quorum_matches(n: u32, approvals: u32) -> bool {
    let verdicts: Vec<(MinerId, bool)> = (0..n).map(|i| (MinerId(i), i < approvals)).collect();
    let out = commit_decision(&verdicts, n).expect("distinct verifiers");
    out.commit == (3 * approvals >= 2 * n) && out.required == quorum_size(n)
}

/// Managers over `|active|` consecutive rounds starting at `start`.
pub fn rotation_counts(active: &[MinerId], start: u64) -> Vec<usize> {
    let mut counts = vec![0usize; active.len()];
    for r in start..start + active.len() as u64 {
        let m = rotate_manager(active, r).expect("non-empty");
        let i = active.iter().position(|a| *a == m).expect("manager is active");
        counts[i] += 1;
    }
    counts
}
