//! Hash-linked ledger of data-sharing and reputation records.
//!
//! Every block hash is FNV-1a (64-bit) over a canonical little-endian
//! serialization, in this exact order:
//!
//! | field | encoding |
//! |---|---|
//! | height | `u64` |
//! | parent_hash | `u64` |
//! | data record count | `u32` |
//! | per data record | producer `u32`, consumer `u32`, payload_digest `u64`, round `u64`, tampered `u8` (0/1) |
//! | reputation record count | `u32` |
//! | per reputation record | rater `u32`, ratee `u32`, round `u64`, belief, disbelief, uncertainty, base_rate as IEEE-754 `f64` bit patterns |
//! | manager_id | `u32` |
//!
//! `approvals` and `verifier_count` are filled in after verification and are
//! not part of the hash. FNV-1a applies a bijection per input byte, so any
//! single-byte change to the serialization changes the digest.

use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consensus::quorum_size;
use crate::reputation::Opinion;
use crate::{MinerId, UeId};

/// Manager recorded in the genesis block.
pub const GENESIS_MANAGER: MinerId = MinerId(u32::MAX);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataShareRecord {
    pub producer: UeId,
    pub consumer: UeId,
    pub payload_digest: u64,
    pub round: u64,
    /// Set only when a malicious block manager alters the record.
    pub tampered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReputationRecord {
    pub rater: UeId,
    pub ratee: MinerId,
    pub opinion: Opinion,
    pub round: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub height: u64,
    pub parent_hash: u64,
    pub own_hash: u64,
    pub manager: MinerId,
    pub data_records: Vec<DataShareRecord>,
    pub reputation_records: Vec<ReputationRecord>,
    pub approvals: u32,
    pub verifier_count: u32,
}

impl Block {
    /// Builds an unverified draft and seals its hash.
    pub fn draft(
        height: u64,
        parent_hash: u64,
        manager: MinerId,
        data_records: Vec<DataShareRecord>,
        reputation_records: Vec<ReputationRecord>,
    ) -> Self {
        let mut block = Block {
            height,
            parent_hash,
            own_hash: 0,
            manager,
            data_records,
            reputation_records,
            approvals: 0,
            verifier_count: 0,
        };
        block.seal();
        block
    }

    pub fn genesis() -> Self {
        Block::draft(0, 0, GENESIS_MANAGER, Vec::new(), Vec::new())
    }

    /// Recomputes `own_hash` from the current contents.
    pub fn seal(&mut self) {
        self.own_hash = self.compute_hash();
    }

    pub fn compute_hash(&self) -> u64 {
        let mut hasher = FnvHasher::default();
        hasher.write(&self.canonical_bytes());
        hasher.finish()
    }

    pub fn hash_is_valid(&self) -> bool {
        self.own_hash == self.compute_hash()
    }

    pub fn has_tampered_records(&self) -> bool {
        self.data_records.iter().any(|r| r.tampered)
    }

    /// The exact byte string the block hash is computed over.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(
            28 + self.data_records.len() * 25 + self.reputation_records.len() * 48,
        );
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&self.parent_hash.to_le_bytes());
        out.extend_from_slice(&(self.data_records.len() as u32).to_le_bytes());
        for r in &self.data_records {
            out.extend_from_slice(&r.producer.0.to_le_bytes());
            out.extend_from_slice(&r.consumer.0.to_le_bytes());
            out.extend_from_slice(&r.payload_digest.to_le_bytes());
            out.extend_from_slice(&r.round.to_le_bytes());
            out.push(u8::from(r.tampered));
        }
        out.extend_from_slice(&(self.reputation_records.len() as u32).to_le_bytes());
        for r in &self.reputation_records {
            out.extend_from_slice(&r.rater.0.to_le_bytes());
            out.extend_from_slice(&r.ratee.0.to_le_bytes());
            out.extend_from_slice(&r.round.to_le_bytes());
            for v in [
                r.opinion.belief,
                r.opinion.disbelief,
                r.opinion.uncertainty,
                r.opinion.base_rate,
            ] {
                out.extend_from_slice(&v.to_bits().to_le_bytes());
            }
        }
        out.extend_from_slice(&self.manager.0.to_le_bytes());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("block hash {stored:#018x} does not match recomputed {computed:#018x}")]
    HashMismatch { stored: u64, computed: u64 },
    #[error("block at height {height} does not extend tip (height {tip_height}, hash {tip_hash:#018x})")]
    ParentMismatch {
        height: u64,
        tip_height: u64,
        tip_hash: u64,
    },
    #[error("{approvals} approvals of {verifier_count} verifiers is below the quorum of {required}")]
    QuorumNotMet {
        approvals: u32,
        verifier_count: u32,
        required: u32,
    },
}

/// Why [`ChainState::verify`] rejected a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    HashMismatch,
    ParentMismatch,
    HeightGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainViolation {
    pub index: usize,
    pub kind: ViolationKind,
}

/// Append-only sequence of blocks starting at genesis.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    blocks: Vec<Block>,
}

impl Default for ChainState {
    fn default() -> Self {
        Self::new()
    }
}

impl ChainState {
    pub fn new() -> Self {
        ChainState {
            blocks: vec![Block::genesis()],
        }
    }

    /// Wraps an arbitrary block list without checking it. Used to inspect
    /// chains that were modified outside the append path.
    pub fn from_blocks_unchecked(blocks: Vec<Block>) -> Self {
        ChainState { blocks }
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn tip(&self) -> &Block {
        self.blocks.last().expect("chain always holds genesis")
    }

    pub fn append(&mut self, block: Block) -> Result<(), ChainError> {
        let tip = self.tip();
        if block.parent_hash != tip.own_hash || block.height != tip.height + 1 {
            return Err(ChainError::ParentMismatch {
                height: block.height,
                tip_height: tip.height,
                tip_hash: tip.own_hash,
            });
        }
        let computed = block.compute_hash();
        if computed != block.own_hash {
            return Err(ChainError::HashMismatch {
                stored: block.own_hash,
                computed,
            });
        }
        let required = quorum_size(block.verifier_count);
        if block.verifier_count == 0
            || block.approvals > block.verifier_count
            || block.approvals < required
        {
            return Err(ChainError::QuorumNotMet {
                approvals: block.approvals,
                verifier_count: block.verifier_count,
                required,
            });
        }
        self.blocks.push(block);
        Ok(())
    }

    /// Walks the chain from genesis and reports the first broken link.
    pub fn verify(&self) -> Result<(), ChainViolation> {
        for (index, block) in self.blocks.iter().enumerate() {
            let fail = |kind| Err(ChainViolation { index, kind });
            if !block.hash_is_valid() {
                return fail(ViolationKind::HashMismatch);
            }
            if index == 0 {
                if block.height != 0 {
                    return fail(ViolationKind::HeightGap);
                }
                if block.parent_hash != 0 {
                    return fail(ViolationKind::ParentMismatch);
                }
                continue;
            }
            let parent = &self.blocks[index - 1];
            if block.parent_hash != parent.own_hash {
                return fail(ViolationKind::ParentMismatch);
            }
            if block.height != parent.height + 1 {
                return fail(ViolationKind::HeightGap);
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.verify().is_ok()
    }
}

/// Height each RSU has synced to. RSU chain copies share the one logical
/// [`ChainState`]; only the synced height differs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicaHeights {
    heights: Vec<u64>,
}

impl ReplicaHeights {
    pub fn new(rsus: usize) -> Self {
        ReplicaHeights {
            heights: vec![0; rsus],
        }
    }

    pub fn sync_all(&mut self, height: u64) {
        for h in &mut self.heights {
            *h = (*h).max(height);
        }
    }

    pub fn height_of(&self, rsu: MinerId) -> Option<u64> {
        self.heights.get(rsu.index()).copied()
    }

    pub fn min_height(&self) -> u64 {
        self.heights.iter().copied().min().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(producer: u32, consumer: u32, round: u64) -> DataShareRecord {
        DataShareRecord {
            producer: UeId(producer),
            consumer: UeId(consumer),
            payload_digest: 0xdead_beef ^ (u64::from(producer) << 32),
            round,
            tampered: false,
        }
    }

    fn next_block(chain: &ChainState, records: usize) -> Block {
        let tip = chain.tip();
        let height = tip.height + 1;
        let data = (0..records as u32)
            .map(|i| record(i, i + 1, height))
            .collect();
        let mut block = Block::draft(height, tip.own_hash, MinerId(3), data, Vec::new());
        block.verifier_count = 10;
        block.approvals = 7;
        block
    }

    fn build(n: usize) -> ChainState {
        let mut chain = ChainState::new();
        for _ in 0..n {
            let b = next_block(&chain, 4);
            chain.append(b).unwrap();
        }
        chain
    }

    #[test]
    fn append_extends_genesis() {
        let mut chain = ChainState::new();
        let block = next_block(&chain, 3);
        let hash = block.own_hash;
        chain.append(block).unwrap();
        assert_eq!(chain.len(), 2);
        assert_eq!(chain.tip().own_hash, hash);
        assert_eq!(chain.tip().height, 1);
    }

    #[test]
    fn flipped_digest_is_hash_mismatch() {
        let mut chain = ChainState::new();
        let mut block = next_block(&chain, 3);
        block.data_records[1].payload_digest ^= 1;
        assert!(matches!(
            chain.append(block),
            Err(ChainError::HashMismatch { .. })
        ));
    }

    #[test]
    fn stale_parent_is_parent_mismatch() {
        let mut chain = build(3);
        let genesis_hash = chain.blocks()[0].own_hash;
        let mut block = Block::draft(1, genesis_hash, MinerId(0), vec![record(1, 2, 1)], vec![]);
        block.verifier_count = 3;
        block.approvals = 3;
        assert!(matches!(
            chain.append(block),
            Err(ChainError::ParentMismatch { tip_height: 3, .. })
        ));
    }

    #[test]
    fn quorum_enforced_on_append() {
        let mut chain = ChainState::new();
        let mut block = next_block(&chain, 1);
        block.approvals = 6;
        assert_eq!(
            chain.append(block),
            Err(ChainError::QuorumNotMet {
                approvals: 6,
                verifier_count: 10,
                required: 7
            })
        );
    }

    #[test]
    fn untouched_chain_verifies() {
        let chain = build(10);
        assert_eq!(chain.verify(), Ok(()));
    }

    #[test]
    fn mutated_record_flags_its_block() {
        let mut blocks = build(10).into_blocks();
        blocks[4].data_records[0].consumer = UeId(99);
        let chain = ChainState::from_blocks_unchecked(blocks);
        assert_eq!(
            chain.verify(),
            Err(ChainViolation {
                index: 4,
                kind: ViolationKind::HashMismatch
            })
        );
    }

    #[test]
    fn resealed_block_flags_successor() {
        let mut blocks = build(10).into_blocks();
        blocks[4].data_records[0].tampered = true;
        blocks[4].seal();
        let chain = ChainState::from_blocks_unchecked(blocks);
        assert_eq!(
            chain.verify(),
            Err(ChainViolation {
                index: 5,
                kind: ViolationKind::ParentMismatch
            })
        );
    }

    #[test]
    fn approvals_do_not_affect_hash() {
        let chain = ChainState::new();
        let mut block = next_block(&chain, 2);
        let h = block.compute_hash();
        block.approvals = 1;
        block.verifier_count = 99;
        assert_eq!(block.compute_hash(), h);
    }

    #[test]
    fn canonical_bytes_layout() {
        let block = Block::draft(1, 2, MinerId(5), vec![record(7, 8, 1)], vec![]);
        let bytes = block.canonical_bytes();
        assert_eq!(bytes.len(), 8 + 8 + 4 + 25 + 4 + 4);
        assert_eq!(&bytes[0..8], &1u64.to_le_bytes());
        assert_eq!(&bytes[8..16], &2u64.to_le_bytes());
        assert_eq!(&bytes[16..20], &1u32.to_le_bytes());
        assert_eq!(&bytes[20..24], &7u32.to_le_bytes());
        assert_eq!(bytes[44], 0);
        assert_eq!(&bytes[49..53], &5u32.to_le_bytes());
    }

    #[test]
    fn replicas_track_sync() {
        let mut replicas = ReplicaHeights::new(4);
        assert_eq!(replicas.min_height(), 0);
        replicas.sync_all(3);
        assert_eq!(replicas.height_of(MinerId(2)), Some(3));
        assert_eq!(replicas.height_of(MinerId(9)), None);
    }
}
