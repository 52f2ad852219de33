//! Block hashes frozen from a reference FNV-1a implementation written
//! separately against the documented serialization layout.

use dposim_core::chain::{Block, DataShareRecord, ReputationRecord, GENESIS_MANAGER};
use dposim_core::reputation::Opinion;
use dposim_core::{MinerId, UeId};

#[test]
fn genesis_hash() {
    let g = Block::genesis();
    assert_eq!(g.manager, GENESIS_MANAGER);
    assert_eq!(g.own_hash, 0xe46b_4349_ba54_4f31);
}

#[test]
fn populated_block_hash() {
    let data = vec![
        DataShareRecord {
            producer: UeId(0),
            consumer: UeId(1),
            payload_digest: 0xDEAD_BEEF,
            round: 0,
            tampered: false,
        },
        DataShareRecord {
            producer: UeId(1),
            consumer: UeId(2),
            payload_digest: 42,
            round: 0,
            tampered: true,
        },
    ];
    let reps = vec![ReputationRecord {
        rater: UeId(4),
        ratee: MinerId(3),
        opinion: Opinion {
            belief: 0.3,
            disbelief: 0.0,
            uncertainty: 0.7,
            base_rate: 0.5,
        },
        round: 0,
    }];
    let mut b = Block::draft(1, Block::genesis().own_hash, MinerId(3), data, reps);
    assert_eq!(b.own_hash, 0xdfe9_bec0_feb0_081f);
    b.approvals = 7;
    b.verifier_count = 9;
    assert_eq!(b.compute_hash(), 0xdfe9_bec0_feb0_081f);
}
