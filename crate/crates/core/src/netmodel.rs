//! Topology and latency model.
//!
//! Latency is transmission plus store-and-forward diffusion; computation
//! time is zero. A round is six serial legs:
//!
//! 1. UE uploads its vote to the nearest RSU (1 hop).
//! 2. RSUs route the data block and reputation block to the manager (mean hops).
//! 3. Manager broadcasts the draft and contract to verifiers. The broadcast is
//!    parallel, so the leg costs one path to the farthest verifier.
//! 4. Verdicts return to the manager (mean hops).
//! 5. Manager broadcasts the committed block to RSUs (mean hops).
//! 6. UEs download the block from their RSU (1 hop).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::preset::{ScaleParams, KB};
use crate::MinerId;

/// Side of the square simulation field, in metres (150 km²).
pub fn field_side_m() -> f64 {
    (150.0e6f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NetworkGen {
    #[serde(rename = "4g")]
    G4,
    #[serde(rename = "5g")]
    G5,
    #[serde(rename = "6g")]
    G6,
}

impl NetworkGen {
    pub const ALL: [NetworkGen; 3] = [NetworkGen::G4, NetworkGen::G5, NetworkGen::G6];

    /// Upload and download rate in bits per second.
    pub fn link_rate_bps(self) -> f64 {
        match self {
            NetworkGen::G4 => 10e6,
            NetworkGen::G5 => 500e6,
            NetworkGen::G6 => 100e9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NetworkGen::G4 => "4g",
            NetworkGen::G5 => "5g",
            NetworkGen::G6 => "6g",
        }
    }
}

impl fmt::Display for NetworkGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NetworkGen {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NetworkGen::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown network generation `{s}` (valid: 4g, 5g, 6g)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    Vote,
    DataBlock,
    ReputationBlock,
    Contract,
    Verdict,
    BlockBroadcast,
    BlockDownload,
}

pub const DEFAULT_VERDICT_BYTES: u64 = KB;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageSizes {
    pub vote: u64,
    pub data_block: u64,
    pub reputation_block: u64,
    pub contract: u64,
    pub verdict: u64,
    pub block_broadcast: u64,
    pub block_download: u64,
}

impl MessageSizes {
    pub fn for_scale(scale: &ScaleParams, verdict_bytes: u64) -> Self {
        MessageSizes {
            vote: scale.vote_bytes,
            data_block: scale.data_block_bytes,
            reputation_block: scale.reputation_block_bytes,
            contract: scale.contract_bytes,
            verdict: verdict_bytes,
            block_broadcast: scale.data_block_bytes,
            block_download: scale.data_block_bytes,
        }
    }

    pub fn zero() -> Self {
        MessageSizes {
            vote: 0,
            data_block: 0,
            reputation_block: 0,
            contract: 0,
            verdict: 0,
            block_broadcast: 0,
            block_download: 0,
        }
    }

    pub fn size_of(&self, kind: MessageKind) -> u64 {
        match kind {
            MessageKind::Vote => self.vote,
            MessageKind::DataBlock => self.data_block,
            MessageKind::ReputationBlock => self.reputation_block,
            MessageKind::Contract => self.contract,
            MessageKind::Verdict => self.verdict,
            MessageKind::BlockBroadcast => self.block_broadcast,
            MessageKind::BlockDownload => self.block_download,
        }
    }
}

pub fn transmission_latency(size_bytes: f64, gen: NetworkGen) -> f64 {
    size_bytes * 8.0 / gen.link_rate_bps()
}

/// Serial store-and-forward over `hops` links.
pub fn diffusion_latency(size_bytes: f64, hops: f64, gen: NetworkGen) -> f64 {
    debug_assert!(hops >= 0.0);
    size_bytes * 8.0 * hops / gen.link_rate_bps()
}

/// Hop statistics of one round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopSummary {
    /// Mean RSU-to-manager hop count.
    pub mean_hops: f64,
    /// Hop count of the farthest verifier.
    pub max_verifier_hops: u32,
    /// Fraction of the reputation block routed this round, in (0, 1].
    pub reputation_fanin: f64,
}

impl HopSummary {
    pub fn uniform(hops: u32) -> Self {
        HopSummary {
            mean_hops: f64::from(hops),
            max_verifier_hops: hops,
            reputation_fanin: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub vote_upload: f64,
    pub record_routing: f64,
    pub block_distribution: f64,
    pub verdict_return: f64,
    pub block_broadcast: f64,
    pub block_download: f64,
}

impl LatencyBreakdown {
    pub fn total(&self) -> f64 {
        self.legs().iter().sum()
    }

    pub fn legs(&self) -> [f64; 6] {
        [
            self.vote_upload,
            self.record_routing,
            self.block_distribution,
            self.verdict_return,
            self.block_broadcast,
            self.block_download,
        ]
    }
}

pub fn round_latency(sizes: &MessageSizes, gen: NetworkGen, hops: &HopSummary) -> LatencyBreakdown {
    let routed = sizes.data_block as f64 + sizes.reputation_block as f64 * hops.reputation_fanin;
    let distributed = (sizes.data_block + sizes.contract) as f64;
    LatencyBreakdown {
        vote_upload: diffusion_latency(sizes.vote as f64, 1.0, gen),
        record_routing: diffusion_latency(routed, hops.mean_hops, gen),
        block_distribution: diffusion_latency(distributed, f64::from(hops.max_verifier_hops), gen),
        verdict_return: diffusion_latency(sizes.verdict as f64, hops.mean_hops, gen),
        block_broadcast: diffusion_latency(sizes.block_broadcast as f64, hops.mean_hops, gen),
        block_download: diffusion_latency(sizes.block_download as f64, 1.0, gen),
    }
}

/// Uniform hop counts in `[1, max_hops]`, one per node.
pub fn sample_hops<R: Rng + ?Sized>(count: usize, max_hops: u32, rng: &mut R) -> Vec<u32> {
    let max_hops = max_hops.max(1);
    (0..count).map(|_| rng.gen_range(1..=max_hops)).collect()
}

pub fn mean_hops(hops: &[u32]) -> f64 {
    if hops.is_empty() {
        return 0.0;
    }
    hops.iter().map(|h| f64::from(*h)).sum::<f64>() / hops.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Node placement in the square field. RSUs sit at the centres of a
/// `cols x rows` grid with `cols * rows` equal to the RSU count, so every
/// point of the field is within half a cell diagonal of an RSU.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub side_m: f64,
    pub ue_positions: Vec<Point>,
    pub rsu_positions: Vec<Point>,
    pub rsu_range_m: f64,
    cols: usize,
    rows: usize,
}

fn grid_shape(n: usize) -> (usize, usize) {
    let mut cols = (n as f64).sqrt().floor() as usize;
    while cols > 1 && !n.is_multiple_of(cols) {
        cols -= 1;
    }
    let cols = cols.max(1);
    (n / cols, cols)
}

impl Topology {
    pub fn generate<R: Rng + ?Sized>(ues: usize, rsus: usize, rng: &mut R) -> Self {
        let side = field_side_m();
        let rsus = rsus.max(1);
        let (cols, rows) = grid_shape(rsus);
        let (cell_w, cell_h) = (side / cols as f64, side / rows as f64);
        let rsu_positions = (0..rsus)
            .map(|i| Point {
                x: (i % cols) as f64 * cell_w + cell_w / 2.0,
                y: (i / cols) as f64 * cell_h + cell_h / 2.0,
            })
            .collect();
        let ue_positions = (0..ues)
            .map(|_| Point {
                x: rng.gen_range(0.0..side),
                y: rng.gen_range(0.0..side),
            })
            .collect();
        Topology {
            side_m: side,
            ue_positions,
            rsu_positions,
            rsu_range_m: (cell_w / 2.0).hypot(cell_h / 2.0) * (1.0 + 1e-9),
            cols,
            rows,
        }
    }

    /// The RSU whose grid cell contains the UE.
    pub fn nearest_rsu(&self, ue: usize) -> MinerId {
        let p = self.ue_positions[ue];
        let col = ((p.x / self.side_m * self.cols as f64) as usize).min(self.cols - 1);
        let row = ((p.y / self.side_m * self.rows as f64) as usize).min(self.rows - 1);
        MinerId((row * self.cols + col) as u32)
    }

    pub fn covers_all_ues(&self) -> bool {
        (0..self.ue_positions.len()).all(|ue| {
            let rsu = self.nearest_rsu(ue);
            self.ue_positions[ue].distance(&self.rsu_positions[rsu.index()]) <= self.rsu_range_m
        })
    }
}
