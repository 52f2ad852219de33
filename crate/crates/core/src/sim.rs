//! Round loop, detection criterion and per-round metrics.
//!
//! One round runs: election, manager rotation, record collection, drafting,
//! verifier assignment, verification, commit decision, UE feedback,
//! reputation refresh and latency accrual. Reputation dynamics never read
//! the link rate, so rounds-to-detect is the same for every network
//! generation and only the seconds change.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{select_colluders, AdversaryError, BehaviorProgram, CollusionPlan};
use crate::chain::{Block, ChainError, ChainState, DataShareRecord, ReplicaHeights, ReputationRecord};
use crate::consensus::{
    assign_verifiers, commit_decision, feedback_phase, rank_by_reputation, rotate_manager,
    verify_block, ConsensusError, Election, Phase, RoundState,
};
use crate::exec::{map_ordered, ExecMode};
use crate::netmodel::{
    mean_hops, round_latency, sample_hops, HopSummary, LatencyBreakdown, MessageSizes, NetworkGen,
    Topology, DEFAULT_VERDICT_BYTES,
};
use crate::preset::{Preset, ScaleParams};
use crate::reputation::{local_opinion_mwsl, Engine, EvidenceBook, InteractionLedger, ReputationError};
use crate::{MinerId, UeId};

pub const DEFAULT_MAX_ROUNDS: u64 = 500;
pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Largest UE population simulated per run; bigger presets are subsampled.
pub const DEFAULT_UE_CAP: u32 = 2_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config field `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },
    #[error(transparent)]
    Consensus(#[from] ConsensusError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Reputation(#[from] ReputationError),
}

impl SimError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::ConfigInvalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<AdversaryError> for SimError {
    fn from(e: AdversaryError) -> Self {
        let field = match e {
            AdversaryError::FractionOutOfRange(_) => "scenario.collusion",
            AdversaryError::ZeroSpan => "adversary.malicious_span",
            AdversaryError::TamperProbOutOfRange(_) => "adversary.tamper_prob",
        };
        SimError::invalid(field, e.to_string())
    }
}

/// Fully resolved scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub preset: Preset,
    pub scale: ScaleParams,
    pub gen: NetworkGen,
    pub collusion: f64,
    pub behavior: BehaviorProgram,
    pub engine: Engine,
    pub threshold: f64,
    pub seed: u64,
    pub max_rounds: u64,
    /// Stop at the first detection; otherwise run all `max_rounds`.
    pub stop_on_detection: bool,
    /// Upper bound on simulated UEs; `None` simulates the full preset.
    pub ue_cap: Option<u32>,
    pub verdict_bytes: u64,
    /// Scale reputation-block routing by the sampled share of record-holding RSUs.
    pub scale_reputation_fanin: bool,
    pub watched_miner: MinerId,
}

impl ScenarioConfig {
    pub fn new(preset: Preset, gen: NetworkGen) -> Self {
        ScenarioConfig {
            preset,
            scale: preset.params(),
            gen,
            collusion: 0.0,
            behavior: BehaviorProgram::default(),
            engine: Engine::default(),
            threshold: DEFAULT_THRESHOLD,
            seed: 1,
            max_rounds: DEFAULT_MAX_ROUNDS,
            stop_on_detection: true,
            ue_cap: Some(DEFAULT_UE_CAP),
            verdict_bytes: DEFAULT_VERDICT_BYTES,
            scale_reputation_fanin: true,
            watched_miner: MinerId(0),
        }
    }

    pub fn simulated_ues(&self) -> u32 {
        match self.ue_cap {
            Some(cap) => self.scale.ues.min(cap),
            None => self.scale.ues,
        }
    }

    pub fn message_sizes(&self) -> MessageSizes {
        MessageSizes::for_scale(&self.scale, self.verdict_bytes)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let s = &self.scale;
        if !(0.0..=1.0).contains(&self.collusion) {
            return Err(SimError::invalid(
                "scenario.collusion",
                format!("{} must lie in [0,1]", self.collusion),
            ));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(SimError::invalid(
                "scenario.threshold",
                format!("{} must lie in (0,1)", self.threshold),
            ));
        }
        if self.max_rounds == 0 {
            return Err(SimError::invalid("scenario.max_rounds", "must be at least 1"));
        }
        if self.simulated_ues() < 2 {
            return Err(SimError::invalid("network.ues", "at least two UEs are required"));
        }
        if s.active_miners == 0 || s.active_miners > s.miners {
            return Err(SimError::invalid(
                "network.active_miners",
                format!("must lie in [1, miners={}]", s.miners),
            ));
        }
        if s.miners < 2 {
            return Err(SimError::invalid("network.miners", "at least two miners are required"));
        }
        if s.verifier_types == 0 {
            return Err(SimError::invalid("network.verifier_types", "must be at least 1"));
        }
        if s.max_hops == 0 {
            return Err(SimError::invalid("network.max_hops", "must be at least 1"));
        }
        let (lo, hi) = s.rsu_records;
        if lo == 0 || lo > hi {
            return Err(SimError::invalid(
                "network.rsu_records",
                format!("range [{lo}, {hi}] must satisfy 1 <= lo <= hi"),
            ));
        }
        if self.watched_miner.0 >= s.miners {
            return Err(SimError::invalid("scenario.watched_miner", "not a miner id"));
        }
        self.behavior.validate()?;
        self.engine
            .validate()
            .map_err(|e| SimError::invalid("reputation", e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectionCriterion {
    BelowThreshold,
    EvictedFromActive,
}

impl DetectionCriterion {
    pub fn name(self) -> &'static str {
        match self {
            DetectionCriterion::BelowThreshold => "below-threshold",
            DetectionCriterion::EvictedFromActive => "evicted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub round: u64,
    pub criterion: DetectionCriterion,
}

/// Incremental detection criterion: fires the first round the watched
/// miner's reputation is below the threshold, or the first round it is out
/// of the active set after having been in it. A reputation breach wins ties.
#[derive(Debug, Clone)]
pub struct Detector {
    threshold: f64,
    was_active: bool,
    fired: Option<Detection>,
}

impl Detector {
    pub fn new(threshold: f64) -> Self {
        Detector {
            threshold,
            was_active: false,
            fired: None,
        }
    }

    pub fn observe(&mut self, round: u64, reputation: f64, active: bool) -> Option<Detection> {
        if self.fired.is_some() {
            return self.fired;
        }
        let criterion = if reputation < self.threshold {
            Some(DetectionCriterion::BelowThreshold)
        } else if self.was_active && !active {
            Some(DetectionCriterion::EvictedFromActive)
        } else {
            None
        };
        self.was_active |= active;
        self.fired = criterion.map(|criterion| Detection { round, criterion });
        self.fired
    }

    pub fn fired(&self) -> Option<Detection> {
        self.fired
    }
}

/// Applies the detection criterion to a whole trajectory.
pub fn detect(trajectory: &[f64], active: &[bool], threshold: f64) -> Option<Detection> {
    let mut detector = Detector::new(threshold);
    trajectory
        .iter()
        .zip(active)
        .enumerate()
        .find_map(|(round, (rep, act))| detector.observe(round as u64, *rep, *act))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: u64,
    pub manager: MinerId,
    pub committed: bool,
    pub approvals: u32,
    pub verifier_count: u32,
    pub tampered_records: u32,
    pub hops: HopSummary,
    pub latency: LatencyBreakdown,
    pub total_s: f64,
    pub cumulative_s: f64,
    pub watched_reputation: f64,
    pub watched_active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub detected: bool,
    /// Zero-based index of the round in which the criterion fired.
    pub detection_round: Option<u64>,
    /// Latency summed over rounds `0..=detection_round`.
    pub detection_time_s: Option<f64>,
    pub criterion: Option<DetectionCriterion>,
    /// Watched miner's reputation at the end of each round.
    pub trajectory: Vec<f64>,
    pub rounds_run: u64,
}

impl DetectionReport {
    /// Rounds elapsed up to and including the detecting round.
    pub fn rounds_to_detect(&self) -> Option<u64> {
        self.detection_round.map(|r| r + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub report: DetectionReport,
    pub rounds: Vec<RoundMetrics>,
    pub chain_height: u64,
    pub chain_valid: bool,
    pub simulated_ues: u32,
    pub colluders: usize,
}

mod stream {
    pub const TOPOLOGY: u64 = 0;
    pub const COLLUSION: u64 = 1;
    pub const HOPS: u64 = 2;
    pub const TRAFFIC: u64 = 3;
    pub const TAMPER: u64 = 4;
    pub const FANIN: u64 = 5;
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Independent audit RNG per (seed, round, verifier), so verdicts do not
/// depend on evaluation order.
fn audit_rng(seed: u64, round: u64, verifier: MinerId) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&round.to_le_bytes());
    key[16..20].copy_from_slice(&verifier.0.to_le_bytes());
    key[20..24].copy_from_slice(b"audt");
    ChaCha8Rng::from_seed(key)
}

/// A running scenario. [`run_scenario`] drives it to completion; tests can
/// step it and inspect the chain between rounds.
pub struct Simulation {
    cfg: ScenarioConfig,
    mode: ExecMode,
    sizes: MessageSizes,
    ue_count: usize,
    topology: Topology,
    collusion: CollusionPlan,
    colluder_mask: Vec<bool>,
    chain: ChainState,
    replicas: ReplicaHeights,
    ledger: InteractionLedger,
    book: EvidenceBook,
    reputations: Vec<f64>,
    detector: Detector,
    hop_rng: ChaCha8Rng,
    traffic_rng: ChaCha8Rng,
    tamper_rng: ChaCha8Rng,
    fanin_rng: ChaCha8Rng,
    round: u64,
    cumulative_s: f64,
    previous_manager: Option<MinerId>,
    trajectory: Vec<f64>,
    metrics: Vec<RoundMetrics>,
}

impl Simulation {
    pub fn new(cfg: ScenarioConfig, mode: ExecMode) -> Result<Self, SimError> {
        cfg.validate()?;
        let ue_count = cfg.simulated_ues() as usize;
        let miners = cfg.scale.miners as usize;
        let topology = Topology::generate(ue_count, miners, &mut stream_rng(cfg.seed, stream::TOPOLOGY));
        let ue_ids: Vec<UeId> = (0..ue_count as u32).map(UeId).collect();
        let collusion = select_colluders(&ue_ids, cfg.collusion, &mut stream_rng(cfg.seed, stream::COLLUSION))?;
        let colluder_mask = collusion.mask(ue_count);
        let empty = cfg.engine.empty_score();
        Ok(Simulation {
            sizes: cfg.message_sizes(),
            mode,
            ue_count,
            topology,
            collusion,
            colluder_mask,
            chain: ChainState::new(),
            replicas: ReplicaHeights::new(miners),
            ledger: InteractionLedger::new(),
            book: EvidenceBook::new(cfg.engine.fade()),
            reputations: vec![empty; miners],
            detector: Detector::new(cfg.threshold),
            hop_rng: stream_rng(cfg.seed, stream::HOPS),
            traffic_rng: stream_rng(cfg.seed, stream::TRAFFIC),
            tamper_rng: stream_rng(cfg.seed, stream::TAMPER),
            fanin_rng: stream_rng(cfg.seed, stream::FANIN),
            round: 0,
            cumulative_s: 0.0,
            previous_manager: None,
            trajectory: Vec::new(),
            metrics: Vec::new(),
            cfg,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn chain(&self) -> &ChainState {
        &self.chain
    }

    pub fn ledger(&self) -> &InteractionLedger {
        &self.ledger
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn collusion(&self) -> &CollusionPlan {
        &self.collusion
    }

    pub fn reputation_of(&self, miner: MinerId) -> f64 {
        self.reputations[miner.index()]
    }

    pub fn replicas(&self) -> &ReplicaHeights {
        &self.replicas
    }

    pub fn detection(&self) -> Option<Detection> {
        self.detector.fired()
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.cfg.max_rounds || (self.cfg.stop_on_detection && self.detector.fired().is_some())
    }

    fn elect(&self) -> Result<Election, SimError> {
        let reps: Vec<(MinerId, f64)> = self
            .reputations
            .iter()
            .enumerate()
            .map(|(i, r)| (MinerId(i as u32), *r))
            .collect();
        Ok(Election::from_ranking(
            rank_by_reputation(&reps),
            self.cfg.scale.active_miners as usize,
        )?)
    }

    fn behavior_of(&self, miner: MinerId) -> Option<&BehaviorProgram> {
        (miner == self.cfg.watched_miner).then_some(&self.cfg.behavior)
    }

    fn collect_records(&mut self, round: u64) -> Vec<DataShareRecord> {
        let n = self.ue_count as u32;
        (0..n)
            .map(|producer| {
                let mut consumer = self.traffic_rng.gen_range(0..n - 1);
                if consumer >= producer {
                    consumer += 1;
                }
                DataShareRecord {
                    producer: UeId(producer),
                    consumer: UeId(consumer),
                    payload_digest: self.traffic_rng.gen(),
                    round,
                    tampered: false,
                }
            })
            .collect()
    }

    fn reputation_uploads(&self, round: u64) -> Vec<ReputationRecord> {
        let Some(prev) = self.previous_manager else {
            return Vec::new();
        };
        (0..self.ue_count as u32)
            .filter_map(|ue| {
                let events = self.ledger.events(UeId(ue), prev);
                (!events.is_empty()).then(|| ReputationRecord {
                    rater: UeId(ue),
                    ratee: prev,
                    opinion: local_opinion_mwsl(events, round, &self.cfg.engine.mwsl),
                    round,
                })
            })
            .collect()
    }

    /// Runs one round and returns its metrics.
    pub fn step(&mut self) -> Result<RoundMetrics, SimError> {
        let round = self.round;
        let cfg = &self.cfg;
        let scale = cfg.scale;

        let election = self.elect()?;
        let watched_active = election.is_active(cfg.watched_miner);
        let manager = rotate_manager(&election.active, round)?;
        let mut state = RoundState::new(round, manager);

        let ue_hops = sample_hops(self.ue_count, scale.max_hops, &mut self.hop_rng);
        let miner_hops = sample_hops(scale.miners as usize, scale.max_hops, &mut self.hop_rng);
        let (lo, hi) = scale.rsu_records;
        let holders = self.fanin_rng.gen_range(lo..=hi);
        let others: Vec<u32> = miner_hops
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != manager.index())
            .map(|(_, h)| *h)
            .collect();
        let hops = HopSummary {
            mean_hops: mean_hops(&others),
            max_verifier_hops: others.iter().copied().max().unwrap_or(1),
            reputation_fanin: if cfg.scale_reputation_fanin {
                f64::from(holders) / f64::from(hi)
            } else {
                1.0
            },
        };

        // Collect
        let mut records = self.collect_records(round);
        let uploads = self.reputation_uploads(round);

        // Draft
        state.advance(Phase::Draft)?;
        let tampering = self.behavior_of(manager).map(|b| (b.tampers_at(round), b.tamper_prob));
        if let Some((true, prob)) = tampering {
            for rec in &mut records {
                if self.tamper_rng.gen_bool(prob) {
                    rec.tampered = true;
                    rec.payload_digest = !rec.payload_digest;
                }
            }
        }
        let tip = self.chain.tip();
        let mut block = Block::draft(tip.height + 1, tip.own_hash, manager, records, uploads);
        let tampered_records = block.data_records.iter().filter(|r| r.tampered).count() as u32;

        // Verify
        state.advance(Phase::Verify)?;
        let assignments = assign_verifiers(&election, manager, scale.verifier_types, scale.contract_bytes)?;
        let audit_size = block.data_records.len().div_ceil(scale.verifier_types as usize);
        let record_count = block.data_records.len();
        let any_tampered = tampered_records > 0;
        let seed = self.cfg.seed;
        let watched = self.cfg.watched_miner;
        let behavior = self.cfg.behavior;
        let verdicts = map_ordered(self.mode, &assignments, |a| {
            let colluding = a.miner == watched && behavior.lies_at(round);
            // A clean draft passes every audit, so skip drawing the subset.
            let audit: Vec<usize> = if any_tampered && !colluding {
                sample(&mut audit_rng(seed, round, a.miner), record_count, audit_size).into_vec()
            } else {
                Vec::new()
            };
            verify_block(&block, a, &a.contract, &audit, colluding).map(|v| (a.miner, v))
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        state.verdicts = verdicts;

        // Commit
        state.advance(Phase::Commit)?;
        let verifier_count = assignments.len() as u32;
        let outcome = commit_decision(&state.verdicts, verifier_count)?;
        block.approvals = outcome.approvals;
        block.verifier_count = verifier_count;

        // Feedback runs on the round's draft whether or not it committed: the
        // audited draft is returned to the RSUs either way.
        state.advance(Phase::Feedback)?;
        let events = feedback_phase(&block, &self.colluder_mask, &ue_hops, round, &mut self.ledger)?;
        for (_, ev) in &events {
            self.book.add(manager, *ev);
        }
        if outcome.commit {
            let height = block.height;
            self.chain.append(block)?;
            self.replicas.sync_all(height);
        } else {
            state.draft = Some(block);
        }

        // Reputation refresh
        let rated: Vec<MinerId> = self.book.rated().map(|(m, _)| m).collect();
        let engine = self.cfg.engine;
        let book = &self.book;
        let scores = map_ordered(self.mode, &rated, |m| {
            engine.score(book.get(*m).expect("listed miner is rated"), round)
        });
        for (m, s) in rated.iter().zip(scores) {
            self.reputations[m.index()] = s;
        }

        let latency = round_latency(&self.sizes, self.cfg.gen, &hops);
        let total_s = latency.total();
        self.cumulative_s += total_s;
        let watched_reputation = self.reputations[watched.index()];
        self.trajectory.push(watched_reputation);
        self.detector.observe(round, watched_reputation, watched_active);

        let metrics = RoundMetrics {
            round,
            manager,
            committed: outcome.commit,
            approvals: outcome.approvals,
            verifier_count,
            tampered_records,
            hops,
            latency,
            total_s,
            cumulative_s: self.cumulative_s,
            watched_reputation,
            watched_active,
        };
        self.metrics.push(metrics.clone());
        self.previous_manager = Some(manager);
        self.round += 1;
        Ok(metrics)
    }

    pub fn finish(self) -> ScenarioOutcome {
        let detection = self.detector.fired();
        let detection_time_s = detection.map(|d| self.metrics[d.round as usize].cumulative_s);
        ScenarioOutcome {
            report: DetectionReport {
                detected: detection.is_some(),
                detection_round: detection.map(|d| d.round),
                detection_time_s,
                criterion: detection.map(|d| d.criterion),
                trajectory: self.trajectory,
                rounds_run: self.round,
            },
            chain_height: self.chain.tip().height,
            chain_valid: self.chain.is_valid(),
            simulated_ues: self.ue_count as u32,
            colluders: self.collusion.len(),
            rounds: self.metrics,
        }
    }
}

pub fn run_scenario_with(cfg: &ScenarioConfig, mode: ExecMode) -> Result<ScenarioOutcome, SimError> {
    let mut sim = Simulation::new(cfg.clone(), mode)?;
    while !sim.is_finished() {
        sim.step()?;
    }
    Ok(sim.finish())
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, SimError> {
    run_scenario_with(cfg, ExecMode::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::BehaviorKind;

    #[test]
    fn detect_examples() {
        assert_eq!(detect(&[0.9; 50], &[true; 50], 0.5), None);
        let mut traj = vec![0.8; 40];
        traj[31] = 0.49;
        assert_eq!(
            detect(&traj, &[true; 40], 0.5),
            Some(Detection {
                round: 31,
                criterion: DetectionCriterion::BelowThreshold
            })
        );
        let mut active = vec![true; 50];
        active[40] = false;
        assert_eq!(
            detect(&[0.6; 50], &active, 0.5),
            Some(Detection {
                round: 40,
                criterion: DetectionCriterion::EvictedFromActive
            })
        );
    }

    #[test]
    fn never_active_is_not_eviction() {
        assert_eq!(detect(&[0.7; 10], &[false; 10], 0.5), None);
    }

    #[test]
    fn honest_adversary_is_never_detected() {
        let mut cfg = ScenarioConfig::new(Preset::Small, NetworkGen::G4);
        cfg.behavior = BehaviorProgram::honest();
        cfg.max_rounds = 120;
        let out = run_scenario(&cfg).unwrap();
        assert!(!out.report.detected);
        assert_eq!(out.report.rounds_run, 120);
        assert!(out.report.trajectory.iter().all(|r| *r >= cfg.threshold));
        assert!(out.rounds.iter().all(|m| m.committed));
        assert!(out.chain_valid);
        assert_eq!(out.chain_height, 120);
    }

    #[test]
    fn full_collusion_hides_the_adversary() {
        let mut cfg = ScenarioConfig::new(Preset::Small, NetworkGen::G4);
        cfg.collusion = 1.0;
        cfg.max_rounds = 200;
        let out = run_scenario(&cfg).unwrap();
        assert!(!out.report.detected);
        // Tampered drafts never commit even though they go unreported.
        assert!(out.rounds.iter().filter(|m| m.tampered_records > 0).all(|m| !m.committed));
    }

    #[test]
    fn late_onset_is_detected_on_small() {
        let mut cfg = ScenarioConfig::new(Preset::Small, NetworkGen::G4);
        cfg.collusion = 0.25;
        let out = run_scenario(&cfg).unwrap();
        let r = out.report.detection_round.expect("detected");
        assert!(r >= 20);
        assert_eq!(out.report.rounds_run, r + 1);
        let sum: f64 = out.rounds.iter().map(|m| m.total_s).sum();
        assert!((out.report.detection_time_s.unwrap() - sum).abs() < 1e-9);
    }

    #[test]
    fn only_managers_tamper() {
        let mut cfg = ScenarioConfig::new(Preset::Small, NetworkGen::G6);
        cfg.collusion = 0.5;
        cfg.behavior = BehaviorProgram::new(BehaviorKind::OSCILLATING);
        cfg.stop_on_detection = false;
        cfg.max_rounds = 80;
        let mut sim = Simulation::new(cfg.clone(), ExecMode::Sequential).unwrap();
        while !sim.is_finished() {
            let m = sim.step().unwrap();
            if m.tampered_records > 0 {
                assert_eq!(m.manager, cfg.watched_miner);
                assert!(cfg.behavior.is_malicious(m.round));
            }
        }
        for b in sim.chain().blocks() {
            assert!(!b.has_tampered_records());
        }
    }

    #[test]
    fn invalid_configs_name_their_field() {
        let mut cfg = ScenarioConfig::new(Preset::Small, NetworkGen::G4);
        cfg.collusion = 1.5;
        match run_scenario(&cfg) {
            Err(SimError::ConfigInvalid { field, .. }) => assert_eq!(field, "scenario.collusion"),
            other => panic!("unexpected {other:?}"),
        }
        let mut cfg = ScenarioConfig::new(Preset::Small, NetworkGen::G4);
        cfg.threshold = 1.0;
        assert!(matches!(run_scenario(&cfg), Err(SimError::ConfigInvalid { .. })));
    }

    #[test]
    fn modes_produce_identical_runs() {
        let mut cfg = ScenarioConfig::new(Preset::Medium, NetworkGen::G5);
        cfg.collusion = 0.33;
        let a = run_scenario_with(&cfg, ExecMode::Sequential).unwrap();
        let b = run_scenario_with(&cfg, ExecMode::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
