//! Reputation engines: multi-weight subjective logic (MWSL), beta and sigmoid.
//!
//! All three engines consume the same evidence: positive and negative
//! interactions, each faded by `fade^(now - round)`. MWSL additionally keeps
//! evidence split by the hop distance it was reported over and discounts
//! distant reports with `hop_factor^hops`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{MinerId, UeId};

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReputationError {
    #[error("cannot combine an empty set of opinions")]
    EmptyOpinionSet,
    #[error("opinion components must lie in [0,1] and sum to 1 (got b={belief}, d={disbelief}, u={uncertainty})")]
    InvalidOpinion {
        belief: f64,
        disbelief: f64,
        uncertainty: f64,
    },
    #[error("parameter `{name}` = {value} is out of range: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("interaction at round {round} recorded after round {last} for the same pair")]
    NonMonotonicRound { round: u64, last: u64 },
}

/// Subjective-logic opinion `(belief, disbelief, uncertainty)` with a base rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Opinion {
    pub belief: f64,
    pub disbelief: f64,
    pub uncertainty: f64,
    pub base_rate: f64,
}

impl Opinion {
    pub fn new(
        belief: f64,
        disbelief: f64,
        uncertainty: f64,
        base_rate: f64,
    ) -> Result<Self, ReputationError> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let sum = belief + disbelief + uncertainty;
        if !(unit(belief) && unit(disbelief) && unit(uncertainty))
            || (sum - 1.0).abs() > NORMALIZATION_TOLERANCE
        {
            return Err(ReputationError::InvalidOpinion {
                belief,
                disbelief,
                uncertainty,
            });
        }
        if !unit(base_rate) {
            return Err(ReputationError::InvalidParameter {
                name: "base_rate",
                value: base_rate,
                reason: "must lie in [0,1]",
            });
        }
        Ok(Opinion {
            belief,
            disbelief,
            uncertainty,
            base_rate,
        })
    }

    /// Total ignorance: no belief, no disbelief.
    pub fn vacuous(base_rate: f64) -> Self {
        Opinion {
            belief: 0.0,
            disbelief: 0.0,
            uncertainty: 1.0,
            base_rate,
        }
    }

    /// Probability expectation `b + a·u`.
    pub fn expectation(&self) -> f64 {
        self.belief + self.base_rate * self.uncertainty
    }

    pub fn is_normalized(&self) -> bool {
        (self.belief + self.disbelief + self.uncertainty - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }
}

/// One feedback event from a UE about a miner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub round: u64,
    pub positive: bool,
    /// Hop distance between the rater and the miner when the event was reported.
    pub hops: u32,
}

impl Interaction {
    pub fn new(round: u64, positive: bool) -> Self {
        Interaction {
            round,
            positive,
            hops: 0,
        }
    }
}

/// Per-(rater, ratee) interaction histories.
#[derive(Debug, Clone, Default)]
pub struct InteractionLedger {
    pairs: BTreeMap<(UeId, MinerId), Vec<Interaction>>,
}

impl InteractionLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(
        &mut self,
        rater: UeId,
        ratee: MinerId,
        event: Interaction,
    ) -> Result<(), ReputationError> {
        let events = self.pairs.entry((rater, ratee)).or_default();
        if let Some(last) = events.last() {
            if event.round < last.round {
                return Err(ReputationError::NonMonotonicRound {
                    round: event.round,
                    last: last.round,
                });
            }
        }
        events.push(event);
        Ok(())
    }

    pub fn events(&self, rater: UeId, ratee: MinerId) -> &[Interaction] {
        self.pairs
            .get(&(rater, ratee))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// All events about `ratee`, across raters.
    pub fn events_about(&self, ratee: MinerId) -> impl Iterator<Item = (UeId, &Interaction)> {
        self.pairs
            .iter()
            .filter(move |((_, m), _)| *m == ratee)
            .flat_map(|((ue, _), evs)| evs.iter().map(move |e| (*ue, e)))
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn event_count(&self) -> usize {
        self.pairs.values().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MwslParams {
    pub w_pos: f64,
    pub w_neg: f64,
    /// Probability of successful message transmission; fixes `u = 1 - success_prob`.
    pub success_prob: f64,
    pub hop_factor: f64,
    pub recency_fade: f64,
    pub base_rate: f64,
}

impl Default for MwslParams {
    fn default() -> Self {
        MwslParams {
            w_pos: 0.4,
            w_neg: 0.6,
            success_prob: 0.7,
            hop_factor: 0.75,
            recency_fade: 0.9,
            base_rate: 0.5,
        }
    }
}

impl MwslParams {
    pub fn validate(&self) -> Result<(), ReputationError> {
        for (name, value) in [
            ("w_pos", self.w_pos),
            ("w_neg", self.w_neg),
            ("success_prob", self.success_prob),
            ("hop_factor", self.hop_factor),
            ("base_rate", self.base_rate),
        ] {
            check_unit(name, value)?;
        }
        check_fade("recency_fade", self.recency_fade)?;
        if (self.w_pos + self.w_neg - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(ReputationError::InvalidParameter {
                name: "w_neg",
                value: self.w_neg,
                reason: "w_pos + w_neg must equal 1",
            });
        }
        if self.hop_factor == 0.0 {
            return Err(ReputationError::InvalidParameter {
                name: "hop_factor",
                value: 0.0,
                reason: "must be positive",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub fade: f64,
}

impl Default for BetaParams {
    fn default() -> Self {
        BetaParams { fade: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams {
    pub steepness: f64,
    pub w_pos: f64,
    pub w_neg: f64,
    pub fade: f64,
}

impl Default for SigmoidParams {
    fn default() -> Self {
        SigmoidParams {
            steepness: 1.0,
            w_pos: 0.4,
            w_neg: 0.6,
            fade: 1.0,
        }
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<(), ReputationError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ReputationError::InvalidParameter {
            name,
            value,
            reason: "must lie in [0,1]",
        })
    }
}

fn check_fade(name: &'static str, value: f64) -> Result<(), ReputationError> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(ReputationError::InvalidParameter {
            name,
            value,
            reason: "must lie in (0,1]",
        })
    }
}

/// Faded positive and negative evidence `(alpha, beta)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Evidence {
    pub positive: f64,
    pub negative: f64,
}

impl Evidence {
    pub fn is_empty(&self) -> bool {
        self.positive + self.negative == 0.0
    }

    fn scaled(self, factor: f64) -> Self {
        Evidence {
            positive: self.positive * factor,
            negative: self.negative * factor,
        }
    }
}

fn fade_factor(fade: f64, age: u64) -> f64 {
    if fade == 1.0 {
        1.0
    } else {
        fade.powi(age.min(i32::MAX as u64) as i32)
    }
}

/// Sums `fade^(now - round)` over positive and negative events. Events
/// later than `now` count as age zero.
pub fn decayed_evidence(events: &[Interaction], now: u64, fade: f64) -> Evidence {
    events.iter().fold(Evidence::default(), |mut acc, e| {
        let w = fade_factor(fade, now.saturating_sub(e.round));
        if e.positive {
            acc.positive += w;
        } else {
            acc.negative += w;
        }
        acc
    })
}

/// Maps faded evidence onto an opinion with uncertainty fixed at `1 - success_prob`.
pub fn opinion_from_evidence(evidence: Evidence, params: &MwslParams) -> Opinion {
    if evidence.is_empty() {
        return Opinion::vacuous(params.base_rate);
    }
    let uncertainty = 1.0 - params.success_prob;
    let pos = params.w_pos * evidence.positive;
    let neg = params.w_neg * evidence.negative;
    let total = pos + neg;
    if total == 0.0 {
        // Both weights applied to zero-weight evidence classes.
        return Opinion::vacuous(params.base_rate);
    }
    Opinion {
        belief: (1.0 - uncertainty) * (pos / total),
        disbelief: (1.0 - uncertainty) * (neg / total),
        uncertainty,
        base_rate: params.base_rate,
    }
}

/// Local MWSL opinion of one rater about one ratee.
pub fn local_opinion_mwsl(events: &[Interaction], now: u64, params: &MwslParams) -> Opinion {
    opinion_from_evidence(decayed_evidence(events, now, params.recency_fade), params)
}

/// Hop-weighted mean of opinions; returns the expectation of the combined
/// opinion clamped to `[0,1]`.
pub fn combine_opinions(
    opinions: &[(Opinion, u32)],
    params: &MwslParams,
) -> Result<f64, ReputationError> {
    if opinions.is_empty() {
        return Err(ReputationError::EmptyOpinionSet);
    }
    // Weights are taken relative to the nearest opinion so they cannot all
    // underflow. The mean is accumulated as offsets from the first opinion,
    // which keeps a set of equal opinions exact.
    let nearest = opinions.iter().map(|(_, h)| *h).min().unwrap_or(0);
    let pivot = opinions[0].0;
    let mut weight_sum = 0.0;
    let (mut db, mut dd, mut du) = (0.0, 0.0, 0.0);
    for (op, hops) in opinions {
        let w = params
            .hop_factor
            .powi((hops - nearest).min(i32::MAX as u32) as i32);
        weight_sum += w;
        db += w * (op.belief - pivot.belief);
        dd += w * (op.disbelief - pivot.disbelief);
        du += w * (op.uncertainty - pivot.uncertainty);
    }
    let b = pivot.belief + db / weight_sum;
    let d = pivot.disbelief + dd / weight_sum;
    let u = pivot.uncertainty + du / weight_sum;
    debug_assert!((b + d + u - 1.0).abs() < 1e-6);
    Ok((b + params.base_rate * u).clamp(0.0, 1.0))
}

/// Mean of `Beta(alpha + 1, beta + 1)`.
pub fn beta_score(evidence: Evidence) -> f64 {
    (evidence.positive + 1.0) / (evidence.positive + evidence.negative + 2.0)
}

pub fn reputation_beta(events: &[Interaction], now: u64, fade: f64) -> f64 {
    beta_score(decayed_evidence(events, now, fade))
}

pub fn sigmoid_score(evidence: Evidence, params: &SigmoidParams) -> f64 {
    let x = params.w_pos * evidence.positive - params.w_neg * evidence.negative;
    1.0 / (1.0 + (-params.steepness * x).exp())
}

pub fn reputation_sigmoid(events: &[Interaction], now: u64, params: &SigmoidParams) -> f64 {
    sigmoid_score(decayed_evidence(events, now, params.fade), params)
}

/// A miner's reputation at a given round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReputationScore {
    pub ratee: MinerId,
    pub value: f64,
    pub round: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Mwsl,
    Beta,
    Sigmoid,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Mwsl, Model::Beta, Model::Sigmoid];

    pub fn name(self) -> &'static str {
        match self {
            Model::Mwsl => "mwsl",
            Model::Beta => "beta",
            Model::Sigmoid => "sigmoid",
        }
    }

    pub fn parse(s: &str) -> Option<Model> {
        Model::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
    }
}

/// A configured reputation engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Engine {
    pub model: Model,
    pub mwsl: MwslParams,
    pub beta: BetaParams,
    pub sigmoid: SigmoidParams,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(Model::Mwsl)
    }
}

impl Engine {
    pub fn new(model: Model) -> Self {
        Engine {
            model,
            mwsl: MwslParams::default(),
            beta: BetaParams::default(),
            sigmoid: SigmoidParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ReputationError> {
        self.mwsl.validate()?;
        check_fade("beta_fade", self.beta.fade)?;
        check_fade("sigmoid_fade", self.sigmoid.fade)?;
        check_unit("sigmoid_w_pos", self.sigmoid.w_pos)?;
        check_unit("sigmoid_w_neg", self.sigmoid.w_neg)?;
        if !(self.sigmoid.steepness > 0.0 && self.sigmoid.steepness.is_finite()) {
            return Err(ReputationError::InvalidParameter {
                name: "sigmoid_k",
                value: self.sigmoid.steepness,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    pub fn fade(&self) -> f64 {
        match self.model {
            Model::Mwsl => self.mwsl.recency_fade,
            Model::Beta => self.beta.fade,
            Model::Sigmoid => self.sigmoid.fade,
        }
    }

    /// Score of a miner nobody has rated yet.
    pub fn empty_score(&self) -> f64 {
        self.score(&MinerEvidence::default(), 0)
    }

    /// Scores one miner from its accumulated evidence as of `now`.
    pub fn score(&self, evidence: &MinerEvidence, now: u64) -> f64 {
        let fade = self.fade();
        match self.model {
            Model::Mwsl => {
                let opinions: Vec<(Opinion, u32)> = evidence
                    .by_hops_at(now, fade)
                    .map(|(hops, ev)| (opinion_from_evidence(ev, &self.mwsl), hops))
                    .collect();
                if opinions.is_empty() {
                    Opinion::vacuous(self.mwsl.base_rate).expectation()
                } else {
                    combine_opinions(&opinions, &self.mwsl)
                        .expect("opinion set checked non-empty")
                }
            }
            Model::Beta => beta_score(evidence.pooled_at(now, fade)),
            Model::Sigmoid => sigmoid_score(evidence.pooled_at(now, fade), &self.sigmoid),
        }
    }
}

/// Evidence about one miner, pooled across raters and split by report hop
/// distance. Values are stored faded to `as_of` and brought forward lazily.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MinerEvidence {
    as_of: u64,
    pooled: Evidence,
    by_hops: BTreeMap<u32, Evidence>,
}

impl MinerEvidence {
    pub fn add(&mut self, event: Interaction, fade: f64) {
        if event.round > self.as_of {
            self.advance(event.round, fade);
        }
        let w = fade_factor(fade, self.as_of.saturating_sub(event.round));
        let bucket = self.by_hops.entry(event.hops).or_default();
        if event.positive {
            self.pooled.positive += w;
            bucket.positive += w;
        } else {
            self.pooled.negative += w;
            bucket.negative += w;
        }
    }

    fn advance(&mut self, now: u64, fade: f64) {
        let f = fade_factor(fade, now - self.as_of);
        self.pooled = self.pooled.scaled(f);
        for ev in self.by_hops.values_mut() {
            *ev = ev.scaled(f);
        }
        self.as_of = now;
    }

    pub fn pooled_at(&self, now: u64, fade: f64) -> Evidence {
        self.pooled
            .scaled(fade_factor(fade, now.saturating_sub(self.as_of)))
    }

    pub fn by_hops_at(&self, now: u64, fade: f64) -> impl Iterator<Item = (u32, Evidence)> + '_ {
        let f = fade_factor(fade, now.saturating_sub(self.as_of));
        self.by_hops
            .iter()
            .filter(|(_, ev)| !ev.is_empty())
            .map(move |(h, ev)| (*h, ev.scaled(f)))
    }

    pub fn is_empty(&self) -> bool {
        self.pooled.is_empty()
    }
}

/// Evidence accumulators for every rated miner.
#[derive(Debug, Clone, Default)]
pub struct EvidenceBook {
    fade: f64,
    miners: BTreeMap<MinerId, MinerEvidence>,
}

impl EvidenceBook {
    pub fn new(fade: f64) -> Self {
        EvidenceBook {
            fade,
            miners: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, ratee: MinerId, event: Interaction) {
        self.miners
            .entry(ratee)
            .or_default()
            .add(event, self.fade);
    }

    pub fn get(&self, ratee: MinerId) -> Option<&MinerEvidence> {
        self.miners.get(&ratee)
    }

    pub fn rated(&self) -> impl Iterator<Item = (MinerId, &MinerEvidence)> {
        self.miners.iter().map(|(m, e)| (*m, e))
    }

    pub fn rated_count(&self) -> usize {
        self.miners.len()
    }
}
