//! Scenario files.
//!
//! A scenario file is TOML with four optional tables. Every key is optional
//! and unknown keys are rejected. Omitted keys take the preset or engine
//! default.
//!
//! ```toml
//! [scenario]
//! preset = "small"          # small | medium | large | vlarge
//! gen = "4g"                # 4g | 5g | 6g
//! collusion = 0.5
//! seed = 1
//! max_rounds = 500
//! threshold = 0.5
//! stop_on_detection = true
//! ue_cap = 2000             # 0 simulates every UE
//! watched_miner = 0
//!
//! [adversary]
//! behavior = "late-onset"   # honest | late-onset | oscillating
//! start_round = 20
//! honest_prefix = 20
//! malicious_span = 15
//! honest_span = 5
//! tamper_prob = 1.0
//! tamper_as_manager = true
//! lie_as_verifier = true
//!
//! [reputation]
//! model = "mwsl"            # mwsl | beta | sigmoid
//! w_pos = 0.4
//! w_neg = 0.6
//! success_prob = 0.7
//! hop_factor = 0.75
//! recency_fade = 0.9
//! base_rate = 0.5
//! beta_fade = 1.0
//! sigmoid_steepness = 1.0
//! sigmoid_w_pos = 0.4
//! sigmoid_w_neg = 0.6
//! sigmoid_fade = 1.0
//!
//! [network]
//! miners = 100
//! ues = 100
//! active_miners = 15
//! verifier_types = 10
//! max_hops = 8
//! rsu_records_min = 10
//! rsu_records_max = 40
//! vote_bytes = 1024
//! data_block_bytes = 10240
//! reputation_block_bytes = 1536
//! contract_bytes = 2048
//! verdict_bytes = 1024
//! scale_reputation_fanin = true
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{BehaviorKind, BehaviorProgram};
use crate::netmodel::NetworkGen;
use crate::preset::Preset;
use crate::reputation::{Engine, Model};
use crate::sim::{ScenarioConfig, SimError};
use crate::MinerId;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Invalid(#[from] SimError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub adversary: AdversarySection,
    #[serde(default)]
    pub reputation: ReputationSection,
    #[serde(default)]
    pub network: NetworkSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub preset: Option<String>,
    pub gen: Option<String>,
    pub collusion: Option<f64>,
    pub seed: Option<u64>,
    pub max_rounds: Option<u64>,
    pub threshold: Option<f64>,
    pub stop_on_detection: Option<bool>,
    pub ue_cap: Option<u32>,
    pub watched_miner: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySection {
    pub behavior: Option<String>,
    pub start_round: Option<u64>,
    pub honest_prefix: Option<u64>,
    pub malicious_span: Option<u64>,
    pub honest_span: Option<u64>,
    pub tamper_prob: Option<f64>,
    pub tamper_as_manager: Option<bool>,
    pub lie_as_verifier: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReputationSection {
    pub model: Option<String>,
    pub w_pos: Option<f64>,
    pub w_neg: Option<f64>,
    pub success_prob: Option<f64>,
    pub hop_factor: Option<f64>,
    pub recency_fade: Option<f64>,
    pub base_rate: Option<f64>,
    pub beta_fade: Option<f64>,
    pub sigmoid_steepness: Option<f64>,
    pub sigmoid_w_pos: Option<f64>,
    pub sigmoid_w_neg: Option<f64>,
    pub sigmoid_fade: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub miners: Option<u32>,
    pub ues: Option<u32>,
    pub active_miners: Option<u32>,
    pub verifier_types: Option<u32>,
    pub max_hops: Option<u32>,
    pub rsu_records_min: Option<u32>,
    pub rsu_records_max: Option<u32>,
    pub vote_bytes: Option<u64>,
    pub data_block_bytes: Option<u64>,
    pub reputation_block_bytes: Option<u64>,
    pub contract_bytes: Option<u64>,
    pub verdict_bytes: Option<u64>,
    pub scale_reputation_fanin: Option<bool>,
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

pub fn parse_preset(s: &str) -> Result<Preset, SimError> {
    s.parse()
        .map_err(|e: crate::preset::UnknownPreset| SimError::invalid("scenario.preset", e.to_string()))
}

pub fn parse_gen(s: &str) -> Result<NetworkGen, SimError> {
    s.parse()
        .map_err(|_| SimError::invalid("scenario.gen", format!("unknown generation `{s}` (valid: 4g, 5g, 6g)")))
}

pub fn parse_model(s: &str) -> Result<Model, SimError> {
    Model::parse(s).ok_or_else(|| {
        SimError::invalid(
            "reputation.model",
            format!("unknown model `{s}` (valid: mwsl, beta, sigmoid)"),
        )
    })
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Materializes every default and validates the result.
    pub fn resolve(&self) -> Result<ScenarioConfig, SimError> {
        let sc = &self.scenario;
        let preset = match &sc.preset {
            Some(p) => parse_preset(p)?,
            None => Preset::Small,
        };
        let gen = match &sc.gen {
            Some(g) => parse_gen(g)?,
            None => NetworkGen::G4,
        };
        let mut cfg = ScenarioConfig::new(preset, gen);
        set(&mut cfg.collusion, sc.collusion);
        set(&mut cfg.seed, sc.seed);
        set(&mut cfg.max_rounds, sc.max_rounds);
        set(&mut cfg.threshold, sc.threshold);
        set(&mut cfg.stop_on_detection, sc.stop_on_detection);
        if let Some(cap) = sc.ue_cap {
            cfg.ue_cap = (cap > 0).then_some(cap);
        }
        if let Some(w) = sc.watched_miner {
            cfg.watched_miner = MinerId(w);
        }

        cfg.behavior = self.adversary.program()?;
        cfg.engine = self.reputation.engine()?;

        let n = &self.network;
        let s = &mut cfg.scale;
        set(&mut s.miners, n.miners);
        set(&mut s.ues, n.ues);
        set(&mut s.active_miners, n.active_miners);
        set(&mut s.verifier_types, n.verifier_types);
        set(&mut s.max_hops, n.max_hops);
        set(&mut s.rsu_records.0, n.rsu_records_min);
        set(&mut s.rsu_records.1, n.rsu_records_max);
        set(&mut s.vote_bytes, n.vote_bytes);
        set(&mut s.data_block_bytes, n.data_block_bytes);
        set(&mut s.reputation_block_bytes, n.reputation_block_bytes);
        set(&mut s.contract_bytes, n.contract_bytes);
        set(&mut cfg.verdict_bytes, n.verdict_bytes);
        set(&mut cfg.scale_reputation_fanin, n.scale_reputation_fanin);

        cfg.validate()?;
        Ok(cfg)
    }
}

impl AdversarySection {
    fn program(&self) -> Result<BehaviorProgram, SimError> {
        let kind = match self.behavior.as_deref().unwrap_or("late-onset") {
            "honest" | "always-honest" => BehaviorKind::AlwaysHonest,
            "late-onset" => BehaviorKind::LateOnset {
                start_round: self.start_round.unwrap_or(20),
            },
            "oscillating" => BehaviorKind::Oscillating {
                honest_prefix: self.honest_prefix.unwrap_or(20),
                malicious_span: self.malicious_span.unwrap_or(15),
                honest_span: self.honest_span.unwrap_or(5),
            },
            other => {
                return Err(SimError::invalid(
                    "adversary.behavior",
                    format!("unknown behavior `{other}` (valid: honest, late-onset, oscillating)"),
                ))
            }
        };
        let mut p = BehaviorProgram::new(kind);
        set(&mut p.tamper_prob, self.tamper_prob);
        set(&mut p.tamper_as_manager, self.tamper_as_manager);
        set(&mut p.lie_as_verifier, self.lie_as_verifier);
        Ok(p)
    }
}

impl ReputationSection {
    fn engine(&self) -> Result<Engine, SimError> {
        let model = match &self.model {
            Some(m) => parse_model(m)?,
            None => Model::Mwsl,
        };
        let mut e = Engine::new(model);
        set(&mut e.mwsl.w_pos, self.w_pos);
        set(&mut e.mwsl.w_neg, self.w_neg);
        set(&mut e.mwsl.success_prob, self.success_prob);
        set(&mut e.mwsl.hop_factor, self.hop_factor);
        set(&mut e.mwsl.recency_fade, self.recency_fade);
        set(&mut e.mwsl.base_rate, self.base_rate);
        set(&mut e.beta.fade, self.beta_fade);
        set(&mut e.sigmoid.steepness, self.sigmoid_steepness);
        set(&mut e.sigmoid.w_pos, self.sigmoid_w_pos);
        set(&mut e.sigmoid.w_neg, self.sigmoid_w_neg);
        set(&mut e.sigmoid.fade, self.sigmoid_fade);
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ConfigFile::parse("").unwrap().resolve().unwrap();
        assert_eq!(cfg, ScenarioConfig::new(Preset::Small, NetworkGen::G4));
    }

    #[test]
    fn full_example_round_trips() {
        let text = "[scenario]\npreset = \"medium\"\ngen = \"6g\"\ncollusion = 0.33\nue_cap = 0\n\
                    [adversary]\nbehavior = \"oscillating\"\nmalicious_span = 10\n\
                    [reputation]\nmodel = \"beta\"\nbeta_fade = 0.95\n\
                    [network]\nmax_hops = 30\n";
        let cfg = ConfigFile::parse(text).unwrap().resolve().unwrap();
        assert_eq!(cfg.preset, Preset::Medium);
        assert_eq!(cfg.gen, NetworkGen::G6);
        assert_eq!(cfg.ue_cap, None);
        assert_eq!(cfg.scale.max_hops, 30);
        assert_eq!(cfg.scale.active_miners, 41);
        assert_eq!(cfg.engine.model, Model::Beta);
        assert_eq!(cfg.engine.beta.fade, 0.95);
        assert!(matches!(
            cfg.behavior.kind,
            BehaviorKind::Oscillating { malicious_span: 10, honest_prefix: 20, .. }
        ));
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = ConfigFile::parse("[scenario]\nseed = 3\ncolusion = 0.5\n").unwrap_err().to_string();
        assert!(err.contains("colusion"), "{err}");
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn invalid_values_name_the_field() {
        let err = ConfigFile::parse("[scenario]\ncollusion = 1.5\n").unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("scenario.collusion"), "{err}");
        let err = ConfigFile::parse("[scenario]\npreset = \"huge\"\n").unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("small, medium, large, vlarge"), "{err}");
        let err = ConfigFile::parse("[reputation]\nrecency_fade = 0\n").unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("reputation"), "{err}");
    }
}
