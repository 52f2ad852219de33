//! Network-scale presets.
//!
//! Sizes use binary units: 1 KB = 1024 B, 1 MB = 1024 KB.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const KB: u64 = 1024;
pub const MB: u64 = 1024 * KB;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Small,
    Medium,
    Large,
    #[serde(rename = "vlarge")]
    VeryLarge,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Small, Preset::Medium, Preset::Large, Preset::VeryLarge];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Small => "small",
            Preset::Medium => "medium",
            Preset::Large => "large",
            Preset::VeryLarge => "vlarge",
        }
    }

    pub fn valid_names() -> String {
        Preset::ALL.map(Preset::name).join(", ")
    }

    pub fn params(self) -> ScaleParams {
        match self {
            Preset::Small => ScaleParams {
                miners: 100,
                ues: 100,
                vote_bytes: KB,
                data_block_bytes: 10 * KB,
                reputation_block_bytes: 3 * KB / 2,
                contract_bytes: 2 * KB,
                verifier_types: 10,
                active_miners: 15,
                rsu_records: (10, 40),
                max_hops: 8,
            },
            Preset::Medium => ScaleParams {
                miners: 1_000,
                ues: 1_000,
                vote_bytes: 10 * KB,
                data_block_bytes: 100 * KB,
                reputation_block_bytes: 15 * KB,
                contract_bytes: 15 * KB,
                verifier_types: 10,
                active_miners: 41,
                rsu_records: (100, 400),
                max_hops: 23,
            },
            Preset::Large => ScaleParams {
                miners: 10_000,
                ues: 10_000,
                vote_bytes: 100 * KB,
                data_block_bytes: 5 * MB,
                reputation_block_bytes: 150 * KB,
                contract_bytes: 150 * KB,
                verifier_types: 10,
                active_miners: 199,
                rsu_records: (1_000, 4_000),
                max_hops: 71,
            },
            Preset::VeryLarge => ScaleParams {
                miners: 20_000,
                ues: 20_000,
                vote_bytes: 200 * KB,
                data_block_bytes: 10 * MB,
                reputation_block_bytes: 300 * KB,
                contract_bytes: 200 * KB,
                verifier_types: 10,
                active_miners: 255,
                rsu_records: (1_500, 6_000),
                max_hops: 100,
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPreset(pub String);

impl fmt::Display for UnknownPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown preset `{}` (valid presets: {})",
            self.0,
            Preset::valid_names()
        )
    }
}

impl std::error::Error for UnknownPreset {}

impl FromStr for Preset {
    type Err = UnknownPreset;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let needle = s.trim().to_ascii_lowercase();
        match needle.as_str() {
            "very-large" | "verylarge" => return Ok(Preset::VeryLarge),
            _ => {}
        }
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == needle)
            .ok_or_else(|| UnknownPreset(s.to_string()))
    }
}

/// Every per-scale value a scenario needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleParams {
    /// Active plus standby miners (RSUs).
    pub miners: u32,
    /// Vehicular and drone users.
    pub ues: u32,
    pub vote_bytes: u64,
    pub data_block_bytes: u64,
    pub reputation_block_bytes: u64,
    pub contract_bytes: u64,
    pub verifier_types: u32,
    pub active_miners: u32,
    /// Inclusive range of RSUs holding UE data records in a round.
    pub rsu_records: (u32, u32),
    pub max_hops: u32,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        let s = Preset::Small.params();
        assert_eq!((s.miners, s.ues, s.active_miners, s.max_hops), (100, 100, 15, 8));
        assert_eq!(s.reputation_block_bytes, 1536);
        let m = Preset::Medium.params();
        assert_eq!((m.active_miners, m.max_hops, m.rsu_records), (41, 23, (100, 400)));
        let l = Preset::Large.params();
        assert_eq!(l.data_block_bytes, 5 * 1024 * 1024);
        assert_eq!((l.active_miners, l.max_hops), (199, 71));
        let v = Preset::VeryLarge.params();
        assert_eq!((v.miners, v.active_miners, v.max_hops, v.contract_bytes), (20_000, 255, 100, 200 * 1024));
        assert!(Preset::ALL.iter().all(|p| p.params().verifier_types == 10));
    }

    #[test]
    fn parse_names() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>(), Ok(p));
        }
        assert_eq!("very-large".parse::<Preset>(), Ok(Preset::VeryLarge));
        let err = "huge".parse::<Preset>().unwrap_err().to_string();
        assert!(err.contains("small, medium, large, vlarge"), "{err}");
    }
}
