use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a user equipment (vehicle or drone).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UeId(pub u32);

/// Identifier of a miner. Miners are the RSUs that store the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MinerId(pub u32);

impl MinerId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl UeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for UeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ue{}", self.0)
    }
}

impl fmt::Display for MinerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}
