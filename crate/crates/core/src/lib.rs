//! Discrete-event simulator for a reputation-secured delegated-proof-of-stake
//! blockchain running over 4G, 5G and 6G link models.
//!
//! The crate is organised bottom-up:
//!
//! - [`chain`]: hash-linked blocks of data-sharing and reputation records.
//! - [`reputation`]: MWSL, beta and sigmoid reputation engines.
//! - [`consensus`]: miner election, manager rotation, verifier bands, 2/3 commit, feedback.
//! - [`netmodel`]: topology, hop sampling and per-round latency.
//! - [`adversary`]: malicious-miner schedules and colluding UE selection.
//! - [`sim`]: the round loop, detection criterion and metrics.
//! - [`sweep`]: grids of scenarios, run sequentially or with rayon.
//! - [`config`], [`report`], [`plot`]: scenario files, CSV output and SVG charts.

pub mod adversary;
pub mod chain;
pub mod config;
pub mod consensus;
pub mod exec;
pub mod netmodel;
pub mod plot;
pub mod preset;
pub mod report;
pub mod reputation;
pub mod sim;
pub mod sweep;

mod ids;

pub use ids::{MinerId, UeId};
