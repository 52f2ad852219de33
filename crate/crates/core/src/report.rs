//! CSV tables.
//!
//! Headers are fixed; floats use the shortest round-trip decimal form with a
//! '.' separator. Missing values (no detection) are empty cells.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{RoundMetrics, ScenarioConfig, ScenarioOutcome};
use crate::sweep::SweepResult;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub round: u64,
    pub manager: u32,
    pub committed: bool,
    pub approvals: u32,
    pub verifier_count: u32,
    pub tampered_records: u32,
    pub mean_hops: f64,
    pub max_verifier_hops: u32,
    pub reputation_fanin: f64,
    pub vote_upload_s: f64,
    pub record_routing_s: f64,
    pub block_distribution_s: f64,
    pub verdict_return_s: f64,
    pub block_broadcast_s: f64,
    pub block_download_s: f64,
    pub total_s: f64,
    pub cumulative_s: f64,
    pub watched_reputation: f64,
    pub watched_active: bool,
}

impl From<&RoundMetrics> for RoundRow {
    fn from(m: &RoundMetrics) -> Self {
        let l = &m.latency;
        RoundRow {
            round: m.round,
            manager: m.manager.0,
            committed: m.committed,
            approvals: m.approvals,
            verifier_count: m.verifier_count,
            tampered_records: m.tampered_records,
            mean_hops: m.hops.mean_hops,
            max_verifier_hops: m.hops.max_verifier_hops,
            reputation_fanin: m.hops.reputation_fanin,
            vote_upload_s: l.vote_upload,
            record_routing_s: l.record_routing,
            block_distribution_s: l.block_distribution,
            verdict_return_s: l.verdict_return,
            block_broadcast_s: l.block_broadcast,
            block_download_s: l.block_download,
            total_s: m.total_s,
            cumulative_s: m.cumulative_s,
            watched_reputation: m.watched_reputation,
            watched_active: m.watched_active,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub preset: String,
    pub gen: String,
    pub collusion: f64,
    pub model: String,
    pub seed: u64,
    pub detected: bool,
    pub detection_round: Option<u64>,
    pub rounds_to_detect: Option<u64>,
    pub detection_time_s: Option<f64>,
    pub criterion: Option<String>,
    pub rounds_run: u64,
    pub simulated_ues: u32,
}

impl DetectionRow {
    pub fn new(cfg: &ScenarioConfig, out: &ScenarioOutcome) -> Self {
        let r = &out.report;
        DetectionRow {
            preset: cfg.preset.name().into(),
            gen: cfg.gen.name().into(),
            collusion: cfg.collusion,
            model: cfg.engine.model.name().into(),
            seed: cfg.seed,
            detected: r.detected,
            detection_round: r.detection_round,
            rounds_to_detect: r.rounds_to_detect(),
            detection_time_s: r.detection_time_s,
            criterion: r.criterion.map(|c| c.name().into()),
            rounds_run: r.rounds_run,
            simulated_ues: out.simulated_ues,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub preset: String,
    pub gen: String,
    pub collusion: f64,
    pub seed: u64,
    pub rounds_to_detect: Option<u64>,
    pub detection_time_s: Option<f64>,
    /// Cell mean and population stddev of detection time, repeated per seed.
    pub mean: Option<f64>,
    pub stddev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig4Row {
    pub seed: u64,
    pub round: u64,
    pub engine: String,
    pub reputation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig4Summary {
    pub engine: String,
    pub seed: u64,
    pub threshold: f64,
    pub rounds: u64,
    pub crosses: bool,
    pub first_crossing_round: Option<u64>,
    pub min_reputation: f64,
}

pub fn fig3_rows(res: &SweepResult) -> Vec<Fig3Row> {
    res.runs
        .iter()
        .map(|run| {
            let cell = &res.cells[run.cell];
            let summary = &res.summaries[run.cell];
            let report = run.outcome.as_ref().ok();
            Fig3Row {
                preset: cell.preset.name().into(),
                gen: cell.gen.name().into(),
                collusion: cell.collusion,
                seed: run.seed,
                rounds_to_detect: report.and_then(|r| r.rounds_to_detect()),
                detection_time_s: report.and_then(|r| r.detection_time_s),
                mean: summary.mean_time_s,
                stddev: summary.stddev_time_s,
            }
        })
        .collect()
}

pub fn fig4_rows(res: &SweepResult) -> Vec<Fig4Row> {
    let mut out = Vec::new();
    for run in &res.runs {
        let Ok(report) = &run.outcome else { continue };
        let engine = res.cells[run.cell].engine.model.name();
        out.extend(report.trajectory.iter().enumerate().map(|(i, rep)| Fig4Row {
            seed: run.seed,
            round: i as u64,
            engine: engine.into(),
            reputation: *rep,
        }));
    }
    out
}

pub fn fig4_summaries(res: &SweepResult, threshold: f64) -> Vec<Fig4Summary> {
    res.runs
        .iter()
        .filter_map(|run| {
            let report = run.outcome.as_ref().ok()?;
            let first = report.trajectory.iter().position(|r| *r < threshold);
            Some(Fig4Summary {
                engine: res.cells[run.cell].engine.model.name().into(),
                seed: run.seed,
                threshold,
                rounds: report.trajectory.len() as u64,
                crosses: first.is_some(),
                first_crossing_round: first.map(|r| r as u64),
                min_reputation: report.trajectory.iter().copied().fold(f64::INFINITY, f64::min),
            })
        })
        .collect()
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a header-only table when `rows` is empty.
pub fn write_csv_with_header<T: Serialize, W: Write>(
    rows: &[T],
    header: &[&str],
    out: W,
) -> Result<(), ReportError> {
    if rows.is_empty() {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header)?;
        w.flush()?;
        return Ok(());
    }
    write_csv(rows, out)
}

pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String, ReportError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn read_csv<T: for<'de> Deserialize<'de>, R: Read>(input: R) -> Result<Vec<T>, ReportError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(ReportError::from)
}

pub const ROUND_HEADER: &[&str] = &[
    "round",
    "manager",
    "committed",
    "approvals",
    "verifier_count",
    "tampered_records",
    "mean_hops",
    "max_verifier_hops",
    "reputation_fanin",
    "vote_upload_s",
    "record_routing_s",
    "block_distribution_s",
    "verdict_return_s",
    "block_broadcast_s",
    "block_download_s",
    "total_s",
    "cumulative_s",
    "watched_reputation",
    "watched_active",
];

pub const FIG3_HEADER: &[&str] = &[
    "preset",
    "gen",
    "collusion",
    "seed",
    "rounds_to_detect",
    "detection_time_s",
    "mean",
    "stddev",
];

pub const FIG4_HEADER: &[&str] = &["seed", "round", "engine", "reputation"];
