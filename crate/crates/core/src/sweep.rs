//! Parameter sweeps over preset × generation × collusion × engine.
//!
//! Every (cell, seed) job is independent and owns its RNG streams, so jobs
//! run concurrently under [`ExecMode::Parallel`] with no shared state.
//! A job runs with the sweep seed unchanged: cells that differ only in
//! network generation replay identical reputation dynamics.

use serde::{Deserialize, Serialize};

use crate::adversary::{BehaviorKind, BehaviorProgram};
use crate::exec::{map_ordered, ExecMode};
use crate::netmodel::NetworkGen;
use crate::preset::Preset;
use crate::reputation::{Engine, Model};
use crate::sim::{run_scenario_with, DetectionReport, ScenarioConfig, SimError};

pub const FIG3_COLLUSION: [f64; 3] = [0.25, 0.33, 0.50];
pub const FIG4_COLLUSION: f64 = 0.33;
pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    /// Template for every cell; grid axes override its fields.
    pub base: ScenarioConfig,
    pub presets: Vec<Preset>,
    pub gens: Vec<NetworkGen>,
    pub collusion: Vec<f64>,
    pub engines: Vec<Engine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub index: usize,
    pub preset: Preset,
    pub gen: NetworkGen,
    pub collusion: f64,
    pub engine: Engine,
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.presets.len() * self.gens.len() * self.collusion.len() * self.engines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells in preset, generation, collusion, engine order.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::with_capacity(self.len());
        for &preset in &self.presets {
            for &gen in &self.gens {
                for &collusion in &self.collusion {
                    for &engine in &self.engines {
                        out.push(SweepCell {
                            index: out.len(),
                            preset,
                            gen,
                            collusion,
                            engine,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn scenario(&self, cell: &SweepCell, seed: u64) -> ScenarioConfig {
        let mut cfg = self.base.clone();
        if cfg.preset != cell.preset {
            cfg.scale = cell.preset.params();
        }
        cfg.preset = cell.preset;
        cfg.gen = cell.gen;
        cfg.collusion = cell.collusion;
        cfg.engine = cell.engine;
        cfg.seed = seed;
        cfg
    }
}

/// All presets, all generations, three collusion levels, MWSL, late onset.
pub fn fig3_grid(base: ScenarioConfig) -> SweepGrid {
    SweepGrid {
        base,
        presets: Preset::ALL.to_vec(),
        gens: NetworkGen::ALL.to_vec(),
        collusion: FIG3_COLLUSION.to_vec(),
        engines: vec![Engine::new(Model::Mwsl)],
    }
}

/// Three engines against the oscillating adversary, run to `max_rounds`.
pub fn fig4_grid(mut base: ScenarioConfig) -> SweepGrid {
    base.behavior = BehaviorProgram::new(BehaviorKind::OSCILLATING);
    base.stop_on_detection = false;
    SweepGrid {
        presets: vec![base.preset],
        gens: vec![base.gen],
        collusion: vec![FIG4_COLLUSION],
        engines: Model::ALL.map(Engine::new).to_vec(),
        base,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub cell: usize,
    pub seed: u64,
    pub outcome: Result<DetectionReport, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: usize,
    pub runs: usize,
    pub detected: usize,
    pub errors: usize,
    /// Over detected runs only.
    pub mean_time_s: Option<f64>,
    pub stddev_time_s: Option<f64>,
    pub mean_rounds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    pub seeds: Vec<u64>,
    /// Cell-major, seeds in input order.
    pub runs: Vec<SweepRun>,
    pub summaries: Vec<CellSummary>,
}

impl SweepResult {
    pub fn runs_for(&self, cell: usize) -> impl Iterator<Item = &SweepRun> {
        self.runs.iter().filter(move |r| r.cell == cell)
    }

    pub fn errors(&self) -> impl Iterator<Item = &SweepRun> {
        self.runs.iter().filter(|r| r.outcome.is_err())
    }
}

/// Population mean and standard deviation.
pub fn mean_stddev(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

fn summarize(cell: usize, runs: &[&SweepRun]) -> CellSummary {
    let reports: Vec<&DetectionReport> = runs.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let times: Vec<f64> = reports.iter().filter_map(|r| r.detection_time_s).collect();
    let rounds: Vec<f64> = reports
        .iter()
        .filter_map(|r| r.rounds_to_detect())
        .map(|r| r as f64)
        .collect();
    let stats = mean_stddev(&times);
    CellSummary {
        cell,
        runs: runs.len(),
        detected: times.len(),
        errors: runs.len() - reports.len(),
        mean_time_s: stats.map(|s| s.0),
        stddev_time_s: stats.map(|s| s.1),
        mean_rounds: mean_stddev(&rounds).map(|s| s.0),
    }
}

/// Runs every cell for every seed. A failing job is recorded in its
/// [`SweepRun`] and the rest of the sweep continues.
pub fn run_sweep(grid: &SweepGrid, seeds: &[u64], mode: ExecMode) -> Result<SweepResult, SimError> {
    if seeds.is_empty() {
        return Err(SimError::invalid("seeds", "seed list is empty"));
    }
    if grid.is_empty() {
        return Err(SimError::invalid("grid", "sweep grid has no cells"));
    }
    let cells = grid.cells();
    let jobs: Vec<(usize, u64)> = cells
        .iter()
        .flat_map(|c| seeds.iter().map(move |s| (c.index, *s)))
        .collect();
    let runs = map_ordered(mode, &jobs, |&(cell, seed)| {
        let cfg = grid.scenario(&cells[cell], seed);
        SweepRun {
            cell,
            seed,
            outcome: run_scenario_with(&cfg, ExecMode::Sequential)
                .map(|o| o.report)
                .map_err(|e| e.to_string()),
        }
    });
    let summaries = cells
        .iter()
        .map(|c| {
            let mine: Vec<&SweepRun> = runs.iter().filter(|r| r.cell == c.index).collect();
            summarize(c.index, &mine)
        })
        .collect();
    Ok(SweepResult {
        cells,
        seeds: seeds.to_vec(),
        runs,
        summaries,
    })
}
