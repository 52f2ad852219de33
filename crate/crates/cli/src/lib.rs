//! Command implementations behind the `dposim` binary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use dposim_core::config::{ConfigError, ConfigFile};
use dposim_core::exec::ExecMode;
use dposim_core::plot::{fig3_svg, fig4_svg};
use dposim_core::preset::Preset;
use dposim_core::report::{
    fig3_rows, fig4_rows, fig4_summaries, read_csv, write_csv, write_csv_with_header, DetectionRow,
    Fig3Row, Fig4Row, Fig4Summary, ReportError, RoundRow, FIG3_HEADER, FIG4_HEADER, ROUND_HEADER,
};
use dposim_core::sim::{run_scenario_with, ScenarioConfig, SimError};
use dposim_core::sweep::{fig3_grid, fig4_grid, run_sweep, SweepGrid, DEFAULT_SEEDS};

pub const OUT_DIR_ENV: &str = "DPOSIM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "out";
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{failed} of {total} sweep runs failed; first error: {first}")]
    SweepRuns {
        failed: usize,
        total: usize,
        first: String,
    },
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Config(ConfigError::Invalid(e))
    }
}

impl CliError {
    /// 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Command-line values layered over a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub gen: Option<String>,
    pub collusion: Option<f64>,
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub max_rounds: Option<u64>,
    pub threshold: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, file: &mut ConfigFile) {
        let s = &mut file.scenario;
        if self.preset.is_some() {
            s.preset.clone_from(&self.preset);
        }
        if self.gen.is_some() {
            s.gen.clone_from(&self.gen);
        }
        s.collusion = self.collusion.or(s.collusion);
        s.seed = self.seed.or(s.seed);
        s.max_rounds = self.max_rounds.or(s.max_rounds);
        s.threshold = self.threshold.or(s.threshold);
        if self.model.is_some() {
            file.reputation.model.clone_from(&self.model);
        }
    }
}

pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<ConfigFile, CliError> {
    let mut file = match path {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    overrides.apply(&mut file);
    Ok(file)
}

/// Accepts `3`, `1,2,7` and inclusive ranges `1-5`, in any combination.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, SimError> {
    let bad = |part: &str| SimError::invalid("seeds", format!("cannot parse `{part}`"));
    let mut seeds = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad(part))?;
                let b: u64 = b.trim().parse().map_err(|_| bad(part))?;
                if a > b {
                    return Err(bad(part));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    if seeds.is_empty() {
        return Err(SimError::invalid("seeds", "seed list is empty"));
    }
    Ok(seeds)
}

#[derive(Debug, Clone, Serialize)]
pub struct UeSampling {
    pub preset: Preset,
    pub preset_ues: u32,
    pub simulated_ues: u32,
}

/// Everything needed to repeat a command. Contains no timestamps.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// Fully resolved scenario; for sweeps, the template every cell starts from.
    pub config: ScenarioConfig,
    pub seeds: Vec<u64>,
    pub grid: Option<SweepGrid>,
    /// Presets whose UE population was capped; message sizes stay at preset values.
    pub ue_sampling: Vec<UeSampling>,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    fn new(command: &str, config: &ScenarioConfig, seeds: Vec<u64>, grid: Option<SweepGrid>) -> Self {
        let presets: Vec<Preset> = match &grid {
            Some(g) => g.presets.clone(),
            None => vec![config.preset],
        };
        let ue_sampling = presets
            .into_iter()
            .filter_map(|p| {
                let mut c = config.clone();
                if c.preset != p {
                    c.scale = p.params();
                }
                let simulated = c.simulated_ues();
                (simulated < c.scale.ues).then_some(UeSampling {
                    preset: p,
                    preset_ues: c.scale.ues,
                    simulated_ues: simulated,
                })
            })
            .collect();
        RunManifest {
            command: command.into(),
            tool_version: TOOL_VERSION.into(),
            config: config.clone(),
            seeds,
            grid,
            ue_sampling,
            artifacts: Vec::new(),
        }
    }
}

struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|source| CliError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        self.written.push(name.into());
        Ok(path)
    }

    fn read(&self, name: &str) -> Result<Vec<u8>, CliError> {
        let path = self.root.join(name);
        fs::read(&path).map_err(|source| CliError::Io { path, source })
    }

    fn finish(mut self, mut manifest: RunManifest, name: &str) -> Result<Vec<PathBuf>, CliError> {
        manifest.artifacts = self.written.clone();
        manifest.artifacts.push(name.into());
        let json = serde_json::to_string_pretty(&manifest)? + "\n";
        self.write(name, json.as_bytes())?;
        Ok(self.written.iter().map(|n| self.root.join(n)).collect())
    }
}

fn csv_bytes<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_csv_with_header(rows, header, &mut buf)?;
    Ok(buf)
}

fn sweep_failures(res: &dposim_core::sweep::SweepResult) -> Result<(), CliError> {
    let failed: Vec<_> = res.errors().collect();
    match failed.first() {
        None => Ok(()),
        Some(first) => Err(CliError::SweepRuns {
            failed: failed.len(),
            total: res.runs.len(),
            first: first.outcome.clone().unwrap_err(),
        }),
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub config: ScenarioConfig,
    pub detection: DetectionRow,
    pub files: Vec<PathBuf>,
}

/// Runs one scenario and writes `rounds.csv`, `detection.csv` and
/// `run_manifest.json`.
pub fn cmd_run(file: &ConfigFile, out: &Path) -> Result<RunSummary, CliError> {
    let cfg = file.resolve()?;
    let outcome = run_scenario_with(&cfg, ExecMode::default())?;
    let mut dir = OutDir::create(out)?;
    let rows: Vec<RoundRow> = outcome.rounds.iter().map(RoundRow::from).collect();
    dir.write("rounds.csv", &csv_bytes(&rows, ROUND_HEADER)?)?;
    let detection = DetectionRow::new(&cfg, &outcome);
    let mut buf = Vec::new();
    write_csv(std::slice::from_ref(&detection), &mut buf)?;
    dir.write("detection.csv", &buf)?;
    let manifest = RunManifest::new("run", &cfg, vec![cfg.seed], None);
    let files = dir.finish(manifest, "run_manifest.json")?;
    Ok(RunSummary {
        config: cfg,
        detection,
        files,
    })
}

#[derive(Debug, Clone)]
pub struct Fig3Output {
    pub rows: Vec<Fig3Row>,
    pub files: Vec<PathBuf>,
}

/// Full 36-cell sweep: `fig3.csv`, one `fig3_<preset>.svg` per preset and
/// `fig3_manifest.json`. Plots are drawn from the CSV as written. Failed
/// runs leave empty cells and turn into an error once all files are out.
pub fn cmd_sweep_fig3(file: &ConfigFile, seeds: &[u64], out: &Path, mode: ExecMode) -> Result<Fig3Output, CliError> {
    let base = file.resolve()?;
    let grid = fig3_grid(base.clone());
    let res = run_sweep(&grid, seeds, mode)?;
    let mut dir = OutDir::create(out)?;
    dir.write("fig3.csv", &csv_bytes(&fig3_rows(&res), FIG3_HEADER)?)?;
    let rows: Vec<Fig3Row> = read_csv(dir.read("fig3.csv")?.as_slice())?;
    for preset in &grid.presets {
        let svg = fig3_svg(&rows, preset.name());
        dir.write(&format!("fig3_{}.svg", preset.name()), svg.as_bytes())?;
    }
    let manifest = RunManifest::new("sweep-fig3", &base, seeds.to_vec(), Some(grid));
    let files = dir.finish(manifest, "fig3_manifest.json")?;
    sweep_failures(&res)?;
    Ok(Fig3Output { rows, files })
}

#[derive(Debug, Clone)]
pub struct Fig4Output {
    pub rows: Vec<Fig4Row>,
    pub summaries: Vec<Fig4Summary>,
    pub files: Vec<PathBuf>,
}

/// Engine comparison under the oscillating adversary: `fig4.csv`,
/// `fig4_summary.csv`, `fig4_seed<N>.svg` per seed and `fig4_manifest.json`.
/// Unless configured otherwise it runs on the small preset over 6G.
pub fn cmd_sweep_fig4(file: &ConfigFile, seeds: &[u64], out: &Path, mode: ExecMode) -> Result<Fig4Output, CliError> {
    let mut file = file.clone();
    if file.scenario.gen.is_none() {
        file.scenario.gen = Some("6g".into());
    }
    let base = file.resolve()?;
    let mut grid = fig4_grid(base.clone());
    if let Some(c) = file.scenario.collusion {
        grid.collusion = vec![c];
    }
    let res = run_sweep(&grid, seeds, mode)?;
    let mut dir = OutDir::create(out)?;
    dir.write("fig4.csv", &csv_bytes(&fig4_rows(&res), FIG4_HEADER)?)?;
    let mut buf = Vec::new();
    write_csv(&fig4_summaries(&res, base.threshold), &mut buf)?;
    dir.write("fig4_summary.csv", &buf)?;

    let rows: Vec<Fig4Row> = read_csv(dir.read("fig4.csv")?.as_slice())?;
    let summaries: Vec<Fig4Summary> = read_csv(dir.read("fig4_summary.csv")?.as_slice())?;
    for seed in seeds {
        let threshold = summaries
            .iter()
            .find(|s| s.seed == *seed)
            .map_or(base.threshold, |s| s.threshold);
        dir.write(&format!("fig4_seed{seed}.svg"), fig4_svg(&rows, *seed, threshold).as_bytes())?;
    }
    let manifest = RunManifest::new("sweep-fig4", &base, seeds.to_vec(), Some(grid));
    let files = dir.finish(manifest, "fig4_manifest.json")?;
    sweep_failures(&res)?;
    Ok(Fig4Output {
        rows,
        summaries,
        files,
    })
}

/// Table of preset parameters.
pub fn cmd_presets() -> String {
    let mut out = String::from(
        "preset  miners    ues  active  types  hops  rsu_records   vote_B  block_B  rep_block_B  contract_B\n",
    );
    for p in Preset::ALL {
        let s = p.params();
        out.push_str(&format!(
            "{:<7} {:>6} {:>6} {:>7} {:>6} {:>5} {:>12} {:>8} {:>8} {:>12} {:>11}\n",
            p.name(),
            s.miners,
            s.ues,
            s.active_miners,
            s.verifier_types,
            s.max_hops,
            format!("{}-{}", s.rsu_records.0, s.rsu_records.1),
            s.vote_bytes,
            s.data_block_bytes,
            s.reputation_block_bytes,
            s.contract_bytes,
        ));
    }
    out
}

pub fn default_seeds() -> Vec<u64> {
    DEFAULT_SEEDS.to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_specs() {
        assert_eq!(parse_seeds("1-5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_seeds("7, 3,10-11").unwrap(), vec![7, 3, 10, 11]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("5-1").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn overrides_win_over_file() {
        let mut file = ConfigFile::parse("[scenario]\ncollusion = 0.25\nseed = 9\n").unwrap();
        Overrides {
            collusion: Some(0.5),
            ..Default::default()
        }
        .apply(&mut file);
        let cfg = file.resolve().unwrap();
        assert_eq!((cfg.collusion, cfg.seed), (0.5, 9));
    }

    #[test]
    fn presets_table_lists_all() {
        let t = cmd_presets();
        assert_eq!(t.lines().count(), 5);
        assert!(t.contains("vlarge"));
    }
}
