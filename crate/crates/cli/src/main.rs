use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dposim::{
    cmd_presets, cmd_run, cmd_sweep_fig3, cmd_sweep_fig4, default_seeds, load_config, parse_seeds, CliError,
    Overrides, DEFAULT_OUT_DIR, OUT_DIR_ENV,
};
use dposim_core::exec::ExecMode;

#[derive(Parser)]
#[command(name = "dposim", version, about = "Detection-time simulator for reputation-secured dPoS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write per-round and detection CSVs.
    Run(RunArgs),
    /// Detection time across presets, generations and collusion levels.
    SweepFig3(SweepArgs),
    /// Reputation trajectories of the three engines under an oscillating adversary.
    SweepFig4(Fig4Args),
    /// Print the preset parameter table.
    Presets,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    out: PathBuf,
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Detection threshold on the watched miner's reputation.
    #[arg(long)]
    threshold: Option<f64>,
    /// mwsl, beta or sigmoid.
    #[arg(long)]
    model: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// small, medium, large or vlarge.
    #[arg(long)]
    preset: Option<String>,
    /// 4g, 5g or 6g.
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    collusion: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Seeds, e.g. `1-5` or `1,4,9`.
    #[arg(long)]
    seeds: Option<String>,
    /// Run sweep cells one at a time.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct Fig4Args {
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    collusion: Option<f64>,
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        model: c.model.clone(),
        max_rounds: c.max_rounds,
        threshold: c.threshold,
        ..Default::default()
    }
}

fn seeds_and_mode(s: &SweepArgs) -> Result<(Vec<u64>, ExecMode), CliError> {
    let seeds = match &s.seeds {
        Some(spec) => parse_seeds(spec)?,
        None => default_seeds(),
    };
    let mode = if s.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::default()
    };
    Ok((seeds, mode))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(a) => {
            let ov = Overrides {
                preset: a.preset,
                gen: a.gen,
                collusion: a.collusion,
                seed: a.seed,
                ..overrides(&a.common)
            };
            let file = load_config(a.common.config.as_deref(), &ov)?;
            let s = cmd_run(&file, &a.common.out)?;
            let d = &s.detection;
            match (d.detection_round, d.detection_time_s) {
                (Some(r), Some(t)) => println!(
                    "detected at round {r} after {t:.6} s ({})",
                    d.criterion.as_deref().unwrap_or("")
                ),
                _ => println!("not detected within {} rounds", d.rounds_run),
            }
            for f in &s.files {
                println!("wrote {}", f.display());
            }
        }
        Command::SweepFig3(a) => {
            let file = load_config(a.common.config.as_deref(), &overrides(&a.common))?;
            let (seeds, mode) = seeds_and_mode(&a)?;
            let s = cmd_sweep_fig3(&file, &seeds, &a.common.out, mode)?;
            println!("{} rows", s.rows.len());
            for f in &s.files {
                println!("wrote {}", f.display());
            }
        }
        Command::SweepFig4(a) => {
            let ov = Overrides {
                preset: a.preset,
                gen: a.gen,
                collusion: a.collusion,
                ..overrides(&a.sweep.common)
            };
            let file = load_config(a.sweep.common.config.as_deref(), &ov)?;
            let (seeds, mode) = seeds_and_mode(&a.sweep)?;
            let s = cmd_sweep_fig4(&file, &seeds, &a.sweep.common.out, mode)?;
            for sum in &s.summaries {
                match sum.first_crossing_round {
                    Some(r) => println!("{} seed {}: below {} at round {r}", sum.engine, sum.seed, sum.threshold),
                    None => println!("{} seed {}: never below {}", sum.engine, sum.seed, sum.threshold),
                }
            }
            for f in &s.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Presets => print!("{}", cmd_presets()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
