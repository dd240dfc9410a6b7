use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use mmwave_discovery_sim::{
    emit_results, read_codebook, run_fa_sweep, run_miss_sweep, write_codebook, EngineKind, Format,
    Result, RunOptions, Scenario, Setup, SimError,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    /// Miss probability against searched slots.
    Miss,
    /// False-alarm rate of full lag sweeps over noise.
    Fa,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Engine {
    Waveform,
    Statistic,
    Conditional,
}

/// Seeded Monte Carlo sweeps of base-station discovery.
#[derive(Debug, Parser)]
#[command(name = "mmw-sim", version)]
struct Cli {
    /// Preset name (fig3, open, half-blocked) or path to a TOML scenario.
    #[arg(long, default_value = "fig3")]
    scenario: String,
    /// Override the number of trials per point.
    #[arg(long)]
    trials: Option<u64>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; results go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutFormat,
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Use beams from a codebook JSON file instead of designing them.
    #[arg(long)]
    codebook: Option<PathBuf>,
    /// Write the scenario's codebook as JSON and exit.
    #[arg(long)]
    export_codebook: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "miss")]
    mode: Mode,
    /// Override the scenario's trial engine.
    #[arg(long, value_enum)]
    engine: Option<Engine>,
}

fn run(cli: Cli) -> Result<()> {
    let mut scenario = Scenario::load(&cli.scenario)?;
    if let Some(t) = cli.trials {
        scenario.trials = t;
    }
    if let Some(s) = cli.seed {
        scenario.seed = s;
    }
    if let Some(e) = cli.engine {
        scenario.engine = match e {
            Engine::Waveform => EngineKind::Waveform,
            Engine::Statistic => EngineKind::Statistic,
            Engine::Conditional => EngineKind::Conditional,
        };
    }
    scenario.validate()?;

    if let Some(path) = &cli.export_codebook {
        let cb = mmwave_discovery_sim::build_codebook(&scenario)?
            .ok_or_else(|| SimError::config("the random method has no fixed codebook to export"))?;
        return write_codebook(&cb, path);
    }

    let codebook = cli.codebook.as_deref().map(read_codebook).transpose()?;
    let setup = Setup::new(scenario, codebook)?;
    let opts = RunOptions { workers: cli.workers };
    let rows = match cli.mode {
        Mode::Miss => run_miss_sweep(&setup, &opts)?,
        Mode::Fa => run_fa_sweep(&setup, &opts)?,
    };
    let format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    emit_results(&rows, format, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mmw-sim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
