//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{EmulatorModeName, ExperimentConfig, ExperimentKind};
use crate::error::{LabError, LabResult};
use crate::instance_io::write_instance;
use crate::output::{read_csv, read_provenance, write_csv, Provenance, SummaryRow};
use crate::presets::{preset, Preset, Scale};
use crate::runner::{generate_instances, run_experiment, RunReport};
use crate::sweep::fit_summary;

#[derive(Debug, Parser)]
#[command(name = "cgqmc", version, about = "Coarse-grained quantum-enhanced MCMC laboratory")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, global = true, value_enum)]
    pub emulator_mode: Option<ModeArg>,
    #[arg(long, global = true)]
    pub trotter_slices: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Trotter,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write random instance files.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "fully_connected")]
        class: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Spectral gaps per instance, strategy and temperature, with scaling fits.
    SpectralSweep,
    /// Spectral gaps over a temperature grid.
    TemperatureSweep,
    /// Markov chain ensembles with convergence summaries.
    ChainEnsemble,
    /// Distributions of proposed Hamming distances and energy differences.
    ProposalStats,
    /// Refit the scaling law from a spectral summary table.
    Fit {
        /// A `spectral_summary.csv` file.
        #[arg(long)]
        input: PathBuf,
    },
    /// Run a named preset.
    Reproduce {
        #[arg(value_parser = clap::value_parser!(PresetArg))]
        preset: PresetArg,
        #[arg(long, default_value = "desk", value_parser = ["desk", "paper"])]
        scale: String,
        /// Only write the preset configuration, do not run it.
        #[arg(long)]
        config_only: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresetArg(pub Preset);

impl std::str::FromStr for PresetArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(PresetArg)
    }
}

fn out_dir(global: &GlobalArgs) -> PathBuf {
    global.out.clone().unwrap_or_else(|| PathBuf::from("results"))
}

/// Applies command-line overrides to a configuration.
pub fn apply_overrides(mut config: ExperimentConfig, global: &GlobalArgs) -> LabResult<ExperimentConfig> {
    if let Some(seed) = global.seed {
        config.master_seed = seed;
    }
    if let Some(mode) = global.emulator_mode {
        config.emulator.mode = match mode {
            ModeArg::Exact => EmulatorModeName::Exact,
            ModeArg::Trotter => EmulatorModeName::Trotter,
        };
    }
    if let Some(slices) = global.trotter_slices {
        config.emulator.trotter_slices = Some(slices);
    }
    config.validate()?;
    Ok(config)
}

fn load_config(global: &GlobalArgs, expected: ExperimentKind) -> LabResult<ExperimentConfig> {
    let path = global
        .config
        .as_deref()
        .ok_or_else(|| LabError::Config("--config is required".into()))?;
    let mut config = ExperimentConfig::load(path)?;
    match (config.kind, expected) {
        (a, b) if a == b => {}
        (ExperimentKind::SpectralSweep, ExperimentKind::TemperatureSweep)
        | (ExperimentKind::TemperatureSweep, ExperimentKind::SpectralSweep) => config.kind = expected,
        (a, b) => {
            return Err(LabError::Config(format!(
                "configuration is a {} experiment, the command runs {}",
                a.as_str(),
                b.as_str()
            )))
        }
    }
    apply_overrides(config, global)
}

fn finish(report: RunReport) -> LabResult<RunReport> {
    for f in &report.files {
        log::info!("wrote {}", f.display());
    }
    if report.failed_cells > 0 {
        return Err(LabError::PartialFailure(report.failed_cells));
    }
    Ok(report)
}

pub fn refit(input: &Path, out: &Path) -> LabResult<PathBuf> {
    let summary: Vec<SummaryRow> = read_csv(input)?;
    let provenance = read_provenance(input)?.unwrap_or(Provenance {
        config_hash: "unknown".into(),
        master_seed: 0,
    });
    write_csv(&out.join("fit.csv"), &provenance, &fit_summary(&summary))
}

pub fn run(cli: Cli) -> LabResult<RunReport> {
    let g = &cli.global;
    let out = out_dir(g);
    match cli.command {
        Command::Generate { n, class, count } => {
            let class = class.parse().map_err(|e: cgqmc_core::Error| LabError::Config(e.to_string()))?;
            if n < 2 {
                return Err(LabError::Config("generated instances need n >= 2".into()));
            }
            let seed = g.seed.unwrap_or(0);
            let mut report = RunReport::default();
            for inst in generate_instances(seed, n, class, count)? {
                report.files.push(write_instance(&out, &inst)?);
            }
            finish(report)
        }
        Command::SpectralSweep => finish(run_experiment(&load_config(g, ExperimentKind::SpectralSweep)?, &out, g.workers)?),
        Command::TemperatureSweep => {
            finish(run_experiment(&load_config(g, ExperimentKind::TemperatureSweep)?, &out, g.workers)?)
        }
        Command::ChainEnsemble => finish(run_experiment(&load_config(g, ExperimentKind::ChainEnsemble)?, &out, g.workers)?),
        Command::ProposalStats => {
            finish(run_experiment(&load_config(g, ExperimentKind::ProposalStatistics)?, &out, g.workers)?)
        }
        Command::Fit { input } => {
            let path = refit(&input, &out)?;
            finish(RunReport {
                files: vec![path],
                failed_cells: 0,
            })
        }
        Command::Reproduce {
            preset: PresetArg(p),
            scale,
            config_only,
        } => {
            let scale: Scale = scale.parse().map_err(LabError::Config)?;
            let config = apply_overrides(preset(p, scale), g)?;
            if config_only {
                std::fs::create_dir_all(&out).map_err(|e| LabError::io(&out, e))?;
                let path = out.join("config.toml");
                std::fs::write(&path, config.to_toml()).map_err(|e| LabError::io(&path, e))?;
                return finish(RunReport {
                    files: vec![path],
                    failed_cells: 0,
                });
            }
            finish(run_experiment(&config, &out, g.workers)?)
        }
    }
}
