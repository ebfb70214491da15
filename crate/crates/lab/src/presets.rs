//! Named experiment presets at desk and paper scale.

use std::fmt;
use std::str::FromStr;

use cgqmc_core::StrategyKind;

use crate::config::{
    ChainConfig, EmulatorConfig, ExperimentConfig, ExperimentKind, GroupSize, InstanceSource, LogGrid, SpectralConfig,
    StrategySpec, Temperatures,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Gap against temperature at n = 9.
    Fig2,
    /// Gap against system size at T = 1.
    Fig3,
    /// Chain convergence on a 25-spin instance.
    Fig1TwentyFive,
    /// Hamming and energy-difference distributions of proposals at n = 9.
    Fig5,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig2, Preset::Fig3, Preset::Fig1TwentyFive, Preset::Fig5];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig1TwentyFive => "fig1-25spin",
            Preset::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown preset \"{s}\""))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Desk,
    Paper,
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            _ => Err(format!("unknown scale \"{s}\"")),
        }
    }
}

pub const DEFAULT_MASTER_SEED: u64 = 20240601;

fn strategy(kind: StrategyKind, g: Option<GroupSize>) -> StrategySpec {
    StrategySpec::new(kind, g)
}

fn classical_and_full() -> Vec<StrategySpec> {
    vec![
        strategy(StrategyKind::Uniform, None),
        strategy(StrategyKind::LocalFlip, None),
        strategy(StrategyKind::QemcmcFull, None),
    ]
}

fn instances(n: Vec<usize>, count: usize) -> InstanceSource {
    InstanceSource {
        files: Vec::new(),
        model_class: "fully_connected".into(),
        n,
        count,
        count_overrides: Vec::new(),
    }
}

pub fn preset(p: Preset, scale: Scale) -> ExperimentConfig {
    let paper = scale == Scale::Paper;
    match p {
        Preset::Fig2 => {
            let mut strategies = classical_and_full();
            let three = Some(GroupSize::Fixed(3));
            strategies.push(strategy(StrategyKind::CgImprovedLocalGroup, three));
            strategies.push(strategy(StrategyKind::CgMultipleGroups, three));
            ExperimentConfig {
                kind: ExperimentKind::TemperatureSweep,
                master_seed: DEFAULT_MASTER_SEED,
                instances: instances(vec![9], if paper { 100 } else { 20 }),
                strategies,
                temperatures: Temperatures {
                    values: Vec::new(),
                    log_grid: Some(LogGrid {
                        min: 0.1,
                        max: 10.0,
                        points: if paper { 13 } else { 5 },
                    }),
                },
                emulator: EmulatorConfig::default(),
                spectral: SpectralConfig::default(),
                chain: ChainConfig::default(),
            }
        }
        Preset::Fig3 => {
            let mut strategies = classical_and_full();
            for kind in [
                StrategyKind::CgNaiveLocalGroup,
                StrategyKind::CgImprovedLocalGroup,
                StrategyKind::CgMultipleGroups,
            ] {
                strategies.push(strategy(kind, Some(GroupSize::Sqrt)));
            }
            let mut inst = instances(
                if paper { (4..=10).collect() } else { (4..=9).collect() },
                if paper { 500 } else { 50 },
            );
            if paper {
                inst.count_overrides = vec![(9, 50), (10, 50)];
            }
            ExperimentConfig {
                kind: ExperimentKind::SpectralSweep,
                master_seed: DEFAULT_MASTER_SEED,
                instances: inst,
                strategies,
                temperatures: Temperatures::single(1.0),
                emulator: EmulatorConfig::default(),
                spectral: SpectralConfig::default(),
                chain: ChainConfig::default(),
            }
        }
        Preset::Fig1TwentyFive => ExperimentConfig {
            kind: ExperimentKind::ChainEnsemble,
            master_seed: DEFAULT_MASTER_SEED,
            instances: instances(if paper { vec![16, 25, 36] } else { vec![25] }, 1),
            strategies: vec![
                strategy(StrategyKind::Uniform, None),
                strategy(StrategyKind::LocalFlip, None),
                strategy(StrategyKind::CgImprovedLocalGroup, Some(GroupSize::Sqrt)),
                strategy(StrategyKind::CgMultipleGroups, Some(GroupSize::Sqrt)),
            ],
            temperatures: Temperatures {
                values: if paper { vec![0.1, 1.0] } else { vec![1.0] },
                log_grid: None,
            },
            emulator: EmulatorConfig::default(),
            spectral: SpectralConfig::default(),
            chain: ChainConfig {
                steps: 10_000,
                classical_steps: Some(100_000),
                chains: 10,
                output_stride: 10,
                ..ChainConfig::default()
            },
        },
        Preset::Fig5 => {
            let mut strategies = classical_and_full();
            let three = Some(GroupSize::Fixed(3));
            for kind in [
                StrategyKind::CgNaiveLocalGroup,
                StrategyKind::CgImprovedLocalGroup,
                StrategyKind::CgMultipleGroups,
            ] {
                strategies.push(strategy(kind, three));
            }
            ExperimentConfig {
                kind: ExperimentKind::ProposalStatistics,
                master_seed: DEFAULT_MASTER_SEED,
                instances: instances(vec![9], 1),
                strategies,
                temperatures: Temperatures::single(1.0),
                emulator: EmulatorConfig::default(),
                spectral: SpectralConfig::default(),
                chain: ChainConfig {
                    steps: if paper { 100_000 } else { 10_000 },
                    classical_steps: None,
                    chains: 1,
                    ..ChainConfig::default()
                },
            }
        }
    }
}
