use std::fs;
use std::path::{Path, PathBuf};

use cgqmc_core::ising::generate_instance;
use cgqmc_core::seed::{derive_seed, PathPart};
use cgqmc_core::{IsingInstance, ModelClass};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{LabError, LabResult};
use crate::instance_io::{read_instance, write_instance};
use crate::output::Provenance;
use crate::{chains, sweep};

/// Files written by a run and the number of failed cells.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub failed_cells: usize,
}

/// Seed of the `index`-th generated instance of size `n`.
pub fn instance_seed(master: u64, n: usize, index: usize) -> u64 {
    derive_seed(master, &[PathPart::Str("instance"), PathPart::Int(n as u64), PathPart::Int(index as u64)])
}

pub fn generate_instances(master: u64, n: usize, class: ModelClass, count: usize) -> LabResult<Vec<IsingInstance>> {
    (0..count)
        .map(|i| Ok(generate_instance(n, class, instance_seed(master, n, i))?))
        .collect()
}

pub fn load_instances(config: &ExperimentConfig) -> LabResult<Vec<IsingInstance>> {
    let src = &config.instances;
    if !src.files.is_empty() {
        return src.files.iter().map(|p| read_instance(p)).collect();
    }
    let class = src.model_class()?;
    let mut out = Vec::new();
    for &n in &src.n {
        out.extend(generate_instances(config.master_seed, n, class, src.count_for(n))?);
    }
    Ok(out)
}

pub fn provenance(config: &ExperimentConfig) -> Provenance {
    Provenance {
        config_hash: config.hash(),
        master_seed: config.master_seed,
    }
}

fn thread_pool(workers: usize) -> LabResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| LabError::Config(format!("cannot start {workers} workers: {e}")))
}

/// Runs an experiment into `out`: archives the configuration and the
/// instances, then writes the result tables. `workers = 0` uses all cores.
pub fn run_experiment(config: &ExperimentConfig, out: &Path, workers: usize) -> LabResult<RunReport> {
    config.validate()?;
    fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    let archived = out.join("config.toml");
    fs::write(&archived, config.to_toml()).map_err(|e| LabError::io(&archived, e))?;
    let instances = load_instances(config)?;
    for inst in &instances {
        write_instance(&out.join("instances"), inst)?;
    }
    let prov = provenance(config);
    log::info!(
        "{} with {} instances, config hash {}",
        config.kind.as_str(),
        instances.len(),
        &prov.config_hash[..16]
    );
    let pool = thread_pool(workers)?;
    let mut report = pool.install(|| match config.kind {
        ExperimentKind::SpectralSweep | ExperimentKind::TemperatureSweep => {
            sweep::run(config, &instances, out, &prov)
        }
        ExperimentKind::ChainEnsemble => chains::run_ensemble(config, &instances, out, &prov),
        ExperimentKind::ProposalStatistics => chains::run_proposal_statistics(config, &instances, out, &prov),
    })?;
    report.files.insert(0, archived);
    Ok(report)
}
