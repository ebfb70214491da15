//! CSV output. Every file opens with one `#` line naming the software
//! version, the configuration hash and the master seed.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identity stamped on every output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_hash: String,
    pub master_seed: u64,
}

impl Provenance {
    pub fn header_line(&self) -> String {
        format!(
            "# cgqmc {VERSION} config_hash={} master_seed={}",
            self.config_hash, self.master_seed
        )
    }
}

/// Writes `rows` to `path` as CSV below the provenance line.
pub fn write_csv<T: Serialize>(path: &Path, provenance: &Provenance, rows: &[T]) -> LabResult<PathBuf> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| LabError::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{}", provenance.header_line()).map_err(|e| LabError::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))?;
    Ok(path.to_path_buf())
}

/// Reads a CSV written by [`write_csv`], skipping comment lines.
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> LabResult<Vec<T>> {
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    r.deserialize().map(|row| row.map_err(LabError::from)).collect()
}

/// The provenance line of an existing output file, if present.
pub fn read_provenance(path: &Path) -> LabResult<Option<Provenance>> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let Some(first) = text.lines().next() else {
        return Ok(None);
    };
    let mut hash = None;
    let mut seed = None;
    for token in first.trim_start_matches('#').split_whitespace() {
        if let Some(v) = token.strip_prefix("config_hash=") {
            hash = Some(v.to_string());
        } else if let Some(v) = token.strip_prefix("master_seed=") {
            seed = v.parse().ok();
        }
    }
    Ok(hash.zip(seed).map(|(config_hash, master_seed)| Provenance {
        config_hash,
        master_seed,
    }))
}

/// One `(instance, strategy, q, T)` spectral result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub instance_id: String,
    pub n: usize,
    pub strategy: String,
    /// Group size; empty for strategies without groups.
    pub q: String,
    pub n_g: usize,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub delta: Option<f64>,
    pub delta_err: Option<f64>,
    pub asymmetry: Option<f64>,
    pub n_samples: usize,
    pub reducible: bool,
    pub error: String,
}

/// Ensemble statistics of the gap at one `(strategy, q, n, T)`.
///
/// `q = "sqrt"` rows are interpolated at `q = sqrt(n)` from the bracketing sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: String,
    pub q: String,
    pub n: usize,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub n_instances: usize,
    pub n_failed: usize,
    pub n_reducible: usize,
    pub delta_mean: Option<f64>,
    pub delta_err: Option<f64>,
    pub delta_geomean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub strategy: String,
    pub q: String,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub n_points: usize,
    pub a: f64,
    pub a_err: f64,
    pub k: f64,
    pub k_err: f64,
    pub weighted: bool,
    /// Ratio of the best classical `k` to this `k`; empty for classical strategies.
    #[serde(rename = "k_QEF")]
    pub k_qef: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRow {
    pub instance_id: String,
    pub n: usize,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub ground_energy: f64,
    pub ground_state: String,
    pub log_partition_function: f64,
    pub boltzmann_magnetisation: f64,
    pub boltzmann_energy: f64,
    pub min_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub instance_id: String,
    pub rank: usize,
    pub index: u64,
    pub state: String,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummaryRow {
    pub instance_id: String,
    pub strategy: String,
    pub q: String,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub chain: usize,
    pub seed: u64,
    pub steps: u64,
    pub initial_state: String,
    pub acceptance_rate: Option<f64>,
    pub best_energy: Option<f64>,
    pub best_state: String,
    pub found_ground_state_at: Option<u64>,
    pub final_cumulative_magnetisation: Option<f64>,
    pub final_cumulative_energy: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeRow {
    pub instance_id: String,
    pub strategy: String,
    pub q: String,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub chain: usize,
    pub step: u64,
    pub cumulative_magnetisation: f64,
    pub cumulative_energy: f64,
}

/// Average over chains of the cumulative curves, at one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub instance_id: String,
    pub strategy: String,
    pub q: String,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub step: u64,
    pub chains: usize,
    pub cumulative_magnetisation_mean: f64,
    pub cumulative_magnetisation_err: f64,
    pub cumulative_energy_mean: f64,
    pub cumulative_energy_err: f64,
    pub exact_magnetisation: Option<f64>,
    pub exact_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateRow {
    pub instance_id: String,
    pub strategy: String,
    pub q: String,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub steps: u64,
    pub chains: usize,
    pub found: usize,
    pub ground_energy: f64,
    pub mean_first_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: u64,
    pub state: String,
    pub energy: f64,
    pub magnetisation: f64,
    pub proposed_hamming: usize,
    pub proposed_delta_e: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingRow {
    pub instance_id: String,
    pub strategy: String,
    pub q: String,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub distance: usize,
    pub count: u64,
    pub fraction: f64,
    pub cdf: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyQuantileRow {
    pub instance_id: String,
    pub strategy: String,
    pub q: String,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub probability: f64,
    pub abs_delta_e: f64,
}
