//! Chain ensembles and proposal statistics.

use std::collections::BTreeMap;
use std::path::Path;

use cgqmc_core::ising::{exact_distribution_with, ExactOptions};
use cgqmc_core::mcmc::{run_chain_observed, summarize as summarize_chain, InitialState, TraceOptions};
use cgqmc_core::seed::{derive_seed, PathPart};
use cgqmc_core::spectral::mean_and_standard_error;
use cgqmc_core::{IsingInstance, SpinState, StrategyKind};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::output::{
    write_csv, ChainSummaryRow, CumulativeRow, EnergyQuantileRow, EnsembleRow, ExactRow, GroundStateRow,
    HammingRow, LevelRow, Provenance, TraceRow,
};
use crate::runner::RunReport;

#[derive(Debug, Clone, Copy)]
struct Cell {
    instance: usize,
    kind: StrategyKind,
    q: Option<usize>,
    temp: usize,
    chain: usize,
}

fn cells(config: &ExperimentConfig, instances: &[IsingInstance], temps: usize) -> LabResult<Vec<Cell>> {
    let mut out = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        for spec in &config.strategies {
            let kind = spec.kind()?;
            let q = spec.group_size.map(|g| g.chain_size(inst.n()));
            for temp in 0..temps {
                for chain in 0..config.chain.chains {
                    out.push(Cell {
                        instance: i,
                        kind,
                        q,
                        temp,
                        chain,
                    });
                }
            }
        }
    }
    Ok(out)
}

pub fn chain_steps(config: &ExperimentConfig, kind: StrategyKind) -> u64 {
    if kind.is_quantum() {
        config.chain.steps
    } else {
        config.chain.classical_steps.unwrap_or(config.chain.steps)
    }
}

fn chain_seed(master: u64, instance: &IsingInstance, cell: &Cell) -> u64 {
    derive_seed(
        master,
        &[
            PathPart::Str("chain"),
            PathPart::Str(instance.instance_id()),
            PathPart::Str(cell.kind.as_str()),
            PathPart::Int(cell.q.unwrap_or(0) as u64),
            PathPart::Int(cell.temp as u64),
            PathPart::Int(cell.chain as u64),
        ],
    )
}

fn initial_state(config: &ExperimentConfig, n: usize) -> LabResult<InitialState> {
    match &config.chain.initial_state {
        None => Ok(InitialState::Random),
        Some(bits) => {
            let s = SpinState::from_bitstring(bits).map_err(|e| LabError::Config(e.to_string()))?;
            if s.len() != n {
                return Err(LabError::Config(format!(
                    "initial state has {} spins, the instance has {n}",
                    s.len()
                )));
            }
            Ok(InitialState::Fixed(s))
        }
    }
}

fn q_label(q: Option<usize>) -> String {
    q.map(|q| q.to_string()).unwrap_or_default()
}

/// Steps at which cumulative curves are reported: 1, every `stride`, and the last.
pub fn reported_steps(steps: u64, stride: u64) -> Vec<u64> {
    let stride = stride.max(1);
    let mut out = vec![1];
    out.extend((1..=steps / stride).map(|k| k * stride).filter(|&s| s > 1));
    if *out.last().unwrap() != steps {
        out.push(steps);
    }
    out
}

struct ChainOutcome {
    summary: ChainSummaryRow,
    cumulative: Vec<CumulativeRow>,
    trace: Vec<TraceRow>,
    hamming: Vec<u64>,
    abs_delta_e: Vec<f64>,
}

fn run_cell(
    config: &ExperimentConfig,
    instance: &IsingInstance,
    cell: &Cell,
    temperature: f64,
    ground: Option<f64>,
    keep_proposals: bool,
) -> ChainOutcome {
    let steps = chain_steps(config, cell.kind);
    let seed = chain_seed(config.master_seed, instance, cell);
    let mut summary = ChainSummaryRow {
        instance_id: instance.instance_id().to_string(),
        strategy: cell.kind.as_str().to_string(),
        q: q_label(cell.q),
        temperature,
        chain: cell.chain,
        seed,
        steps,
        initial_state: String::new(),
        acceptance_rate: None,
        best_energy: None,
        best_state: String::new(),
        found_ground_state_at: None,
        final_cumulative_magnetisation: None,
        final_cumulative_energy: None,
        error: String::new(),
    };
    let mut outcome = ChainOutcome {
        summary: summary.clone(),
        cumulative: Vec::new(),
        trace: Vec::new(),
        hamming: Vec::new(),
        abs_delta_e: Vec::new(),
    };
    let write_traces = config.chain.write_traces;
    let result = (|| -> LabResult<_> {
        let strategy = config.strategy(
            &crate::config::StrategySpec::new(cell.kind, cell.q.map(crate::config::GroupSize::Fixed)),
            cell.q,
        )?;
        let initial = initial_state(config, instance.n())?;
        let options = TraceOptions {
            full_record_cap: if write_traces { config.chain.record_cap } else { 0 },
            snapshot_stride: usize::MAX,
        };
        let mut trace_rows = Vec::new();
        let trace = run_chain_observed(instance, &strategy, temperature, steps, seed, &initial, &options, |r| {
            if write_traces {
                trace_rows.push(TraceRow {
                    step: r.step,
                    state: r.state.bitstring(),
                    energy: r.energy,
                    magnetisation: r.magnetisation,
                    proposed_hamming: r.proposed_hamming,
                    proposed_delta_e: r.proposed_delta_e,
                    accepted: r.accepted,
                });
            }
        })?;
        Ok((trace, trace_rows))
    })();
    match result {
        Ok((trace, trace_rows)) => {
            let s = summarize_chain(&trace, ground);
            summary.initial_state = trace.initial_state.bitstring();
            summary.acceptance_rate = Some(s.acceptance_rate);
            summary.best_energy = Some(s.best_energy);
            summary.best_state = trace.best_state.bitstring();
            summary.found_ground_state_at = s.found_ground_state_at;
            summary.final_cumulative_magnetisation = s.cumulative_magnetisation.last().copied();
            summary.final_cumulative_energy = s.cumulative_energy.last().copied();
            outcome.cumulative = reported_steps(steps, config.chain.output_stride)
                .into_iter()
                .map(|step| CumulativeRow {
                    instance_id: summary.instance_id.clone(),
                    strategy: summary.strategy.clone(),
                    q: summary.q.clone(),
                    temperature,
                    chain: cell.chain,
                    step,
                    cumulative_magnetisation: s.cumulative_magnetisation[step as usize - 1],
                    cumulative_energy: s.cumulative_energy[step as usize - 1],
                })
                .collect();
            outcome.trace = trace_rows;
            if keep_proposals {
                outcome.hamming = trace.proposed_hamming_counts;
                outcome.abs_delta_e = trace.proposed_abs_delta_e;
            }
        }
        Err(e) => {
            log::warn!("{} {} chain {}: {e}", instance.instance_id(), cell.kind, cell.chain);
            summary.error = e.to_string();
        }
    }
    outcome.summary = summary;
    outcome
}

fn run_cells(
    config: &ExperimentConfig,
    instances: &[IsingInstance],
    temps: &[f64],
    grounds: &BTreeMap<(usize, usize), f64>,
    keep_proposals: bool,
) -> LabResult<(Vec<Cell>, Vec<ChainOutcome>)> {
    let cells = cells(config, instances, temps.len())?;
    log::info!("{} chains", cells.len());
    let outcomes = cells
        .par_iter()
        .map(|c| {
            run_cell(
                config,
                &instances[c.instance],
                c,
                temps[c.temp],
                grounds.get(&(c.instance, c.temp)).copied(),
                keep_proposals,
            )
        })
        .collect();
    Ok((cells, outcomes))
}

/// Exact rows and levels for instances within the enumeration cap.
fn exact_data(
    config: &ExperimentConfig,
    instances: &[IsingInstance],
    temps: &[f64],
) -> LabResult<(Vec<ExactRow>, Vec<LevelRow>)> {
    let mut exact = Vec::new();
    let mut levels = Vec::new();
    let options = ExactOptions {
        cap: config.chain.enumeration_cap,
        max_levels: config.chain.levels.max(1),
    };
    for inst in instances {
        if inst.n() > config.chain.enumeration_cap {
            log::info!("{}: n = {} is above the enumeration cap, no exact data", inst.instance_id(), inst.n());
            continue;
        }
        for (ti, &t) in temps.iter().enumerate() {
            let d = exact_distribution_with(inst, t, &options)?;
            if ti == 0 {
                levels.extend(d.sorted_levels.iter().take(config.chain.levels).enumerate().map(|(rank, l)| LevelRow {
                    instance_id: inst.instance_id().to_string(),
                    rank,
                    index: l.index,
                    state: SpinState::from_index(l.index, inst.n()).bitstring(),
                    energy: l.energy,
                }));
            }
            exact.push(ExactRow {
                instance_id: inst.instance_id().to_string(),
                n: inst.n(),
                temperature: t,
                ground_energy: d.ground_energy(),
                ground_state: d.ground_state().bitstring(),
                log_partition_function: d.log_partition_function,
                boltzmann_magnetisation: d.boltzmann_magnetisation,
                boltzmann_energy: d.boltzmann_energy,
                min_probability: d.min_probability(),
            });
        }
    }
    Ok((exact, levels))
}

fn trace_file_name(s: &ChainSummaryRow, temp: usize) -> String {
    let q = if s.q.is_empty() { String::new() } else { format!("_q{}", s.q) };
    format!("{}__{}{q}__T{temp}__c{}.csv", s.instance_id, s.strategy, s.chain)
}

pub fn run_ensemble(
    config: &ExperimentConfig,
    instances: &[IsingInstance],
    out: &Path,
    provenance: &Provenance,
) -> LabResult<RunReport> {
    let temps = config.temperatures.resolve();
    let (exact, levels) = exact_data(config, instances, &temps)?;
    let mut grounds = BTreeMap::new();
    let mut exact_at = BTreeMap::new();
    for (i, inst) in instances.iter().enumerate() {
        for (ti, &t) in temps.iter().enumerate() {
            if let Some(e) = exact.iter().find(|e| e.instance_id == inst.instance_id() && e.temperature == t) {
                grounds.insert((i, ti), e.ground_energy);
                exact_at.insert((i, ti), (e.boltzmann_magnetisation, e.boltzmann_energy));
            }
        }
    }
    let (cells, outcomes) = run_cells(config, instances, &temps, &grounds, false)?;

    let mut report = RunReport::default();
    let failed = outcomes.iter().filter(|o| !o.summary.error.is_empty()).count();

    // Group chains of one (instance, strategy, q, T).
    let mut groups: BTreeMap<(usize, usize, usize), Vec<usize>> = BTreeMap::new();
    let mut strategy_index = Vec::new();
    for (idx, c) in cells.iter().enumerate() {
        let key = (c.kind, c.q);
        let s = strategy_index.iter().position(|k| *k == key).unwrap_or_else(|| {
            strategy_index.push(key);
            strategy_index.len() - 1
        });
        groups.entry((c.instance, s, c.temp)).or_default().push(idx);
    }

    let mut ensemble = Vec::new();
    let mut ground_rows = Vec::new();
    for (&(i, _, ti), members) in &groups {
        let ok: Vec<&ChainOutcome> = members
            .iter()
            .map(|&m| &outcomes[m])
            .filter(|o| o.summary.error.is_empty())
            .collect();
        let Some(first) = ok.first() else { continue };
        let s = &first.summary;
        let exact_pair = exact_at.get(&(i, ti)).copied();
        for (k, row) in first.cumulative.iter().enumerate() {
            let ms: Vec<f64> = ok.iter().map(|o| o.cumulative[k].cumulative_magnetisation).collect();
            let es: Vec<f64> = ok.iter().map(|o| o.cumulative[k].cumulative_energy).collect();
            let (m_mean, m_err) = mean_and_standard_error(&ms);
            let (e_mean, e_err) = mean_and_standard_error(&es);
            ensemble.push(EnsembleRow {
                instance_id: s.instance_id.clone(),
                strategy: s.strategy.clone(),
                q: s.q.clone(),
                temperature: s.temperature,
                step: row.step,
                chains: ok.len(),
                cumulative_magnetisation_mean: m_mean,
                cumulative_magnetisation_err: m_err,
                cumulative_energy_mean: e_mean,
                cumulative_energy_err: e_err,
                exact_magnetisation: exact_pair.map(|p| p.0),
                exact_energy: exact_pair.map(|p| p.1),
            });
        }
        if let Some(&g) = grounds.get(&(i, ti)) {
            let firsts: Vec<f64> = ok
                .iter()
                .filter_map(|o| o.summary.found_ground_state_at)
                .map(|s| s as f64)
                .collect();
            ground_rows.push(GroundStateRow {
                instance_id: s.instance_id.clone(),
                strategy: s.strategy.clone(),
                q: s.q.clone(),
                temperature: s.temperature,
                steps: s.steps,
                chains: ok.len(),
                found: firsts.len(),
                ground_energy: g,
                mean_first_step: (!firsts.is_empty()).then(|| mean_and_standard_error(&firsts).0),
            });
        }
    }

    if config.chain.write_traces {
        for (c, o) in cells.iter().zip(&outcomes) {
            if o.summary.error.is_empty() {
                let path = out.join("traces").join(trace_file_name(&o.summary, c.temp));
                report.files.push(write_csv(&path, provenance, &o.trace)?);
            }
        }
    }
    let summaries: Vec<ChainSummaryRow> = outcomes.iter().map(|o| o.summary.clone()).collect();
    let cumulative: Vec<CumulativeRow> = outcomes.iter().flat_map(|o| o.cumulative.iter().cloned()).collect();
    report.files.push(write_csv(&out.join("chain_summary.csv"), provenance, &summaries)?);
    report.files.push(write_csv(&out.join("cumulative.csv"), provenance, &cumulative)?);
    report.files.push(write_csv(&out.join("ensemble.csv"), provenance, &ensemble)?);
    if !exact.is_empty() {
        report.files.push(write_csv(&out.join("exact.csv"), provenance, &exact)?);
        report.files.push(write_csv(&out.join("levels.csv"), provenance, &levels)?);
        report.files.push(write_csv(&out.join("ground_state.csv"), provenance, &ground_rows)?);
    }
    report.failed_cells = failed;
    Ok(report)
}

/// Probabilities at which `|dE|` quantiles are reported.
pub fn quantile_grid() -> Vec<f64> {
    (0..=100).map(|i| f64::from(i) / 100.0).collect()
}

pub fn run_proposal_statistics(
    config: &ExperimentConfig,
    instances: &[IsingInstance],
    out: &Path,
    provenance: &Provenance,
) -> LabResult<RunReport> {
    let temps = config.temperatures.resolve();
    let (cells, outcomes) = run_cells(config, instances, &temps, &BTreeMap::new(), true)?;
    let failed = outcomes.iter().filter(|o| !o.summary.error.is_empty()).count();

    let mut hamming_rows = Vec::new();
    let mut energy_rows = Vec::new();
    let mut i = 0;
    while i < cells.len() {
        let c = cells[i];
        let mut j = i;
        while j < cells.len() && (cells[j].instance, cells[j].kind, cells[j].q, cells[j].temp) == (c.instance, c.kind, c.q, c.temp) {
            j += 1;
        }
        let group = &outcomes[i..j];
        let inst = &instances[c.instance];
        let n = inst.n();
        let errors: Vec<&str> = group
            .iter()
            .map(|o| o.summary.error.as_str())
            .filter(|e| !e.is_empty())
            .collect();
        let mut counts = vec![0u64; n + 1];
        let mut deltas = Vec::new();
        for o in group.iter().filter(|o| o.summary.error.is_empty()) {
            for (a, b) in counts.iter_mut().zip(&o.hamming) {
                *a += b;
            }
            deltas.extend_from_slice(&o.abs_delta_e);
        }
        deltas.sort_by(f64::total_cmp);
        let total: u64 = counts.iter().sum();
        let mut cum = 0u64;
        let base = &group[0].summary;
        for (d, &count) in counts.iter().enumerate() {
            cum += count;
            let frac = |x: u64| if total == 0 { 0.0 } else { x as f64 / total as f64 };
            hamming_rows.push(HammingRow {
                instance_id: base.instance_id.clone(),
                strategy: base.strategy.clone(),
                q: base.q.clone(),
                temperature: base.temperature,
                distance: d,
                count,
                fraction: frac(count),
                cdf: frac(cum),
                error: errors.first().map(|e| e.to_string()).unwrap_or_default(),
            });
        }
        if !deltas.is_empty() {
            for p in quantile_grid() {
                let idx = ((p * deltas.len() as f64).ceil() as usize).clamp(1, deltas.len()) - 1;
                energy_rows.push(EnergyQuantileRow {
                    instance_id: base.instance_id.clone(),
                    strategy: base.strategy.clone(),
                    q: base.q.clone(),
                    temperature: base.temperature,
                    probability: p,
                    abs_delta_e: deltas[idx],
                });
            }
        }
        i = j;
    }
    let mut report = RunReport::default();
    report.files.push(write_csv(&out.join("proposal_hamming.csv"), provenance, &hamming_rows)?);
    report.files.push(write_csv(&out.join("proposal_energy.csv"), provenance, &energy_rows)?);
    report.failed_cells = failed;
    Ok(report)
}
