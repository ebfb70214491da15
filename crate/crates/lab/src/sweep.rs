//! Spectral-gap sweeps over instances, strategies, group sizes and temperatures.

use std::collections::BTreeMap;
use std::path::Path;

use cgqmc_core::ising::all_energies;
use cgqmc_core::seed::{derive_seed, PathPart};
use cgqmc_core::spectral::{
    estimate_q_bruteforce, estimate_q_rowwise, fit_scaling, gap_with_bootstrap, geometric_mean,
    interpolate_sqrt_n_gap, mean_and_standard_error, quantum_enhancement_factor, QEstimate, RowwiseOptions,
};
use cgqmc_core::{ChainRng, IsingInstance, StrategyKind};
use rand::SeedableRng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, GroupSize, MultipleEstimator};
use crate::error::LabResult;
use crate::output::{write_csv, FitRow, Provenance, SpectralRow, SummaryRow};
use crate::runner::RunReport;

pub const SQRT_LABEL: &str = "sqrt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Cell {
    instance: usize,
    kind: StrategyKind,
    q: Option<usize>,
}

fn q_label(q: Option<usize>) -> String {
    q.map(|q| q.to_string()).unwrap_or_default()
}

/// Orders `q` labels numerically, with the empty label first and `sqrt` last.
fn q_order(label: &str) -> (u8, usize) {
    match label {
        "" => (0, 0),
        SQRT_LABEL => (2, 0),
        s => (1, s.parse().unwrap_or(usize::MAX)),
    }
}

fn cells(config: &ExperimentConfig, instances: &[IsingInstance]) -> LabResult<Vec<Cell>> {
    let mut out = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        for spec in &config.strategies {
            let kind = spec.kind()?;
            let sizes = match spec.group_size {
                Some(g) => g.spectral_sizes(inst.n()).into_iter().map(Some).collect(),
                None => vec![None],
            };
            for q in sizes {
                let cell = Cell { instance: i, kind, q };
                if !out.contains(&cell) {
                    out.push(cell);
                }
            }
        }
    }
    Ok(out)
}

fn estimate(
    config: &ExperimentConfig,
    instance: &IsingInstance,
    kind: StrategyKind,
    q: Option<usize>,
    rng: &mut ChainRng,
) -> LabResult<QEstimate> {
    let strategy = config.strategy(&crate::config::StrategySpec::new(kind, q.map(GroupSize::Fixed)), q)?;
    let sc = &config.spectral;
    let keep = sc.bootstrap > 0;
    let est = if kind == StrategyKind::CgMultipleGroups && sc.multiple_estimator == MultipleEstimator::Bruteforce {
        let dim = 1usize << instance.n();
        let n_s = sc.bruteforce_samples.unwrap_or(dim * dim);
        estimate_q_bruteforce(instance, &strategy, n_s, keep, sc.cap, rng)?
    } else {
        let options = RowwiseOptions {
            samples: sc.samples_per_row,
            mode: sc.sampling_mode()?,
            keep_draws: keep,
            cap: sc.cap,
        };
        estimate_q_rowwise(instance, &strategy, &options, rng)?
    };
    Ok(est)
}

fn run_cell(config: &ExperimentConfig, instance: &IsingInstance, cell: Cell, temps: &[f64]) -> Vec<SpectralRow> {
    let n = instance.n();
    let n_g = match cell.q {
        Some(q) if cell.kind == StrategyKind::CgMultipleGroups => n.div_ceil(q),
        Some(_) => 1,
        None => 0,
    };
    let row = |t: f64| SpectralRow {
        instance_id: instance.instance_id().to_string(),
        n,
        strategy: cell.kind.as_str().to_string(),
        q: q_label(cell.q),
        n_g,
        temperature: t,
        delta: None,
        delta_err: None,
        asymmetry: None,
        n_samples: 0,
        reducible: false,
        error: String::new(),
    };
    let seed = derive_seed(
        config.master_seed,
        &[
            PathPart::Str("spectral"),
            PathPart::Str(instance.instance_id()),
            PathPart::Str(cell.kind.as_str()),
            PathPart::Int(cell.q.unwrap_or(0) as u64),
        ],
    );
    let mut rng = ChainRng::seed_from_u64(seed);
    let est = match estimate(config, instance, cell.kind, cell.q, &mut rng) {
        Ok(e) => e,
        Err(e) => {
            log::warn!("{} {}: {e}", instance.instance_id(), cell.kind);
            return temps
                .iter()
                .map(|&t| SpectralRow {
                    error: e.to_string(),
                    ..row(t)
                })
                .collect();
        }
    };
    let energies = all_energies(instance);
    let asymmetry = est.q.asymmetry();
    temps
        .iter()
        .enumerate()
        .map(|(ti, &t)| {
            let mut boot = ChainRng::seed_from_u64(derive_seed(seed, &[PathPart::Str("bootstrap"), PathPart::Int(ti as u64)]));
            match gap_with_bootstrap(&energies, &est, t, config.spectral.bootstrap, &mut boot) {
                Ok((gap, err)) => SpectralRow {
                    delta: Some(gap.delta),
                    delta_err: Some(err),
                    asymmetry: Some(asymmetry),
                    n_samples: est.n_samples,
                    reducible: gap.reducible,
                    ..row(t)
                },
                Err(e) => SpectralRow {
                    n_samples: est.n_samples,
                    error: e.to_string(),
                    ..row(t)
                },
            }
        })
        .collect()
}

/// Per-instance spectral rows, sorted by `(strategy, q, T, n)` with instances in input order.
pub fn spectral_rows(config: &ExperimentConfig, instances: &[IsingInstance]) -> LabResult<Vec<SpectralRow>> {
    let temps = config.temperatures.resolve();
    let cells = cells(config, instances)?;
    log::info!("spectral sweep: {} cells x {} temperatures", cells.len(), temps.len());
    let results: Vec<Vec<SpectralRow>> = cells
        .par_iter()
        .map(|&cell| run_cell(config, &instances[cell.instance], cell, &temps))
        .collect();
    let mut rows: Vec<SpectralRow> = results.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.strategy
            .cmp(&b.strategy)
            .then(q_order(&a.q).cmp(&q_order(&b.q)))
            .then(a.temperature.total_cmp(&b.temperature))
            .then(a.n.cmp(&b.n))
    });
    Ok(rows)
}

/// Ensemble statistics per `(strategy, q, n, T)`, plus interpolated `q = sqrt(n)`
/// rows for strategies listed with `group_size = "sqrt"`.
pub fn summarize(config: &ExperimentConfig, rows: &[SpectralRow]) -> LabResult<Vec<SummaryRow>> {
    type Key = (String, (u8, usize), String, usize, u64);
    let mut groups: BTreeMap<Key, Vec<&SpectralRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.strategy.clone(), q_order(&r.q), r.q.clone(), r.n, r.temperature.to_bits());
        groups.entry(key).or_default().push(r);
    }
    let mut out: Vec<SummaryRow> = groups
        .into_values()
        .map(|members| {
            let first = members[0];
            let deltas: Vec<f64> = members.iter().filter_map(|r| r.delta).collect();
            let has = !deltas.is_empty();
            let (mean, se) = mean_and_standard_error(&deltas);
            SummaryRow {
                strategy: first.strategy.clone(),
                q: first.q.clone(),
                n: first.n,
                temperature: first.temperature,
                n_instances: deltas.len(),
                n_failed: members.len() - deltas.len(),
                n_reducible: members.iter().filter(|r| r.reducible).count(),
                delta_mean: has.then_some(mean),
                delta_err: has.then_some(se),
                delta_geomean: has.then(|| geometric_mean(&deltas)).filter(|g| g.is_finite()),
            }
        })
        .collect();

    let mut interpolated = Vec::new();
    for spec in config.strategies.iter().filter(|s| s.group_size == Some(GroupSize::Sqrt)) {
        let kind = spec.kind()?;
        let mut by_nt: BTreeMap<(usize, u64), Vec<&SummaryRow>> = BTreeMap::new();
        for s in out.iter().filter(|s| s.strategy == kind.as_str() && !s.q.is_empty()) {
            by_nt.entry((s.n, s.temperature.to_bits())).or_default().push(s);
        }
        for ((n, t), members) in by_nt {
            let sizes = GroupSize::Sqrt.spectral_sizes(n);
            let pick: Vec<&SummaryRow> = sizes
                .iter()
                .filter_map(|q| members.iter().find(|s| s.q == q.to_string()).copied())
                .collect();
            if pick.len() != sizes.len() {
                continue;
            }
            let means: BTreeMap<usize, (f64, f64)> = sizes
                .iter()
                .zip(&pick)
                .filter_map(|(&q, s)| Some((q, (s.delta_mean?, s.delta_err?))))
                .collect();
            let geos: BTreeMap<usize, (f64, f64)> = sizes
                .iter()
                .zip(&pick)
                .filter_map(|(&q, s)| Some((q, (s.delta_geomean?, 0.0))))
                .collect();
            let mean = interpolate_sqrt_n_gap(&means, n).ok();
            let geo = interpolate_sqrt_n_gap(&geos, n).ok().map(|g| g.0);
            interpolated.push(SummaryRow {
                strategy: kind.as_str().to_string(),
                q: SQRT_LABEL.to_string(),
                n,
                temperature: f64::from_bits(t),
                n_instances: pick.iter().map(|s| s.n_instances).min().unwrap_or(0),
                n_failed: pick.iter().map(|s| s.n_failed).max().unwrap_or(0),
                n_reducible: pick.iter().map(|s| s.n_reducible).max().unwrap_or(0),
                delta_mean: mean.map(|m| m.0),
                delta_err: mean.map(|m| m.1),
                delta_geomean: geo,
            });
        }
    }
    out.extend(interpolated);
    out.sort_by(|a, b| {
        a.strategy
            .cmp(&b.strategy)
            .then(q_order(&a.q).cmp(&q_order(&b.q)))
            .then(a.temperature.total_cmp(&b.temperature))
            .then(a.n.cmp(&b.n))
    });
    Ok(out)
}

/// Strategy, q ordering key, q label and temperature bits.
type FitKey = (String, (u8, usize), String, u64);

/// Scaling fits of the ensemble-mean gap against `n`, one per `(strategy, q, T)`
/// with at least three sizes. `k_QEF` compares quantum strategies with the
/// classical strategy of smallest `k` at the same temperature.
pub fn fit_summary(summary: &[SummaryRow]) -> Vec<FitRow> {
    let mut groups: BTreeMap<FitKey, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for s in summary {
        let (Some(d), Some(e)) = (s.delta_mean, s.delta_err) else { continue };
        groups
            .entry((s.strategy.clone(), q_order(&s.q), s.q.clone(), s.temperature.to_bits()))
            .or_default()
            .push((s.n as f64, d, e));
    }
    let mut fits = Vec::new();
    for ((strategy, _, q, t), points) in groups {
        match fit_scaling(&points) {
            Ok(fit) => fits.push(FitRow {
                strategy,
                q,
                temperature: f64::from_bits(t),
                n_points: points.len(),
                a: fit.a,
                a_err: fit.a_err,
                k: fit.k,
                k_err: fit.k_err,
                weighted: fit.weighted,
                k_qef: None,
            }),
            Err(e) => log::debug!("no fit for {strategy} q={q}: {e}"),
        }
    }
    let classical = |s: &str| matches!(s.parse::<StrategyKind>(), Ok(k) if !k.is_quantum());
    let best: Vec<(u64, f64)> = fits
        .iter()
        .filter(|f| classical(&f.strategy))
        .map(|f| (f.temperature.to_bits(), f.k))
        .collect();
    for f in fits.iter_mut().filter(|f| !classical(&f.strategy)) {
        let kc = best
            .iter()
            .filter(|(t, _)| *t == f.temperature.to_bits())
            .map(|&(_, k)| k)
            .fold(None, |acc: Option<f64>, k| Some(acc.map_or(k, |a| a.min(k))));
        f.k_qef = kc.and_then(|kc| quantum_enhancement_factor(f.k, kc).ok());
    }
    fits.sort_by(|a, b| {
        a.strategy
            .cmp(&b.strategy)
            .then(q_order(&a.q).cmp(&q_order(&b.q)))
            .then(a.temperature.total_cmp(&b.temperature))
    });
    fits
}

pub fn run(
    config: &ExperimentConfig,
    instances: &[IsingInstance],
    out: &Path,
    provenance: &Provenance,
) -> LabResult<RunReport> {
    let rows = spectral_rows(config, instances)?;
    let summary = summarize(config, &rows)?;
    let fits = fit_summary(&summary);
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    let mut report = RunReport::default();
    report.files.push(write_csv(&out.join("spectral.csv"), provenance, &rows)?);
    report.files.push(write_csv(&out.join("spectral_summary.csv"), provenance, &summary)?);
    report.files.push(write_csv(&out.join("fit.csv"), provenance, &fits)?);
    report.failed_cells = failed;
    Ok(report)
}
