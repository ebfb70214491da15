use std::fs;

use cgqmc::config::{ChainConfig, GroupSize, InstanceSource, LogGrid, StrategySpec, Temperatures};
use cgqmc::output::{
    read_csv, ChainSummaryRow, EnergyQuantileRow, EnsembleRow, ExactRow, GroundStateRow, HammingRow, LevelRow,
    SpectralRow, SummaryRow,
};
use cgqmc::presets::{preset, Preset, Scale};
use cgqmc::{run_experiment, ExperimentConfig};
use cgqmc_core::StrategyKind;

fn body(text: &str) -> String {
    text.lines().skip(1).collect::<Vec<_>>().join("\n")
}

fn sweep(n: Vec<usize>, count: usize, strategies: Vec<StrategySpec>, temps: Temperatures) -> ExperimentConfig {
    let mut cfg = preset(Preset::Fig3, Scale::Desk);
    cfg.master_seed = 99;
    cfg.instances = InstanceSource {
        n,
        count,
        ..cfg.instances
    };
    cfg.strategies = strategies;
    cfg.temperatures = temps;
    cfg
}

fn all_strategies() -> Vec<StrategySpec> {
    StrategyKind::ALL
        .into_iter()
        .map(|k| StrategySpec::new(k, k.is_coarse_grained().then_some(GroupSize::Sqrt)))
        .collect()
}

#[test]
fn infinite_temperature_uniform_gap_is_one() {
    let cfg = sweep(
        vec![3, 4, 5],
        2,
        vec![StrategySpec::new(StrategyKind::Uniform, None)],
        Temperatures::single(1e9),
    );
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&cfg, dir.path(), 1).unwrap();
    let rows: Vec<SpectralRow> = read_csv(&dir.path().join("spectral.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!((r.delta.unwrap() - 1.0).abs() < 1e-8, "{r:?}");
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let cfg = sweep(vec![3, 4], 2, all_strategies(), Temperatures::single(0.7));
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&cfg, a.path(), 1).unwrap();
    run_experiment(&cfg, b.path(), 3).unwrap();
    for f in ["spectral.csv", "spectral_summary.csv", "fit.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
    let summary: Vec<SummaryRow> = read_csv(&a.path().join("spectral_summary.csv")).unwrap();
    // n = 3 and 4 give interpolated rows for each grouped strategy.
    for kind in ["cg_naive_local_group", "cg_improved_local_group", "cg_multiple_groups"] {
        let sqrt: Vec<_> = summary.iter().filter(|s| s.strategy == kind && s.q == "sqrt").collect();
        assert_eq!(sqrt.len(), 2, "{kind}");
        let at4 = summary.iter().find(|s| s.strategy == kind && s.q == "2" && s.n == 4).unwrap();
        let interp = sqrt.iter().find(|s| s.n == 4).unwrap();
        assert_eq!(interp.delta_mean, at4.delta_mean);
    }
}

#[test]
fn single_point_temperature_sweep_matches_spectral_sweep() {
    let strategies = vec![
        StrategySpec::new(StrategyKind::LocalFlip, None),
        StrategySpec::new(StrategyKind::CgImprovedLocalGroup, Some(GroupSize::Fixed(2))),
    ];
    let spectral = sweep(vec![4], 2, strategies.clone(), Temperatures::single(0.5));
    let mut temperature = spectral.clone();
    temperature.kind = cgqmc::config::ExperimentKind::TemperatureSweep;
    temperature.temperatures = Temperatures {
        values: Vec::new(),
        log_grid: Some(LogGrid {
            min: 0.5,
            max: 0.5,
            points: 1,
        }),
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&spectral, a.path(), 1).unwrap();
    run_experiment(&temperature, b.path(), 1).unwrap();
    let x = fs::read_to_string(a.path().join("spectral.csv")).unwrap();
    let y = fs::read_to_string(b.path().join("spectral.csv")).unwrap();
    assert_eq!(body(&x), body(&y));
    assert_ne!(x.lines().next(), y.lines().next(), "different configs, different hashes");
}

#[test]
fn temperature_sweep_output_is_sorted() {
    let mut cfg = sweep(
        vec![4],
        2,
        vec![
            StrategySpec::new(StrategyKind::QemcmcFull, None),
            StrategySpec::new(StrategyKind::Uniform, None),
            StrategySpec::new(StrategyKind::LocalFlip, None),
        ],
        Temperatures {
            values: vec![5.0],
            log_grid: Some(LogGrid {
                min: 0.1,
                max: 10.0,
                points: 3,
            }),
        },
    );
    cfg.kind = cgqmc::config::ExperimentKind::TemperatureSweep;
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&cfg, dir.path(), 2).unwrap();
    let rows: Vec<SpectralRow> = read_csv(&dir.path().join("spectral.csv")).unwrap();
    assert_eq!(rows.len(), 3 * 4 * 2);
    let keys: Vec<(String, f64)> = rows.iter().map(|r| (r.strategy.clone(), r.temperature)).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    assert_eq!(keys, sorted);
    let summary: Vec<SummaryRow> = read_csv(&dir.path().join("spectral_summary.csv")).unwrap();
    assert_eq!(summary.len(), 12);
    assert!(summary.iter().all(|s| s.n_instances == 2 && s.delta_err.is_some()));
}

#[test]
fn bootstrap_errors_are_reported() {
    let mut cfg = sweep(
        vec![3],
        1,
        vec![
            StrategySpec::new(StrategyKind::QemcmcFull, None),
            StrategySpec::new(StrategyKind::CgMultipleGroups, Some(GroupSize::Fixed(2))),
        ],
        Temperatures::single(1.0),
    );
    cfg.spectral.bootstrap = 20;
    cfg.spectral.bruteforce_samples = Some(2000);
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&cfg, dir.path(), 1).unwrap();
    let rows: Vec<SpectralRow> = read_csv(&dir.path().join("spectral.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r.delta_err.unwrap() > 0.0, "{r:?}");
    }
    let multiple = rows.iter().find(|r| r.strategy == "cg_multiple_groups").unwrap();
    assert_eq!(multiple.n_samples, 2000);
    assert_eq!(multiple.n_g, 2);
    let full = rows.iter().find(|r| r.strategy == "qemcmc_full").unwrap();
    assert_eq!(full.asymmetry, Some(0.0));
}

#[test]
fn chain_ensemble_approaches_exact_energy_from_above() {
    let cfg = ExperimentConfig {
        kind: cgqmc::config::ExperimentKind::ChainEnsemble,
        master_seed: 5,
        instances: InstanceSource {
            n: vec![16],
            count: 1,
            ..preset(Preset::Fig1TwentyFive, Scale::Desk).instances
        },
        strategies: vec![StrategySpec::new(StrategyKind::CgMultipleGroups, Some(GroupSize::Fixed(4)))],
        temperatures: Temperatures::single(1.0),
        emulator: Default::default(),
        spectral: Default::default(),
        chain: ChainConfig {
            steps: 3000,
            chains: 10,
            output_stride: 100,
            ..ChainConfig::default()
        },
    };
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&cfg, dir.path(), 0).unwrap();
    assert_eq!(report.failed_cells, 0);
    let exact: Vec<ExactRow> = read_csv(&dir.path().join("exact.csv")).unwrap();
    let ensemble: Vec<EnsembleRow> = read_csv(&dir.path().join("ensemble.csv")).unwrap();
    let e = exact[0].boltzmann_energy;
    assert!(ensemble.iter().all(|r| r.exact_energy == Some(e) && r.chains == 10));
    let gaps: Vec<f64> = ensemble.iter().map(|r| r.cumulative_energy_mean - e).collect();
    assert!(gaps.iter().all(|&g| g > -0.05 * e.abs()), "{gaps:?}");
    assert!(gaps.last().unwrap() < &(0.25 * gaps[0]), "{gaps:?}");

    let levels: Vec<LevelRow> = read_csv(&dir.path().join("levels.csv")).unwrap();
    assert_eq!(levels.len(), 10);
    assert!(levels.windows(2).all(|w| w[0].energy <= w[1].energy));
    assert_eq!(levels[0].energy, exact[0].ground_energy);

    let summary: Vec<ChainSummaryRow> = read_csv(&dir.path().join("chain_summary.csv")).unwrap();
    let ground: Vec<GroundStateRow> = read_csv(&dir.path().join("ground_state.csv")).unwrap();
    let found = summary.iter().filter(|s| s.found_ground_state_at.is_some()).count();
    assert_eq!(ground[0].found, found);
    assert_eq!(ground[0].chains, 10);
}

#[test]
fn traces_and_proposal_statistics() {
    let mut cfg = preset(Preset::Fig5, Scale::Desk);
    cfg.instances.n = vec![5];
    cfg.chain.steps = 400;
    cfg.chain.chains = 2;
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&cfg, dir.path(), 0).unwrap();
    let hamming: Vec<HammingRow> = read_csv(&dir.path().join("proposal_hamming.csv")).unwrap();
    assert_eq!(hamming.len(), 6 * 6);
    for chunk in hamming.chunks(6) {
        assert_eq!(chunk.iter().map(|r| r.count).sum::<u64>(), 800);
        assert!((chunk[5].cdf - 1.0).abs() < 1e-12);
    }
    let energy: Vec<EnergyQuantileRow> = read_csv(&dir.path().join("proposal_energy.csv")).unwrap();
    assert_eq!(energy.len(), 6 * 101);
    assert!(energy.windows(2).all(|w| w[0].strategy != w[1].strategy || w[0].abs_delta_e <= w[1].abs_delta_e));

    let mut chain = cfg.clone();
    chain.kind = cgqmc::config::ExperimentKind::ChainEnsemble;
    chain.strategies.truncate(2);
    chain.chain.write_traces = true;
    chain.chain.initial_state = Some("10101".into());
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&chain, dir.path(), 0).unwrap();
    let traces: Vec<_> = report.files.iter().filter(|f| f.starts_with(dir.path().join("traces"))).collect();
    assert_eq!(traces.len(), 4);
    let rows: Vec<cgqmc::output::TraceRow> = read_csv(traces[0]).unwrap();
    assert_eq!(rows.len(), 400);
    let summary: Vec<ChainSummaryRow> = read_csv(&dir.path().join("chain_summary.csv")).unwrap();
    assert!(summary.iter().all(|s| s.initial_state == "10101"));
}
