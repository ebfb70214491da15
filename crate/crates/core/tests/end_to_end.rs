use cgqmc_core::ising::{all_energies, exact_distribution, generate_instance};
use cgqmc_core::mcmc::{run_chain_observed, InitialState, TraceOptions};
use cgqmc_core::spectral::{
    build_p_classical, estimate_q_bruteforce, estimate_q_rowwise, gap_with_bootstrap, mean_and_standard_error,
    symmetric_spectral_gap, RowwiseOptions, SamplingMode, TransitionMatrix,
};
use cgqmc_core::{ChainRng, ModelClass, ProposalStrategy, StrategyKind};
use rand::SeedableRng;

#[test]
fn uniform_beats_local_at_low_temperature_on_average() {
    let t = 0.1;
    let mut diffs = Vec::new();
    for seed in 0..20 {
        let inst = generate_instance(5, ModelClass::FullyConnected, 500 + seed).unwrap();
        let u = build_p_classical(&inst, StrategyKind::Uniform, t).unwrap().gap().unwrap().delta;
        let l = build_p_classical(&inst, StrategyKind::LocalFlip, t).unwrap().gap().unwrap().delta;
        diffs.push(u - l);
    }
    let (mean, se) = mean_and_standard_error(&diffs);
    assert!(mean > 0.0, "mean difference {mean} +- {se}");
}

#[test]
fn quantum_gap_matches_symmetric_oracle() {
    // Paired estimates are exactly symmetric, so the similarity transform
    // to a symmetric matrix applies and its eigenvalues are an independent oracle.
    for (kind, q) in [
        (StrategyKind::QemcmcFull, None),
        (StrategyKind::CgImprovedLocalGroup, Some(2)),
        (StrategyKind::CgNaiveLocalGroup, Some(3)),
    ] {
        let inst = generate_instance(5, ModelClass::FullyConnected, 77).unwrap();
        let strategy = ProposalStrategy::new(kind, q).unwrap();
        let mut rng = ChainRng::seed_from_u64(1);
        let est = estimate_q_rowwise(&inst, &strategy, &RowwiseOptions::default(), &mut rng).unwrap();
        assert_eq!(est.q.asymmetry(), 0.0);
        let energies = all_energies(&inst);
        for t in [0.3, 1.0, 4.0] {
            let general = TransitionMatrix::new(&energies, &est.q, t).unwrap().gap().unwrap();
            let symmetric = symmetric_spectral_gap(&energies, &est.q, t).unwrap();
            assert!(
                (general.delta - symmetric.delta).abs() < 1e-8,
                "{kind} T={t}: {} vs {}",
                general.delta,
                symmetric.delta
            );
        }
    }
}

#[test]
fn independent_estimates_agree_within_errors() {
    let inst = generate_instance(4, ModelClass::FullyConnected, 31).unwrap();
    let energies = all_energies(&inst);
    let t = 1.0;
    let cases = [
        (ProposalStrategy::qemcmc(), SamplingMode::Paired),
        (ProposalStrategy::improved(2), SamplingMode::Independent),
    ];
    for (strategy, mode) in cases {
        let options = RowwiseOptions {
            samples: 40,
            mode,
            keep_draws: true,
            cap: 10,
        };
        let mut gaps = Vec::new();
        for seed in [10, 20] {
            let mut rng = ChainRng::seed_from_u64(seed);
            let est = estimate_q_rowwise(&inst, &strategy, &options, &mut rng).unwrap();
            gaps.push(gap_with_bootstrap(&energies, &est, t, 200, &mut rng).unwrap());
        }
        let (a, b) = (&gaps[0], &gaps[1]);
        let combined = (a.1 * a.1 + b.1 * b.1).sqrt();
        assert!(combined > 0.0);
        assert!(
            (a.0.delta - b.0.delta).abs() < 3.0 * combined,
            "{}: {} vs {} (err {combined})",
            strategy.label(),
            a.0.delta,
            b.0.delta
        );
    }
}

#[test]
fn rowwise_and_bruteforce_agree_for_multiple_groups() {
    let inst = generate_instance(3, ModelClass::FullyConnected, 8).unwrap();
    let strategy = ProposalStrategy::multiple(2);
    let mut rng = ChainRng::seed_from_u64(3);
    let options = RowwiseOptions {
        samples: 4000,
        mode: SamplingMode::Paired,
        keep_draws: false,
        cap: 10,
    };
    let rowwise = estimate_q_rowwise(&inst, &strategy, &options, &mut rng).unwrap();
    let n_s = 400_000;
    let brute = estimate_q_bruteforce(&inst, &strategy, n_s, false, 10, &mut rng).unwrap();
    // Each row of the brute-force estimate holds about n_s / 8 samples.
    let per_row = n_s as f64 / 8.0;
    for x in 0..8 {
        for y in 0..8 {
            let p = rowwise.q[(x, y)];
            let sigma = (p * (1.0 - p) / per_row).sqrt() + 1e-3;
            assert!((p - brute.q[(x, y)]).abs() < 5.0 * sigma, "({x}, {y}): {p} vs {}", brute.q[(x, y)]);
        }
    }
}

#[test]
fn quantum_chain_converges_to_boltzmann() {
    let inst = generate_instance(5, ModelClass::FullyConnected, 4).unwrap();
    let t = 1.5;
    let exact = exact_distribution(&inst, t).unwrap();
    let options = TraceOptions {
        full_record_cap: 0,
        snapshot_stride: usize::MAX,
    };
    for strategy in [ProposalStrategy::improved(2), ProposalStrategy::qemcmc()] {
        let steps = 100_000u64;
        let mut hist = vec![0.0; 32];
        run_chain_observed(&inst, &strategy, t, steps, 12, &InitialState::Random, &options, |r| {
            hist[r.state.index() as usize] += 1.0 / steps as f64;
        })
        .unwrap();
        let tv = exact.total_variation(&hist);
        assert!(tv < 0.03, "{}: TV {tv}", strategy.label());
    }
}
