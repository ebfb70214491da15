//! Metropolis-Hastings chains, traces and summaries.
//!
//! Every strategy is accepted with `min(1, exp((E - E') / T))`, i.e. the
//! proposal is treated as symmetric.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};

use crate::error::{invalid, Result};
use crate::ising::{check_temperature, hamming_distance, magnetisation, metropolis_factor, IsingInstance, SpinState};
use crate::proposals::ProposalStrategy;
use crate::ChainRng;

/// Tolerance used when matching a visited energy to the ground energy.
pub const GROUND_ENERGY_TOLERANCE: f64 = 1e-9;

/// One Metropolis-Hastings step, recorded after the accept/reject decision.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based step number.
    pub step: u64,
    pub state: SpinState,
    pub energy: f64,
    pub magnetisation: f64,
    pub proposed_hamming: usize,
    /// `E(proposed) - E(current)`.
    pub proposed_delta_e: f64,
    pub accepted: bool,
    /// The uniform draw the acceptance factor was compared against.
    pub uniform: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Random,
    Fixed(SpinState),
}

/// Storage policy for per-step records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceOptions {
    /// Steps `1..=full_record_cap` are stored in full.
    pub full_record_cap: usize,
    /// Past the cap, every `snapshot_stride`-th step is kept.
    pub snapshot_stride: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            full_record_cap: 200_000,
            snapshot_stride: 100,
        }
    }
}

/// The outcome of one chain.
#[derive(Debug, Clone)]
pub struct ChainTrace {
    pub instance_id: String,
    pub strategy: ProposalStrategy,
    pub temperature: f64,
    pub seed: u64,
    pub initial_state: SpinState,
    pub initial_energy: f64,
    pub steps: u64,
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<StepRecord>,
    /// Magnetisation after every step, for steps beyond the record cap too.
    pub magnetisations: Vec<f64>,
    pub energies: Vec<f64>,
    pub accepted: u64,
    /// Counts of proposed Hamming distances `0..=n`.
    pub proposed_hamming_counts: Vec<u64>,
    /// `|E(proposed) - E(current)|` for every step.
    pub proposed_abs_delta_e: Vec<f64>,
    /// `(step, energy)` each time a new lowest energy is reached; step 0 is the initial state.
    pub best_energy_history: Vec<(u64, f64)>,
    pub best_state: SpinState,
    pub final_state: SpinState,
}

impl ChainTrace {
    pub fn best_energy(&self) -> f64 {
        self.best_energy_history.last().map_or(self.initial_energy, |&(_, e)| e)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }

    /// First step whose state has energy within tolerance of `target`.
    pub fn first_reached(&self, target: f64) -> Option<u64> {
        self.best_energy_history
            .iter()
            .find(|&&(_, e)| e <= target + GROUND_ENERGY_TOLERANCE)
            .map(|&(s, _)| s)
    }
}

/// Runs a chain, calling `observer` for every step record.
#[allow(clippy::too_many_arguments)]
pub fn run_chain_observed<F: FnMut(&StepRecord)>(
    instance: &IsingInstance,
    strategy: &ProposalStrategy,
    temperature: f64,
    steps: u64,
    seed: u64,
    initial: &InitialState,
    options: &TraceOptions,
    mut observer: F,
) -> Result<ChainTrace> {
    check_temperature(temperature)?;
    if steps == 0 {
        return invalid("a chain needs at least one step");
    }
    let n = instance.n();
    strategy.validate(n)?;
    let mut rng = ChainRng::seed_from_u64(seed);
    let mut current = match initial {
        InitialState::Random => SpinState::random(n, &mut rng),
        InitialState::Fixed(s) => {
            if s.len() != n {
                return invalid("initial state length does not match the instance");
            }
            s.clone()
        }
    };
    let initial_state = current.clone();
    let mut current_energy = instance.energy_unchecked(current.spins());
    let initial_energy = current_energy;
    let stride = options.snapshot_stride.max(1) as u64;
    let cap = options.full_record_cap as u64;

    let mut trace = ChainTrace {
        instance_id: String::from(instance.instance_id()),
        strategy: strategy.clone(),
        temperature,
        seed,
        initial_state: initial_state.clone(),
        initial_energy,
        steps,
        records: Vec::with_capacity(steps.min(cap) as usize),
        snapshots: Vec::new(),
        magnetisations: Vec::with_capacity(steps as usize),
        energies: Vec::with_capacity(steps as usize),
        accepted: 0,
        proposed_hamming_counts: vec![0; n + 1],
        proposed_abs_delta_e: Vec::with_capacity(steps as usize),
        best_energy_history: vec![(0, initial_energy)],
        best_state: initial_state,
        final_state: current.clone(),
    };
    let mut current_m = magnetisation(&current);

    for step in 1..=steps {
        let proposed = strategy.propose(instance, &current, &mut rng)?;
        let proposed_energy = instance.energy_unchecked(proposed.spins());
        let delta = proposed_energy - current_energy;
        let hamming = hamming_distance(&current, &proposed)?;
        let factor = metropolis_factor(delta, temperature);
        let u: f64 = rng.random();
        let accepted = u <= factor;
        if accepted {
            current = proposed;
            current_energy = proposed_energy;
            current_m = magnetisation(&current);
            trace.accepted += 1;
            if current_energy < trace.best_energy() {
                trace.best_energy_history.push((step, current_energy));
                trace.best_state = current.clone();
            }
        }
        trace.proposed_hamming_counts[hamming] += 1;
        trace.proposed_abs_delta_e.push(delta.abs());
        trace.magnetisations.push(current_m);
        trace.energies.push(current_energy);
        let record = StepRecord {
            step,
            state: current.clone(),
            energy: current_energy,
            magnetisation: current_m,
            proposed_hamming: hamming,
            proposed_delta_e: delta,
            accepted,
            uniform: u,
        };
        observer(&record);
        if step <= cap {
            trace.records.push(record);
        } else if step % stride == 0 {
            trace.snapshots.push(record);
        }
    }
    trace.final_state = current;
    Ok(trace)
}

/// Runs a chain with the default trace options.
pub fn run_chain(
    instance: &IsingInstance,
    strategy: &ProposalStrategy,
    temperature: f64,
    steps: u64,
    seed: u64,
    initial: &InitialState,
) -> Result<ChainTrace> {
    run_chain_observed(
        instance,
        strategy,
        temperature,
        steps,
        seed,
        initial,
        &TraceOptions::default(),
        |_| {},
    )
}

/// Running means and headline numbers of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    /// Entry `k - 1` is the mean magnetisation over steps `1..=k`.
    pub cumulative_magnetisation: Vec<f64>,
    pub cumulative_energy: Vec<f64>,
    pub found_ground_state_at: Option<u64>,
    pub acceptance_rate: f64,
    pub best_energy: f64,
}

/// Prefix means of `values`.
pub fn running_means(values: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            sum += v;
            sum / (k + 1) as f64
        })
        .collect()
}

/// Summarises a trace; `ground_energy` (usually from the exact distribution)
/// enables ground-state discovery.
pub fn summarize(trace: &ChainTrace, ground_energy: Option<f64>) -> ChainSummary {
    ChainSummary {
        cumulative_magnetisation: running_means(&trace.magnetisations),
        cumulative_energy: running_means(&trace.energies),
        found_ground_state_at: ground_energy.and_then(|g| trace.first_reached(g)),
        acceptance_rate: trace.acceptance_rate(),
        best_energy: trace.best_energy(),
    }
}

/// Empirical distributions of proposed moves.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalStatistics {
    /// Counts for distances `0..=n`.
    pub hamming_counts: Vec<u64>,
    /// `P(d <= k)` for `k = 0..=n`.
    pub hamming_cdf: Vec<f64>,
    /// Sorted ascending.
    pub abs_delta_e: Vec<f64>,
}

impl ProposalStatistics {
    pub fn total(&self) -> u64 {
        self.hamming_counts.iter().sum()
    }

    /// Empirical CDF of `|dE|` at `x`.
    pub fn delta_e_cdf(&self, x: f64) -> f64 {
        if self.abs_delta_e.is_empty() {
            return 0.0;
        }
        let below = self.abs_delta_e.partition_point(|&v| v <= x);
        below as f64 / self.abs_delta_e.len() as f64
    }

    /// Lower empirical quantile of `|dE|`, `p` in `[0, 1]`.
    pub fn delta_e_quantile(&self, p: f64) -> f64 {
        let len = self.abs_delta_e.len();
        if len == 0 {
            return f64::NAN;
        }
        let idx = libm::ceil(p * len as f64) as usize;
        self.abs_delta_e[idx.clamp(1, len) - 1]
    }
}

pub fn proposal_statistics(trace: &ChainTrace) -> ProposalStatistics {
    let counts = trace.proposed_hamming_counts.clone();
    let total: u64 = counts.iter().sum();
    let mut acc = 0u64;
    let cdf = counts
        .iter()
        .map(|c| {
            acc += c;
            if total == 0 {
                0.0
            } else {
                acc as f64 / total as f64
            }
        })
        .collect();
    let mut abs = trace.proposed_abs_delta_e.clone();
    abs.sort_by(f64::total_cmp);
    ProposalStatistics {
        hamming_counts: counts,
        hamming_cdf: cdf,
        abs_delta_e: abs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{energy, exact_distribution, generate_instance, ModelClass};
    use crate::math::sqrt;

    #[test]
    fn infinite_temperature_uniform_accepts_everything() {
        let inst = generate_instance(5, ModelClass::FullyConnected, 1).unwrap();
        let trace = run_chain(&inst, &ProposalStrategy::uniform(), 1e9, 2000, 3, &InitialState::Random).unwrap();
        assert_eq!(trace.acceptance_rate(), 1.0);
    }

    #[test]
    fn identity_proposal_always_accepted() {
        // Free spins with zero field: every local flip has dE = 0.
        let inst = IsingInstance::new(crate::linalg::Matrix::zeros(2, 2), vec![0.0; 2]).unwrap();
        let trace = run_chain(&inst, &ProposalStrategy::local(), 0.01, 500, 4, &InitialState::Random).unwrap();
        assert_eq!(trace.acceptance_rate(), 1.0);
    }

    #[test]
    fn rejected_steps_keep_state_and_energies_audit() {
        let inst = generate_instance(6, ModelClass::FullyConnected, 7).unwrap();
        for strategy in [ProposalStrategy::local(), ProposalStrategy::improved(3), ProposalStrategy::multiple(2)] {
            let trace = run_chain(&inst, &strategy, 0.5, 400, 9, &InitialState::Random).unwrap();
            let mut prev = trace.initial_state.clone();
            let mut prev_e = trace.initial_energy;
            for r in &trace.records {
                if !r.accepted {
                    assert_eq!(r.state, prev);
                } else {
                    assert!(r.uniform <= metropolis_factor(r.proposed_delta_e, 0.5));
                    assert!((r.energy - prev_e - r.proposed_delta_e).abs() < 1e-10);
                }
                assert!((r.energy - energy(&inst, &r.state).unwrap()).abs() < 1e-10);
                prev = r.state.clone();
                prev_e = r.energy;
            }
        }
    }

    #[test]
    fn chains_are_deterministic() {
        let inst = generate_instance(5, ModelClass::FullyConnected, 2).unwrap();
        let strategy = ProposalStrategy::multiple(2);
        let a = run_chain(&inst, &strategy, 1.0, 300, 11, &InitialState::Random).unwrap();
        let b = run_chain(&inst, &strategy, 1.0, 300, 11, &InitialState::Random).unwrap();
        assert_eq!(a.records, b.records);
        let c = run_chain(&inst, &strategy, 1.0, 300, 12, &InitialState::Random).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn invalid_inputs() {
        let inst = generate_instance(3, ModelClass::FullyConnected, 2).unwrap();
        let s = ProposalStrategy::local();
        assert!(run_chain(&inst, &s, 0.0, 10, 1, &InitialState::Random).is_err());
        assert!(run_chain(&inst, &s, 1.0, 0, 1, &InitialState::Random).is_err());
        assert!(run_chain(&inst, &s, 1.0, 10, 1, &InitialState::Fixed(SpinState::all_up(4))).is_err());
    }

    #[test]
    fn running_mean_examples() {
        assert!(running_means(&[1.0; 50]).iter().all(|&m| m == 1.0));
        let alternating: Vec<f64> = (0..1000).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let means = running_means(&alternating);
        for (k, m) in means.iter().enumerate() {
            let expected = if k % 2 == 0 { 1.0 / (k + 1) as f64 } else { 0.0 };
            assert!((m - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn cumulative_means_match_records() {
        let inst = generate_instance(5, ModelClass::FullyConnected, 5).unwrap();
        let trace = run_chain(&inst, &ProposalStrategy::local(), 1.0, 1000, 1, &InitialState::Random).unwrap();
        let summary = summarize(&trace, None);
        let mut sum = 0.0;
        for (k, r) in trace.records.iter().enumerate() {
            sum += r.magnetisation;
            assert!((summary.cumulative_magnetisation[k] - sum / (k + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn long_run_magnetisation_matches_exact() {
        let inst = generate_instance(4, ModelClass::FullyConnected, 31).unwrap();
        let exact = exact_distribution(&inst, 2.0).unwrap();
        let trace = run_chain(&inst, &ProposalStrategy::local(), 2.0, 400_000, 2, &InitialState::Random).unwrap();
        let summary = summarize(&trace, Some(exact.ground_energy()));
        let m = *summary.cumulative_magnetisation.last().unwrap();
        assert!((m - exact.boltzmann_magnetisation).abs() < 0.02, "{m} vs {}", exact.boltzmann_magnetisation);
        assert!(summary.found_ground_state_at.is_some());
    }

    #[test]
    fn ground_state_discovery_step() {
        let inst = generate_instance(5, ModelClass::FullyConnected, 8).unwrap();
        let exact = exact_distribution(&inst, 1.0).unwrap();
        let trace = run_chain(&inst, &ProposalStrategy::uniform(), 1.0, 5000, 3, &InitialState::Random).unwrap();
        let at = summarize(&trace, Some(exact.ground_energy())).found_ground_state_at.unwrap();
        let first = if trace.initial_energy <= exact.ground_energy() + 1e-9 {
            0
        } else {
            trace.records.iter().find(|r| r.energy <= exact.ground_energy() + 1e-9).unwrap().step
        };
        assert_eq!(at, first);
    }

    #[test]
    fn trace_storage_cap() {
        let inst = generate_instance(4, ModelClass::FullyConnected, 8).unwrap();
        let opts = TraceOptions {
            full_record_cap: 100,
            snapshot_stride: 50,
        };
        let mut seen = 0;
        let trace = run_chain_observed(
            &inst,
            &ProposalStrategy::local(),
            1.0,
            1000,
            1,
            &InitialState::Random,
            &opts,
            |_| seen += 1,
        )
        .unwrap();
        assert_eq!(seen, 1000);
        assert_eq!(trace.records.len(), 100);
        assert_eq!(trace.snapshots.len(), 18);
        assert_eq!(trace.magnetisations.len(), 1000);
    }

    #[test]
    fn proposal_statistics_examples() {
        let inst = generate_instance(9, ModelClass::FullyConnected, 4).unwrap();
        let local = run_chain(&inst, &ProposalStrategy::local(), 1.0, 2000, 1, &InitialState::Random).unwrap();
        let st = proposal_statistics(&local);
        assert_eq!(st.hamming_counts[1], 2000);
        assert_eq!(st.hamming_cdf[0], 0.0);
        assert!(st.hamming_cdf[1..].iter().all(|&c| c == 1.0));

        let draws = 100_000u64;
        let uni = run_chain(&inst, &ProposalStrategy::uniform(), 1.0, draws, 2, &InitialState::Random).unwrap();
        let st = proposal_statistics(&uni);
        let mut binom = 1.0;
        for k in 0..=9u64 {
            if k > 0 {
                binom = binom * (10 - k) as f64 / k as f64;
            }
            let p = binom / 512.0;
            let sigma = sqrt(draws as f64 * p * (1.0 - p));
            assert!((st.hamming_counts[k as usize] as f64 - draws as f64 * p).abs() < 5.0 * sigma);
        }

        let cg = run_chain(&inst, &ProposalStrategy::naive(3), 1.0, 2000, 3, &InitialState::Random).unwrap();
        let st = proposal_statistics(&cg);
        assert!(st.hamming_counts[4..].iter().all(|&c| c == 0));
        assert!(st.abs_delta_e.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(st.delta_e_cdf(f64::INFINITY), 1.0);
    }
}
