//! Proposal strategies: classical uniform and local moves, the full quantum
//! proposal, and three coarse-grained quantum variants acting on groups of
//! `q` spins.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::emulator::{evolve, measure_sample, ProposalHamiltonian, DEFAULT_DENSE_CAP};
use crate::error::{invalid, Error, Result};
use crate::ising::{IsingInstance, SpinState};
use crate::linalg::Matrix;

pub use crate::emulator::{EvolutionMode, HyperparameterRanges};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    Uniform,
    LocalFlip,
    QemcmcFull,
    CgNaiveLocalGroup,
    CgImprovedLocalGroup,
    CgMultipleGroups,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::Uniform,
        StrategyKind::LocalFlip,
        StrategyKind::QemcmcFull,
        StrategyKind::CgNaiveLocalGroup,
        StrategyKind::CgImprovedLocalGroup,
        StrategyKind::CgMultipleGroups,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::Uniform => "uniform",
            StrategyKind::LocalFlip => "local_flip",
            StrategyKind::QemcmcFull => "qemcmc_full",
            StrategyKind::CgNaiveLocalGroup => "cg_naive_local_group",
            StrategyKind::CgImprovedLocalGroup => "cg_improved_local_group",
            StrategyKind::CgMultipleGroups => "cg_multiple_groups",
        }
    }

    pub fn is_coarse_grained(&self) -> bool {
        matches!(
            self,
            StrategyKind::CgNaiveLocalGroup | StrategyKind::CgImprovedLocalGroup | StrategyKind::CgMultipleGroups
        )
    }

    pub fn is_quantum(&self) -> bool {
        !matches!(self, StrategyKind::Uniform | StrategyKind::LocalFlip)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .map_or_else(|| invalid(alloc::format!("unknown strategy `{s}`")), Ok)
    }
}

/// A proposal strategy with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalStrategy {
    pub kind: StrategyKind,
    /// Group size; only meaningful for coarse-grained kinds.
    pub q: Option<usize>,
    pub ranges: HyperparameterRanges,
    pub mode: EvolutionMode,
    pub dense_cap: usize,
}

impl ProposalStrategy {
    fn with_kind(kind: StrategyKind, q: Option<usize>) -> Self {
        Self {
            kind,
            q,
            ranges: HyperparameterRanges::default(),
            mode: EvolutionMode::Exact,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn uniform() -> Self {
        Self::with_kind(StrategyKind::Uniform, None)
    }

    pub fn local() -> Self {
        Self::with_kind(StrategyKind::LocalFlip, None)
    }

    pub fn qemcmc() -> Self {
        Self::with_kind(StrategyKind::QemcmcFull, None)
    }

    pub fn naive(q: usize) -> Self {
        Self::with_kind(StrategyKind::CgNaiveLocalGroup, Some(q))
    }

    pub fn improved(q: usize) -> Self {
        Self::with_kind(StrategyKind::CgImprovedLocalGroup, Some(q))
    }

    pub fn multiple(q: usize) -> Self {
        Self::with_kind(StrategyKind::CgMultipleGroups, Some(q))
    }

    /// Builds a strategy of any kind; `q` is required for coarse-grained kinds.
    pub fn new(kind: StrategyKind, q: Option<usize>) -> Result<Self> {
        match (kind.is_coarse_grained(), q) {
            (true, None) => invalid(alloc::format!("strategy {kind} needs a group size")),
            (true, Some(_)) => Ok(Self::with_kind(kind, q)),
            (false, _) => Ok(Self::with_kind(kind, None)),
        }
    }

    pub fn with_mode(mut self, mode: EvolutionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_ranges(mut self, ranges: HyperparameterRanges) -> Self {
        self.ranges = ranges;
        self
    }

    /// Qubits used per quantum evaluation on an `n`-spin instance.
    pub fn qubits(&self, n: usize) -> usize {
        match self.kind {
            StrategyKind::Uniform | StrategyKind::LocalFlip => 0,
            StrategyKind::QemcmcFull => n,
            _ => self.q.unwrap_or(n),
        }
    }

    /// Number of groups per step: `ceil(n / q)` for multiple groups, 1 for other quantum kinds.
    pub fn n_groups(&self, n: usize) -> usize {
        match (self.kind, self.q) {
            (StrategyKind::CgMultipleGroups, Some(q)) if q > 0 => n.div_ceil(q),
            (StrategyKind::Uniform | StrategyKind::LocalFlip, _) => 0,
            _ => 1,
        }
    }

    /// True when `Q(s'|s) = Q(s|s')` holds by construction; false only for multiple groups.
    pub fn symmetric_by_construction(&self) -> bool {
        self.kind != StrategyKind::CgMultipleGroups
    }

    pub fn label(&self) -> alloc::string::String {
        match self.q {
            Some(q) if self.kind.is_coarse_grained() => alloc::format!("{}(q={q})", self.kind),
            _ => alloc::format!("{}", self.kind),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return invalid("instance has no spins");
        }
        if self.kind.is_quantum() {
            self.ranges.validate()?;
        }
        if self.kind.is_coarse_grained() {
            let q = self.q.unwrap_or(0);
            if q < 1 || q > n {
                return invalid(alloc::format!("group size {q} must lie in 1..={n}"));
            }
        }
        let qubits = self.qubits(n);
        if qubits > self.dense_cap {
            return Err(Error::ResourceLimit {
                what: "qubit count for dense evolution",
                requested: qubits,
                cap: self.dense_cap,
            });
        }
        Ok(())
    }

    /// One proposal from `s`.
    pub fn propose<R: Rng + ?Sized>(&self, instance: &IsingInstance, s: &SpinState, rng: &mut R) -> Result<SpinState> {
        let n = instance.n();
        if s.len() != n {
            return invalid("state length does not match the instance");
        }
        self.validate(n)?;
        match self.kind {
            StrategyKind::Uniform => Ok(propose_uniform(s, rng)),
            StrategyKind::LocalFlip => Ok(propose_local(s, rng)),
            StrategyKind::QemcmcFull => propose_qemcmc(instance, s, self, rng),
            StrategyKind::CgNaiveLocalGroup => propose_cg_single_group(instance, s, self, GroupMode::Naive, rng),
            StrategyKind::CgImprovedLocalGroup => {
                propose_cg_single_group(instance, s, self, GroupMode::Improved, rng)
            }
            StrategyKind::CgMultipleGroups => propose_cg_multiple_groups(instance, s, self, rng),
        }
    }
}

/// How the frozen environment enters a group's Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupMode {
    /// Environment ignored.
    Naive,
    /// Environment folded into the group fields.
    Improved,
}

/// Spin indices of one step's groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSelection {
    pub offset: usize,
    pub groups: Vec<Vec<usize>>,
}

impl GroupSelection {
    pub fn indices(&self) -> &[usize] {
        &self.groups[0]
    }
}

/// `q` consecutive indices mod `n` starting at `offset`.
pub fn group_at(n: usize, q: usize, offset: usize) -> Vec<usize> {
    (0..q).map(|i| (offset + i) % n).collect()
}

/// One group with a uniformly random start.
pub fn select_group<R: Rng + ?Sized>(n: usize, q: usize, rng: &mut R) -> Result<GroupSelection> {
    if q < 1 || q > n {
        return invalid(alloc::format!("group size {q} must lie in 1..={n}"));
    }
    let offset = rng.random_range(0..n);
    Ok(GroupSelection {
        offset,
        groups: alloc::vec![group_at(n, q, offset)],
    })
}

/// `ceil(n / q)` disjoint consecutive groups starting at `offset`; the last holds the remainder.
pub fn partition(n: usize, q: usize, offset: usize) -> Result<GroupSelection> {
    if q < 1 || q > n {
        return invalid(alloc::format!("group size {q} must lie in 1..={n}"));
    }
    let groups = (0..n.div_ceil(q))
        .map(|g| {
            let start = g * q;
            let len = q.min(n - start);
            group_at(n, len, offset + start)
        })
        .collect();
    Ok(GroupSelection { offset, groups })
}

/// `J` and `h` restricted to the group.
pub fn reduced_hamiltonian_naive(instance: &IsingInstance, group: &[usize]) -> (Matrix, Vec<f64>) {
    let j = Matrix::from_fn(group.len(), group.len(), |a, b| instance.coupling(group[a], group[b]));
    let h = group.iter().map(|&i| instance.fields()[i]).collect();
    (j, h)
}

/// Group couplings plus `h~_i = h_i + sum_{j not in group} J_ij s_j`.
pub fn reduced_hamiltonian_improved(instance: &IsingInstance, group: &[usize], s: &SpinState) -> (Matrix, Vec<f64>) {
    let (j, mut h) = reduced_hamiltonian_naive(instance, group);
    let n = instance.n();
    let mut inside = alloc::vec![false; n];
    for &i in group {
        inside[i] = true;
    }
    for (a, &i) in group.iter().enumerate() {
        let row = instance.couplings().row(i);
        for k in 0..n {
            if !inside[k] {
                h[a] += row[k] * f64::from(s.spin(k));
            }
        }
    }
    (j, h)
}

/// Basis index of the group's spins inside `s`; qubit `a` is `group[a]`.
pub fn group_index(s: &SpinState, group: &[usize]) -> usize {
    group
        .iter()
        .enumerate()
        .filter(|(_, &i)| s.spin(i) == -1)
        .fold(0, |acc, (a, _)| acc | (1 << a))
}

/// Writes a group basis index back into `s`.
pub fn splice(s: &mut SpinState, group: &[usize], index: usize) {
    for (a, &i) in group.iter().enumerate() {
        s.set(i, if (index >> a) & 1 == 1 { -1 } else { 1 });
    }
}

pub fn propose_uniform<R: Rng + ?Sized>(s: &SpinState, rng: &mut R) -> SpinState {
    SpinState::random(s.len(), rng)
}

pub fn propose_local<R: Rng + ?Sized>(s: &SpinState, rng: &mut R) -> SpinState {
    let i = rng.random_range(0..s.len());
    s.flipped(i)
}

/// Draws `(gamma, t)`, evolves the group from its current bits and splices the measured bits back.
fn quantum_group_update<R: Rng + ?Sized>(
    j: Matrix,
    h: Vec<f64>,
    group: &[usize],
    state: &mut SpinState,
    strategy: &ProposalStrategy,
    rng: &mut R,
) -> Result<()> {
    let (gamma, t) = strategy.ranges.sample(rng);
    let ham = ProposalHamiltonian::sampled(j, h, gamma, t, &strategy.ranges)?;
    let psi = evolve(&ham, group_index(state, group), strategy.mode)?;
    let outcome = measure_sample(&psi, rng)?;
    splice(state, group, outcome);
    Ok(())
}

pub fn propose_qemcmc<R: Rng + ?Sized>(
    instance: &IsingInstance,
    s: &SpinState,
    strategy: &ProposalStrategy,
    rng: &mut R,
) -> Result<SpinState> {
    let n = instance.n();
    if n > strategy.dense_cap {
        return Err(Error::ResourceLimit {
            what: "qubit count for dense evolution",
            requested: n,
            cap: strategy.dense_cap,
        });
    }
    let all: Vec<usize> = (0..n).collect();
    let mut out = s.clone();
    quantum_group_update(
        instance.couplings().clone(),
        instance.fields().to_vec(),
        &all,
        &mut out,
        strategy,
        rng,
    )?;
    Ok(out)
}

pub fn propose_cg_single_group<R: Rng + ?Sized>(
    instance: &IsingInstance,
    s: &SpinState,
    strategy: &ProposalStrategy,
    mode: GroupMode,
    rng: &mut R,
) -> Result<SpinState> {
    let q = strategy.q.unwrap_or(instance.n());
    let selection = select_group(instance.n(), q, rng)?;
    let group = selection.indices();
    let (j, h) = match mode {
        GroupMode::Naive => reduced_hamiltonian_naive(instance, group),
        GroupMode::Improved => reduced_hamiltonian_improved(instance, group, s),
    };
    let mut out = s.clone();
    quantum_group_update(j, h, group, &mut out, strategy, rng)?;
    Ok(out)
}

/// Sequential improved-group updates over a random cyclic partition. Each
/// group sees the outcomes of the groups before it.
pub fn propose_cg_multiple_groups<R: Rng + ?Sized>(
    instance: &IsingInstance,
    s: &SpinState,
    strategy: &ProposalStrategy,
    rng: &mut R,
) -> Result<SpinState> {
    let n = instance.n();
    let q = strategy.q.unwrap_or(n);
    let offset = rng.random_range(0..n);
    let selection = partition(n, q, offset)?;
    let mut work = s.clone();
    for group in &selection.groups {
        let (j, h) = reduced_hamiltonian_improved(instance, group, &work);
        quantum_group_update(j, h, group, &mut work, strategy, rng)?;
    }
    Ok(work)
}
