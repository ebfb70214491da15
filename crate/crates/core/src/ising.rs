//! Ising spin-glass instances, spin states, observables and exact oracles.
//!
//! Energies follow `E(s) = -sum_{j>k} J_jk s_j s_k - sum_j h_j s_j`. Spin
//! states use the bit encoding `s_i = 1 - 2 b_i`, so spin `+1` is bit `0`.
//! A state's index is `sum_i b_i 2^i` (spin 0 is the least significant bit).

use alloc::collections::BinaryHeap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::math::{exp, log, pairwise_sum, CompensatedSum};
use crate::ChainRng;

/// Largest `n` handled by [`exact_distribution`] unless configured otherwise.
pub const DEFAULT_ENUMERATION_CAP: usize = 25;

/// How an instance was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelClass {
    /// Every pair coupled; couplings and fields i.i.d. standard normal.
    FullyConnected,
    /// Nearest-neighbour couplings on a cycle, fields on every spin; i.i.d. standard normal.
    OneDRing,
    /// Built by hand or read from a file with no generator attached.
    Custom,
}

impl ModelClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelClass::FullyConnected => "fully_connected",
            ModelClass::OneDRing => "one_d_ring",
            ModelClass::Custom => "custom",
        }
    }
}

impl core::str::FromStr for ModelClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fully_connected" => Ok(ModelClass::FullyConnected),
            "one_d_ring" => Ok(ModelClass::OneDRing),
            "custom" => Ok(ModelClass::Custom),
            other => invalid(alloc::format!("unknown model class `{other}`")),
        }
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A spin configuration in `{-1, +1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinState {
    spins: Vec<i8>,
}

impl SpinState {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return invalid(alloc::format!("spin value {bad} is not +1 or -1"));
        }
        Ok(Self { spins })
    }

    pub fn all_up(n: usize) -> Self {
        Self { spins: vec![1; n] }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let spins = bits
            .iter()
            .map(|&b| match b {
                0 => Ok(1),
                1 => Ok(-1),
                other => invalid(alloc::format!("bit value {other} is not 0 or 1")),
            })
            .collect::<Result<Vec<i8>>>()?;
        Ok(Self { spins })
    }

    /// The state whose bit `i` is bit `i` of `index`. Needs `n <= 64`.
    pub fn from_index(index: u64, n: usize) -> Self {
        debug_assert!(n <= 64);
        Self {
            spins: (0..n).map(|i| if (index >> i) & 1 == 1 { -1 } else { 1 }).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            spins: (0..n).map(|_| if rng.random::<bool>() { -1 } else { 1 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spin(&self, i: usize) -> i8 {
        self.spins[i]
    }

    pub fn set(&mut self, i: usize, value: i8) {
        debug_assert!(value == 1 || value == -1);
        self.spins[i] = value;
    }

    pub fn bits(&self) -> Vec<u8> {
        self.spins.iter().map(|&s| u8::from(s == -1)).collect()
    }

    /// Index in the computational basis. Needs `n <= 64`.
    pub fn index(&self) -> u64 {
        debug_assert!(self.len() <= 64);
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == -1)
            .fold(0u64, |acc, (i, _)| acc | (1u64 << i))
    }

    pub fn flip(&mut self, i: usize) {
        self.spins[i] = -self.spins[i];
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.flip(i);
        out
    }

    /// Every spin reversed.
    pub fn complement(&self) -> Self {
        Self {
            spins: self.spins.iter().map(|s| -s).collect(),
        }
    }

    /// `0`/`1` characters, spin 0 first.
    pub fn bitstring(&self) -> String {
        self.spins.iter().map(|&s| if s == 1 { '0' } else { '1' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => invalid(alloc::format!("invalid bit character `{other}`")),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(&bits)
    }
}

impl fmt::Display for SpinState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bitstring())
    }
}

/// An Ising instance: symmetric zero-diagonal couplings `J` and fields `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance {
    couplings: Matrix,
    fields: Vec<f64>,
    instance_id: String,
    seed: u64,
    model_class: ModelClass,
}

impl IsingInstance {
    /// Validates symmetry and the zero diagonal of `couplings`.
    pub fn new(couplings: Matrix, fields: Vec<f64>) -> Result<Self> {
        let n = fields.len();
        if n == 0 {
            return invalid("an instance needs at least one spin");
        }
        if couplings.rows() != n || couplings.cols() != n {
            return invalid("couplings must be an n x n matrix matching the field vector");
        }
        for j in 0..n {
            if couplings[(j, j)] != 0.0 {
                return invalid(alloc::format!("coupling diagonal entry {j} is nonzero"));
            }
            for k in 0..j {
                if couplings[(j, k)] != couplings[(k, j)] {
                    return invalid(alloc::format!("couplings are not symmetric at ({j}, {k})"));
                }
            }
        }
        if couplings.as_slice().iter().chain(&fields).any(|x| !x.is_finite()) {
            return invalid("couplings and fields must be finite");
        }
        Ok(Self {
            couplings,
            fields,
            instance_id: String::new(),
            seed: 0,
            model_class: ModelClass::Custom,
        })
    }

    /// Builds an instance from `(j, k, J_jk)` triples; each unordered pair at most once.
    pub fn from_triples(n: usize, triples: &[(usize, usize, f64)], fields: Vec<f64>) -> Result<Self> {
        if fields.len() != n {
            return invalid("field vector length does not match n");
        }
        let mut couplings = Matrix::zeros(n, n);
        for &(j, k, v) in triples {
            if j >= n || k >= n || j == k {
                return invalid(alloc::format!("coupling index ({j}, {k}) out of range or diagonal"));
            }
            if couplings[(j, k)] != 0.0 {
                return invalid(alloc::format!("coupling ({j}, {k}) given twice"));
            }
            couplings[(j, k)] = v;
            couplings[(k, j)] = v;
        }
        Self::new(couplings, fields)
    }

    pub fn with_metadata(mut self, instance_id: impl Into<String>, seed: u64, class: ModelClass) -> Self {
        self.instance_id = instance_id.into();
        self.seed = seed;
        self.model_class = class;
        self
    }

    pub fn n(&self) -> usize {
        self.fields.len()
    }

    pub fn couplings(&self) -> &Matrix {
        &self.couplings
    }

    pub fn coupling(&self, j: usize, k: usize) -> f64 {
        self.couplings[(j, k)]
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn instance_id(&self) -> &str {
        &self.instance_id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model_class(&self) -> ModelClass {
        self.model_class
    }

    /// Nonzero `(j, k, J_jk)` entries with `j > k`, row by row.
    pub fn coupling_triples(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for j in 0..self.n() {
            for k in 0..j {
                let v = self.couplings[(j, k)];
                if v != 0.0 {
                    out.push((j, k, v));
                }
            }
        }
        out
    }

    /// Energy of a spin slice whose length is already known to be `n`.
    pub(crate) fn energy_unchecked(&self, spins: &[i8]) -> f64 {
        let n = self.n();
        let term = |j: usize| {
            let row = self.couplings.row(j);
            let mut inner = self.fields[j];
            for k in 0..j {
                inner += row[k] * f64::from(spins[k]);
            }
            f64::from(spins[j]) * inner
        };
        if n > 16 {
            let terms: Vec<f64> = (0..n).map(term).collect();
            -pairwise_sum(&terms)
        } else {
            -(0..n).map(term).sum::<f64>()
        }
    }

    /// `h_i + sum_{j != i} J_ij s_j`.
    pub fn local_field(&self, spins: &[i8], i: usize) -> f64 {
        self.fields[i]
            + self
                .couplings
                .row(i)
                .iter()
                .zip(spins)
                .map(|(j, &s)| j * f64::from(s))
                .sum::<f64>()
    }
}

/// `E(s) = -sum_{j>k} J_jk s_j s_k - sum_j h_j s_j`.
pub fn energy(instance: &IsingInstance, state: &SpinState) -> Result<f64> {
    if state.len() != instance.n() {
        return invalid(alloc::format!(
            "state has {} spins but the instance has {}",
            state.len(),
            instance.n()
        ));
    }
    Ok(instance.energy_unchecked(state.spins()))
}

/// Mean spin, in `[-1, 1]`.
pub fn magnetisation(state: &SpinState) -> f64 {
    let total: i64 = state.spins().iter().map(|&s| i64::from(s)).sum();
    total as f64 / state.len() as f64
}

/// Metropolis factor `min(1, exp(-delta_e / T))` for an energy change `delta_e`.
pub fn metropolis_factor(delta_e: f64, temperature: f64) -> f64 {
    if delta_e <= 0.0 {
        1.0
    } else {
        exp(-delta_e / temperature)
    }
}

pub(crate) fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return invalid(alloc::format!("temperature must be positive and finite, got {temperature}"));
    }
    Ok(())
}

/// `min(1, exp((E(s) - E(s')) / T))`, the acceptance probability for a
/// symmetric proposal. Never touches the partition function.
pub fn acceptance_ratio(
    instance: &IsingInstance,
    s: &SpinState,
    s_prime: &SpinState,
    temperature: f64,
) -> Result<f64> {
    check_temperature(temperature)?;
    let e = energy(instance, s)?;
    let e_prime = energy(instance, s_prime)?;
    Ok(metropolis_factor(e_prime - e, temperature))
}

pub fn hamming_distance(s: &SpinState, s_prime: &SpinState) -> Result<usize> {
    if s.len() != s_prime.len() {
        return invalid("hamming distance of states with different lengths");
    }
    Ok(s.spins().iter().zip(s_prime.spins()).filter(|(a, b)| a != b).count())
}

/// Random instance. Couplings and fields are i.i.d. standard normal; the
/// ring class only draws the `n` cyclic nearest-neighbour couplings (one
/// for `n = 2`). Draw order: couplings with `j > k` row by row, then fields.
pub fn generate_instance(n: usize, class: ModelClass, seed: u64) -> Result<IsingInstance> {
    if n < 2 {
        return invalid("random instances need n >= 2");
    }
    let mut rng = ChainRng::seed_from_u64(seed);
    let mut couplings = Matrix::zeros(n, n);
    match class {
        ModelClass::FullyConnected => {
            for j in 0..n {
                for k in 0..j {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    couplings[(j, k)] = v;
                    couplings[(k, j)] = v;
                }
            }
        }
        ModelClass::OneDRing => {
            let bonds = if n == 2 { 1 } else { n };
            for i in 0..bonds {
                let (a, b) = (i, (i + 1) % n);
                let (j, k) = if a > b { (a, b) } else { (b, a) };
                let v: f64 = StandardNormal.sample(&mut rng);
                couplings[(j, k)] = v;
                couplings[(k, j)] = v;
            }
        }
        ModelClass::Custom => return invalid("the custom model class has no generator"),
    }
    let fields: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let id = alloc::format!("{}-n{}-s{}", class.as_str(), n, seed);
    Ok(IsingInstance::new(couplings, fields)?.with_metadata(id, seed, class))
}

/// One energy level: basis index and energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub index: u64,
    pub energy: f64,
}

/// The Boltzmann distribution of an instance, by full enumeration.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    pub n: usize,
    pub temperature: f64,
    /// `E(s)` indexed by basis index.
    pub energies: Vec<f64>,
    /// `mu(s)` indexed by basis index.
    pub probabilities: Vec<f64>,
    /// May overflow to infinity at very low temperature; see `log_partition_function`.
    pub partition_function: f64,
    pub log_partition_function: f64,
    pub boltzmann_magnetisation: f64,
    pub boltzmann_energy: f64,
    /// Lowest levels in ascending energy, at most `ExactOptions::max_levels`.
    pub sorted_levels: Vec<Level>,
}

impl ExactDistribution {
    pub fn probability(&self, state: &SpinState) -> f64 {
        self.probabilities[state.index() as usize]
    }

    pub fn min_probability(&self) -> f64 {
        self.probabilities.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn ground_energy(&self) -> f64 {
        self.sorted_levels[0].energy
    }

    pub fn ground_state(&self) -> SpinState {
        SpinState::from_index(self.sorted_levels[0].index, self.n)
    }

    /// Total-variation distance between `mu` and a distribution over basis indices.
    pub fn total_variation(&self, other: &[f64]) -> f64 {
        0.5 * self
            .probabilities
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    pub cap: usize,
    pub max_levels: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ENUMERATION_CAP,
            max_levels: 1024,
        }
    }
}

/// Energies of every basis state, by index.
///
/// Walks a Gray code inside blocks of `2^12` states, updating local fields
/// incrementally, and recomputes the energy directly at each block start so
/// round-off never accumulates over more than one block.
pub fn all_energies(instance: &IsingInstance) -> Vec<f64> {
    let n = instance.n();
    assert!(n < 48, "enumeration of 2^{n} states");
    let total = 1usize << n;
    let low_bits = n.min(12);
    let block = 1usize << low_bits;
    let mut energies = vec![0.0; total];
    let j = instance.couplings();
    let mut spins = vec![1i8; n];
    let mut lf = vec![0.0; n];
    for base in (0..total).step_by(block) {
        for (i, s) in spins.iter_mut().enumerate() {
            *s = if (base >> i) & 1 == 1 { -1 } else { 1 };
        }
        for (i, f) in lf.iter_mut().enumerate() {
            *f = instance.local_field(&spins, i);
        }
        let mut e = instance.energy_unchecked(&spins);
        energies[base] = e;
        for g in 1..block {
            let i = g.trailing_zeros() as usize;
            let old = f64::from(spins[i]);
            e += 2.0 * old * lf[i];
            for (k, f) in lf.iter_mut().enumerate() {
                *f -= 2.0 * j[(k, i)] * old;
            }
            spins[i] = -spins[i];
            energies[base | (g ^ (g >> 1))] = e;
        }
    }
    energies
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapLevel(Level);

impl Eq for HeapLevel {}

impl PartialOrd for HeapLevel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapLevel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .energy
            .total_cmp(&other.0.energy)
            .then(self.0.index.cmp(&other.0.index))
    }
}

fn lowest_levels(energies: &[f64], count: usize) -> Vec<Level> {
    let mut heap: BinaryHeap<HeapLevel> = BinaryHeap::with_capacity(count + 1);
    for (index, &energy) in energies.iter().enumerate() {
        let item = HeapLevel(Level {
            index: index as u64,
            energy,
        });
        if heap.len() < count {
            heap.push(item);
        } else if let Some(top) = heap.peek() {
            if item < *top {
                heap.pop();
                heap.push(item);
            }
        }
    }
    let mut out: Vec<Level> = heap.into_iter().map(|h| h.0).collect();
    out.sort_by_key(|a| HeapLevel(*a));
    out
}

/// Exact Boltzmann distribution with the default options.
pub fn exact_distribution(instance: &IsingInstance, temperature: f64) -> Result<ExactDistribution> {
    exact_distribution_with(instance, temperature, &ExactOptions::default())
}

pub fn exact_distribution_with(
    instance: &IsingInstance,
    temperature: f64,
    options: &ExactOptions,
) -> Result<ExactDistribution> {
    check_temperature(temperature)?;
    let n = instance.n();
    if n > options.cap {
        return Err(Error::ResourceLimit {
            what: "spin count for exact enumeration",
            requested: n,
            cap: options.cap,
        });
    }
    let energies = all_energies(instance);
    Ok(distribution_from_energies(n, energies, temperature, options.max_levels.max(1)))
}

pub(crate) fn distribution_from_energies(
    n: usize,
    energies: Vec<f64>,
    temperature: f64,
    max_levels: usize,
) -> ExactDistribution {
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut weights: Vec<f64> = energies.iter().map(|e| exp(-(e - e_min) / temperature)).collect();
    let mut z_acc = CompensatedSum::default();
    for w in &weights {
        z_acc.add(*w);
    }
    let z_shifted = z_acc.value();
    for w in &mut weights {
        *w /= z_shifted;
    }
    let log_z = log(z_shifted) - e_min / temperature;

    let mut m_acc = CompensatedSum::default();
    let mut e_acc = CompensatedSum::default();
    for (index, (&p, &e)) in weights.iter().zip(&energies).enumerate() {
        let down = (index as u64).count_ones() as f64;
        let m = (n as f64 - 2.0 * down) / n as f64;
        m_acc.add(p * m);
        e_acc.add(p * e);
    }
    let sorted_levels = lowest_levels(&energies, max_levels.min(energies.len()));
    ExactDistribution {
        n,
        temperature,
        energies,
        probabilities: weights,
        partition_function: exp(log_z),
        log_partition_function: log_z,
        boltzmann_magnetisation: m_acc.value(),
        boltzmann_energy: e_acc.value(),
        sorted_levels,
    }
}

impl fmt::Display for IsingInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let id = if self.instance_id.is_empty() {
            "<unnamed>".to_string()
        } else {
            self.instance_id.clone()
        };
        write!(f, "IsingInstance({id}, n={}, class={})", self.n(), self.model_class)
    }
}
