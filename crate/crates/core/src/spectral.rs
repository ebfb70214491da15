//! Transition matrices, spectral gaps, mixing bounds and scaling fits.
//!
//! States are indexed by their basis index, so every matrix here is
//! `2^n x 2^n` with rows as the "from" state.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::emulator::{ExactPropagator, ProposalHamiltonian};
use crate::error::{invalid, Error, Result};
use crate::ising::{all_energies, check_temperature, metropolis_factor, IsingInstance, SpinState};
use crate::linalg::{eigenvalues, symmetric_eigen, Matrix};
use crate::math::{fabs, log, log2, sqrt, LN_2};
use crate::proposals::{
    group_at, partition, reduced_hamiltonian_improved, reduced_hamiltonian_naive, GroupMode, ProposalStrategy,
    StrategyKind,
};

/// Largest `n` for transition-matrix work unless configured otherwise.
pub const DEFAULT_SPECTRAL_CAP: usize = 10;

/// Eigenvalues this close to 1 count as unit eigenvalues.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// Tolerance on the row sums of a proposal matrix.
pub const ROW_SUM_TOLERANCE: f64 = 1e-8;

pub(crate) fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::ResourceLimit {
            what: "spin count for transition matrices",
            requested: n,
            cap,
        });
    }
    Ok(())
}

/// Analytic proposal matrix of the uniform or local strategy.
pub fn classical_q(n: usize, kind: StrategyKind) -> Result<Matrix> {
    check_cap(n, DEFAULT_SPECTRAL_CAP)?;
    let dim = 1usize << n;
    match kind {
        StrategyKind::Uniform => Ok(Matrix::from_fn(dim, dim, |_, _| 1.0 / dim as f64)),
        StrategyKind::LocalFlip => {
            let mut q = Matrix::zeros(dim, dim);
            for x in 0..dim {
                for i in 0..n {
                    q[(x, x ^ (1 << i))] = 1.0 / n as f64;
                }
            }
            Ok(q)
        }
        other => invalid(alloc::format!("{other} has no analytic proposal matrix")),
    }
}

/// `P = A o Q` with the rejected mass on the diagonal.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub n: usize,
    pub temperature: f64,
    pub energies: Vec<f64>,
    pub q: Matrix,
    pub p: Matrix,
    /// `max |Q - Q^T|`.
    pub asymmetry: f64,
}

impl TransitionMatrix {
    pub fn new(energies: &[f64], q: &Matrix, temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        let dim = energies.len();
        if !dim.is_power_of_two() || q.rows() != dim || q.cols() != dim {
            return invalid("proposal matrix and energy vector disagree on the state count");
        }
        let mut p = Matrix::zeros(dim, dim);
        for x in 0..dim {
            let row = q.row(x);
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE || row.iter().any(|&v| v < 0.0) {
                return invalid(alloc::format!("proposal row {x} is not a probability vector (sum {sum})"));
            }
            let mut off = 0.0;
            let out = p.row_mut(x);
            for y in 0..dim {
                if y != x && row[y] != 0.0 {
                    let v = row[y] * metropolis_factor(energies[y] - energies[x], temperature);
                    out[y] = v;
                    off += v;
                }
            }
            out[x] = 1.0 - off;
        }
        Ok(Self {
            n: dim.trailing_zeros() as usize,
            temperature,
            energies: energies.to_vec(),
            q: q.clone(),
            p,
            asymmetry: q.asymmetry(),
        })
    }

    /// `A(y|x) = min(1, exp((E_x - E_y) / T))`.
    pub fn acceptance(&self, x: usize, y: usize) -> f64 {
        metropolis_factor(self.energies[y] - self.energies[x], self.temperature)
    }

    pub fn gap(&self) -> Result<SpectralGap> {
        spectral_gap(&self.p)
    }

    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.p.rows())
            .map(|x| (self.p.row(x).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Transition matrix of the uniform or local strategy.
pub fn build_p_classical(instance: &IsingInstance, kind: StrategyKind, temperature: f64) -> Result<TransitionMatrix> {
    let q = classical_q(instance.n(), kind)?;
    TransitionMatrix::new(&all_energies(instance), &q, temperature)
}

/// The randomness of one quantum proposal: group offset and one `(gamma, t)` per group.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub offset: usize,
    pub params: Vec<(f64, u32)>,
}

/// Samples a draw, consuming the generator in the same order as the proposal does.
pub fn sample_draw<R: Rng + ?Sized>(strategy: &ProposalStrategy, n: usize, rng: &mut R) -> Result<Draw> {
    strategy.validate(n)?;
    let offset = match strategy.kind {
        StrategyKind::QemcmcFull => 0,
        StrategyKind::CgNaiveLocalGroup | StrategyKind::CgImprovedLocalGroup | StrategyKind::CgMultipleGroups => {
            rng.random_range(0..n)
        }
        other => return invalid(alloc::format!("{other} is not a quantum strategy")),
    };
    let params = (0..strategy.n_groups(n)).map(|_| strategy.ranges.sample(rng)).collect();
    Ok(Draw { offset, params })
}

/// Right-multiplies `rows` (or the identity when `None`) by the kernel of
/// one quantum group update. Each environment configuration gets its own
/// `|U|^2` block in improved mode.
fn apply_group_kernel(
    instance: &IsingInstance,
    group: &[usize],
    (gamma, t): (f64, u32),
    mode: GroupMode,
    strategy: &ProposalStrategy,
    rows: Option<&Matrix>,
) -> Result<Matrix> {
    let n = instance.n();
    let dim = 1usize << n;
    let q = group.len();
    let local = 1usize << q;
    let gmask = group.iter().fold(0usize, |m, &i| m | (1 << i));
    let place: Vec<usize> = (0..local)
        .map(|a| {
            group
                .iter()
                .enumerate()
                .filter(|(k, _)| (a >> k) & 1 == 1)
                .fold(0, |acc, (_, &i)| acc | (1 << i))
        })
        .collect();
    let block = |env: usize| -> Result<Matrix> {
        let (j, h) = match mode {
            GroupMode::Naive => reduced_hamiltonian_naive(instance, group),
            GroupMode::Improved => {
                reduced_hamiltonian_improved(instance, group, &SpinState::from_index(env as u64, n))
            }
        };
        let ham = ProposalHamiltonian::sampled(j, h, gamma, t, &strategy.ranges)?;
        Ok(ExactPropagator::with_cap(&ham, strategy.dense_cap)?.transition_probabilities())
    };
    let shared = match mode {
        GroupMode::Naive => Some(block(0)?),
        GroupMode::Improved => None,
    };
    let n_rows = rows.map_or(dim, Matrix::rows);
    let mut out = Matrix::zeros(n_rows, dim);
    for env in (0..dim).filter(|e| e & gmask == 0) {
        let owned;
        let w = match &shared {
            Some(w) => w,
            None => {
                owned = block(env)?;
                &owned
            }
        };
        match rows {
            None => {
                for a in 0..local {
                    let out_row = out.row_mut(env | place[a]);
                    for b in 0..local {
                        out_row[env | place[b]] = w[(a, b)];
                    }
                }
            }
            Some(m) => {
                for r in 0..n_rows {
                    let src = m.row(r);
                    for a in 0..local {
                        let v = src[env | place[a]];
                        if v == 0.0 {
                            continue;
                        }
                        let out_row = out.row_mut(r);
                        for b in 0..local {
                            out_row[env | place[b]] += v * w[(a, b)];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Proposal matrix of one draw, right-multiplied onto `rows` (identity when `None`).
///
/// For multiple groups the kernels of the groups are composed in order, which
/// is the exact transition law of the sequential update for that draw.
pub fn draw_kernel(
    instance: &IsingInstance,
    strategy: &ProposalStrategy,
    draw: &Draw,
    rows: Option<&Matrix>,
) -> Result<Matrix> {
    let n = instance.n();
    match strategy.kind {
        StrategyKind::QemcmcFull => {
            let all: Vec<usize> = (0..n).collect();
            apply_group_kernel(instance, &all, draw.params[0], GroupMode::Naive, strategy, rows)
        }
        StrategyKind::CgNaiveLocalGroup | StrategyKind::CgImprovedLocalGroup => {
            let q = strategy.q.unwrap_or(n);
            let mode = if strategy.kind == StrategyKind::CgNaiveLocalGroup {
                GroupMode::Naive
            } else {
                GroupMode::Improved
            };
            apply_group_kernel(instance, &group_at(n, q, draw.offset), draw.params[0], mode, strategy, rows)
        }
        StrategyKind::CgMultipleGroups => {
            let q = strategy.q.unwrap_or(n);
            let selection = partition(n, q, draw.offset)?;
            let mut acc: Option<Matrix> = rows.cloned();
            for (group, &params) in selection.groups.iter().zip(&draw.params) {
                acc = Some(apply_group_kernel(instance, group, params, GroupMode::Improved, strategy, acc.as_ref())?);
            }
            Ok(acc.expect("at least one group"))
        }
        other => invalid(alloc::format!("{other} has no quantum kernel")),
    }
}

/// How draws are shared between rows in the row-wise estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// Every draw is applied to the whole matrix.
    #[default]
    Paired,
    /// Every row gets its own draws.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowwiseOptions {
    pub samples: usize,
    pub mode: SamplingMode,
    /// Keep per-draw matrices so the estimate can be bootstrapped.
    pub keep_draws: bool,
    pub cap: usize,
}

impl Default for RowwiseOptions {
    fn default() -> Self {
        Self {
            samples: 30,
            mode: SamplingMode::Paired,
            keep_draws: false,
            cap: DEFAULT_SPECTRAL_CAP,
        }
    }
}

/// Material for bootstrap resampling of an estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum BootstrapSource {
    None,
    /// One proposal matrix per draw; independent mode stacks per-row draws.
    Draws(Vec<Matrix>),
    /// Observed `(from, to)` transitions.
    Transitions(Vec<(u16, u16)>),
}

/// An estimated proposal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QEstimate {
    pub q: Matrix,
    pub n_samples: usize,
    pub source: BootstrapSource,
}

impl QEstimate {
    /// One bootstrap replicate of `Q`, or `None` when nothing was kept.
    pub fn bootstrap<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Matrix> {
        match &self.source {
            BootstrapSource::None => None,
            BootstrapSource::Draws(draws) => {
                let dim = self.q.rows();
                let mut acc = Matrix::zeros(dim, dim);
                let mut counts = vec![0usize; draws.len()];
                for _ in 0..draws.len() {
                    counts[rng.random_range(0..draws.len())] += 1;
                }
                for (d, &c) in draws.iter().zip(&counts) {
                    if c == 0 {
                        continue;
                    }
                    let w = c as f64 / draws.len() as f64;
                    for (a, b) in acc.as_mut_slice().iter_mut().zip(d.as_slice()) {
                        *a += w * b;
                    }
                }
                Some(acc)
            }
            BootstrapSource::Transitions(tr) => {
                let resampled: Vec<(u16, u16)> = (0..tr.len()).map(|_| tr[rng.random_range(0..tr.len())]).collect();
                Some(counts_to_q(self.q.rows(), &resampled))
            }
        }
    }
}

/// Monte-Carlo average of single-draw proposal matrices.
pub fn estimate_q_rowwise<R: Rng + ?Sized>(
    instance: &IsingInstance,
    strategy: &ProposalStrategy,
    options: &RowwiseOptions,
    rng: &mut R,
) -> Result<QEstimate> {
    let n = instance.n();
    check_cap(n, options.cap)?;
    strategy.validate(n)?;
    if !strategy.kind.is_quantum() {
        return Ok(QEstimate {
            q: classical_q(n, strategy.kind)?,
            n_samples: 0,
            source: BootstrapSource::None,
        });
    }
    if options.samples == 0 {
        return invalid("the row-wise estimator needs at least one sample");
    }
    let dim = 1usize << n;
    let mut q = Matrix::zeros(dim, dim);
    let mut kept = Vec::new();
    let scale = 1.0 / options.samples as f64;
    match options.mode {
        SamplingMode::Paired => {
            for _ in 0..options.samples {
                let draw = sample_draw(strategy, n, rng)?;
                let k = draw_kernel(instance, strategy, &draw, None)?;
                for (a, b) in q.as_mut_slice().iter_mut().zip(k.as_slice()) {
                    *a += scale * b;
                }
                if options.keep_draws {
                    kept.push(k);
                }
            }
        }
        SamplingMode::Independent => {
            if options.keep_draws {
                kept = vec![Matrix::zeros(dim, dim); options.samples];
            }
            for x in 0..dim {
                let mut start = Matrix::zeros(1, dim);
                start[(0, x)] = 1.0;
                for s in 0..options.samples {
                    let draw = sample_draw(strategy, n, rng)?;
                    let row = draw_kernel(instance, strategy, &draw, Some(&start))?;
                    for (a, b) in q.row_mut(x).iter_mut().zip(row.row(0)) {
                        *a += scale * b;
                    }
                    if options.keep_draws {
                        kept[s].row_mut(x).copy_from_slice(row.row(0));
                    }
                }
            }
        }
    }
    Ok(QEstimate {
        q,
        n_samples: options.samples,
        source: if options.keep_draws {
            BootstrapSource::Draws(kept)
        } else {
            BootstrapSource::None
        },
    })
}

fn counts_to_q(dim: usize, transitions: &[(u16, u16)]) -> Matrix {
    let mut counts = Matrix::zeros(dim, dim);
    for &(x, y) in transitions {
        counts[(x as usize, y as usize)] += 1.0;
    }
    for x in 0..dim {
        let total: f64 = counts.row(x).iter().sum();
        let row = counts.row_mut(x);
        if total == 0.0 {
            row[x] = 1.0;
        } else {
            for v in row.iter_mut() {
                *v /= total;
            }
        }
    }
    counts
}

/// Counts `n_s` single proposals from uniformly random starts; rows are
/// normalised by their observed mass and an unvisited row becomes a self-loop.
pub fn estimate_q_bruteforce<R: Rng + ?Sized>(
    instance: &IsingInstance,
    strategy: &ProposalStrategy,
    n_s: usize,
    keep_transitions: bool,
    cap: usize,
    rng: &mut R,
) -> Result<QEstimate> {
    let n = instance.n();
    check_cap(n, cap.min(16))?;
    strategy.validate(n)?;
    if n_s == 0 {
        return invalid("the brute-force estimator needs at least one sample");
    }
    let dim = 1usize << n;
    let mut transitions = Vec::with_capacity(n_s);
    for _ in 0..n_s {
        let x = rng.random_range(0..dim);
        let s = SpinState::from_index(x as u64, n);
        let y = strategy.propose(instance, &s, rng)?.index() as usize;
        transitions.push((x as u16, y as u16));
    }
    let q = counts_to_q(dim, &transitions);
    Ok(QEstimate {
        q,
        n_samples: n_s,
        source: if keep_transitions {
            BootstrapSource::Transitions(transitions)
        } else {
            BootstrapSource::None
        },
    })
}

/// Absolute spectral gap with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGap {
    pub delta: f64,
    /// Largest modulus among the eigenvalues left after removing one unit eigenvalue.
    pub subdominant: f64,
    /// More than one eigenvalue lies within `UNIT_TOLERANCE` of 1.
    pub reducible: bool,
}

/// `1 - max |lambda|` over all eigenvalues except one unit eigenvalue.
pub fn spectral_gap(p: &Matrix) -> Result<SpectralGap> {
    if !p.is_square() || p.rows() == 0 {
        return invalid("spectral gap needs a nonempty square matrix");
    }
    gap_from_eigenvalues(&eigenvalues(p)?)
}

pub fn gap_from_eigenvalues(values: &[Complex64]) -> Result<SpectralGap> {
    let one = Complex64::new(1.0, 0.0);
    let near_unit: Vec<usize> = (0..values.len())
        .filter(|&i| (values[i] - one).norm() < UNIT_TOLERANCE)
        .collect();
    let excluded = near_unit
        .iter()
        .copied()
        .max_by(|&a, &b| values[a].re.total_cmp(&values[b].re))
        .or_else(|| {
            // No eigenvalue near 1 means the input is not stochastic enough;
            // fall back to the one closest to 1 so the gap is still defined.
            (0..values.len()).min_by(|&a, &b| (values[a] - one).norm().total_cmp(&(values[b] - one).norm()))
        });
    let subdominant = (0..values.len())
        .filter(|&i| Some(i) != excluded)
        .map(|i| values[i].norm())
        .fold(0.0, f64::max);
    Ok(SpectralGap {
        delta: (1.0 - subdominant).clamp(0.0, 1.0),
        subdominant,
        reducible: near_unit.len() > 1,
    })
}

/// `D^{1/2} P D^{-1/2}` for a symmetric proposal matrix: `Q_xy exp(-|E_x - E_y| / 2T)`
/// off the diagonal. Symmetric, and similar to `P` when `Q` is symmetric.
pub fn symmetrized_transition(energies: &[f64], q: &Matrix, temperature: f64) -> Result<Matrix> {
    let tm = TransitionMatrix::new(energies, q, temperature)?;
    let dim = energies.len();
    Ok(Matrix::from_fn(dim, dim, |x, y| {
        if x == y {
            tm.p[(x, x)]
        } else {
            0.5 * (q[(x, y)] + q[(y, x)]) * crate::math::exp(-fabs(energies[x] - energies[y]) / (2.0 * temperature))
        }
    }))
}

/// Spectral gap through the symmetric eigensolver; valid for symmetric `Q`.
pub fn symmetric_spectral_gap(energies: &[f64], q: &Matrix, temperature: f64) -> Result<SpectralGap> {
    let s = symmetrized_transition(energies, q, temperature)?;
    let values: Vec<Complex64> = symmetric_eigen(&s)?
        .values
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    gap_from_eigenvalues(&values)
}

/// `max_{x,y} |mu_x P_xy - mu_y P_yx|`.
pub fn detailed_balance_residual(p: &Matrix, mu: &[f64]) -> f64 {
    let dim = mu.len();
    let mut worst: f64 = 0.0;
    for x in 0..dim {
        for y in 0..x {
            worst = worst.max((mu[x] * p[(x, y)] - mu[y] * p[(y, x)]).abs());
        }
    }
    worst
}

/// `max_y |(mu^T P)_y - mu_y|`.
pub fn stationarity_residual(p: &Matrix, mu: &[f64]) -> f64 {
    p.left_mul(mu)
        .iter()
        .zip(mu)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Bounds on the steps needed to come within total variation `epsilon` of `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalisationBounds {
    pub epsilon: f64,
    pub lower: f64,
    pub upper: f64,
    pub min_mu: f64,
}

/// `lower = (1/delta - 1) ln(1/(2 eps))`, `upper = (1/delta) ln(1/(eps min_mu))`.
pub fn thermalisation_bounds(delta: f64, epsilon: f64, min_mu: f64) -> Result<ThermalisationBounds> {
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid(alloc::format!("spectral gap {delta} outside (0, 1]"));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return invalid(alloc::format!("epsilon {epsilon} outside (0, 1/2)"));
    }
    if !(min_mu > 0.0 && min_mu <= 1.0) {
        return invalid(alloc::format!("min_mu {min_mu} outside (0, 1]"));
    }
    Ok(ThermalisationBounds {
        epsilon,
        lower: (1.0 / delta - 1.0) * log(1.0 / (2.0 * epsilon)),
        upper: (1.0 / delta) * log(1.0 / (epsilon * min_mu)),
        min_mu,
    })
}

/// `max_x TV(P^t(x, .), mu)` for `t = 0..=max_steps`, by exact propagation.
pub fn worst_case_tv_curve(p: &Matrix, mu: &[f64], max_steps: usize) -> Result<Vec<f64>> {
    let dim = mu.len();
    if p.rows() != dim || !p.is_square() {
        return invalid("transition matrix and distribution disagree on size");
    }
    let tv = |m: &Matrix| {
        (0..dim)
            .map(|x| 0.5 * m.row(x).iter().zip(mu).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let mut m = Matrix::identity(dim);
    let mut curve = vec![tv(&m)];
    for _ in 0..max_steps {
        m = m.matmul(p)?;
        curve.push(tv(&m));
    }
    Ok(curve)
}

/// First `t` with `max_x TV(P^t(x, .), mu) <= epsilon`, if reached within `max_steps`.
pub fn mixing_time(p: &Matrix, mu: &[f64], epsilon: f64, max_steps: usize) -> Result<Option<usize>> {
    let dim = mu.len();
    if p.rows() != dim || !p.is_square() {
        return invalid("transition matrix and distribution disagree on size");
    }
    let mut m = Matrix::identity(dim);
    for t in 0..=max_steps {
        let d = (0..dim)
            .map(|x| 0.5 * m.row(x).iter().zip(mu).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if d <= epsilon {
            return Ok(Some(t));
        }
        if t < max_steps {
            m = m.matmul(p)?;
        }
    }
    Ok(None)
}

/// Linear interpolation of `q -> (delta, err)` at `q = sqrt(n)` with linear error propagation.
pub fn interpolate_sqrt_n_gap(gaps: &BTreeMap<usize, (f64, f64)>, n: usize) -> Result<(f64, f64)> {
    let root = sqrt(n as f64);
    let lo = libm::floor(root) as usize;
    if lo * lo == n {
        return gaps
            .get(&lo)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("no gap for q = {lo}")));
    }
    let hi = lo + 1;
    let (Some(&(d_lo, e_lo)), Some(&(d_hi, e_hi))) = (gaps.get(&lo), gaps.get(&hi)) else {
        return invalid(alloc::format!("interpolation at sqrt({n}) needs q = {lo} and q = {hi}"));
    };
    let w = root - lo as f64;
    let value = (1.0 - w) * d_lo + w * d_hi;
    let err = sqrt((1.0 - w) * (1.0 - w) * e_lo * e_lo + w * w * e_hi * e_hi);
    Ok((value, err))
}

/// Fit of `delta = a 2^{-k n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub a: f64,
    pub k: f64,
    pub k_err: f64,
    pub a_err: f64,
    /// False when some error was nonpositive and the fit fell back to equal weights.
    pub weighted: bool,
}

/// Least squares of `log2 delta` against `n`, weighted by `sigma = err / (delta ln 2)`.
/// Falls back to an unweighted fit with residual-based errors if any error is nonpositive.
pub fn fit_scaling(points: &[(f64, f64, f64)]) -> Result<ScalingFit> {
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return invalid("a scaling fit needs at least three distinct system sizes");
    }
    if points.iter().any(|p| !(p.1 > 0.0) || !p.1.is_finite() || !p.0.is_finite()) {
        return invalid("spectral gaps must be positive and finite to fit");
    }
    let weighted = points.iter().all(|p| p.2 > 0.0 && p.2.is_finite());
    let ys: Vec<f64> = points.iter().map(|p| log2(p.1)).collect();
    let ws: Vec<f64> = points
        .iter()
        .map(|p| {
            if weighted {
                let sigma = p.2 / (p.1 * LN_2);
                1.0 / (sigma * sigma)
            } else {
                1.0
            }
        })
        .collect();
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((p, &y), &w) in points.iter().zip(&ys).zip(&ws) {
        s += w;
        sx += w * p.0;
        sy += w * y;
        sxx += w * p.0 * p.0;
        sxy += w * p.0 * y;
    }
    let d = s * sxx - sx * sx;
    let slope = (s * sxy - sx * sy) / d;
    let intercept = (sxx * sy - sx * sxy) / d;
    let (var_slope, var_intercept) = if weighted {
        (s / d, sxx / d)
    } else {
        let dof = (points.len() - 2) as f64;
        let rss: f64 = points
            .iter()
            .zip(&ys)
            .map(|(p, &y)| {
                let r = y - (intercept + slope * p.0);
                r * r
            })
            .sum();
        let sigma2 = if dof > 0.0 { rss / dof } else { 0.0 };
        (sigma2 * s / d, sigma2 * sxx / d)
    };
    let a = crate::math::exp2(intercept);
    Ok(ScalingFit {
        a,
        k: -slope,
        k_err: sqrt(var_slope),
        a_err: a * LN_2 * sqrt(var_intercept),
        weighted,
    })
}

/// `k_classical / k_quantum`.
pub fn quantum_enhancement_factor(k_quantum: f64, k_classical_best: f64) -> Result<f64> {
    if !(k_quantum > 0.0) {
        return invalid(alloc::format!("quantum decay exponent {k_quantum} must be positive"));
    }
    Ok(k_classical_best / k_quantum)
}

/// Arithmetic mean and its standard error; the error is 0 for one value.
pub fn mean_and_standard_error(values: &[f64]) -> (f64, f64) {
    let len = values.len();
    if len == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / len as f64;
    if len == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (len - 1) as f64;
    (mean, sqrt(var / len as f64))
}

/// Geometric mean; `NaN` when any value is nonpositive.
pub fn geometric_mean(values: &[f64]) -> f64 {
    if values.is_empty() || values.iter().any(|&v| !(v > 0.0)) {
        return f64::NAN;
    }
    crate::math::exp(values.iter().map(|&v| log(v)).sum::<f64>() / values.len() as f64)
}

/// Gap of a `Q` estimate at temperature `T`, with a bootstrap standard error
/// over `replicates` resamples (0 when none are requested or possible).
pub fn gap_with_bootstrap<R: Rng + ?Sized>(
    energies: &[f64],
    estimate: &QEstimate,
    temperature: f64,
    replicates: usize,
    rng: &mut R,
) -> Result<(SpectralGap, f64)> {
    let gap = TransitionMatrix::new(energies, &estimate.q, temperature)?.gap()?;
    let mut samples = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let Some(q) = estimate.bootstrap(rng) else { break };
        samples.push(TransitionMatrix::new(energies, &q, temperature)?.gap()?.delta);
    }
    let err = if samples.len() > 1 {
        let (_, se) = mean_and_standard_error(&samples);
        se * sqrt(samples.len() as f64)
    } else {
        0.0
    };
    Ok((gap, err))
}
