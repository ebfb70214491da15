//! Statevector emulation of the proposal unitary `U = exp(-iHt)`.
//!
//! `H = (1 - gamma) alpha H_prob + gamma sum_j X_j`, where `H_prob` is the
//! diagonal Ising energy of the group in the `s = 1 - 2b` encoding. Basis
//! index bit `i` is qubit `i`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::math::{cos, sin, sqrt};

/// Largest qubit count for dense evolution unless configured otherwise.
pub const DEFAULT_DENSE_CAP: usize = 12;

/// Tolerance on `sum |amp|^2 - 1` accepted by [`measure_sample`].
pub const NORM_TOLERANCE: f64 = 1e-8;

/// Sampling ranges for the mixing weight `gamma` (open interval) and the
/// integer evolution time `t` (closed interval).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperparameterRanges {
    pub gamma: (f64, f64),
    pub t: (u32, u32),
}

impl Default for HyperparameterRanges {
    fn default() -> Self {
        Self {
            gamma: (0.25, 0.6),
            t: (2, 20),
        }
    }
}

impl HyperparameterRanges {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.gamma;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= 1.0) {
            return invalid(alloc::format!("gamma range ({lo}, {hi}) must satisfy 0 <= lo < hi <= 1"));
        }
        if self.t.0 > self.t.1 {
            return invalid(alloc::format!("t range [{}, {}] is empty", self.t.0, self.t.1));
        }
        Ok(())
    }

    /// Draws `gamma` uniformly inside the open interval, then `t` uniformly on the integers.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, u32) {
        let (lo, hi) = self.gamma;
        let gamma = loop {
            let g = lo + (hi - lo) * rng.random::<f64>();
            if g > lo && g < hi {
                break g;
            }
        };
        let t = rng.random_range(self.t.0..=self.t.1);
        (gamma, t)
    }

    pub fn contains(&self, gamma: f64, t: u32) -> bool {
        gamma > self.gamma.0 && gamma < self.gamma.1 && t >= self.t.0 && t <= self.t.1
    }
}

/// How the unitary is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvolutionMode {
    /// Dense eigendecomposition of `H`.
    #[default]
    Exact,
    /// Second-order Trotter splitting; `None` means `ceil(10 t)` slices.
    Trotter { slices: Option<usize> },
}

/// `sqrt(q) / sqrt(sum_{j>k} J~^2 + sum_j h~^2)`.
pub fn alpha_normalization(j_tilde: &Matrix, h_tilde: &[f64]) -> Result<f64> {
    let q = h_tilde.len();
    if j_tilde.rows() != q || j_tilde.cols() != q {
        return invalid("group couplings and fields disagree on q");
    }
    let mut sum_sq: f64 = h_tilde.iter().map(|h| h * h).sum();
    for j in 0..q {
        for k in 0..j {
            sum_sq += j_tilde[(j, k)] * j_tilde[(j, k)];
        }
    }
    if sum_sq == 0.0 {
        return Err(Error::DegenerateInstance(
            "all group couplings and fields are zero".into(),
        ));
    }
    Ok(sqrt(q as f64) / sqrt(sum_sq))
}

/// The Hamiltonian of one quantum proposal on `q` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalHamiltonian {
    j_tilde: Matrix,
    h_tilde: Vec<f64>,
    gamma: f64,
    t: f64,
    alpha: f64,
}

impl ProposalHamiltonian {
    /// A Hamiltonian with hyperparameters drawn from `ranges`. An all-zero
    /// group has no problem term to normalise and gets `alpha = 1`.
    pub fn sampled(
        j_tilde: Matrix,
        h_tilde: Vec<f64>,
        gamma: f64,
        t: u32,
        ranges: &HyperparameterRanges,
    ) -> Result<Self> {
        if !ranges.contains(gamma, t) {
            return invalid(alloc::format!("(gamma, t) = ({gamma}, {t}) outside the configured ranges"));
        }
        let alpha = match alpha_normalization(&j_tilde, &h_tilde) {
            Ok(a) => a,
            Err(Error::DegenerateInstance(_)) => 1.0,
            Err(e) => return Err(e),
        };
        Self::with_parameters(j_tilde, h_tilde, gamma, f64::from(t), alpha)
    }

    /// Unrestricted constructor: any `gamma` in `[0, 1]` and continuous `t >= 0`.
    pub fn with_parameters(j_tilde: Matrix, h_tilde: Vec<f64>, gamma: f64, t: f64, alpha: f64) -> Result<Self> {
        let q = h_tilde.len();
        if q == 0 {
            return invalid("a proposal Hamiltonian needs at least one qubit");
        }
        if j_tilde.rows() != q || j_tilde.cols() != q {
            return invalid("group couplings and fields disagree on q");
        }
        if !(0.0..=1.0).contains(&gamma) {
            return invalid(alloc::format!("gamma = {gamma} outside [0, 1]"));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return invalid(alloc::format!("evolution time {t} must be finite and nonnegative"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return invalid(alloc::format!("alpha = {alpha} must be positive and finite"));
        }
        Ok(Self {
            j_tilde,
            h_tilde,
            gamma,
            t,
            alpha,
        })
    }

    pub fn q(&self) -> usize {
        self.h_tilde.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn j_tilde(&self) -> &Matrix {
        &self.j_tilde
    }

    pub fn h_tilde(&self) -> &[f64] {
        &self.h_tilde
    }

    /// Group Ising energies `E~(b)` for every basis index.
    pub fn problem_energies(&self) -> Vec<f64> {
        let q = self.q();
        (0..1usize << q)
            .map(|b| {
                let s = |i: usize| if (b >> i) & 1 == 1 { -1.0 } else { 1.0 };
                let mut e = 0.0;
                for j in 0..q {
                    let sj = s(j);
                    e -= self.h_tilde[j] * sj;
                    for k in 0..j {
                        e -= self.j_tilde[(j, k)] * sj * s(k);
                    }
                }
                e
            })
            .collect()
    }

    /// Diagonal of `H`: `(1 - gamma) alpha E~(b)`.
    pub fn diagonal(&self) -> Vec<f64> {
        let w = (1.0 - self.gamma) * self.alpha;
        self.problem_energies().into_iter().map(|e| w * e).collect()
    }

    /// Dense real symmetric `H`.
    pub fn dense(&self) -> Matrix {
        let q = self.q();
        let dim = 1usize << q;
        let mut h = Matrix::zeros(dim, dim);
        for (b, d) in self.diagonal().into_iter().enumerate() {
            h[(b, b)] = d;
            for i in 0..q {
                h[(b, b ^ (1 << i))] = self.gamma;
            }
        }
        h
    }

    fn check_cap(&self, cap: usize) -> Result<()> {
        if self.q() > cap {
            return Err(Error::ResourceLimit {
                what: "qubit count for dense evolution",
                requested: self.q(),
                cap,
            });
        }
        Ok(())
    }
}

/// A `2^q` amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(q: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << q];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return invalid("statevector length must be a power of two");
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn q(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// One line per amplitude: `index re im`.
impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.amplitudes.iter().enumerate() {
            writeln!(f, "{i} {:.17e} {:.17e}", a.re, a.im)?;
        }
        Ok(())
    }
}

/// `U = exp(-iHt)` held as the eigendecomposition of `H`.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    dim: usize,
    /// Eigenvectors as columns.
    vectors: Matrix,
    phases: Vec<Complex64>,
}

impl ExactPropagator {
    pub fn new(ham: &ProposalHamiltonian) -> Result<Self> {
        Self::with_cap(ham, DEFAULT_DENSE_CAP)
    }

    pub fn with_cap(ham: &ProposalHamiltonian, cap: usize) -> Result<Self> {
        ham.check_cap(cap)?;
        let eig = symmetric_eigen(&ham.dense())?;
        let phases = eig
            .values
            .iter()
            .map(|&l| Complex64::new(cos(l * ham.t), -sin(l * ham.t)))
            .collect();
        Ok(Self {
            dim: 1 << ham.q(),
            vectors: eig.vectors,
            phases,
        })
    }

    /// `U |input>`.
    pub fn evolve(&self, input: usize) -> StateVector {
        let v = &self.vectors;
        let row_in = v.row(input);
        let coeffs: Vec<Complex64> = self.phases.iter().zip(row_in).map(|(p, &x)| p * x).collect();
        let amplitudes = (0..self.dim)
            .map(|a| {
                v.row(a)
                    .iter()
                    .zip(&coeffs)
                    .fold(Complex64::new(0.0, 0.0), |acc, (&x, c)| acc + c * x)
            })
            .collect();
        StateVector { amplitudes }
    }

    /// Real and imaginary parts of the full unitary.
    pub fn unitary(&self) -> (Matrix, Matrix) {
        let v = &self.vectors;
        let mut scaled_re = v.clone();
        let mut scaled_im = v.clone();
        for i in 0..self.dim {
            for k in 0..self.dim {
                scaled_re[(i, k)] *= self.phases[k].re;
                scaled_im[(i, k)] *= self.phases[k].im;
            }
        }
        let vt = v.transpose();
        let re = scaled_re.matmul(&vt).expect("square");
        let im = scaled_im.matmul(&vt).expect("square");
        (re, im)
    }

    /// `|<b|U|a>|^2` with `a` the row: the single-draw proposal matrix.
    pub fn transition_probabilities(&self) -> Matrix {
        // U is complex symmetric, so the upper triangle is mirrored to make
        // the result symmetric to the last bit.
        let (re, im) = self.unitary();
        let mut w = Matrix::zeros(self.dim, self.dim);
        for a in 0..self.dim {
            for b in a..self.dim {
                let v = 0.5 * (re[(a, b)] * re[(a, b)] + im[(a, b)] * im[(a, b)])
                    + 0.5 * (re[(b, a)] * re[(b, a)] + im[(b, a)] * im[(b, a)]);
                w[(a, b)] = v;
                w[(b, a)] = v;
            }
        }
        w
    }
}

/// `exp(-iHt) |input>` by dense eigendecomposition.
pub fn evolve_exact(ham: &ProposalHamiltonian, input: usize) -> Result<StateVector> {
    check_input(ham, input)?;
    Ok(ExactPropagator::new(ham)?.evolve(input))
}

/// Default slice count `ceil(10 t)`, at least one.
pub fn default_slices(t: f64) -> usize {
    let s = libm::ceil(10.0 * t);
    if s < 1.0 {
        1
    } else {
        s as usize
    }
}

/// Second-order Trotter product: half diagonal step, `RX` on every qubit, half diagonal step.
pub fn evolve_trotter(ham: &ProposalHamiltonian, input: usize, slices: usize) -> Result<StateVector> {
    check_input(ham, input)?;
    if slices == 0 {
        return invalid("trotter slice count must be at least 1");
    }
    let q = ham.q();
    let dt = ham.t / slices as f64;
    let half: Vec<Complex64> = ham
        .diagonal()
        .iter()
        .map(|&d| Complex64::new(cos(0.5 * d * dt), -sin(0.5 * d * dt)))
        .collect();
    let c = cos(ham.gamma * dt);
    let ms = Complex64::new(0.0, -sin(ham.gamma * dt));
    let mut psi = StateVector::basis(q, input).amplitudes;
    for _ in 0..slices {
        for (a, p) in psi.iter_mut().zip(&half) {
            *a *= p;
        }
        for i in 0..q {
            let bit = 1usize << i;
            for b in 0..psi.len() {
                if b & bit == 0 {
                    let (x, y) = (psi[b], psi[b | bit]);
                    psi[b] = x * c + y * ms;
                    psi[b | bit] = y * c + x * ms;
                }
            }
        }
        for (a, p) in psi.iter_mut().zip(&half) {
            *a *= p;
        }
    }
    Ok(StateVector { amplitudes: psi })
}

/// Evolution under the selected mode.
pub fn evolve(ham: &ProposalHamiltonian, input: usize, mode: EvolutionMode) -> Result<StateVector> {
    match mode {
        EvolutionMode::Exact => evolve_exact(ham, input),
        EvolutionMode::Trotter { slices } => {
            evolve_trotter(ham, input, slices.unwrap_or_else(|| default_slices(ham.t)))
        }
    }
}

fn check_input(ham: &ProposalHamiltonian, input: usize) -> Result<()> {
    ham.check_cap(DEFAULT_DENSE_CAP)?;
    if input >= 1 << ham.q() {
        return invalid(alloc::format!("basis index {input} out of range for {} qubits", ham.q()));
    }
    Ok(())
}

/// Draws a basis index with probability `|amplitude|^2`.
pub fn measure_sample<R: Rng + ?Sized>(psi: &StateVector, rng: &mut R) -> Result<usize> {
    let norm = psi.norm_sqr();
    if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
        return invalid(alloc::format!("statevector norm^2 {norm} is not 1"));
    }
    let u = rng.random::<f64>() * norm;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, a) in psi.amplitudes.iter().enumerate() {
        let p = a.norm_sqr();
        if p > 0.0 {
            last_nonzero = i;
            acc += p;
            if u < acc {
                return Ok(i);
            }
        }
    }
    Ok(last_nonzero)
}

/// `|<s'|U|s>|^2` for every `s'`.
pub fn proposal_distribution_row(ham: &ProposalHamiltonian, input: usize) -> Result<Vec<f64>> {
    Ok(evolve_exact(ham, input)?.probabilities())
}

/// Basis index of a bit vector, bit `i` first.
pub fn basis_index(bits: &[u8]) -> usize {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b != 0)
        .fold(0, |acc, (i, _)| acc | (1 << i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;
    use crate::ChainRng;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_group(q: usize, seed: u64) -> (Matrix, Vec<f64>) {
        let mut rng = ChainRng::seed_from_u64(seed);
        let mut j = Matrix::zeros(q, q);
        for a in 0..q {
            for b in 0..a {
                let v: f64 = StandardNormal.sample(&mut rng);
                j[(a, b)] = v;
                j[(b, a)] = v;
            }
        }
        let h = (0..q).map(|_| StandardNormal.sample(&mut rng)).collect();
        (j, h)
    }

    fn random_ham(q: usize, seed: u64) -> ProposalHamiltonian {
        let (j, h) = random_group(q, seed);
        let mut rng = ChainRng::seed_from_u64(seed ^ 0xabc);
        let ranges = HyperparameterRanges::default();
        let (g, t) = ranges.sample(&mut rng);
        ProposalHamiltonian::sampled(j, h, g, t, &ranges).unwrap()
    }

    /// `exp(-iHt)` column via a Taylor series in scaled-and-squared form; no eigensolver.
    fn taylor_column(ham: &ProposalHamiltonian, input: usize) -> Vec<Complex64> {
        let h = ham.dense();
        let dim = h.rows();
        let steps = 4096;
        let dt = ham.t() / steps as f64;
        let mut psi = vec![Complex64::new(0.0, 0.0); dim];
        psi[input] = Complex64::new(1.0, 0.0);
        for _ in 0..steps {
            let mut term = psi.clone();
            let mut acc = psi.clone();
            for order in 1..=12 {
                let mut next = vec![Complex64::new(0.0, 0.0); dim];
                for a in 0..dim {
                    for b in 0..dim {
                        next[a] += term[b] * h[(a, b)];
                    }
                }
                let factor = Complex64::new(0.0, -dt / order as f64);
                for (n, a) in next.iter_mut().zip(acc.iter_mut()) {
                    *n *= factor;
                    *a += *n;
                }
                term = next;
            }
            psi = acc;
        }
        psi
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_normalization(&Matrix::zeros(1, 1), &[1.0]).unwrap(), 1.0);
        assert_eq!(alpha_normalization(&Matrix::zeros(4, 4), &[1.0; 4]).unwrap(), 1.0);
        assert!(matches!(
            alpha_normalization(&Matrix::zeros(2, 2), &[0.0; 2]),
            Err(Error::DegenerateInstance(_))
        ));
    }

    #[test]
    fn alpha_balances_frobenius_norms() {
        for seed in 0..5 {
            let (j, h) = random_group(3, seed);
            let alpha = alpha_normalization(&j, &h).unwrap();
            let prob = ProposalHamiltonian::with_parameters(j.clone(), h.clone(), 0.0, 1.0, alpha)
                .unwrap()
                .dense();
            let mix = ProposalHamiltonian::with_parameters(Matrix::zeros(3, 3), vec![0.0; 3], 1.0, 1.0, 1.0)
                .unwrap()
                .dense();
            let fro = |m: &Matrix| sqrt(m.as_slice().iter().map(|x| x * x).sum::<f64>());
            assert!((fro(&prob) - fro(&mix)).abs() < 1e-12 * fro(&mix));
        }
    }

    #[test]
    fn diagonal_evolution_keeps_basis_state() {
        let (j, h) = random_group(4, 3);
        let ham = ProposalHamiltonian::with_parameters(j, h, 0.0, 7.0, 0.8).unwrap();
        for input in [0, 5, 15] {
            let row = proposal_distribution_row(&ham, input).unwrap();
            for (k, p) in row.iter().enumerate() {
                let expected = if k == input { 1.0 } else { 0.0 };
                assert!((p - expected).abs() < 1e-12);
            }
            for slices in [1, 3, 10] {
                let tr = evolve_trotter(&ham, input, slices).unwrap();
                let ex = evolve_exact(&ham, input).unwrap();
                for (a, b) in tr.amplitudes().iter().zip(ex.amplitudes()) {
                    assert!((a - b).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn single_qubit_rabi() {
        for &t in &[0.3, core::f64::consts::FRAC_PI_2, 2.0] {
            let ham = ProposalHamiltonian::with_parameters(Matrix::zeros(1, 1), vec![0.0], 1.0, t, 1.0).unwrap();
            let p = proposal_distribution_row(&ham, 0).unwrap();
            assert!((p[0] - cos(t) * cos(t)).abs() < 1e-12);
            assert!((p[1] - sin(t) * sin(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_matches_taylor_oracle() {
        let ham = random_ham(5, 17);
        for input in [0, 9, 31] {
            let psi = evolve_exact(&ham, input).unwrap();
            let oracle = taylor_column(&ham, input);
            for (a, b) in psi.amplitudes().iter().zip(&oracle) {
                assert!((a - b).norm() < 1e-8, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn trotter_second_order_convergence() {
        let (j, h) = random_group(4, 5);
        let alpha = alpha_normalization(&j, &h).unwrap();
        let ham = ProposalHamiltonian::with_parameters(j, h, 0.4, 3.0, alpha).unwrap();
        let exact = evolve_exact(&ham, 6).unwrap();
        let err = |slices| {
            let tr = evolve_trotter(&ham, 6, slices).unwrap();
            tr.amplitudes()
                .iter()
                .zip(exact.amplitudes())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let ratio = err(8) / err(16);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn trotter_default_slices_fidelity() {
        let (j, h) = random_group(6, 8);
        let ranges = HyperparameterRanges::default();
        let ham = ProposalHamiltonian::sampled(j, h, 0.5, 20, &ranges).unwrap();
        let ex = evolve_exact(&ham, 13).unwrap();
        let tr = evolve(&ham, 13, EvolutionMode::Trotter { slices: None }).unwrap();
        assert!(ex.fidelity(&tr) >= 0.999);
        assert!((tr.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unitarity_and_unit_circle_spectrum() {
        for seed in 0..4 {
            let ham = random_ham(1 + seed as usize + 2, seed);
            let prop = ExactPropagator::new(&ham).unwrap();
            let (re, im) = prop.unitary();
            let dim = re.rows();
            // U^dagger U = (Re^T Re + Im^T Im) + i (Re^T Im - Im^T Re)
            let rt = re.transpose();
            let it = im.transpose();
            let real = rt.matmul(&re).unwrap();
            let real2 = it.matmul(&im).unwrap();
            let imag1 = rt.matmul(&im).unwrap();
            let imag2 = it.matmul(&re).unwrap();
            for a in 0..dim {
                for b in 0..dim {
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((real[(a, b)] + real2[(a, b)] - expected).abs() < 1e-8);
                    assert!((imag1[(a, b)] - imag2[(a, b)]).abs() < 1e-8);
                }
            }
            // Real 2d embedding [[Re, -Im], [Im, Re]] shares the moduli of U's eigenvalues.
            let emb = Matrix::from_fn(2 * dim, 2 * dim, |a, b| match (a < dim, b < dim) {
                (true, true) => re[(a, b)],
                (true, false) => -im[(a, b - dim)],
                (false, true) => im[(a - dim, b)],
                (false, false) => re[(a - dim, b - dim)],
            });
            for l in eigenvalues(&emb).unwrap() {
                assert!((l.norm() - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn single_draw_proposal_matrix_is_symmetric() {
        for seed in 0..5 {
            let ham = random_ham(4, 100 + seed);
            let q = ExactPropagator::new(&ham).unwrap().transition_probabilities();
            assert!(q.asymmetry() < 1e-9);
            for a in 0..16 {
                let row = proposal_distribution_row(&ham, a).unwrap();
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                for b in 0..16 {
                    assert!((row[b] - q[(a, b)]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn measurement_examples() {
        let point = StateVector::basis(3, 5);
        let mut rng = ChainRng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(measure_sample(&point, &mut rng).unwrap(), 5);
        }
        let amp = Complex64::new(1.0 / sqrt(8.0), 0.0);
        let uniform = StateVector::from_amplitudes(vec![amp; 8]).unwrap();
        let draws = 100_000;
        let mut counts = [0u32; 8];
        for _ in 0..draws {
            counts[measure_sample(&uniform, &mut rng).unwrap()] += 1;
        }
        let sigma = sqrt(draws as f64 * (1.0 / 8.0) * (7.0 / 8.0));
        for c in counts {
            assert!((f64::from(c) - draws as f64 / 8.0).abs() < 5.0 * sigma);
        }
        let seq = |seed| {
            let mut r = ChainRng::seed_from_u64(seed);
            (0..20).map(|_| measure_sample(&uniform, &mut r).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(seq(9), seq(9));
        let bad = StateVector::from_amplitudes(vec![Complex64::new(0.9, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        assert!(measure_sample(&bad, &mut rng).is_err());
    }

    #[test]
    fn row_matches_sampling_histogram() {
        let ham = random_ham(3, 44);
        let row = proposal_distribution_row(&ham, 2).unwrap();
        let psi = evolve_exact(&ham, 2).unwrap();
        let mut rng = ChainRng::seed_from_u64(5);
        let draws = 1_000_000usize;
        let mut counts = [0u32; 8];
        for _ in 0..draws {
            counts[measure_sample(&psi, &mut rng).unwrap()] += 1;
        }
        for (c, p) in counts.iter().zip(&row) {
            let sigma = sqrt(draws as f64 * p * (1.0 - p)).max(1.0);
            assert!((f64::from(*c) - draws as f64 * p).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn caps_and_ranges() {
        let ham = ProposalHamiltonian::with_parameters(Matrix::zeros(13, 13), vec![1.0; 13], 0.5, 2.0, 1.0).unwrap();
        assert!(matches!(evolve_exact(&ham, 0), Err(Error::ResourceLimit { cap: 12, .. })));
        let ranges = HyperparameterRanges::default();
        assert!(ProposalHamiltonian::sampled(Matrix::zeros(1, 1), vec![1.0], 0.7, 5, &ranges).is_err());
        assert!(ProposalHamiltonian::sampled(Matrix::zeros(1, 1), vec![1.0], 0.3, 21, &ranges).is_err());
        let zero = ProposalHamiltonian::sampled(Matrix::zeros(2, 2), vec![0.0; 2], 0.3, 4, &ranges).unwrap();
        assert_eq!(zero.alpha(), 1.0);
        let mut rng = ChainRng::seed_from_u64(0);
        for _ in 0..1000 {
            let (g, t) = ranges.sample(&mut rng);
            assert!(ranges.contains(g, t));
        }
    }

    #[test]
    fn statevector_dump_format() {
        let s = StateVector::basis(1, 1);
        let text = alloc::format!("{s}");
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("0 0.0"));
        assert!(lines.next().unwrap().starts_with("1 1.0"));
        assert_eq!(basis_index(&[1, 0, 1]), 5);
    }
}
