//! Coarse-grained quantum-enhanced Markov chain Monte Carlo for Ising spin glasses.
//!
//! The crate is `no_std` with `alloc`. It contains everything that is pure
//! computation:
//!
//! - [`ising`]: instances, spin states, energies and exact brute-force oracles.
//! - [`emulator`]: statevector emulation of the proposal unitary `exp(-iHt)`.
//! - [`proposals`]: classical, full quantum and coarse-grained proposal strategies.
//! - [`mcmc`]: the Metropolis-Hastings chain driver, traces and summaries.
//! - [`spectral`]: transition matrices, spectral gaps, mixing bounds and scaling fits.
//! - [`linalg`]: the small dense linear algebra kernel the above rely on.
//!
//! File formats, configuration, parallel scheduling and the CLI live in the
//! companion `cgqmc` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod emulator;
pub mod error;
pub mod ising;
pub mod linalg;
mod math;
pub mod mcmc;
pub mod proposals;
pub mod seed;
pub mod spectral;

pub use error::{Error, Result};
pub use ising::{ExactDistribution, IsingInstance, ModelClass, SpinState};
pub use proposals::{EvolutionMode, HyperparameterRanges, ProposalStrategy, StrategyKind};

/// Random number generator used for every seeded stream in the crate.
pub type ChainRng = rand_chacha::ChaCha8Rng;
