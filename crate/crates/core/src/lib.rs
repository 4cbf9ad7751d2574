//! Contracted quantum eigensolver with a shadow ansatz, simulated exactly on
//! dense statevectors.
//!
//! Pipeline: [`fcidump`] integrals → [`fermion`] Jordan–Wigner map →
//! [`pauli::PauliSum`] Hamiltonian → [`solver::run_cqe`], measured through
//! [`shadows`] and checked against [`oracle`].

pub mod clifford;
pub mod error;
pub mod fcidump;
pub mod fermion;
pub mod line_search;
pub mod oracle;
pub mod pauli;
pub mod rng;
pub mod shadows;
pub mod solver;
pub mod statevector;

pub use error::{CqeError, Result};
pub use pauli::{Pauli, PauliKey, PauliString, PauliSum, Phase};
pub use statevector::Statevector;

/// Qubit Hamiltonian of an integral set.
pub fn qubit_hamiltonian(ints: &fcidump::IntegralSet) -> Result<PauliSum> {
    fermion::map_operator(&fcidump::build_hamiltonian(ints))
}
