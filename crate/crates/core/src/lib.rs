//! Entanglement in adiabatic and circuit quantum algorithms: bipartite entropy of
//! state vectors, Exact Cover instances and their interpolated Hamiltonians,
//! the two-level Grover reduction, and the Shor register state.

pub mod cli;
pub mod error;
pub mod exactcover;
pub mod fmt;
pub mod grover;
pub mod lanczos;
pub mod shor;
pub mod solver;
pub mod statevec;
pub mod stats;

pub use num_complex;

pub use error::{Error, ErrorKind, Result};
pub use exactcover::{generate_instance, Assignment, Clause, ExactCoverInstance, InterpolatedHamiltonian};
pub use solver::{lowest_two, sweep, LowestTwo, SGrid, SolveMethod, SolverOptions, SweepProfile, SweepRecord};
pub use statevec::{entanglement, entropy, reduced_spectrum, schmidt_rank, BiPartition, EntanglementReport, StateVector};
