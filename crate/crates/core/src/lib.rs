//! Trotterized Gross–Neveu circuits, diagonal-block compression and
//! desk-scale verification.
//!
//! * [`circuit`] — gate IR, CZ lowering, depth/count statistics
//! * [`model`] — Jordan–Wigner lattice Hamiltonian and observables
//! * [`trotter`] — SWAP-network Trotter step builders
//! * [`ldoa`] — least-squares diagonal approximation of interaction blocks
//! * [`statevector`] — simulation and Krylov exact evolution
//! * [`entropy`] — randomized-measurement Rényi-2 estimator

pub mod circuit;
pub mod entropy;
pub mod ldoa;
pub mod model;
pub mod statevector;
pub mod trotter;

pub use circuit::{Circuit, CircuitStats, DepthFilter, Gate};
pub use model::{Hamiltonian, LatticeParams, Observable, PauliString};
pub use trotter::{LdoaMode, TrotterOrder, TrotterPlan};
