//! Electronic-structure Hamiltonians, exact diagonalization, state-vector
//! simulation, Trotterized dynamics and robust phase estimation.

pub mod broombridge;
pub mod hamiltonian;
pub mod exactdiag;
pub mod simulator;
pub mod dynamics;
pub mod rpe;
pub mod resources;
pub mod analysis;
