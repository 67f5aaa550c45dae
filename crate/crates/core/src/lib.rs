//! Quantum parent Hamiltonians of classical Markov chains.
//!
//! A reversible chain `M` with Gibbs stationary distribution defines a
//! frustration-free Hamiltonian whose ground state is the coherent Gibbs
//! state. The crate builds those operators for the Ising ring and for
//! weighted independent sets, computes their gaps, and prepares the ground
//! states by adiabatic evolution.

pub mod adiabatic;
pub mod error;
pub mod fit;
pub mod gibbs;
pub mod indepset;
pub mod graphs;
pub mod ising;
pub mod linalg;
pub mod markov;
pub mod parent;
pub mod sparse;
pub mod symmetry;

pub use error::{Error, Result};
