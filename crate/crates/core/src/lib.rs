//! Numerical laboratory for disordered free-fermion topological phases: structured
//! linear algebra over real structures, Clifford pseudo-symmetries, tenfold-way
//! classification, lattice models with on-site disorder, bulk invariants and
//! half-space compressions.

pub mod boundary;
pub mod clifford;
pub mod error;
pub mod experiment;
pub mod invariants;
pub mod lattice;
pub mod linalg;
pub mod structured;
pub mod symmetry;

pub use error::{Error, Result};
