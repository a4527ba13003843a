//! Symbolic geometric mechanics on coordinate charts.

pub mod cli;
pub mod geomcalc;
pub mod hamiltonian;
pub mod lagrangian;
pub mod symexpr;
pub mod tangentstruct;
pub mod tulczyjew;
pub mod verdict;
pub mod weylnum;

pub use verdict::Verdict;
