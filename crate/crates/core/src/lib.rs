//! Observer-inclusive measurement simulation.
//!
//! The observer's memory is part of the quantum state. Measurement is a
//! unitary that writes an outcome into a memory register. Nothing collapses:
//! the joint state branches, and each branch carries the squared-modulus
//! measure of its coefficient.
//!
//! * [`hilbert`]: labeled basis states, tensor products, dense operators.
//! * [`measure`]: the squared-modulus measure on coefficients and subsets.
//! * [`branching`]: sequential measurements, branch ensembles, count classes.
//! * [`asymptotics`]: modal class, typicality, and residual measure at large N.
//! * [`cat`]: the record operator `U` and the superposition observer `U'`.
//! * [`cli`]: the experiment runner behind the `everett` binary.

pub mod asymptotics;
pub mod branching;
pub mod cat;
pub mod cli;
pub mod error;
pub mod hilbert;
pub mod measure;

pub use error::{Error, Result};
