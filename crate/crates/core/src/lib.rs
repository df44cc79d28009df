//! Compile probability distributions over `n`-bit strings into IQP circuits
//! with hidden qubits, and verify them by exact simulation.
//!
//! The exact route decomposes the target into `2^{n+1}` components with at
//! most two outcomes each ([`decompose::decompose_2sparse`]), encodes every
//! component in the phases of one hidden index
//! ([`synth::uma_phases_for_pair`]), and yields a circuit on `m = n + 1`
//! hidden qubits whose visible marginal is the target
//! ([`synth::exact_phase_table`]). The approximate route rounds the target
//! onto multiples of `2^{-m}` ([`decompose::round_to_dyadic`]) and uses only
//! `0`/`π` phases ([`synth::approx_phase_table`]).
//!
//! Phase tables lower to commuting `exp(iθ X_S)` rotations through a
//! Walsh–Hadamard transform ([`synth::walsh_lower`]). The [`sim`] module
//! evaluates visible marginals both by full state-vector simulation and as a
//! mixture of per-hidden-index row states.
//!
//! Outcomes are indexed big-endian: qubit 0 is the leftmost bit. Hidden
//! qubits come first.

pub mod bits;
pub mod cli;
pub mod decompose;
pub mod error;
pub mod probdist;
pub mod sim;
pub mod synth;

pub use error::{Error, Result};
pub use probdist::{ProbVector, SparseDist};
pub use synth::{GateList, PhaseTable};
