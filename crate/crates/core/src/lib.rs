//! LDPC decoding as physical-computation optimization.
//!
//! The crate builds protograph LDPC codes in the 5G-NR style, pushes codewords
//! through a BPSK/AWGN channel and decodes them with several families of
//! decoders:
//!
//! * message passing ([`bp`]): sum-product and the Min-Sum variants,
//! * simulated annealing ([`sa`]) over the quadratic (QUBO) formulations with
//!   auxiliary variables, or over the higher-order parity formulation
//!   ([`formulation`]),
//! * a behavioral continuous-time model of an Ising machine extended with
//!   parity units ([`machine`]).
//!
//! [`metrics`] aggregates bit-error statistics and drives Monte-Carlo sweeps
//! with common random numbers across decoders.

pub mod bits;
pub mod bp;
pub mod channel;
pub mod code;
pub mod error;
pub mod formulation;
pub mod machine;
pub mod metrics;
pub mod parallel;
pub mod rng;
pub mod sa;

pub use bits::BitVector;
pub use code::{BaseGraph, GeneratorMatrix, ParityCheckMatrix};
pub use error::{Error, Result};

/// Result of a single decode attempt, shared by every decoder family.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Hard-decision codeword in codeword (column) order.
    pub bits: BitVector,
    /// `true` iff `bits` has an all-zero syndrome.
    pub success: bool,
    /// Message-passing iterations, annealing sweeps or integration steps.
    pub iterations: usize,
    /// Final energy for optimization-based decoders.
    pub energy: Option<f64>,
}
