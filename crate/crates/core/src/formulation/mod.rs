//! Energy formulations of LDPC decoding.
//!
//! * [`QuadraticModel`]: the QUBO obtained by squaring each parity constraint
//!   against an auxiliary integer encoded in unary or binary.
//! * [`HigherOrderModel`]: channel bias plus one full parity product per check,
//!   with no auxiliary variables.
//! * [`IsingModel`]: the spin form of a QUBO.

mod higher_order;
mod ising;
mod qubo;
mod resources;

use std::fmt;
use std::str::FromStr;

pub use higher_order::{bits_to_spins, build_higher_order, spins_to_bits, HigherOrderModel};
pub use ising::{qubo_spins, to_ising, IsingModel};
pub use qubo::{build_qubo, read_qubo_triplets, AuxEncoding, QuadraticModel, VarTag};
pub use resources::{resource_report, ResourceReport, COUPLER_CONVENTION};

use crate::error::Error;

/// Which energy model a decoder anneals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    Unary,
    Binary,
    HigherOrder,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::Unary => "unary",
            Formulation::Binary => "binary",
            Formulation::HigherOrder => "higher-order",
        }
    }

    pub fn encoding(self) -> Option<AuxEncoding> {
        match self {
            Formulation::Unary => Some(AuxEncoding::Unary),
            Formulation::Binary => Some(AuxEncoding::Binary),
            Formulation::HigherOrder => None,
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "unary" => Ok(Formulation::Unary),
            "binary" => Ok(Formulation::Binary),
            "higher-order" | "ho" | "co-designed" => Ok(Formulation::HigherOrder),
            other => Err(Error::Parameter(format!("unknown formulation '{other}'"))),
        }
    }
}

/// Either energy model, as consumed by the annealer.
#[derive(Debug, Clone)]
pub enum EnergyModel {
    Quadratic(QuadraticModel),
    HigherOrder(HigherOrderModel),
}

impl EnergyModel {
    pub fn num_vars(&self) -> usize {
        match self {
            EnergyModel::Quadratic(q) => q.num_vars(),
            EnergyModel::HigherOrder(h) => h.n(),
        }
    }
}
