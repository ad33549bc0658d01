use std::fmt;

use super::{EnergyModel, HigherOrderModel, QuadraticModel};
use crate::code::ParityCheckMatrix;

/// How couplers are counted; printed next to every report.
pub const COUPLER_CONVENTION: &str = "couplers = off-diagonal nonzeros of the symmetric Q matrix \
(2 per variable pair); coupler_pairs = distinct unordered pairs; co-designed machine: couplers = nnz(H)";

/// Hardware resources needed to realise a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceReport {
    /// Ising spins. For the co-designed machine these are the code-bit nodes.
    pub num_spins: usize,
    /// Auxiliary variables, or parity units (one per check) for the
    /// co-designed machine.
    pub num_aux_spins: usize,
    pub num_couplers: usize,
    pub num_coupler_pairs: usize,
    pub linear_terms: usize,
}

impl ResourceReport {
    /// The co-designed machine needs one coupler per nonzero of `H` and one
    /// parity unit per check.
    pub fn co_designed(h: &ParityCheckMatrix) -> Self {
        ResourceReport {
            num_spins: h.n(),
            num_aux_spins: h.m(),
            num_couplers: h.nnz(),
            num_coupler_pairs: h.nnz(),
            linear_terms: h.n(),
        }
    }

    pub fn quadratic(q: &QuadraticModel) -> Self {
        let pairs = q.quadratic().len();
        ResourceReport {
            num_spins: q.num_vars(),
            num_aux_spins: q.num_vars() - q.num_code_bits(),
            num_couplers: 2 * pairs,
            num_coupler_pairs: pairs,
            linear_terms: q.linear().iter().filter(|&&a| a != 0.0).count(),
        }
    }

    pub fn higher_order(model: &HigherOrderModel) -> Self {
        let nnz = model.checks().iter().map(Vec::len).sum();
        ResourceReport {
            num_spins: model.n(),
            num_aux_spins: model.checks().len(),
            num_couplers: nnz,
            num_coupler_pairs: nnz,
            linear_terms: model.bias().iter().filter(|&&b| b != 0.0).count(),
        }
    }
}

impl fmt::Display for ResourceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "spins={} aux={} couplers={} coupler_pairs={} linear_terms={}",
            self.num_spins,
            self.num_aux_spins,
            self.num_couplers,
            self.num_coupler_pairs,
            self.linear_terms
        )
    }
}

pub fn resource_report(model: &EnergyModel) -> ResourceReport {
    match model {
        EnergyModel::Quadratic(q) => ResourceReport::quadratic(q),
        EnergyModel::HigherOrder(h) => ResourceReport::higher_order(h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::{build_qubo, AuxEncoding};

    #[test]
    fn empty_matrix_has_no_couplers() {
        let h = ParityCheckMatrix::from_rows(0, 3, vec![]).unwrap();
        assert_eq!(ResourceReport::co_designed(&h).num_couplers, 0);
    }

    #[test]
    fn single_check_counts() {
        // degree 4, unary: 3 aux, 7 variables, C(7,2) = 21 pairs
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 1, 1]]).unwrap();
        let q = build_qubo(&h, &[1.0; 4], 1.0, AuxEncoding::Unary).unwrap();
        let rep = ResourceReport::quadratic(&q);
        assert_eq!(rep.num_aux_spins, 3);
        assert_eq!(rep.num_coupler_pairs, 21);
        assert_eq!(rep.num_couplers, 42);
        assert_eq!(ResourceReport::co_designed(&h).to_string(), "spins=4 aux=1 couplers=4 coupler_pairs=4 linear_terms=4");
    }
}
