//! Code construction: protographs, lifting, systematic encoding and file I/O.

mod base_graph;
mod generator;
pub mod io;
mod matrix;

pub use base_graph::{bundled_bg1, expand_base_graph, BaseEntry, BaseGraph, RateLabel};
pub use generator::{build_generator, GeneratorMatrix};
pub use io::{load_code, CodeFormat, LoadedCode};
pub use matrix::ParityCheckMatrix;

use crate::bits::BitVector;
use crate::error::Result;

/// Everything needed to run a code end to end: the parity-check matrix, its
/// systematic encoder and a label for reports.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    pub h: ParityCheckMatrix,
    pub generator: GeneratorMatrix,
    pub label: String,
    pub z: Option<usize>,
}

impl LdpcCode {
    pub fn new(h: ParityCheckMatrix, label: impl Into<String>, z: Option<usize>) -> Self {
        let generator = GeneratorMatrix::from_parity_check(&h);
        LdpcCode {
            h,
            generator,
            label: label.into(),
            z,
        }
    }

    pub fn from_base_graph(bg: &BaseGraph, z: usize, label: impl Into<String>) -> Result<Self> {
        Ok(Self::new(bg.expand(z)?, label, Some(z)))
    }

    /// The bundled BG1-shaped protograph lifted by `z`.
    pub fn bundled_bg1(z: usize) -> Result<Self> {
        Self::from_base_graph(&bundled_bg1(), z, "bg1")
    }

    pub fn n(&self) -> usize {
        self.h.n()
    }

    pub fn k(&self) -> usize {
        self.generator.k()
    }

    /// Effective rate `k / n` used for the Eb/No conversion.
    pub fn rate(&self) -> f64 {
        self.generator.rate()
    }

    pub fn encode(&self, message: &BitVector) -> Result<BitVector> {
        self.generator.encode(message)
    }

    pub fn message_of(&self, codeword: &BitVector) -> Result<BitVector> {
        self.generator.extract_message(codeword)
    }
}
