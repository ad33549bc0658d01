//! BPSK modulation over an AWGN channel.
//!
//! Convention: unit symbol energy and `sigma^2 = 1 / (2 * rate * 10^(EbNo/10))`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Human-readable statement of the Eb/No convention, printed in reports.
pub const EBNO_CONVENTION: &str = "sigma^2 = 1/(2*rate*10^(EbNo_dB/10)), BPSK s = 1-2c";

/// A received block and everything derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelObservation {
    pub received: Vec<f64>,
    pub noise_variance: f64,
    pub ebno_db: f64,
    pub llr: Vec<f64>,
}

impl ChannelObservation {
    /// Wraps an externally produced received vector.
    pub fn new(received: Vec<f64>, noise_variance: f64, ebno_db: f64) -> Result<Self> {
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(Error::Parameter(format!(
                "noise variance must be positive and finite, got {noise_variance}"
            )));
        }
        let llr = received.iter().map(|r| 2.0 * r / noise_variance).collect();
        Ok(ChannelObservation {
            received,
            noise_variance,
            ebno_db,
            llr,
        })
    }

    pub fn len(&self) -> usize {
        self.received.len()
    }

    pub fn is_empty(&self) -> bool {
        self.received.is_empty()
    }

    /// Sign decisions on the received values (`R < 0` is a one).
    pub fn hard_decision(&self) -> BitVector {
        BitVector::from_bools(self.received.iter().map(|&r| r < 0.0))
    }
}

/// Maps bit 0 to +1 and bit 1 to -1.
pub fn modulate(c: &BitVector) -> Vec<f64> {
    c.iter().map(|b| if b { -1.0 } else { 1.0 }).collect()
}

pub fn noise_variance(ebno_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::Parameter(format!("rate must lie in (0, 1], got {rate}")));
    }
    if !ebno_db.is_finite() {
        return Err(Error::Parameter(format!("Eb/No must be finite, got {ebno_db}")));
    }
    let var = 1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0));
    if var > 0.0 {
        Ok(var)
    } else {
        Err(Error::Parameter(format!(
            "Eb/No {ebno_db} dB underflows the noise variance"
        )))
    }
}

/// Adds i.i.d. Gaussian noise of the variance implied by `ebno_db` and `rate`.
pub fn transmit<R: Rng + ?Sized>(
    signal: &[f64],
    ebno_db: f64,
    rate: f64,
    rng: &mut R,
) -> Result<ChannelObservation> {
    let var = noise_variance(ebno_db, rate)?;
    let sigma = var.sqrt();
    let received = signal
        .iter()
        .map(|&s| {
            let z: f64 = rng.sample(StandardNormal);
            s + sigma * z
        })
        .collect();
    ChannelObservation::new(received, var, ebno_db)
}

/// Intrinsic log-likelihood ratios `2 R / sigma^2`.
pub fn llr_init(obs: &ChannelObservation) -> Vec<f64> {
    obs.received
        .iter()
        .map(|r| 2.0 * r / obs.noise_variance)
        .collect()
}

/// Gaussian tail probability `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}
