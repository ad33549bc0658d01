//! Single-spin-flip Metropolis annealing.
//!
//! Both energy families are annealed in spin space. The quadratic models go
//! through [`to_ising`] and keep a local field per spin, so a flip delta costs
//! one multiply; the higher-order model keeps the parity of every check and
//! sums the parities of the checks touching the spin.

use rand::{Rng, RngCore};
use rand_distr::Exp1;

use crate::bits::BitVector;
use crate::channel::ChannelObservation;
use crate::code::ParityCheckMatrix;
use crate::error::{Error, Result};
use crate::formulation::{
    build_higher_order, build_qubo, spins_to_bits, to_ising, Formulation, HigherOrderModel,
    IsingModel, QuadraticModel,
};
use crate::rng::{self, StreamRng};
use crate::DecodeOutcome;

/// Uphill moves with `beta * delta` beyond this are rejected without a draw;
/// `exp(-40)` is about `4e-18`.
const MAX_EXPONENT: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SaConfig {
    pub sweeps: usize,
    pub num_anneals: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub seed: u64,
    /// Recompute energy and parities from scratch after every sweep.
    pub check_consistency: bool,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            sweeps: 10_000,
            num_anneals: 10,
            beta_start: 0.1,
            beta_end: 5.0,
            seed: 0,
            check_consistency: cfg!(debug_assertions),
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::Config("sweeps must be at least 1".into()));
        }
        if self.num_anneals == 0 {
            return Err(Error::Config("num_anneals must be at least 1".into()));
        }
        if !(self.beta_start > 0.0 && self.beta_start <= self.beta_end && self.beta_end.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < beta_start <= beta_end, got {} -> {}",
                self.beta_start, self.beta_end
            )));
        }
        Ok(())
    }

    /// Inverse temperature for each sweep, geometric from start to end.
    pub fn betas(&self) -> Vec<f64> {
        if self.sweeps == 1 {
            return vec![self.beta_end];
        }
        let ratio = (self.beta_end / self.beta_start).ln();
        (0..self.sweeps)
            .map(|s| self.beta_start * (ratio * s as f64 / (self.sweeps - 1) as f64).exp())
            .collect()
    }
}

/// Incremental state for single-spin-flip dynamics.
pub trait SpinSystem {
    fn num_vars(&self) -> usize;
    fn spins(&self) -> &[i8];
    /// Tracked energy.
    fn energy(&self) -> f64;
    /// `E(after flipping i) - E(now)`.
    fn delta(&self, i: usize) -> f64;
    /// Flips spin `i`, whose delta the caller has just computed.
    fn flip(&mut self, i: usize, delta: f64);
    /// Energy evaluated from scratch.
    fn recompute_energy(&self) -> f64;
    /// Checks every cached quantity against a full recompute.
    fn verify(&self, tol: f64) -> Result<()>;
}

/// Higher-order state: spins plus cached check parities.
#[derive(Debug, Clone)]
pub struct HigherOrderState<'a> {
    model: &'a HigherOrderModel,
    var_ptr: Vec<usize>,
    var_chk: Vec<u32>,
    /// `-2 bias_i`, the linear part of the flip delta for spin `+1`.
    lin: Vec<f64>,
    spins: Vec<i8>,
    parities: Vec<i8>,
    energy: f64,
}

impl<'a> HigherOrderState<'a> {
    pub fn new(model: &'a HigherOrderModel, spins: Vec<i8>) -> Result<Self> {
        Error::check_len(model.n(), spins.len())?;
        let parities = (0..model.checks().len())
            .map(|j| model.parity(j, &spins))
            .collect();
        let energy = model.energy(&spins)?;
        let mut var_ptr = vec![0];
        let mut var_chk = Vec::new();
        for i in 0..model.n() {
            var_chk.extend(model.var_checks(i).iter().map(|&j| j as u32));
            var_ptr.push(var_chk.len());
        }
        Ok(HigherOrderState {
            model,
            var_ptr,
            var_chk,
            lin: model.bias().iter().map(|&b| -2.0 * b).collect(),
            spins,
            parities,
            energy,
        })
    }

    pub fn parities(&self) -> &[i8] {
        &self.parities
    }
}

impl SpinSystem for HigherOrderState<'_> {
    fn num_vars(&self) -> usize {
        self.spins.len()
    }

    fn spins(&self) -> &[i8] {
        &self.spins
    }

    fn energy(&self) -> f64 {
        self.energy
    }

    #[inline]
    fn delta(&self, i: usize) -> f64 {
        let mut p = 0i32;
        for &j in &self.var_chk[self.var_ptr[i]..self.var_ptr[i + 1]] {
            p += self.parities[j as usize] as i32;
        }
        self.lin[i] * self.spins[i] as f64 + self.model.alpha() * p as f64
    }

    #[inline]
    fn flip(&mut self, i: usize, delta: f64) {
        self.energy += delta;
        self.spins[i] = -self.spins[i];
        for &j in &self.var_chk[self.var_ptr[i]..self.var_ptr[i + 1]] {
            self.parities[j as usize] = -self.parities[j as usize];
        }
    }

    fn recompute_energy(&self) -> f64 {
        self.model.energy(&self.spins).expect("length checked at construction")
    }

    fn verify(&self, tol: f64) -> Result<()> {
        for j in 0..self.parities.len() {
            if self.parities[j] != self.model.parity(j, &self.spins) {
                return Err(Error::Integrity(format!("cached parity of check {j} is stale")));
            }
        }
        check_energy(self.energy, self.recompute_energy(), tol)
    }
}

/// Compressed neighbour lists of an Ising model.
#[derive(Debug, Clone)]
pub struct Couplings {
    ptr: Vec<usize>,
    other: Vec<u32>,
    weight: Vec<f64>,
}

impl Couplings {
    pub fn new(model: &IsingModel) -> Self {
        let adj = model.adjacency();
        let mut ptr = Vec::with_capacity(adj.len() + 1);
        let mut other = Vec::new();
        let mut weight = Vec::new();
        ptr.push(0);
        for list in adj {
            for (b, j) in list {
                other.push(b as u32);
                weight.push(j);
            }
            ptr.push(other.len());
        }
        Couplings { ptr, other, weight }
    }
}

/// Ising state with a cached local field `h_i + sum_j J_ij s_j` per spin.
#[derive(Debug, Clone)]
pub struct IsingState<'a> {
    model: &'a IsingModel,
    couplings: &'a Couplings,
    spins: Vec<i8>,
    field: Vec<f64>,
    energy: f64,
}

impl<'a> IsingState<'a> {
    pub fn new(model: &'a IsingModel, couplings: &'a Couplings, spins: Vec<i8>) -> Result<Self> {
        Error::check_len(model.num_vars(), spins.len())?;
        let field = local_fields(model, couplings, &spins);
        let energy = model.energy(&spins)?;
        Ok(IsingState {
            model,
            couplings,
            spins,
            field,
            energy,
        })
    }
}

fn local_fields(model: &IsingModel, c: &Couplings, spins: &[i8]) -> Vec<f64> {
    (0..spins.len())
        .map(|i| {
            let mut f = model.h[i];
            for e in c.ptr[i]..c.ptr[i + 1] {
                f += c.weight[e] * spins[c.other[e] as usize] as f64;
            }
            f
        })
        .collect()
}

impl SpinSystem for IsingState<'_> {
    fn num_vars(&self) -> usize {
        self.spins.len()
    }

    fn spins(&self) -> &[i8] {
        &self.spins
    }

    fn energy(&self) -> f64 {
        self.energy
    }

    #[inline]
    fn delta(&self, i: usize) -> f64 {
        2.0 * self.spins[i] as f64 * self.field[i]
    }

    #[inline]
    fn flip(&mut self, i: usize, delta: f64) {
        self.energy += delta;
        let s = self.spins[i] as f64;
        self.spins[i] = -self.spins[i];
        let c = self.couplings;
        for e in c.ptr[i]..c.ptr[i + 1] {
            self.field[c.other[e] as usize] -= 2.0 * c.weight[e] * s;
        }
    }

    fn recompute_energy(&self) -> f64 {
        self.model.energy(&self.spins).expect("length checked at construction")
    }

    fn verify(&self, tol: f64) -> Result<()> {
        let fresh = local_fields(self.model, self.couplings, &self.spins);
        for (i, (a, b)) in self.field.iter().zip(&fresh).enumerate() {
            if (a - b).abs() > tol {
                return Err(Error::Integrity(format!("local field of spin {i} drifted")));
            }
        }
        check_energy(self.energy, self.recompute_energy(), tol)
    }
}

fn check_energy(tracked: f64, fresh: f64, tol: f64) -> Result<()> {
    if (tracked - fresh).abs() > tol {
        return Err(Error::Integrity(format!(
            "tracked energy {tracked} differs from recomputed {fresh}"
        )));
    }
    Ok(())
}

/// Best state of one anneal.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealRun {
    pub spins: Vec<i8>,
    pub energy: f64,
    pub sweeps: usize,
}

/// Fisher-Yates with Lemire's multiply-shift bounded draw. The bias is below
/// `n / 2^32`, far under anything a sweep could resolve.
#[inline]
fn shuffle(order: &mut [usize], rng: &mut StreamRng) {
    for i in (1..order.len()).rev() {
        let j = ((rng.next_u32() as u64 * (i as u64 + 1)) >> 32) as usize;
        order.swap(i, j);
    }
}

/// One Metropolis sweep in a fresh random order; returns accepted flips.
///
/// An uphill move is accepted when `beta * delta < E` with `E ~ Exp(1)`,
/// which is the Metropolis rule `u < exp(-beta * delta)` with `E = -ln u`.
pub fn sweep<S: SpinSystem>(sys: &mut S, beta: f64, order: &mut [usize], rng: &mut StreamRng) -> usize {
    shuffle(order, rng);
    let mut accepted = 0;
    for &i in order.iter() {
        let d = sys.delta(i);
        let accept = d <= 0.0 || {
            let x = beta * d;
            x < MAX_EXPONENT && x < rng.sample::<f64, _>(Exp1)
        };
        if accept {
            sys.flip(i, d);
            accepted += 1;
        }
    }
    accepted
}

/// Anneals one system from its current state. The best state is sampled at
/// sweep boundaries; its energy is the tracked value.
pub fn anneal_system<S: SpinSystem>(sys: &mut S, cfg: &SaConfig, rng: &mut StreamRng) -> Result<AnnealRun> {
    let mut order: Vec<usize> = (0..sys.num_vars()).collect();
    let mut best = AnnealRun {
        spins: sys.spins().to_vec(),
        energy: sys.energy(),
        sweeps: cfg.sweeps,
    };
    for beta in cfg.betas() {
        sweep(sys, beta, &mut order, rng);
        if cfg.check_consistency {
            sys.verify(1e-6)?;
        }
        if sys.energy() < best.energy {
            best.energy = sys.energy();
            best.spins.copy_from_slice(sys.spins());
        }
    }
    Ok(best)
}

fn random_spins(n: usize, rng: &mut StreamRng) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// The model being annealed, in the spin form the annealer works on.
#[derive(Debug, Clone)]
pub enum AnnealTarget {
    HigherOrder(HigherOrderModel),
    Ising(IsingModel, Couplings),
}

impl AnnealTarget {
    pub fn higher_order(model: HigherOrderModel) -> Self {
        AnnealTarget::HigherOrder(model)
    }

    pub fn quadratic(q: &QuadraticModel) -> Self {
        let ising = to_ising(q);
        let couplings = Couplings::new(&ising);
        AnnealTarget::Ising(ising, couplings)
    }

    pub fn num_vars(&self) -> usize {
        match self {
            AnnealTarget::HigherOrder(m) => m.n(),
            AnnealTarget::Ising(m, _) => m.num_vars(),
        }
    }

    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        match self {
            AnnealTarget::HigherOrder(m) => m.energy(spins),
            AnnealTarget::Ising(m, _) => m.energy(spins),
        }
    }
}

/// Runs `cfg.num_anneals` independent anneals from random states. Anneal `a`
/// draws from the stream `(cfg.seed, a)`.
pub fn anneal(target: &AnnealTarget, cfg: &SaConfig) -> Result<Vec<AnnealRun>> {
    cfg.validate()?;
    (0..cfg.num_anneals)
        .map(|a| {
            let mut rng = rng::stream(cfg.seed, &[a as u64]);
            let init = random_spins(target.num_vars(), &mut rng);
            let mut run = match target {
                AnnealTarget::HigherOrder(m) => {
                    anneal_system(&mut HigherOrderState::new(m, init)?, cfg, &mut rng)?
                }
                AnnealTarget::Ising(m, c) => {
                    anneal_system(&mut IsingState::new(m, c, init)?, cfg, &mut rng)?
                }
            };
            // exact energy of the kept state rather than the running sum
            run.energy = target.energy(&run.spins)?;
            Ok(run)
        })
        .collect()
}

/// Builds the energy model of `formulation` for an observation.
pub fn build_target(
    h: &ParityCheckMatrix,
    obs: &ChannelObservation,
    formulation: Formulation,
    alpha: f64,
) -> Result<(AnnealTarget, Option<QuadraticModel>)> {
    match formulation.encoding() {
        None => Ok((
            AnnealTarget::higher_order(build_higher_order(h, &obs.received, alpha)?),
            None,
        )),
        Some(enc) => {
            let q = build_qubo(h, &obs.received, alpha, enc)?;
            Ok((AnnealTarget::quadratic(&q), Some(q)))
        }
    }
}

/// Anneals and returns one outcome per anneal, code bits only.
pub fn sa_ensemble(
    h: &ParityCheckMatrix,
    obs: &ChannelObservation,
    formulation: Formulation,
    alpha: f64,
    cfg: &SaConfig,
) -> Result<Vec<DecodeOutcome>> {
    let (target, qubo) = build_target(h, obs, formulation, alpha)?;
    anneal(&target, cfg)?
        .into_iter()
        .map(|run| {
            let bits = match &qubo {
                // QUBO spins follow s = 2x - 1
                Some(q) => q.project(&BitVector::from_bools(run.spins.iter().map(|&s| s > 0)))?,
                None => spins_to_bits(&run.spins),
            };
            Ok(DecodeOutcome {
                success: h.is_codeword(&bits)?,
                bits,
                iterations: run.sweeps,
                energy: Some(run.energy),
            })
        })
        .collect()
}

/// Keeps the lowest-energy anneal; ties go to the lexicographically smaller
/// codeword.
pub fn decode_via_sa(
    h: &ParityCheckMatrix,
    obs: &ChannelObservation,
    formulation: Formulation,
    alpha: f64,
    cfg: &SaConfig,
) -> Result<DecodeOutcome> {
    let runs = sa_ensemble(h, obs, formulation, alpha, cfg)?;
    Ok(select_best(runs))
}

pub(crate) fn select_best(runs: Vec<DecodeOutcome>) -> DecodeOutcome {
    runs.into_iter()
        .min_by(|a, b| {
            let (ea, eb) = (a.energy.unwrap_or(f64::INFINITY), b.energy.unwrap_or(f64::INFINITY));
            ea.total_cmp(&eb).then_with(|| a.bits.lex_cmp(&b.bits))
        })
        .expect("at least one anneal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::modulate;
    use crate::formulation::bits_to_spins;

    fn quick(seed: u64) -> SaConfig {
        SaConfig {
            sweeps: 200,
            num_anneals: 10,
            seed,
            check_consistency: true,
            ..SaConfig::default()
        }
    }

    #[test]
    fn geometric_schedule() {
        let cfg = SaConfig {
            sweeps: 3,
            beta_start: 1.0,
            beta_end: 4.0,
            ..SaConfig::default()
        };
        let b = cfg.betas();
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 2.0).abs() < 1e-12 && (b[2] - 4.0).abs() < 1e-12);
        assert!(SaConfig { beta_start: 0.0, ..cfg.clone() }.validate().is_err());
        assert!(SaConfig { beta_end: 0.5, ..cfg.clone() }.validate().is_err());
        assert!(SaConfig { sweeps: 0, ..cfg }.validate().is_err());
    }

    #[test]
    fn isolated_spin_delta() {
        let model = HigherOrderModel::new(vec![-2.0 * 0.7], vec![], 1.0).unwrap();
        let st = HigherOrderState::new(&model, vec![1]).unwrap();
        assert!((st.delta(0) - 4.0 * 0.7).abs() < 1e-12);
        let model = HigherOrderModel::new(vec![0.0; 3], vec![vec![0, 1, 2]], 2.5).unwrap();
        let st = HigherOrderState::new(&model, vec![1, 1, 1]).unwrap();
        assert!((st.delta(1) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn bias_only_model_aligns_with_r() {
        let r = [0.9, -0.2, 0.05, -1.3];
        let model = HigherOrderModel::new(r.iter().map(|x| -2.0 * x).collect(), vec![], 1.0).unwrap();
        let runs = anneal(&AnnealTarget::higher_order(model), &quick(3)).unwrap();
        for run in runs {
            assert_eq!(run.spins, vec![1, -1, 1, -1]);
        }
    }

    #[test]
    fn three_spin_check_recovers_codeword() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 1]]).unwrap();
        let c = BitVector::from_bits(&[1, 1, 0]);
        let model = build_higher_order(&h, &modulate(&c), 1.0).unwrap();
        let runs = anneal(&AnnealTarget::higher_order(model), &quick(5)).unwrap();
        let hits = runs.iter().filter(|r| r.spins == bits_to_spins(&c)).count();
        assert!(hits >= 9, "{hits}/10");
    }

    #[test]
    fn noiseless_decode_all_formulations() {
        let code = crate::code::LdpcCode::bundled_bg1(2).unwrap();
        let msg = BitVector::from_bools((0..code.k()).map(|i| i % 3 == 0));
        let c = code.encode(&msg).unwrap();
        let obs = ChannelObservation::new(modulate(&c), 1e-3, 100.0).unwrap();
        for f in [Formulation::HigherOrder, Formulation::Binary, Formulation::Unary] {
            let cfg = SaConfig {
                sweeps: 10_000,
                check_consistency: false,
                ..quick(9)
            };
            let out = decode_via_sa(&code.h, &obs, f, 1.0, &cfg).unwrap();
            assert_eq!(out.bits.len(), code.n(), "{f}");
            assert_eq!(out.bits, c, "{f}");
            assert!(out.success);
        }
    }

    #[test]
    fn same_seed_same_result() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0, 1], vec![0, 1, 1, 1]]).unwrap();
        let obs = ChannelObservation::new(vec![0.3, -0.8, 1.1, 0.2], 0.5, 3.0).unwrap();
        for f in [Formulation::HigherOrder, Formulation::Unary] {
            let a = sa_ensemble(&h, &obs, f, 2.0, &quick(11)).unwrap();
            let b = sa_ensemble(&h, &obs, f, 2.0, &quick(11)).unwrap();
            assert_eq!(a, b);
        }
    }
}
