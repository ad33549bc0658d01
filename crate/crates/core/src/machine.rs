//! Behavioral model of the parity-augmented Ising machine.
//!
//! Each code bit is a node voltage `v_i` in `[-rail, rail]`. Its spin is the
//! quantized sign (`v >= 0` is `+1`, i.e. bit 0). Every check has a parity
//! unit computing `P_j`, the product of the quantized spins on the check, and
//! feeds back `P_j * s_i` to node `i`, which is the parity of the other nodes.
//! In normalized units
//!
//! `dv_i/dt = (g(t) / tau) * [ 4 R_i / alpha + sum_{j ∋ i} P_j s_i ]`
//!
//! where `tau = C / J`. The bias polarity is the sign of `R_i` and its
//! magnitude is folded into `R_i`. Spin fixes clip a random node to a random
//! rail for a short time; their rate decays exponentially.
//!
//! The right-hand side is piecewise constant between quantizer switches, so
//! fixed small steps are used rather than event location.

use std::io::Write;

use rand::Rng;

use crate::bits::BitVector;
use crate::channel::ChannelObservation;
use crate::code::ParityCheckMatrix;
use crate::error::{Error, Result};
use crate::formulation::spins_to_bits;
use crate::rng::{self, StreamRng};
use crate::DecodeOutcome;

/// Initial node voltages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitMode {
    /// Uniform in `[-rail, rail]`.
    Random,
    /// Each node at the rail of its hard decision.
    HardDecision,
    /// `v_i = clamp(scale * R_i)`: reliable bits start near the rails.
    Received { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    /// Classic fixed-step fourth-order Runge-Kutta.
    Rk4 { dt: f64 },
    /// Dormand-Prince 5(4) with step control; `max_step` bounds the step as
    /// the quantizer makes the field discontinuous.
    Dopri5 { rtol: f64, atol: f64, max_step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinFix {
    /// Events per second at `t = 0`.
    pub initial_rate: f64,
    pub decay_time: f64,
    /// How long a clipped node is held at the rail.
    pub clip_duration: f64,
}

/// Optional coupling gain `g(t) = g_min + (1 - g_min)(1 - exp(-t / tau_g))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSchedule {
    pub g_min: f64,
    pub tau_g: f64,
}

impl GainSchedule {
    pub fn at(&self, t: f64) -> f64 {
        self.g_min + (1.0 - self.g_min) * (1.0 - (-t / self.tau_g).exp())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MachineConfig {
    /// `C / J` in seconds.
    pub time_constant: f64,
    pub total_time: f64,
    pub integrator: Integrator,
    pub alpha: f64,
    pub rail: f64,
    pub spinfix: Option<SpinFix>,
    pub gain: Option<GainSchedule>,
    pub init: InitMode,
    pub seed: u64,
}

impl Default for MachineConfig {
    fn default() -> Self {
        let tau = 1e-8;
        let dt = tau / 50.0;
        MachineConfig {
            time_constant: tau,
            total_time: 2.2e-6,
            integrator: Integrator::Rk4 { dt },
            alpha: 2.0,
            rail: 1.0,
            spinfix: Some(SpinFix {
                initial_rate: 2e9,
                decay_time: 8e-7,
                clip_duration: tau,
            }),
            gain: None,
            init: InitMode::Received { scale: 0.5 },
            seed: 0,
        }
    }
}

impl MachineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.time_constant > 0.0) {
            return bad(format!("time_constant must be positive, got {}", self.time_constant));
        }
        if !(self.total_time > 0.0) {
            return bad(format!("total_time must be positive, got {}", self.total_time));
        }
        if !(self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.rail > 0.0) {
            return bad(format!("rail must be positive, got {}", self.rail));
        }
        let limit = self.time_constant / 10.0;
        match self.integrator {
            Integrator::Rk4 { dt } => {
                if !(dt > 0.0) {
                    return bad(format!("dt must be positive, got {dt}"));
                }
                if dt >= self.time_constant {
                    return bad(format!(
                        "dt = {dt} is not below time_constant = {}; integration is unstable",
                        self.time_constant
                    ));
                }
                if dt >= limit {
                    return bad(format!("dt = {dt} must be below time_constant / 10 = {limit}"));
                }
            }
            Integrator::Dopri5 { rtol, atol, max_step } => {
                if !(rtol > 0.0 && atol > 0.0 && max_step > 0.0) {
                    return bad("adaptive tolerances and max_step must be positive".into());
                }
                if max_step >= limit {
                    return bad(format!("max_step = {max_step} must be below time_constant / 10"));
                }
            }
        }
        if let Some(sf) = self.spinfix {
            if !(sf.initial_rate >= 0.0 && sf.decay_time > 0.0 && sf.clip_duration >= 0.0) {
                return bad("spin-fix needs initial_rate >= 0, decay_time > 0, clip_duration >= 0".into());
            }
        }
        if let Some(g) = self.gain {
            if !(g.g_min >= 0.0 && g.g_min <= 1.0 && g.tau_g > 0.0) {
                return bad("gain needs 0 <= g_min <= 1 and tau_g > 0".into());
            }
        }
        Ok(())
    }

    /// Nominal step used for integration.
    pub fn nominal_step(&self) -> f64 {
        match self.integrator {
            Integrator::Rk4 { dt } => dt,
            Integrator::Dopri5 { max_step, .. } => max_step,
        }
    }
}

/// Voltages plus the digital side of the machine.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineState {
    pub voltages: Vec<f64>,
    pub time: f64,
    pub quantized: Vec<i8>,
    pub parities: Vec<i8>,
}

impl MachineState {
    pub fn new(h: &ParityCheckMatrix, voltages: Vec<f64>, time: f64) -> Result<Self> {
        Error::check_len(h.n(), voltages.len())?;
        let quantized: Vec<i8> = voltages.iter().map(|&v| quantize(v)).collect();
        let parities = parities_of(h, &quantized);
        Ok(MachineState {
            voltages,
            time,
            quantized,
            parities,
        })
    }

    pub fn bits(&self) -> BitVector {
        spins_to_bits(&self.quantized)
    }

    pub fn satisfied_checks(&self) -> usize {
        self.parities.iter().filter(|&&p| p > 0).count()
    }

    /// Re-quantizes after the voltages changed, flipping the parity of every
    /// check touching a node that switched. Returns the number of switches.
    fn requantize(&mut self, h: &ParityCheckMatrix) -> usize {
        let mut switched = 0;
        for i in 0..self.voltages.len() {
            let q = quantize(self.voltages[i]);
            if q != self.quantized[i] {
                self.quantized[i] = q;
                switched += 1;
                for &j in h.col(i) {
                    self.parities[j] = -self.parities[j];
                }
            }
        }
        switched
    }
}

#[inline]
fn quantize(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

pub fn parities_of(h: &ParityCheckMatrix, spins: &[i8]) -> Vec<i8> {
    h.rows().map(|row| row.iter().map(|&i| spins[i]).product()).collect()
}

/// Energy of the parity formulation on quantized spins, with `bias = -2R`.
pub fn quantized_energy(h: &ParityCheckMatrix, r: &[f64], alpha: f64, spins: &[i8]) -> f64 {
    let lin: f64 = r.iter().zip(spins).map(|(&ri, &s)| -2.0 * ri * s as f64).sum();
    let par: i64 = parities_of(h, spins).iter().map(|&p| p as i64).sum();
    lin - 0.5 * alpha * par as f64
}

/// Bracketed field of every node:
/// `4 R_i / alpha + g * sum_{j ∋ i} P_j s_i` with `s`, `P` from `v`.
pub fn field(h: &ParityCheckMatrix, r: &[f64], alpha: f64, gain: f64, v: &[f64], out: &mut [f64], parity: &mut [i8]) {
    for (j, row) in h.rows().enumerate() {
        let mut p = 1i8;
        for &i in row {
            p *= quantize(v[i]);
        }
        parity[j] = p;
    }
    for i in 0..v.len() {
        let s = quantize(v[i]) as i32;
        let sum: i32 = h.col(i).iter().map(|&j| parity[j] as i32).sum();
        out[i] = 4.0 * r[i] / alpha + gain * (sum * s) as f64;
    }
}

/// `dv/dt` at the given state; held (clipped) nodes have zero derivative.
pub fn derivative(state: &MachineState, h: &ParityCheckMatrix, r: &[f64], cfg: &MachineConfig) -> Vec<f64> {
    let mut sys = System::new(h, r, cfg);
    let mut out = vec![0.0; h.n()];
    sys.eval(state.time, &state.voltages, &mut out);
    out
}

/// Integration workspace for one run.
struct System<'a> {
    h: &'a ParityCheckMatrix,
    r: &'a [f64],
    cfg: &'a MachineConfig,
    rate: f64,
    parity: Vec<i8>,
    held_until: Vec<f64>,
}

impl<'a> System<'a> {
    fn new(h: &'a ParityCheckMatrix, r: &'a [f64], cfg: &'a MachineConfig) -> Self {
        System {
            h,
            r,
            cfg,
            rate: 1.0 / cfg.time_constant,
            parity: vec![1; h.m()],
            held_until: vec![f64::NEG_INFINITY; h.n()],
        }
    }

    fn eval(&mut self, t: f64, v: &[f64], out: &mut [f64]) {
        let gain = self.cfg.gain.map_or(1.0, |g| g.at(t));
        field(self.h, self.r, self.cfg.alpha, gain, v, out, &mut self.parity);
        for (i, d) in out.iter_mut().enumerate() {
            *d = if t < self.held_until[i] { 0.0 } else { *d * self.rate };
        }
    }
}

/// A clip event: node `node` held at `rail_sign * rail` from `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinFixEvent {
    pub time: f64,
    pub node: usize,
    pub rail_sign: i8,
}

/// Samples the inhomogeneous Poisson process `rate(t) = r0 exp(-t / tau_d)`
/// on `[0, total)` by inverting its cumulative intensity.
pub fn spinfix_events(sf: &SpinFix, n: usize, total: f64, rng: &mut StreamRng) -> Vec<SpinFixEvent> {
    let mut events = Vec::new();
    if n == 0 || sf.initial_rate <= 0.0 {
        return events;
    }
    let capacity = sf.initial_rate * sf.decay_time;
    let mut lambda = 0.0;
    loop {
        let u: f64 = rng.random();
        lambda += -(1.0 - u).ln();
        if lambda >= capacity {
            break;
        }
        let time = -sf.decay_time * (1.0 - lambda / capacity).ln();
        if time >= total {
            break;
        }
        events.push(SpinFixEvent {
            time,
            node: rng.random_range(0..n),
            rail_sign: if rng.random::<bool>() { 1 } else { -1 },
        });
    }
    events
}

/// Counters collected during a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub spinfix_events: usize,
    /// Steps in which at least one quantizer switched, outside spin fixes.
    pub quantization_events: usize,
    /// Of those, how many raised the quantized energy.
    pub energy_increases: usize,
    /// Steps in which more than one node switched.
    pub multi_switch_events: usize,
    /// Whether every node's field agrees with its rail at the end.
    pub stationary: bool,
}

/// Optional trajectory sink: `time,v0..v{k-1},satisfied_checks`.
pub struct Trajectory<'w> {
    writer: &'w mut dyn Write,
    nodes: usize,
}

impl<'w> Trajectory<'w> {
    pub fn new(writer: &'w mut dyn Write, n: usize, max_nodes: usize) -> Result<Self> {
        let nodes = n.min(max_nodes);
        let mut header = String::from("time");
        for i in 0..nodes {
            header.push_str(&format!(",v{i}"));
        }
        header.push_str(",satisfied_checks\n");
        writer.write_all(header.as_bytes())?;
        Ok(Trajectory { writer, nodes })
    }

    fn record(&mut self, s: &MachineState) -> Result<()> {
        let mut line = format!("{:e}", s.time);
        for v in &s.voltages[..self.nodes] {
            line.push_str(&format!(",{v:.6}"));
        }
        line.push_str(&format!(",{}\n", s.satisfied_checks()));
        self.writer.write_all(line.as_bytes())?;
        Ok(())
    }
}

fn initial_voltages(obs: &ChannelObservation, cfg: &MachineConfig, rng: &mut StreamRng) -> Vec<f64> {
    let rail = cfg.rail;
    match cfg.init {
        InitMode::Random => (0..obs.len()).map(|_| rng.random_range(-rail..=rail)).collect(),
        InitMode::HardDecision => obs
            .received
            .iter()
            .map(|&r| if r < 0.0 { -rail } else { rail })
            .collect(),
        InitMode::Received { scale } => obs
            .received
            .iter()
            .map(|&r| (scale * r * rail).clamp(-rail, rail))
            .collect(),
    }
}

/// RK4 increment over `dt` written into `next`.
fn rk4_step(sys: &mut System, t: f64, v: &[f64], dt: f64, next: &mut [f64], k: &mut [Vec<f64>; 5]) {
    let n = v.len();
    let [k1, k2, k3, k4, tmp] = k;
    sys.eval(t, v, k1);
    for i in 0..n {
        tmp[i] = v[i] + 0.5 * dt * k1[i];
    }
    sys.eval(t + 0.5 * dt, tmp, k2);
    for i in 0..n {
        tmp[i] = v[i] + 0.5 * dt * k2[i];
    }
    sys.eval(t + 0.5 * dt, tmp, k3);
    for i in 0..n {
        tmp[i] = v[i] + dt * k3[i];
    }
    sys.eval(t + dt, tmp, k4);
    for i in 0..n {
        next[i] = v[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand-Prince attempt; returns the scaled error norm.
fn dopri_step(
    sys: &mut System,
    t: f64,
    v: &[f64],
    dt: f64,
    next: &mut [f64],
    k: &mut [Vec<f64>; 7],
    tmp: &mut [f64],
    rtol: f64,
    atol: f64,
) -> f64 {
    let n = v.len();
    for s in 0..7 {
        for i in 0..n {
            let mut acc = v[i];
            for (p, a) in DP_A[s][..s].iter().enumerate() {
                acc += dt * a * k[p][i];
            }
            tmp[i] = acc;
        }
        let (done, rest) = k.split_at_mut(s);
        let _ = done;
        sys.eval(t + DP_C[s] * dt, tmp, &mut rest[0]);
    }
    let mut err2 = 0.0;
    for i in 0..n {
        let mut y5 = v[i];
        let mut y4 = v[i];
        for s in 0..7 {
            y5 += dt * DP_B5[s] * k[s][i];
            y4 += dt * DP_B4[s] * k[s][i];
        }
        next[i] = y5;
        let sc = atol + rtol * v[i].abs().max(y5.abs());
        err2 += ((y5 - y4) / sc).powi(2);
    }
    (err2 / n.max(1) as f64).sqrt()
}

/// Integrates from `state` to `until`, applying the given spin-fix events.
fn integrate(
    h: &ParityCheckMatrix,
    r: &[f64],
    cfg: &MachineConfig,
    state: &mut MachineState,
    until: f64,
    events: &[SpinFixEvent],
    mut trajectory: Option<&mut Trajectory>,
    stats: &mut RunStats,
) -> Result<()> {
    let n = h.n();
    let rail = cfg.rail;
    let clip = cfg.spinfix.map_or(0.0, |s| s.clip_duration);
    let mut sys = System::new(h, r, cfg);
    let mut next = vec![0.0; n];
    let mut rk: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
    let mut dp: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut next_event = events.partition_point(|e| e.time < state.time);
    let mut energy = quantized_energy(h, r, cfg.alpha, &state.quantized);
    let mut dt_adapt = cfg.nominal_step();
    if let Some(tr) = trajectory.as_deref_mut() {
        tr.record(state)?;
    }

    while state.time < until {
        // spin fixes due now
        let mut clipped = false;
        while next_event < events.len() && events[next_event].time <= state.time {
            let e = events[next_event];
            state.voltages[e.node] = e.rail_sign as f64 * rail;
            sys.held_until[e.node] = state.time + clip;
            next_event += 1;
            stats.spinfix_events += 1;
            clipped = true;
        }
        if clipped {
            state.requantize(h);
            energy = quantized_energy(h, r, cfg.alpha, &state.quantized);
        }
        for i in 0..n {
            if state.time < sys.held_until[i] {
                state.voltages[i] = state.voltages[i].signum() * rail;
            }
        }

        let horizon = events
            .get(next_event)
            .map_or(until, |e| e.time.min(until));
        let t = state.time;
        let dt = match cfg.integrator {
            Integrator::Rk4 { dt } => {
                let dt = dt.min(until - t);
                rk4_step(&mut sys, t, &state.voltages, dt, &mut next, &mut rk);
                dt
            }
            Integrator::Dopri5 { rtol, atol, max_step } => {
                let mut h_try = dt_adapt.min(max_step).min((horizon - t).max(1e-18));
                loop {
                    let err = dopri_step(&mut sys, t, &state.voltages, h_try, &mut next, &mut dp, &mut tmp, rtol, atol);
                    let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    if err <= 1.0 || h_try <= max_step * 1e-6 {
                        dt_adapt = (h_try * factor).min(max_step);
                        break h_try;
                    }
                    h_try *= factor;
                }
            }
        };
        for (v, &nv) in state.voltages.iter_mut().zip(&next) {
            *v = nv.clamp(-rail, rail);
        }
        state.time = t + dt;
        stats.steps += 1;

        let switched = state.requantize(h);
        if switched > 0 {
            let e = quantized_energy(h, r, cfg.alpha, &state.quantized);
            stats.quantization_events += 1;
            if switched > 1 {
                stats.multi_switch_events += 1;
            }
            if e > energy + 1e-9 {
                stats.energy_increases += 1;
            }
            energy = e;
        }
        if let Some(tr) = trajectory.as_deref_mut() {
            tr.record(state)?;
        }
    }
    Ok(())
}

/// Advances `state` by one nominal step without spin fixes.
pub fn step(state: &MachineState, h: &ParityCheckMatrix, r: &[f64], cfg: &MachineConfig) -> Result<MachineState> {
    cfg.validate()?;
    Error::check_len(h.n(), r.len())?;
    let mut next = state.clone();
    let until = state.time + cfg.nominal_step();
    let mut stats = RunStats::default();
    let quiet = MachineConfig {
        spinfix: None,
        ..cfg.clone()
    };
    integrate(h, r, &quiet, &mut next, until, &[], None, &mut stats)?;
    Ok(next)
}

/// Full run with statistics and an optional trajectory dump.
pub fn run_detailed(
    h: &ParityCheckMatrix,
    obs: &ChannelObservation,
    cfg: &MachineConfig,
    init: Option<Vec<f64>>,
    trajectory: Option<&mut Trajectory>,
) -> Result<(DecodeOutcome, MachineState, RunStats)> {
    cfg.validate()?;
    Error::check_len(h.n(), obs.len())?;
    let mut init_rng = rng::stream(cfg.seed, &[0]);
    let mut fix_rng = rng::stream(cfg.seed, &[1]);
    let v0 = match init {
        Some(v) => {
            Error::check_len(h.n(), v.len())?;
            v
        }
        None => initial_voltages(obs, cfg, &mut init_rng),
    };
    let events = match &cfg.spinfix {
        Some(sf) => spinfix_events(sf, h.n(), cfg.total_time, &mut fix_rng),
        None => Vec::new(),
    };
    let mut state = MachineState::new(h, v0, 0.0)?;
    let mut stats = RunStats::default();
    integrate(h, &obs.received, cfg, &mut state, cfg.total_time, &events, trajectory, &mut stats)?;

    if state.parities != parities_of(h, &state.quantized) {
        return Err(Error::Integrity("incremental parities diverged from recompute".into()));
    }
    let mut f = vec![0.0; h.n()];
    let mut scratch = vec![0; h.m()];
    let gain = cfg.gain.map_or(1.0, |g| g.at(state.time));
    field(h, &obs.received, cfg.alpha, gain, &state.voltages, &mut f, &mut scratch);
    stats.stationary = f
        .iter()
        .zip(&state.voltages)
        .all(|(&fi, &v)| v.abs() == cfg.rail && fi * v > 0.0);

    let bits = state.bits();
    let outcome = DecodeOutcome {
        success: h.is_codeword(&bits)?,
        bits,
        iterations: stats.steps,
        energy: Some(quantized_energy(h, &obs.received, cfg.alpha, &state.quantized)),
    };
    Ok((outcome, state, stats))
}

/// Decodes one observation: integrate to `total_time`, read the quantizers.
pub fn run(h: &ParityCheckMatrix, obs: &ChannelObservation, cfg: &MachineConfig) -> Result<DecodeOutcome> {
    run_detailed(h, obs, cfg, None, None).map(|(o, _, _)| o)
}
