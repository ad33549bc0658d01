//! Monte-Carlo sweeps with common random numbers.
//!
//! Trial `t` at grid point `p` draws its message from stream `(seed, 0, t)`
//! and its noise from `(seed, 1, p, t)`, so every decoder sees the same
//! realizations. Decoder-internal randomness uses `(seed, 2, p, t)`.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use sha2::{Digest, Sha256};

use super::plan::{CodeSource, DecoderKind, DecoderSpec, SweepPlan};
use super::{expected_ber, fmt_g, AnnealEnsemble, BerStats};
use crate::bits::BitVector;
use crate::channel::{self, ChannelObservation, EBNO_CONVENTION};
use crate::code::{io::load_code, LdpcCode, LoadedCode};
use crate::error::{Error, Result};
use crate::parallel::{map_trials, Execution};
use crate::rng::{self, RNG_ALGORITHM};
use crate::{bp, machine, sa};

pub const CSV_COLUMNS: &str =
    "decoder,formulation,bg,Z,ebno_db,alpha,trials,bits,bit_errors,ber,ber_stderr,fer,sweeps_or_time,seed,status";

/// One decode of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub bit_errors: usize,
    pub success: bool,
    /// `E(BER(N_a))` for `N_a = 1..=anneals`, annealing decoders only.
    pub expected_ber: Option<Vec<f64>>,
    /// Hash of the message and received vector the decoder was given.
    pub input_hash: [u8; 32],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub decoder: String,
    pub formulation: &'static str,
    pub ebno_db: f64,
    pub alpha: Option<f64>,
    pub budget: String,
    pub stats: BerStats,
    /// Bit errors per trial, in trial order; empty for failed cells.
    pub trial_errors: Vec<usize>,
    /// Per-trial expected BER averaged over trials.
    pub expected_ber: Option<Vec<f64>>,
    /// Hash over the per-trial input hashes.
    pub input_digest: [u8; 32],
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub code_label: String,
    pub z: Option<usize>,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub messages: usize,
    /// Grid-point major, decoder minor.
    pub cells: Vec<CellResult>,
}

/// Builds the code a plan refers to.
pub fn resolve_code(source: &CodeSource, z: Option<usize>) -> Result<LdpcCode> {
    match source {
        CodeSource::BundledBg1 => {
            let z = z.ok_or_else(|| Error::Config("the bundled base graph needs z".into()))?;
            LdpcCode::bundled_bg1(z)
        }
        CodeSource::File { path, format } => {
            let label = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("code")
                .to_string();
            match load_code(path, *format)? {
                LoadedCode::BaseGraph(bg) => {
                    let z = z.ok_or_else(|| Error::Config(format!("{} is a base graph; z is required", path.display())))?;
                    LdpcCode::from_base_graph(&bg, z, label)
                }
                LoadedCode::Matrix(h) => Ok(LdpcCode::new(h, label, None)),
            }
        }
    }
}

fn hash_input(message: &BitVector, obs: &ChannelObservation) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((message.len() as u64).to_le_bytes());
    h.update(message.to_bytes());
    for r in &obs.received {
        h.update(r.to_le_bytes());
    }
    h.finalize().into()
}

/// Random message of `k` bits for trial `t`.
pub fn trial_message(code: &LdpcCode, seed: u64, t: usize) -> BitVector {
    let mut rng = rng::stream(seed, &[0, t as u64]);
    BitVector::from_bools((0..code.k()).map(|_| rng.random::<bool>()))
}

/// Channel observation for trial `t` at grid point `p`.
pub fn trial_observation(code: &LdpcCode, codeword: &BitVector, ebno_db: f64, seed: u64, p: usize, t: usize) -> Result<ChannelObservation> {
    let mut rng = rng::stream(seed, &[1, p as u64, t as u64]);
    channel::transmit(&channel::modulate(codeword), ebno_db, code.rate(), &mut rng)
}

/// Runs one decoder on one observation and scores it against `message`.
pub fn decode_trial(
    code: &LdpcCode,
    spec: &DecoderSpec,
    message: &BitVector,
    obs: &ChannelObservation,
    decoder_seed: u64,
) -> Result<TrialRecord> {
    let input_hash = hash_input(message, obs);
    let score = |bits: &BitVector| -> Result<usize> { code.message_of(bits)?.hamming_distance(message) };
    match &spec.kind {
        DecoderKind::Bp(cfg) => {
            let out = bp::decode(&code.h, &obs.llr, cfg)?;
            Ok(TrialRecord {
                bit_errors: score(&out.bits)?,
                success: out.success,
                expected_ber: None,
                input_hash,
            })
        }
        DecoderKind::Sa { formulation, alpha, cfg } => {
            let cfg = sa::SaConfig {
                seed: decoder_seed,
                ..cfg.clone()
            };
            let runs = sa::sa_ensemble(&code.h, obs, *formulation, *alpha, &cfg)?;
            let samples = runs
                .iter()
                .map(|o| Ok((code.message_of(&o.bits)?, o.energy.unwrap_or(f64::INFINITY))))
                .collect::<Result<Vec<_>>>()?;
            let ens = AnnealEnsemble::from_samples(&samples, message)?;
            let curve = (1..=cfg.num_anneals as u32)
                .map(|na| expected_ber(&ens, na, message.len()))
                .collect::<Result<Vec<_>>>()?;
            let best = sa::select_best(runs);
            Ok(TrialRecord {
                bit_errors: score(&best.bits)?,
                success: best.success,
                expected_ber: Some(curve),
                input_hash,
            })
        }
        DecoderKind::Machine(cfg) => {
            let cfg = machine::MachineConfig {
                seed: decoder_seed,
                ..cfg.clone()
            };
            let out = machine::run(&code.h, obs, &cfg)?;
            Ok(TrialRecord {
                bit_errors: score(&out.bits)?,
                success: out.success,
                expected_ber: None,
                input_hash,
            })
        }
    }
}

/// Runs every (grid point, decoder) cell of `plan` on `code`.
///
/// A failing decode turns its cell into an error row and the sweep goes on.
pub fn run_sweep(plan: &SweepPlan, code: &LdpcCode, exec: Execution) -> Result<SweepResult> {
    plan.validate()?;
    let messages: Vec<BitVector> = (0..plan.messages).map(|t| trial_message(code, plan.seed, t)).collect();
    let codewords = messages.iter().map(|m| code.encode(m)).collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::with_capacity(plan.ebno_db.len() * plan.decoders.len());
    for (p, &ebno) in plan.ebno_db.iter().enumerate() {
        // trial-major so each worker builds the observation once
        let per_trial: Vec<Result<(Vec<Result<TrialRecord>>, [u8; 32])>> = map_trials(exec, plan.messages, |t| {
            let obs = trial_observation(code, &codewords[t], ebno, plan.seed, p, t)?;
            let reference = hash_input(&messages[t], &obs);
            let seed = rng::derive_seed(plan.seed, &[2, p as u64, t as u64]);
            let recs = plan
                .decoders
                .iter()
                .map(|d| decode_trial(code, d, &messages[t], &obs, seed))
                .collect();
            Ok((recs, reference))
        });
        let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;

        for (d, spec) in plan.decoders.iter().enumerate() {
            cells.push(aggregate(spec, ebno, code.k(), per_trial.iter().map(|(recs, r)| (&recs[d], r))));
        }
    }
    Ok(SweepResult {
        code_label: code.label.clone(),
        z: code.z,
        n: code.n(),
        k: code.k(),
        seed: plan.seed,
        messages: plan.messages,
        cells,
    })
}

fn aggregate<'a>(
    spec: &DecoderSpec,
    ebno: f64,
    k: usize,
    trials: impl Iterator<Item = (&'a Result<TrialRecord>, &'a [u8; 32])>,
) -> CellResult {
    let mut cell = CellResult {
        decoder: spec.label.clone(),
        formulation: spec.kind.formulation_name(),
        ebno_db: ebno,
        alpha: spec.kind.alpha(),
        budget: spec.kind.budget(),
        stats: BerStats::default(),
        trial_errors: Vec::new(),
        expected_ber: None,
        input_digest: [0; 32],
        error: None,
    };
    let mut digest = Sha256::new();
    let mut curve: Option<Vec<f64>> = None;
    for (t, (rec, reference)) in trials.enumerate() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                cell.error = Some(format!("trial {t}: {e}"));
                break;
            }
        };
        if &rec.input_hash != reference {
            cell.error = Some(format!("trial {t}: decoder input differs from the common realization"));
            break;
        }
        digest.update(rec.input_hash);
        cell.stats.record_errors(k, rec.bit_errors);
        cell.trial_errors.push(rec.bit_errors);
        if let Some(c) = &rec.expected_ber {
            let acc = curve.get_or_insert_with(|| vec![0.0; c.len()]);
            for (a, x) in acc.iter_mut().zip(c) {
                *a += x;
            }
        }
    }
    if cell.error.is_some() {
        cell.stats = BerStats::default();
        cell.trial_errors.clear();
        return cell;
    }
    let trials = cell.trial_errors.len().max(1) as f64;
    cell.expected_ber = curve.map(|c| c.into_iter().map(|x| x / trials).collect());
    cell.input_digest = digest.finalize().into();
    cell
}

impl SweepResult {
    pub fn cell(&self, decoder: &str, ebno_db: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.decoder == decoder && c.ebno_db == ebno_db)
    }

    fn preamble(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "# Eb/No convention: {EBNO_CONVENTION}")?;
        writeln!(
            w,
            "# BER over the k = {} message bits of each n = {} codeword; rate = k/n",
            self.k, self.n
        )?;
        writeln!(w, "# rng: {RNG_ALGORITHM}; common random numbers across decoders per trial")?;
        Ok(())
    }

    /// The result table. Numbers use six significant digits.
    pub fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        self.preamble(w)?;
        writeln!(w, "{CSV_COLUMNS}")?;
        let z = self.z.map_or_else(|| "-".to_string(), |z| z.to_string());
        for c in &self.cells {
            let alpha = c.alpha.map_or_else(|| "-".to_string(), fmt_g);
            let status = match &c.error {
                None => "ok".to_string(),
                Some(e) => format!("\"error: {}\"", e.replace('"', "'")),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                csv_field(&c.decoder),
                c.formulation,
                csv_field(&self.code_label),
                z,
                fmt_g(c.ebno_db),
                alpha,
                c.stats.frames_total,
                c.stats.bits_total,
                c.stats.bit_errors,
                fmt_g(c.stats.ber()),
                fmt_g(c.stats.stderr_ber()),
                fmt_g(c.stats.fer()),
                csv_field(&c.budget),
                self.seed,
                status
            )?;
        }
        Ok(())
    }

    /// Expected BER against the number of kept anneals, annealing decoders only.
    pub fn write_expected_csv(&self, w: &mut dyn Write) -> Result<()> {
        self.preamble(w)?;
        writeln!(w, "decoder,formulation,ebno_db,n_anneals,expected_ber")?;
        for c in &self.cells {
            if let Some(curve) = &c.expected_ber {
                for (i, e) in curve.iter().enumerate() {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        csv_field(&c.decoder),
                        c.formulation,
                        fmt_g(c.ebno_db),
                        i + 1,
                        fmt_g(*e)
                    )?;
                }
            }
        }
        Ok(())
    }

    /// Writes `results.csv` and `expected_ber.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(dir.join("results.csv"), &buf)?;
        buf.clear();
        self.write_expected_csv(&mut buf)?;
        std::fs::write(dir.join("expected_ber.csv"), &buf)?;
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(decoders: &str) -> SweepPlan {
        SweepPlan::parse(&format!(
            "code = bundled-bg1\nz = 2\nebno = 2,3,4\nmessages = 6\nseed = 5\nsweeps = 50\nanneals = 3\ndecoders = {decoders}\n"
        ))
        .unwrap()
    }

    #[test]
    fn grid_product_and_common_inputs() {
        let p = plan("oms, sa-ho");
        let code = LdpcCode::bundled_bg1(2).unwrap();
        let r = run_sweep(&p, &code, Execution::Sequential).unwrap();
        assert_eq!(r.cells.len(), 6);
        for pair in r.cells.chunks(2) {
            assert_eq!(pair[0].input_digest, pair[1].input_digest);
            assert!(pair[0].error.is_none() && pair[1].error.is_none());
        }
        assert_ne!(r.cells[0].input_digest, r.cells[2].input_digest);
        let ho = &r.cells[1];
        assert_eq!(ho.expected_ber.as_ref().unwrap().len(), 3);
        assert_eq!(ho.stats.bits_total, 6 * code.k() as u64);
    }

    #[test]
    fn csv_is_deterministic_and_ordered() {
        let p = plan("oms(iterations=1), min-sum");
        let code = LdpcCode::bundled_bg1(2).unwrap();
        let a = run_sweep(&p, &code, Execution::Sequential).unwrap();
        let b = run_sweep(&p, &code, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let mut out = Vec::new();
        a.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], CSV_COLUMNS);
        assert_eq!(rows.len(), 7);
        assert!(rows[1].starts_with("oms(iterations=1),message-passing,bg1,2,2,-,6,"));
    }

    #[test]
    fn failing_decoder_becomes_error_row() {
        let mut p = plan("oms, machine");
        // a machine step above the stability limit fails validation at decode time
        if let DecoderKind::Machine(cfg) = &mut p.decoders[1].kind {
            cfg.integrator = machine::Integrator::Rk4 { dt: 1.0 };
        }
        let code = LdpcCode::bundled_bg1(2).unwrap();
        let cells: Vec<CellResult> = p
            .ebno_db
            .iter()
            .flat_map(|&e| {
                let per: Vec<_> = (0..2)
                    .map(|t| {
                        let m = trial_message(&code, 1, t);
                        let c = code.encode(&m).unwrap();
                        let obs = trial_observation(&code, &c, e, 1, 0, t).unwrap();
                        let h = hash_input(&m, &obs);
                        let recs: Vec<_> = p.decoders.iter().map(|d| decode_trial(&code, d, &m, &obs, 0)).collect();
                        (recs, h)
                    })
                    .collect();
                p.decoders
                    .iter()
                    .enumerate()
                    .map(|(d, spec)| aggregate(spec, e, code.k(), per.iter().map(|(r, h)| (&r[d], h))))
                    .collect::<Vec<_>>()
            })
            .collect();
        assert!(cells[0].error.is_none());
        assert!(cells[1].error.as_deref().unwrap().contains("dt"));
    }
}
