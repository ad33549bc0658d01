//! `ising-ldpc`: build codes, decode single frames, run BER sweeps and count
//! hardware resources.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ising_ldpc::code::{io::write_alist, CodeFormat, LdpcCode};
use ising_ldpc::formulation::{build_higher_order, build_qubo, Formulation, ResourceReport, COUPLER_CONVENTION};
use ising_ldpc::machine::{self, Trajectory};
use ising_ldpc::metrics::{
    decode_trial, resolve_code, run_sweep, trial_message, trial_observation, CodeSource, DecoderDefaults, DecoderKind,
    DecoderSpec, SweepPlan,
};
use ising_ldpc::parallel::{available_workers, with_jobs, Execution};
use ising_ldpc::{channel, rng, Error};

#[derive(Parser, Debug)]
#[command(name = "ising-ldpc", version, about = "LDPC decoding with message passing, annealing and an Ising machine model")]
struct Cli {
    /// Worker threads for trial-level parallelism (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lift a base graph and write the parity-check matrix as alist.
    Construct(ConstructArgs),
    /// Encode a random message, send it through the channel and decode it once.
    Decode(DecodeArgs),
    /// Run a BER sweep described by a plan file.
    Sweep(SweepArgs),
    /// Count spins and couplers a formulation needs.
    Resources(ResourcesArgs),
}

#[derive(Args, Debug, Clone)]
struct CodeArgs {
    /// `bundled-bg1`, a basegraph-text file or an alist file.
    #[arg(long, value_name = "FILE|bundled-bg1", default_value = "bundled-bg1")]
    code: String,
    /// Lifting size for base graphs.
    #[arg(long, value_name = "Z")]
    z: Option<usize>,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_name = "alist|basegraph-text")]
    format: Option<String>,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    /// `bundled-bg1` or a basegraph-text file.
    #[arg(long, value_name = "FILE|bundled-bg1")]
    bg: String,
    #[arg(long, value_name = "Z")]
    z: usize,
    /// Destination alist file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// bp, min-sum, nms, oms, sa-unary, sa-binary, sa-ho or machine, with
    /// optional overrides such as `oms(iterations=7)`.
    #[arg(long)]
    decoder: String,
    #[arg(long, value_name = "DB", allow_negative_numbers = true)]
    ebno: f64,
    /// Master seed.
    #[arg(long, env = "ISING_LDPC_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    knobs: Knobs,
    /// Write the machine trajectory as CSV.
    #[arg(long, value_name = "FILE")]
    dump_trajectory: Option<PathBuf>,
    /// Node voltages kept in the trajectory.
    #[arg(long, value_name = "N", default_value_t = 16)]
    trajectory_nodes: usize,
    /// Write the run manifest as JSON.
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,
}

/// Decoder knobs; each applies to one decoder family.
#[derive(Args, Debug, Default)]
struct Knobs {
    /// Message-passing iterations.
    #[arg(long)]
    iterations: Option<String>,
    /// flooding or layered.
    #[arg(long)]
    schedule: Option<String>,
    /// Normalized Min-Sum scale factor.
    #[arg(long)]
    normalization: Option<String>,
    /// Offset Min-Sum offset.
    #[arg(long)]
    offset: Option<String>,
    /// Parity penalty weight (annealers and machine).
    #[arg(long)]
    alpha: Option<String>,
    /// Annealing sweeps.
    #[arg(long)]
    sweeps: Option<String>,
    /// Independent anneals per frame.
    #[arg(long)]
    anneals: Option<String>,
    #[arg(long)]
    beta_start: Option<String>,
    #[arg(long)]
    beta_end: Option<String>,
    /// Simulated machine time in seconds.
    #[arg(long)]
    machine_time: Option<String>,
    /// Machine RK4 step in seconds.
    #[arg(long)]
    dt: Option<String>,
    /// Machine time constant in seconds.
    #[arg(long)]
    tau: Option<String>,
    /// rk4 or dopri5.
    #[arg(long)]
    integrator: Option<String>,
    /// on or off.
    #[arg(long)]
    spinfix: Option<String>,
    /// Spin-fix events per second at t = 0.
    #[arg(long)]
    spinfix_rate: Option<String>,
    /// Spin-fix rate decay time in seconds.
    #[arg(long)]
    spinfix_decay: Option<String>,
    /// random, hard or received.
    #[arg(long)]
    init: Option<String>,
    /// Initial voltage per unit of received value.
    #[arg(long)]
    init_scale: Option<String>,
}

impl Knobs {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("iterations", &self.iterations),
            ("schedule", &self.schedule),
            ("normalization", &self.normalization),
            ("offset", &self.offset),
            ("alpha", &self.alpha),
            ("sweeps", &self.sweeps),
            ("anneals", &self.anneals),
            ("beta_start", &self.beta_start),
            ("beta_end", &self.beta_end),
            ("time", &self.machine_time),
            ("dt", &self.dt),
            ("tau", &self.tau),
            ("integrator", &self.integrator),
            ("spinfix", &self.spinfix),
            ("spinfix_rate", &self.spinfix_rate),
            ("spinfix_decay", &self.spinfix_decay),
            ("init", &self.init),
            ("init_scale", &self.init_scale),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Plan file (key = value lines) or a manifest written by an earlier sweep.
    #[arg(long, value_name = "FILE")]
    plan: PathBuf,
    /// Output directory for results.csv, expected_ber.csv and manifest.json.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Overrides the plan seed.
    #[arg(long, env = "ISING_LDPC_SEED")]
    seed: Option<u64>,
    /// Run trials on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct ResourcesArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// unary, binary, higher-order or co-designed.
    #[arg(long)]
    formulation: String,
}

/// Error with the process exit status it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

const USAGE: u8 = 2;
const IO: u8 = 3;
const INTERNAL: u8 = 4;

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    /// Errors while reading inputs, malformed files included, are usage errors.
    fn input(e: Error) -> Self {
        Failure::new(USAGE, e.to_string())
    }

    /// Errors while computing or writing results.
    fn run(e: Error) -> Self {
        match e {
            Error::Io(e) => Failure::new(IO, e.to_string()),
            Error::Integrity(m) => Failure::new(INTERNAL, format!("integrity error: {m}")),
            e => Failure::new(USAGE, e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs.unwrap_or(0);
    match with_jobs(jobs, || dispatch(cli.command, jobs)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command, jobs: usize) -> CliResult<()> {
    match cmd {
        Command::Construct(a) => cmd_construct(a),
        Command::Decode(a) => cmd_decode(a, jobs),
        Command::Sweep(a) => cmd_sweep(a, jobs),
        Command::Resources(a) => cmd_resources(a),
    }
}

fn code_source(code: &str, format: Option<&str>) -> CliResult<CodeSource> {
    if code == "bundled-bg1" || code == "bg1" {
        return Ok(CodeSource::BundledBg1);
    }
    let path = PathBuf::from(code);
    let format = match format {
        Some(f) => f.parse::<CodeFormat>().map_err(Failure::input)?,
        None => CodeFormat::from_path(&path),
    };
    Ok(CodeSource::File { path, format })
}

fn load(args: &CodeArgs) -> CliResult<LdpcCode> {
    let src = code_source(&args.code, args.format.as_deref())?;
    resolve_code(&src, args.z).map_err(|e| Failure::input(annotate(e, &args.code)))
}

fn annotate(e: Error, what: &str) -> Error {
    match e {
        Error::Io(io) => Error::Parameter(format!("{what}: {io}")),
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{what}: {message}"),
        },
        e => e,
    }
}

fn cmd_construct(a: ConstructArgs) -> CliResult<()> {
    let src = code_source(&a.bg, Some("basegraph-text"))?;
    let code = resolve_code(&src, Some(a.z)).map_err(|e| Failure::input(annotate(e, &a.bg)))?;
    let h = &code.h;
    fs::write(&a.out, write_alist(h)).map_err(|e| Failure::new(IO, format!("{}: {e}", a.out.display())))?;
    println!("{} {} {}", h.m(), h.n(), h.nnz());
    Ok(())
}

fn resolve_decoder(text: &str, knobs: &Knobs) -> CliResult<DecoderSpec> {
    let mut spec = DecoderSpec::parse(text, &DecoderDefaults::default()).map_err(Failure::input)?;
    for (k, v) in knobs.pairs() {
        spec.kind
            .set(k, v)
            .map_err(|e| Failure::new(USAGE, format!("--{}: {e}", k.replace('_', "-"))))?;
    }
    spec.kind.validate().map_err(Failure::input)?;
    Ok(spec)
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    jobs: usize,
    parallel: bool,
    rng: &'static str,
    ebno_convention: &'static str,
    code: CodeInfo,
    /// Fully materialized plan; `sweep --plan manifest.json` reruns it.
    plan: String,
    started_unix: u64,
    finished_unix: u64,
}

#[derive(Serialize)]
struct CodeInfo {
    label: String,
    z: Option<usize>,
    n: usize,
    k: usize,
    m: usize,
    nnz: usize,
}

impl CodeInfo {
    fn of(code: &LdpcCode) -> Self {
        CodeInfo {
            label: code.label.clone(),
            z: code.z,
            n: code.n(),
            k: code.k(),
            m: code.h.m(),
            nnz: code.h.nnz(),
        }
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn effective_jobs(jobs: usize) -> usize {
    if jobs == 0 {
        available_workers()
    } else {
        jobs
    }
}

fn write_manifest(path: &Path, m: &Manifest) -> CliResult<()> {
    let text = serde_json::to_string_pretty(m).map_err(|e| Failure::new(INTERNAL, e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Failure::new(IO, format!("{}: {e}", path.display())))
}

fn cmd_decode(a: DecodeArgs, jobs: usize) -> CliResult<()> {
    let started = unix_now();
    let code = load(&a.code)?;
    let spec = resolve_decoder(&a.decoder, &a.knobs)?;
    let message = trial_message(&code, a.seed, 0);
    let codeword = code.encode(&message).map_err(Failure::run)?;
    let obs = trial_observation(&code, &codeword, a.ebno, a.seed, 0, 0).map_err(Failure::input)?;
    let dseed = rng::derive_seed(a.seed, &[2, 0, 0]);

    let mut report = vec![
        format!("decoder: {}", spec.label),
        format!(
            "code: {} z={} n={} k={}",
            code.label,
            code.z.map_or("-".to_string(), |z| z.to_string()),
            code.n(),
            code.k()
        ),
        format!("ebno_db: {}", a.ebno),
        format!("seed: {}", a.seed),
    ];
    match (&spec.kind, &a.dump_trajectory) {
        (DecoderKind::Machine(cfg), Some(path)) => {
            let cfg = machine::MachineConfig { seed: dseed, ..cfg.clone() };
            let file = fs::File::create(path).map_err(|e| Failure::new(IO, format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            let mut traj = Trajectory::new(&mut w, code.n(), a.trajectory_nodes).map_err(Failure::run)?;
            let (outcome, _, stats) =
                machine::run_detailed(&code.h, &obs, &cfg, None, Some(&mut traj)).map_err(Failure::run)?;
            w.flush().map_err(|e| Failure::new(IO, e.to_string()))?;
            let errors = code
                .message_of(&outcome.bits)
                .and_then(|m| m.hamming_distance(&message))
                .map_err(Failure::run)?;
            report.push(format!("decoded_ok: {}", outcome.success));
            report.push(format!("bit_errors: {errors}"));
            report.push(format!("steps: {}", outcome.iterations));
            report.push(format!("energy: {}", outcome.energy.unwrap_or(f64::NAN)));
            report.push(format!("time_s: {}", cfg.total_time));
            report.push(format!("spinfix_events: {}", stats.spinfix_events));
        }
        (_, Some(_)) => {
            return Err(Failure::new(USAGE, "--dump-trajectory needs --decoder machine"));
        }
        (kind, None) => {
            let rec = decode_trial(&code, &spec, &message, &obs, dseed).map_err(Failure::run)?;
            report.push(format!("decoded_ok: {}", rec.success));
            report.push(format!("bit_errors: {}", rec.bit_errors));
            report.push(format!("budget: {}", kind.budget()));
            if let Some(curve) = &rec.expected_ber {
                report.push(format!("mean_anneal_ber: {}", curve[0]));
            }
        }
    }
    for line in &report {
        println!("{line}");
    }

    if let Some(path) = &a.manifest {
        let plan = SweepPlan {
            code: code_source(&a.code.code, a.code.format.as_deref())?,
            z: a.code.z,
            ebno_db: vec![a.ebno],
            decoders: vec![spec],
            messages: 1,
            seed: a.seed,
        };
        write_manifest(
            path,
            &Manifest {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command: "decode",
                seed: a.seed,
                jobs: effective_jobs(jobs),
                parallel: cfg!(feature = "parallel"),
                rng: rng::RNG_ALGORITHM,
                ebno_convention: channel::EBNO_CONVENTION,
                code: CodeInfo::of(&code),
                plan: plan.to_text(),
                started_unix: started,
                finished_unix: unix_now(),
            },
        )?;
    }
    Ok(())
}

fn read_plan(path: &Path) -> CliResult<SweepPlan> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(USAGE, format!("{}: {e}", path.display())))?;
    let text = if text.trim_start().starts_with('{') {
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Failure::new(USAGE, format!("{}: {e}", path.display())))?;
        v.get("plan")
            .and_then(|p| p.as_str())
            .ok_or_else(|| Failure::new(USAGE, format!("{}: manifest has no plan", path.display())))?
            .to_string()
    } else {
        text
    };
    SweepPlan::parse(&text).map_err(|e| Failure::input(annotate(e, &path.display().to_string())))
}

fn cmd_sweep(a: SweepArgs, jobs: usize) -> CliResult<()> {
    let started = unix_now();
    let mut plan = read_plan(&a.plan)?;
    if let Some(seed) = a.seed {
        plan.seed = seed;
    }
    // everything that can fail on bad input fails before any trial runs
    let code = resolve_code(&plan.code, plan.z).map_err(|e| Failure::input(annotate(e, &plan.code.describe())))?;
    fs::create_dir_all(&a.out).map_err(|e| Failure::new(IO, format!("{}: {e}", a.out.display())))?;
    let probe = a.out.join(".write-test");
    fs::write(&probe, b"").map_err(|e| Failure::new(IO, format!("{}: {e}", a.out.display())))?;
    let _ = fs::remove_file(&probe);

    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = run_sweep(&plan, &code, exec).map_err(Failure::run)?;
    result.write_dir(&a.out).map_err(Failure::run)?;
    for c in &result.cells {
        let status = c.error.as_deref().unwrap_or("ok");
        eprintln!(
            "{:<24} ebno={:<5} ber={:.4e} fer={:.4} {}",
            c.decoder,
            c.ebno_db,
            c.stats.ber(),
            c.stats.fer(),
            status
        );
    }
    write_manifest(
        &a.out.join("manifest.json"),
        &Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: "sweep",
            seed: plan.seed,
            jobs: if a.sequential { 1 } else { effective_jobs(jobs) },
            parallel: cfg!(feature = "parallel") && !a.sequential,
            rng: rng::RNG_ALGORITHM,
            ebno_convention: channel::EBNO_CONVENTION,
            code: CodeInfo::of(&code),
            plan: plan.to_text(),
            started_unix: started,
            finished_unix: unix_now(),
        },
    )
}

fn cmd_resources(a: ResourcesArgs) -> CliResult<()> {
    let code = load(&a.code)?;
    let h = &code.h;
    let report = if a.formulation == "co-designed" {
        ResourceReport::co_designed(h)
    } else {
        let f: Formulation = a.formulation.parse().map_err(Failure::input)?;
        // coefficients do not change the structure; unit received values
        let r = vec![1.0; h.n()];
        match f.encoding() {
            Some(enc) => ResourceReport::quadratic(&build_qubo(h, &r, 1.0, enc).map_err(Failure::run)?),
            None => ResourceReport::higher_order(&build_higher_order(h, &r, 1.0).map_err(Failure::run)?),
        }
    };
    println!("{report}");
    println!("# {COUPLER_CONVENTION}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn parser_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn help_lists_every_flag() {
        let mut root = Cli::command();
        root.build();
        for sub in root.get_subcommands() {
            let mut sub = sub.clone();
            let help = sub.render_long_help().to_string();
            for arg in sub.get_arguments() {
                if let Some(long) = arg.get_long() {
                    assert!(help.contains(&format!("--{long}")), "{} help misses --{long}", sub.get_name());
                }
            }
        }
    }
}
