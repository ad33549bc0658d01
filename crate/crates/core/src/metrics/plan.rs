//! Sweep plans: a line-oriented `key = value` format.
//!
//! ```text
//! # comment
//! code = bundled-bg1        # or a path to an alist / basegraph-text file
//! z = 4
//! ebno = 2, 3, 4
//! messages = 1000
//! seed = 1
//! decoders = oms(iterations=7), sa-ho(alpha=1), machine
//! sweeps = 10000            # defaults shared by every decoder of the kind
//! machine_time = 2.2e-6     # machine knobs carry a `machine_` prefix
//! ```
//!
//! Parenthesised overrides use the unprefixed knob names.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use super::fmt_g;
use crate::bp::{BpAlgorithm, BpConfig};
use crate::code::CodeFormat;
use crate::error::{Error, Result};
use crate::formulation::Formulation;
use crate::machine::{GainSchedule, InitMode, Integrator, MachineConfig, SpinFix};
use crate::sa::SaConfig;

pub const DECODER_NAMES: [&str; 8] = ["bp", "min-sum", "nms", "oms", "sa-unary", "sa-binary", "sa-ho", "machine"];

/// Tunables per decoder family. `alpha` of the SA family lives here because
/// the annealer config does not own the energy model.
#[derive(Debug, Clone, PartialEq)]
pub enum DecoderKind {
    Bp(BpConfig),
    Sa {
        formulation: Formulation,
        alpha: f64,
        cfg: SaConfig,
    },
    Machine(MachineConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderSpec {
    /// Name used in reports.
    pub label: String,
    pub kind: DecoderKind,
}

/// Family defaults a decoder name is resolved against.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderDefaults {
    pub bp: BpConfig,
    pub sa: SaConfig,
    pub sa_alpha: f64,
    pub machine: MachineConfig,
}

impl Default for DecoderDefaults {
    fn default() -> Self {
        DecoderDefaults {
            bp: BpConfig::default(),
            sa: SaConfig {
                check_consistency: false,
                ..SaConfig::default()
            },
            sa_alpha: 1.0,
            machine: MachineConfig::default(),
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parameter(format!("bad value '{value}' for '{key}'")))
}

fn unknown(family: &str, key: &str) -> Error {
    Error::Parameter(format!("unknown {family} parameter '{key}'"))
}

fn set_bp(cfg: &mut BpConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "iterations" => cfg.max_iterations = num(key, value)?,
        "schedule" => cfg.schedule = value.trim().parse()?,
        "normalization" => cfg.normalization_factor = num(key, value)?,
        "offset" => cfg.offset_beta = num(key, value)?,
        "clamp" => cfg.llr_clamp = num(key, value)?,
        _ => return Err(unknown("bp", key)),
    }
    Ok(())
}

fn set_sa(cfg: &mut SaConfig, alpha: &mut f64, key: &str, value: &str) -> Result<()> {
    match key {
        "alpha" => *alpha = num(key, value)?,
        "sweeps" => cfg.sweeps = num(key, value)?,
        "anneals" => cfg.num_anneals = num(key, value)?,
        "beta_start" => cfg.beta_start = num(key, value)?,
        "beta_end" => cfg.beta_end = num(key, value)?,
        _ => return Err(unknown("sa", key)),
    }
    Ok(())
}

/// The spin-fix settings, enabling them (default-off rate) if absent.
fn spinfix_of(cfg: &mut MachineConfig) -> &mut SpinFix {
    let tau = cfg.time_constant;
    let defaults = MachineConfig::default().spinfix;
    cfg.spinfix.get_or_insert(SpinFix {
        clip_duration: tau,
        ..defaults.expect("spin-fix is on by default")
    })
}

fn set_machine(cfg: &mut MachineConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "alpha" => cfg.alpha = num(key, value)?,
        "time" => cfg.total_time = num(key, value)?,
        "tau" => cfg.time_constant = num(key, value)?,
        "rail" => cfg.rail = num(key, value)?,
        "dt" => cfg.integrator = Integrator::Rk4 { dt: num(key, value)? },
        "integrator" => {
            let dt = cfg.nominal_step();
            cfg.integrator = match value.trim() {
                "rk4" => Integrator::Rk4 { dt },
                "dopri5" => Integrator::Dopri5 {
                    rtol: 1e-6,
                    atol: 1e-9,
                    max_step: dt,
                },
                other => return Err(Error::Parameter(format!("unknown integrator '{other}'"))),
            }
        }
        "spinfix" => match value.trim() {
            "off" => cfg.spinfix = None,
            "on" => {
                spinfix_of(cfg);
            }
            other => return Err(Error::Parameter(format!("spinfix must be on or off, got '{other}'"))),
        },
        "spinfix_rate" | "spinfix_decay" | "spinfix_clip" => {
            let x: f64 = num(key, value)?;
            let sf = spinfix_of(cfg);
            match key {
                "spinfix_rate" => sf.initial_rate = x,
                "spinfix_decay" => sf.decay_time = x,
                _ => sf.clip_duration = x,
            }
        }
        "gain_min" | "gain_tau" => {
            let x: f64 = num(key, value)?;
            let g = cfg.gain.get_or_insert(GainSchedule { g_min: 0.0, tau_g: 1e-7 });
            if key == "gain_min" {
                g.g_min = x;
            } else {
                g.tau_g = x;
            }
        }
        "init" => {
            cfg.init = match value.trim() {
                "random" => InitMode::Random,
                "hard" => InitMode::HardDecision,
                "received" => InitMode::Received { scale: 0.5 },
                other => return Err(Error::Parameter(format!("unknown init mode '{other}'"))),
            }
        }
        "init_scale" => cfg.init = InitMode::Received { scale: num(key, value)? },
        _ => return Err(unknown("machine", key)),
    }
    Ok(())
}

impl DecoderDefaults {
    /// Applies a global plan key; returns `false` when the key is not a knob.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        if let Some(k) = key.strip_prefix("machine_") {
            set_machine(&mut self.machine, k, value)?;
            return Ok(true);
        }
        match key {
            "iterations" | "schedule" | "normalization" | "offset" | "clamp" => set_bp(&mut self.bp, key, value)?,
            "alpha" | "sweeps" | "anneals" | "beta_start" | "beta_end" => {
                set_sa(&mut self.sa, &mut self.sa_alpha, key, value)?
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// The decoder called `name` with family defaults.
    pub fn resolve(&self, name: &str) -> Result<DecoderKind> {
        let bp = |alg| DecoderKind::Bp(BpConfig { algorithm: alg, ..self.bp });
        let sa = |f| DecoderKind::Sa {
            formulation: f,
            alpha: self.sa_alpha,
            cfg: self.sa.clone(),
        };
        Ok(match name {
            "bp" => bp(BpAlgorithm::SumProduct),
            "min-sum" => bp(BpAlgorithm::MinSum),
            "nms" => bp(BpAlgorithm::NormalizedMinSum),
            "oms" => bp(BpAlgorithm::OffsetMinSum),
            "sa-unary" => sa(Formulation::Unary),
            "sa-binary" => sa(Formulation::Binary),
            "sa-ho" => sa(Formulation::HigherOrder),
            "machine" => DecoderKind::Machine(self.machine.clone()),
            other => {
                return Err(Error::Parameter(format!(
                    "unknown decoder '{other}'; expected one of {}",
                    DECODER_NAMES.join(", ")
                )))
            }
        })
    }
}

impl DecoderKind {
    /// Applies a per-decoder override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self {
            DecoderKind::Bp(cfg) => set_bp(cfg, key, value),
            DecoderKind::Sa { alpha, cfg, .. } => set_sa(cfg, alpha, key, value),
            DecoderKind::Machine(cfg) => set_machine(cfg, key, value),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DecoderKind::Bp(cfg) => cfg.validate(),
            DecoderKind::Sa { alpha, cfg, .. } => {
                if !(*alpha > 0.0) {
                    return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
                }
                cfg.validate()
            }
            DecoderKind::Machine(cfg) => cfg.validate(),
        }
    }

    /// Formulation column of the CSV.
    pub fn formulation_name(&self) -> &'static str {
        match self {
            DecoderKind::Bp(_) => "message-passing",
            DecoderKind::Sa { formulation, .. } => formulation.name(),
            DecoderKind::Machine(_) => "co-designed",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            DecoderKind::Bp(_) => None,
            DecoderKind::Sa { alpha, .. } => Some(*alpha),
            DecoderKind::Machine(cfg) => Some(cfg.alpha),
        }
    }

    /// Iterations, sweeps or simulated seconds.
    pub fn budget(&self) -> String {
        match self {
            DecoderKind::Bp(cfg) => format!("{} iterations", cfg.max_iterations),
            DecoderKind::Sa { cfg, .. } => format!("{} sweeps x {} anneals", cfg.sweeps, cfg.num_anneals),
            DecoderKind::Machine(cfg) => format!("{} s", fmt_g(cfg.total_time)),
        }
    }

    /// Every knob, as overrides that reproduce this decoder.
    pub fn knobs(&self) -> Vec<(&'static str, String)> {
        match self {
            DecoderKind::Bp(c) => vec![
                ("iterations", c.max_iterations.to_string()),
                ("schedule", c.schedule.to_string()),
                ("normalization", c.normalization_factor.to_string()),
                ("offset", c.offset_beta.to_string()),
                ("clamp", c.llr_clamp.to_string()),
            ],
            DecoderKind::Sa { alpha, cfg, .. } => vec![
                ("alpha", alpha.to_string()),
                ("sweeps", cfg.sweeps.to_string()),
                ("anneals", cfg.num_anneals.to_string()),
                ("beta_start", cfg.beta_start.to_string()),
                ("beta_end", cfg.beta_end.to_string()),
            ],
            DecoderKind::Machine(c) => {
                let mut v = vec![
                    ("alpha", c.alpha.to_string()),
                    ("time", c.total_time.to_string()),
                    ("tau", c.time_constant.to_string()),
                    ("rail", c.rail.to_string()),
                ];
                match c.integrator {
                    Integrator::Rk4 { dt } => v.push(("dt", dt.to_string())),
                    Integrator::Dopri5 { max_step, .. } => {
                        v.push(("dt", max_step.to_string()));
                        v.push(("integrator", "dopri5".into()));
                    }
                }
                match c.spinfix {
                    None => v.push(("spinfix", "off".into())),
                    Some(sf) => {
                        v.push(("spinfix_rate", sf.initial_rate.to_string()));
                        v.push(("spinfix_decay", sf.decay_time.to_string()));
                        v.push(("spinfix_clip", sf.clip_duration.to_string()));
                    }
                }
                if let Some(g) = c.gain {
                    v.push(("gain_min", g.g_min.to_string()));
                    v.push(("gain_tau", g.tau_g.to_string()));
                }
                match c.init {
                    InitMode::Random => v.push(("init", "random".into())),
                    InitMode::HardDecision => v.push(("init", "hard".into())),
                    InitMode::Received { scale } => v.push(("init_scale", scale.to_string())),
                }
                v
            }
        }
    }

    fn base_name(&self) -> &'static str {
        match self {
            DecoderKind::Bp(c) => match c.algorithm {
                BpAlgorithm::SumProduct => "bp",
                BpAlgorithm::MinSum => "min-sum",
                BpAlgorithm::NormalizedMinSum => "nms",
                BpAlgorithm::OffsetMinSum => "oms",
            },
            DecoderKind::Sa { formulation, .. } => match formulation {
                Formulation::Unary => "sa-unary",
                Formulation::Binary => "sa-binary",
                Formulation::HigherOrder => "sa-ho",
            },
            DecoderKind::Machine(_) => "machine",
        }
    }
}

impl DecoderSpec {
    /// Parses `name` or `name(key=value, ...)`; a `label=...` override
    /// renames the decoder in reports.
    pub fn parse(text: &str, defaults: &DecoderDefaults) -> Result<Self> {
        let text = text.trim();
        let (name, args) = match text.find('(') {
            Some(open) => {
                let inner = text[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Parameter(format!("unbalanced parentheses in '{text}'")))?;
                (text[..open].trim(), Some(inner))
            }
            None => (text, None),
        };
        let mut kind = defaults.resolve(name)?;
        let mut label = None;
        for kv in args.into_iter().flat_map(|a| a.split(',')).filter(|s| !s.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("expected key=value, got '{}'", kv.trim())))?;
            if k.trim() == "label" {
                label = Some(v.trim().to_string());
            } else {
                kind.set(k.trim(), v)?;
            }
        }
        let label = label.unwrap_or_else(|| text.split_whitespace().collect());
        Ok(DecoderSpec { label, kind })
    }

    /// Fully materialized text form; parsing it gives back `self`.
    pub fn canonical(&self) -> String {
        let mut s = format!("{}(label={}", self.kind.base_name(), self.label);
        for (k, v) in self.kind.knobs() {
            let _ = write!(s, ",{k}={v}");
        }
        s.push(')');
        s
    }
}

/// Splits on commas outside parentheses.
pub fn parse_decoder_list(text: &str, defaults: &DecoderDefaults) -> Result<Vec<DecoderSpec>> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Parameter(format!("unbalanced parentheses in '{text}'")));
        }
    }
    parts.push(&text[start..]);
    parts
        .into_iter()
        .filter(|p| !p.trim().is_empty())
        .map(|p| DecoderSpec::parse(p, defaults))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeSource {
    BundledBg1,
    File { path: PathBuf, format: CodeFormat },
}

impl CodeSource {
    pub fn describe(&self) -> String {
        match self {
            CodeSource::BundledBg1 => "bundled-bg1".into(),
            CodeSource::File { path, .. } => path.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub code: CodeSource,
    /// Lifting size; ignored for alist files.
    pub z: Option<usize>,
    pub ebno_db: Vec<f64>,
    pub decoders: Vec<DecoderSpec>,
    pub messages: usize,
    pub seed: u64,
}

impl SweepPlan {
    pub fn parse(text: &str) -> Result<Self> {
        let mut defaults = DecoderDefaults::default();
        let (mut code, mut format, mut z, mut ebno, mut decoders, mut messages, mut seed) =
            (None, None, None, None, None, None, None);
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::parse(line, format!("expected key = value, got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let at = |e: Error| Error::parse(line, e.to_string());
            match key {
                "code" => code = Some(value.to_string()),
                "format" => format = Some(value.parse::<CodeFormat>().map_err(at)?),
                "z" => z = Some(num::<usize>(key, value).map_err(at)?),
                "ebno" => {
                    ebno = Some(
                        value
                            .split(',')
                            .map(|v| num::<f64>(key, v))
                            .collect::<Result<Vec<_>>>()
                            .map_err(at)?,
                    )
                }
                "decoders" => decoders = Some((line, value.to_string())),
                "messages" => messages = Some(num::<usize>(key, value).map_err(at)?),
                "seed" => seed = Some(num::<u64>(key, value).map_err(at)?),
                _ => {
                    if !defaults.set(key, value).map_err(at)? {
                        return Err(Error::parse(line, format!("unknown key '{key}'")));
                    }
                }
            }
        }
        let missing = |k: &str| Error::parse(0, format!("missing required key '{k}'"));
        let code = match code.ok_or_else(|| missing("code"))?.as_str() {
            "bundled-bg1" | "bg1" => CodeSource::BundledBg1,
            path => {
                let path = PathBuf::from(path);
                let format = format.unwrap_or_else(|| CodeFormat::from_path(&path));
                CodeSource::File { path, format }
            }
        };
        let (dline, dtext) = decoders.ok_or_else(|| missing("decoders"))?;
        let decoders = parse_decoder_list(&dtext, &defaults).map_err(|e| Error::parse(dline, e.to_string()))?;
        let plan = SweepPlan {
            code,
            z,
            ebno_db: ebno.ok_or_else(|| missing("ebno"))?,
            decoders,
            messages: messages.ok_or_else(|| missing("messages"))?,
            seed: seed.unwrap_or(0),
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ebno_db.is_empty() || self.ebno_db.iter().any(|e| !e.is_finite()) {
            return Err(Error::Config("ebno needs at least one finite value".into()));
        }
        if self.decoders.is_empty() {
            return Err(Error::Config("no decoders".into()));
        }
        if self.messages == 0 {
            return Err(Error::Config("messages must be at least 1".into()));
        }
        if self.code == CodeSource::BundledBg1 && self.z.is_none() {
            return Err(Error::Config("the bundled base graph needs z".into()));
        }
        for d in &self.decoders {
            d.kind
                .validate()
                .map_err(|e| Error::Config(format!("decoder '{}': {e}", d.label)))?;
        }
        Ok(())
    }

    /// Plan text with every default written out.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "code = {}", self.code.describe());
        if let CodeSource::File { format, .. } = &self.code {
            let f = match format {
                CodeFormat::Alist => "alist",
                CodeFormat::BaseGraphText => "basegraph-text",
            };
            let _ = writeln!(s, "format = {f}");
        }
        if let Some(z) = self.z {
            let _ = writeln!(s, "z = {z}");
        }
        let ebno: Vec<String> = self.ebno_db.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(s, "ebno = {}", ebno.join(", "));
        let _ = writeln!(s, "messages = {}", self.messages);
        let _ = writeln!(s, "seed = {}", self.seed);
        let decs: Vec<String> = self.decoders.iter().map(DecoderSpec::canonical).collect();
        let _ = writeln!(s, "decoders = {}", decs.join(", "));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLAN: &str = "\
# demo
code = bundled-bg1
z = 2
ebno = 2, 3,4
messages = 5
seed = 9
sweeps = 100   # shared
machine_time = 1e-7
decoders = oms(iterations=7), oms(iterations=1,label=oms1), sa-ho(alpha=2), machine
";

    #[test]
    fn parses_plan_with_overrides() {
        let p = SweepPlan::parse(PLAN).unwrap();
        assert_eq!(p.ebno_db, vec![2.0, 3.0, 4.0]);
        assert_eq!(p.decoders.len(), 4);
        assert_eq!(p.decoders[0].label, "oms(iterations=7)");
        assert_eq!(p.decoders[1].label, "oms1");
        match &p.decoders[0].kind {
            DecoderKind::Bp(c) => assert_eq!(c.max_iterations, 7),
            k => panic!("{k:?}"),
        }
        match &p.decoders[2].kind {
            DecoderKind::Sa { alpha, cfg, formulation } => {
                assert_eq!((*alpha, cfg.sweeps, *formulation), (2.0, 100, Formulation::HigherOrder))
            }
            k => panic!("{k:?}"),
        }
        match &p.decoders[3].kind {
            DecoderKind::Machine(c) => assert_eq!(c.total_time, 1e-7),
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn text_form_round_trips() {
        let p = SweepPlan::parse(PLAN).unwrap();
        assert_eq!(SweepPlan::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn errors_carry_lines() {
        let e = SweepPlan::parse("code = bundled-bg1\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = SweepPlan::parse("code = bundled-bg1\nz=2\nebno=1\nmessages=1\ndecoders = nope\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 5, .. }), "{e}");
        assert!(SweepPlan::parse("code = bundled-bg1\nebno=1\nmessages=1\ndecoders=oms\n").is_err());
    }

    #[test]
    fn nested_lists_split_at_top_level() {
        let d = DecoderDefaults::default();
        let v = parse_decoder_list("oms(iterations=3, offset=0.25), sa-unary", &d).unwrap();
        assert_eq!(v.len(), 2);
        assert!(parse_decoder_list("oms(iterations=3", &d).is_err());
        assert!(parse_decoder_list("oms(color=3)", &d).is_err());
    }
}
