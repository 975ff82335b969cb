//! Flat `key = value` experiment descriptions (`.qiexp`).
//!
//! ```text
//! # CZ gate, 50 stages
//! gate = cz
//! n_stages = 50
//! theta_rule = pi_over_n
//! input = 01
//! sweep.eta = 0.25,0.5,1.0
//! ```
//!
//! Keys: `variant`, `n_stages`, `theta_rule`, `theta`, `eta`, `crossings`,
//! `gate`, `input`, `mode`, `samples`, `seed` and `sweep.<param>` with
//! `<param>` one of `n_stages`, `eta`, `crossings_per_stage`. `#` starts a
//! comment. Unknown or repeated keys are errors. Any `sweep.*` key makes the
//! text a sweep; grid points are ordered lexicographically over the axes in
//! alphabetical order, first axis slowest.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::interrogation::{GateSpec, Theta, ThetaRule, Variant};
use crate::statespace::{Amplitude, QubitState};

pub const MAX_GRID_POINTS: u64 = 10_000_000;
pub const DEFAULT_SAMPLES: u64 = 10_000;
const CUSTOM_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message} (`{token}`)")]
pub struct ParseError {
    /// 1-based; one past the last line for errors about missing keys.
    pub line: usize,
    pub token: String,
    pub message: String,
}

fn err<T>(line: usize, token: &str, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        token: token.to_string(),
        message: message.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Cz,
    Cnot,
}

impl GateKind {
    pub fn token(self) -> &'static str {
        match self {
            GateKind::Cz => "cz",
            GateKind::Cnot => "cnot",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InputState {
    /// Computational basis state, index `0..4` (`00`, `01`, `10`, `11`).
    Basis(usize),
    /// `(|0⟩ + |1⟩)_C/√2 ⊗ |0⟩_T`.
    PlusControl,
    /// Real and imaginary parts of the four amplitudes, interleaved.
    Custom([f64; 8]),
}

impl InputState {
    /// The normalized two-qubit state (custom amplitudes are rescaled).
    pub fn qubit_state(&self) -> QubitState {
        match self {
            InputState::Basis(i) => QubitState::basis(*i),
            InputState::PlusControl => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                QubitState::from_real([h, 0.0, h, 0.0]).expect("normalized")
            }
            InputState::Custom(v) => {
                let amps = [0, 1, 2, 3].map(|i| Amplitude::new(v[2 * i], v[2 * i + 1]));
                let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                QubitState::from_amplitudes(amps.map(|a| a / n)).expect("validated at parse time")
            }
        }
    }

    pub fn token(&self) -> String {
        match self {
            InputState::Basis(i) => crate::gates::basis_label(*i).to_string(),
            InputState::PlusControl => "plus_control".to_string(),
            InputState::Custom(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("custom:{}", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Sample,
}

impl Mode {
    pub fn token(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Sample => "sample",
        }
    }
}

/// One experiment: protocol, input and evaluation mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub spec: GateSpec,
    pub input: InputState,
    pub mode: Mode,
    pub n_samples: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn gate(&self) -> GateKind {
        if self.spec.hadamard_sandwich {
            GateKind::Cnot
        } else {
            GateKind::Cz
        }
    }
}

/// Swept parameter and its values, in the order given.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepAxis {
    CrossingsPerStage(Vec<u32>),
    Eta(Vec<f64>),
    NStages(Vec<u64>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::CrossingsPerStage(_) => "crossings_per_stage",
            SweepAxis::Eta(_) => "eta",
            SweepAxis::NStages(_) => "n_stages",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::CrossingsPerStage(v) => v.len(),
            SweepAxis::Eta(v) => v.len(),
            SweepAxis::NStages(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn apply(&self, index: usize, spec: &mut GateSpec) {
        match self {
            SweepAxis::CrossingsPerStage(v) => spec.crossings_per_stage = v[index],
            SweepAxis::Eta(v) => spec.eta = v[index],
            SweepAxis::NStages(v) => spec.n_stages = v[index],
        }
    }

    fn values_token(&self) -> String {
        let parts: Vec<String> = match self {
            SweepAxis::CrossingsPerStage(v) => v.iter().map(|x| x.to_string()).collect(),
            SweepAxis::Eta(v) => v.iter().map(|x| x.to_string()).collect(),
            SweepAxis::NStages(v) => v.iter().map(|x| x.to_string()).collect(),
        };
        parts.join(",")
    }
}

/// Cartesian grid over one or more parameters of a base experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    /// Sorted by parameter name.
    pub axes: Vec<SweepAxis>,
}

impl SweepConfig {
    pub fn grid_size(&self) -> u64 {
        self.axes.iter().map(|a| a.len() as u64).product()
    }

    /// Experiment at grid position `index`; the first axis varies slowest.
    pub fn point(&self, index: u64) -> ExperimentConfig {
        let mut cfg = self.base.clone();
        let mut rest = index;
        for axis in self.axes.iter().rev() {
            let len = axis.len() as u64;
            axis.apply((rest % len) as usize, &mut cfg.spec);
            rest /= len;
        }
        cfg
    }

    pub fn points(&self) -> impl Iterator<Item = ExperimentConfig> + '_ {
        (0..self.grid_size()).map(|i| self.point(i))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Config {
    Experiment(ExperimentConfig),
    Sweep(SweepConfig),
}

impl Config {
    pub fn base(&self) -> &ExperimentConfig {
        match self {
            Config::Experiment(e) => e,
            Config::Sweep(s) => &s.base,
        }
    }

    pub fn base_mut(&mut self) -> &mut ExperimentConfig {
        match self {
            Config::Experiment(e) => e,
            Config::Sweep(s) => &mut s.base,
        }
    }
}

const KEYS: [&str; 11] = [
    "variant",
    "n_stages",
    "theta_rule",
    "theta",
    "eta",
    "crossings",
    "gate",
    "input",
    "mode",
    "samples",
    "seed",
];

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn parse_u64(e: &Entry, key: &str, min: u64) -> Result<u64, ParseError> {
    match e.value.parse::<u64>() {
        Ok(v) if v >= min => Ok(v),
        Ok(_) => err(e.line, e.value, format!("`{key}` must be at least {min}")),
        Err(_) => err(e.line, e.value, format!("`{key}` expects an integer")),
    }
}

fn parse_real(line: usize, token: &str, key: &str) -> Result<f64, ParseError> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(line, token, format!("`{key}` expects a decimal number")),
    }
}

fn parse_eta(line: usize, token: &str, key: &str) -> Result<f64, ParseError> {
    let v = parse_real(line, token, key)?;
    if !(0.0..=1.0).contains(&v) {
        return err(line, token, format!("`{key}` must lie in [0, 1]"));
    }
    Ok(v)
}

fn parse_count(line: usize, token: &str, key: &str, min: u64, max: u64) -> Result<u64, ParseError> {
    match token.parse::<u64>() {
        Ok(v) if v >= min && v <= max => Ok(v),
        Ok(_) => err(line, token, format!("`{key}` must lie in [{min}, {max}]")),
        Err(_) => err(line, token, format!("`{key}` expects an integer")),
    }
}

fn parse_input(e: &Entry) -> Result<InputState, ParseError> {
    match e.value {
        "00" => Ok(InputState::Basis(0)),
        "01" => Ok(InputState::Basis(1)),
        "10" => Ok(InputState::Basis(2)),
        "11" => Ok(InputState::Basis(3)),
        "plus_control" => Ok(InputState::PlusControl),
        v if v.starts_with("custom:") => {
            let parts: Vec<&str> = v["custom:".len()..].split(',').map(str::trim).collect();
            if parts.len() != 8 {
                return err(e.line, v, "custom input needs 8 reals (re, im per amplitude)");
            }
            let mut amps = [0.0; 8];
            for (a, p) in amps.iter_mut().zip(&parts) {
                *a = parse_real(e.line, p, "input")?;
            }
            let n: f64 = amps.iter().map(|x| x * x).sum();
            if (n - 1.0).abs() > CUSTOM_NORM_TOL {
                return err(e.line, v, format!("custom input has squared norm {n}, expected 1"));
            }
            Ok(InputState::Custom(amps))
        }
        v => err(e.line, v, "`input` expects 00, 01, 10, 11, plus_control or custom:..."),
    }
}

fn parse_axis(line: usize, param: &str, value: &str) -> Result<SweepAxis, ParseError> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        return err(line, value, "sweep values must be a comma-separated list");
    }
    let key = format!("sweep.{param}");
    match param {
        "n_stages" => parts
            .iter()
            .map(|p| parse_count(line, p, &key, 1, u64::MAX))
            .collect::<Result<_, _>>()
            .map(SweepAxis::NStages),
        "eta" => parts
            .iter()
            .map(|p| parse_eta(line, p, &key))
            .collect::<Result<_, _>>()
            .map(SweepAxis::Eta),
        "crossings_per_stage" => parts
            .iter()
            .map(|p| parse_count(line, p, &key, 1, u32::MAX as u64).map(|v| v as u32))
            .collect::<Result<_, _>>()
            .map(SweepAxis::CrossingsPerStage),
        _ => err(line, &key, "unknown sweep parameter"),
    }
}

/// Parses and validates an experiment or sweep description.
pub fn parse_config(text: &str) -> Result<Config, ParseError> {
    let mut entries: HashMap<&str, Entry> = HashMap::new();
    let mut axes: Vec<(usize, SweepAxis)> = Vec::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return err(line, content, "expected `key = value`");
        };
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return err(line, key, "missing value");
        }
        if let Some(param) = key.strip_prefix("sweep.") {
            let axis = parse_axis(line, param, value)?;
            if axes.iter().any(|(_, a)| a.name() == axis.name()) {
                return err(line, key, "duplicate key");
            }
            axes.push((line, axis));
            continue;
        }
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return err(line, key, "unknown key");
        };
        if entries.contains_key(known) {
            return err(line, key, "duplicate key");
        }
        entries.insert(known, Entry { line, value });
    }

    let end = last_line + 1;
    let required = |key: &str| -> Result<&Entry, ParseError> {
        entries
            .get(key)
            .ok_or_else(|| ParseError {
                line: end,
                token: key.to_string(),
                message: "missing required key".to_string(),
            })
    };

    let gate_entry = required("gate")?;
    let gate = match gate_entry.value {
        "cz" => GateKind::Cz,
        "cnot" => GateKind::Cnot,
        v => return err(gate_entry.line, v, "`gate` expects cz or cnot"),
    };
    let n_stages = parse_u64(required("n_stages")?, "n_stages", 1)?;

    let variant = match entries.get("variant") {
        None => Variant::Main,
        Some(e) => match e.value {
            "main" => Variant::Main,
            "azuma" => Variant::Azuma,
            v => return err(e.line, v, "`variant` expects main or azuma"),
        },
    };
    if variant == Variant::Azuma && gate == GateKind::Cnot {
        return err(
            gate_entry.line,
            "cnot",
            "azuma variant has no out0 rail for the cnot sandwich (encoding mismatch)",
        );
    }

    let theta = match (entries.get("theta"), entries.get("theta_rule")) {
        (Some(t), Some(r)) => {
            let line = t.line.max(r.line);
            return err(line, "theta", "`theta` and `theta_rule` are mutually exclusive");
        }
        (Some(t), None) => {
            let v = parse_real(t.line, t.value, "theta")?;
            if !(v > 0.0 && v <= PI) {
                return err(t.line, t.value, "`theta` must lie in (0, pi]");
            }
            Theta::Explicit(v)
        }
        (None, Some(r)) => match r.value {
            "pi_over_n" => Theta::Rule(ThetaRule::PiOverN),
            "pi_over_2n" => Theta::Rule(ThetaRule::PiOver2N),
            v => return err(r.line, v, "`theta_rule` expects pi_over_n or pi_over_2n"),
        },
        (None, None) => Theta::Rule(match variant {
            Variant::Main => ThetaRule::PiOverN,
            Variant::Azuma => ThetaRule::PiOver2N,
        }),
    };

    let eta = match entries.get("eta") {
        None => 1.0,
        Some(e) => parse_eta(e.line, e.value, "eta")?,
    };
    let crossings = match entries.get("crossings") {
        None => 1,
        Some(e) => parse_count(e.line, e.value, "crossings", 1, u32::MAX as u64)? as u32,
    };
    let input = match entries.get("input") {
        None => InputState::Basis(0),
        Some(e) => parse_input(e)?,
    };
    let mode = match entries.get("mode") {
        None => Mode::Exact,
        Some(e) => match e.value {
            "exact" => Mode::Exact,
            "sample" => Mode::Sample,
            v => return err(e.line, v, "`mode` expects exact or sample"),
        },
    };
    let n_samples = match entries.get("samples") {
        None => DEFAULT_SAMPLES,
        Some(e) => parse_u64(e, "samples", 1)?,
    };
    let seed = match entries.get("seed") {
        None => 0,
        Some(e) => parse_u64(e, "seed", 0)?,
    };

    let spec = GateSpec {
        n_stages,
        theta,
        eta,
        crossings_per_stage: crossings,
        hadamard_sandwich: gate == GateKind::Cnot,
        variant,
    };
    let base = ExperimentConfig {
        spec,
        input,
        mode,
        n_samples,
        seed,
    };

    if axes.is_empty() {
        return Ok(Config::Experiment(base));
    }
    axes.sort_by(|a, b| a.1.name().cmp(b.1.name()));
    let total = axes
        .iter()
        .try_fold(1u64, |acc, (_, a)| acc.checked_mul(a.len() as u64))
        .unwrap_or(u64::MAX);
    if total > MAX_GRID_POINTS {
        let line = axes.iter().map(|(l, _)| *l).max().unwrap_or(end);
        return err(line, &total.to_string(), format!("grid exceeds {MAX_GRID_POINTS} points"));
    }
    Ok(Config::Sweep(SweepConfig {
        base,
        axes: axes.into_iter().map(|(_, a)| a).collect(),
    }))
}

fn experiment_pairs(c: &ExperimentConfig) -> Vec<(String, String)> {
    let s = &c.spec;
    let mut pairs = vec![
        ("crossings".to_string(), s.crossings_per_stage.to_string()),
        ("eta".to_string(), s.eta.to_string()),
        ("gate".to_string(), c.gate().token().to_string()),
        ("input".to_string(), c.input.token()),
        ("mode".to_string(), c.mode.token().to_string()),
        ("n_stages".to_string(), s.n_stages.to_string()),
        ("samples".to_string(), c.n_samples.to_string()),
        ("seed".to_string(), c.seed.to_string()),
        ("variant".to_string(), s.variant.token().to_string()),
    ];
    pairs.push(match s.theta {
        Theta::Explicit(t) => ("theta".to_string(), t.to_string()),
        Theta::Rule(ThetaRule::PiOverN) => ("theta_rule".to_string(), "pi_over_n".to_string()),
        Theta::Rule(ThetaRule::PiOver2N) => ("theta_rule".to_string(), "pi_over_2n".to_string()),
    });
    pairs
}

/// Canonical text: every resolved field, keys in alphabetical order.
pub fn serialize_config(c: &Config) -> String {
    let mut pairs = experiment_pairs(c.base());
    if let Config::Sweep(s) = c {
        for axis in &s.axes {
            pairs.push((format!("sweep.{}", axis.name()), axis.values_token()));
        }
    }
    pairs.sort();
    let mut out = String::new();
    for (k, v) in pairs {
        out.push_str(&k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    }
    out
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_config(self))
    }
}
