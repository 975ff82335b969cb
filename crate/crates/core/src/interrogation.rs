//! The staged interrogation protocol, exact and as Monte Carlo trajectories.
//!
//! One stage is: mirror phase on `B_u` (every stage but the first), the
//! beamsplitter `rotation(θ)` on `(U, D)`, then `crossings_per_stage`
//! collision checks. The CNOT sandwich applies `rotation(π/4)` on `(Out0, D)`
//! before the first and after the last stage, outside the collision region.
//!
//! Trajectory `i` of a sampling run with seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`, so results do not
//! depend on how trajectories are scheduled across threads.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::elements::{
    apply_pair_in_place, collide_in_place, rotation, survival_amplitude, upper_path_phase,
    Operator2,
};
use crate::statespace::{joint_modes, ControlMode, Encoding, JointState, TargetMode, JOINT_DIM};
use crate::{Error, Result, TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ThetaRule {
    /// `θ = π/(2N)`: the unperturbed target leaves through `B_u`.
    PiOver2N,
    /// `θ = π/N`: the unperturbed target returns to `B_d` with a π phase.
    PiOverN,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Theta {
    Rule(ThetaRule),
    Explicit(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Dual-rail gate: only `|1⟩_T` enters the interferometer.
    Main,
    /// Both target rails inside the interferometer.
    Azuma,
}

impl Variant {
    pub fn encoding(self) -> Encoding {
        match self {
            Variant::Main => Encoding::DualRail,
            Variant::Azuma => Encoding::Azuma,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Variant::Main => "main",
            Variant::Azuma => "azuma",
        }
    }
}

/// Full protocol parameterization.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub n_stages: u64,
    pub theta: Theta,
    /// Detection efficiency of a single crossing.
    pub eta: f64,
    pub crossings_per_stage: u32,
    /// `true` turns the CZ layout into a CNOT.
    pub hadamard_sandwich: bool,
    pub variant: Variant,
}

impl GateSpec {
    /// Main-variant spec with `η = 1`, one crossing per stage, no sandwich.
    pub fn new(n_stages: u64, theta: Theta) -> Self {
        GateSpec {
            n_stages,
            theta,
            eta: 1.0,
            crossings_per_stage: 1,
            hadamard_sandwich: false,
            variant: Variant::Main,
        }
    }

    pub fn resolved_theta(&self) -> f64 {
        match self.theta {
            Theta::Rule(ThetaRule::PiOver2N) => PI / (2.0 * self.n_stages as f64),
            Theta::Rule(ThetaRule::PiOverN) => PI / self.n_stages as f64,
            Theta::Explicit(t) => t,
        }
    }

    pub fn encoding(&self) -> Encoding {
        self.variant.encoding()
    }

    /// Number of collision checks over the whole protocol.
    pub fn total_checks(&self) -> u64 {
        self.n_stages * self.crossings_per_stage as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_stages == 0 {
            return Err(Error::InvalidSpec("n_stages must be at least 1".into()));
        }
        if self.crossings_per_stage == 0 {
            return Err(Error::InvalidSpec(
                "crossings_per_stage must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::EtaOutOfRange(self.eta));
        }
        let theta = self.resolved_theta();
        // θ = π is kept so that a single-stage π/N spec stays constructible.
        if !(theta > 0.0 && theta <= PI) {
            return Err(Error::InvalidSpec(format!(
                "resolved theta {theta} outside (0, pi]"
            )));
        }
        if self.variant == Variant::Azuma && self.hadamard_sandwich {
            return Err(Error::InvalidSpec(
                "azuma variant has no out0 rail for the cnot sandwich (encoding mismatch)".into(),
            ));
        }
        Ok(())
    }
}

/// Exact post-selected result of one protocol run.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolResult {
    /// Sub-normalized state conditioned on no scatter at any check.
    pub no_scatter_state: JointState,
    /// `norm²(no_scatter_state)`.
    pub success_prob: f64,
    /// Probability of the first scatter happening at each check, in order
    /// (stage-major, `n_stages · crossings_per_stage` entries).
    pub stage_scatter_probs: Vec<f64>,
}

impl ProtocolResult {
    pub fn scatter_prob(&self) -> f64 {
        self.stage_scatter_probs.iter().sum()
    }
}

/// Resolved stage sequence shared by the exact and stochastic runners.
struct Protocol {
    n_stages: u64,
    crossings: u32,
    eta: f64,
    keep: f64,
    splitter: Operator2,
    sandwich: bool,
}

impl Protocol {
    fn from_spec(spec: &GateSpec) -> Result<Self> {
        spec.validate()?;
        Self::new(
            spec.n_stages,
            spec.resolved_theta(),
            spec.eta,
            spec.crossings_per_stage,
            spec.hadamard_sandwich,
        )
    }

    fn new(n_stages: u64, theta: f64, eta: f64, crossings: u32, sandwich: bool) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidSpec(format!("theta {theta} is not finite")));
        }
        Ok(Protocol {
            n_stages,
            crossings,
            eta,
            keep: survival_amplitude(eta)?,
            splitter: rotation(theta),
            sandwich,
        })
    }

    fn sandwich(&self, s: &mut JointState) {
        if self.sandwich {
            apply_pair_in_place(s, &rotation(FRAC_PI_4), TargetMode::Out0, TargetMode::D);
        }
    }

    fn stage_unitary(&self, s: &mut JointState, stage: u64) {
        if stage > 0 {
            apply_pair_in_place(s, &upper_path_phase(), TargetMode::U, TargetMode::D);
        }
        apply_pair_in_place(s, &self.splitter, TargetMode::U, TargetMode::D);
    }

    fn run_exact(&self, input: &JointState) -> ProtocolResult {
        let mut s = input.clone();
        let mut probs = Vec::with_capacity((self.n_stages * self.crossings as u64) as usize);
        self.sandwich(&mut s);
        for stage in 0..self.n_stages {
            self.stage_unitary(&mut s, stage);
            for _ in 0..self.crossings {
                probs.push(collide_in_place(&mut s, self.eta, self.keep));
            }
        }
        self.sandwich(&mut s);
        ProtocolResult {
            success_prob: s.norm_sqr(),
            no_scatter_state: s,
            stage_scatter_probs: probs,
        }
    }

    fn run_trajectory<R: Rng>(&self, input: &JointState, rng: &mut R) -> TrajectoryOutcome {
        let mut s = input.clone();
        self.sandwich(&mut s);
        for stage in 0..self.n_stages {
            self.stage_unitary(&mut s, stage);
            for crossing in 0..self.crossings {
                let norm = s.norm_sqr();
                let before = s.amp(ControlMode::In, TargetMode::U).norm_sqr();
                let p = if norm > 0.0 { self.eta * before / norm } else { 0.0 };
                let u: f64 = rng.gen();
                if u < p {
                    return TrajectoryOutcome::Scattered {
                        stage: stage + 1,
                        crossing: crossing + 1,
                    };
                }
                collide_in_place(&mut s, self.eta, self.keep);
                s.renormalize_in_place();
            }
        }
        self.sandwich(&mut s);
        TrajectoryOutcome::Survived { final_state: s }
    }
}

fn require_normalized(s: &JointState) -> Result<()> {
    if s.is_normalized() {
        Ok(())
    } else {
        Err(Error::NotNormalized(s.norm_sqr()))
    }
}

/// Classical bomb test: the target enters at `B_d`, the bomb sits in the
/// upper path (`bomb_present`) or is absent. One collision check per stage.
pub fn run_classical_qi(
    n: u64,
    theta: f64,
    bomb_present: bool,
    eta: f64,
) -> Result<ProtocolResult> {
    if n == 0 {
        return Err(Error::InvalidSpec("n_stages must be at least 1".into()));
    }
    let control = if bomb_present {
        ControlMode::In
    } else {
        ControlMode::Out
    };
    let input = crate::statespace::basis_state(control, TargetMode::D);
    Ok(Protocol::new(n, theta, eta, 1, false)?.run_exact(&input))
}

/// Joint quantum evolution of control and target, post-selected on no
/// scatter.
pub fn run_joint_protocol(spec: &GateSpec, input: &JointState) -> Result<ProtocolResult> {
    let protocol = Protocol::from_spec(spec)?;
    require_normalized(input)?;
    Ok(protocol.run_exact(input))
}

/// A single shot of the protocol.
#[derive(Clone, Debug, PartialEq)]
pub enum TrajectoryOutcome {
    /// Scatter detected at the given 1-based stage and crossing.
    Scattered { stage: u64, crossing: u32 },
    /// No scatter; the normalized state at the output.
    Survived { final_state: JointState },
}

impl TrajectoryOutcome {
    pub fn scattered(&self) -> bool {
        matches!(self, TrajectoryOutcome::Scattered { .. })
    }

    pub fn scatter_stage(&self) -> Option<u64> {
        match self {
            TrajectoryOutcome::Scattered { stage, .. } => Some(*stage),
            TrajectoryOutcome::Survived { .. } => None,
        }
    }

    pub fn final_state(&self) -> Option<&JointState> {
        match self {
            TrajectoryOutcome::Survived { final_state } => Some(final_state),
            TrajectoryOutcome::Scattered { .. } => None,
        }
    }
}

/// Random stream for trajectory `index` of a run seeded with `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Samples one trajectory on stream 0 of `seed`.
pub fn sample_trajectory(
    spec: &GateSpec,
    input: &JointState,
    seed: u64,
) -> Result<TrajectoryOutcome> {
    let protocol = Protocol::from_spec(spec)?;
    require_normalized(input)?;
    Ok(protocol.run_trajectory(input, &mut trajectory_rng(seed, 0)))
}

/// Measurement record of one shot, including a joint-basis readout of the
/// surviving particles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Scatter { stage: u64, crossing: u32 },
    Exit { control: ControlMode, target: TargetMode },
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Scatter { stage, crossing } => write!(f, "scatter:{stage}:{crossing}"),
            Outcome::Exit { control, target } => write!(f, "exit:{control}:{target}"),
        }
    }
}

/// Outcome counts from a sampling run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Frequencies {
    pub n_samples: u64,
    pub counts: BTreeMap<Outcome, u64>,
}

impl Frequencies {
    pub fn count(&self, outcome: &Outcome) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    pub fn frequency(&self, outcome: &Outcome) -> f64 {
        self.count(outcome) as f64 / self.n_samples as f64
    }

    pub fn scatter_count(&self) -> u64 {
        self.counts
            .iter()
            .filter(|(o, _)| matches!(o, Outcome::Scatter { .. }))
            .map(|(_, n)| n)
            .sum()
    }

    pub fn survival_count(&self) -> u64 {
        self.n_samples - self.scatter_count()
    }

    /// Scatter counts per 1-based stage, summed over crossings.
    pub fn scatter_by_stage(&self) -> BTreeMap<u64, u64> {
        let mut by_stage = BTreeMap::new();
        for (o, n) in &self.counts {
            if let Outcome::Scatter { stage, .. } = o {
                *by_stage.entry(*stage).or_insert(0) += n;
            }
        }
        by_stage
    }

    fn merge(mut self, other: Frequencies) -> Frequencies {
        self.n_samples += other.n_samples;
        for (o, n) in other.counts {
            *self.counts.entry(o).or_insert(0) += n;
        }
        self
    }
}

fn readout<R: Rng>(s: &JointState, rng: &mut R) -> Outcome {
    let norm = s.norm_sqr();
    let u: f64 = rng.gen::<f64>() * norm;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, a) in s.amplitudes().iter().enumerate() {
        let w = a.norm_sqr();
        if w == 0.0 {
            continue;
        }
        last = i;
        acc += w;
        if u < acc {
            break;
        }
    }
    let (control, target) = joint_modes(last);
    Outcome::Exit { control, target }
}

/// Runs `n_samples` trajectories (in parallel) and tallies scatter locations
/// and joint-basis exit modes.
pub fn estimate_frequencies(
    spec: &GateSpec,
    input: &JointState,
    n_samples: u64,
    seed: u64,
) -> Result<Frequencies> {
    if n_samples == 0 {
        return Err(Error::InvalidSpec("n_samples must be at least 1".into()));
    }
    let protocol = Protocol::from_spec(spec)?;
    require_normalized(input)?;
    let freqs = (0..n_samples)
        .into_par_iter()
        .fold(Frequencies::default, |mut acc, i| {
            let mut rng = trajectory_rng(seed, i);
            let outcome = match protocol.run_trajectory(input, &mut rng) {
                TrajectoryOutcome::Scattered { stage, crossing } => {
                    Outcome::Scatter { stage, crossing }
                }
                TrajectoryOutcome::Survived { final_state } => readout(&final_state, &mut rng),
            };
            acc.n_samples += 1;
            *acc.counts.entry(outcome).or_insert(0) += 1;
            acc
        })
        .reduce(Frequencies::default, Frequencies::merge);
    Ok(freqs)
}

/// Exact probability of every [`Outcome`] with nonzero weight.
pub fn exact_outcome_probabilities(spec: &GateSpec, result: &ProtocolResult) -> BTreeMap<Outcome, f64> {
    let k = spec.crossings_per_stage as u64;
    let mut probs = BTreeMap::new();
    for (i, p) in result.stage_scatter_probs.iter().enumerate() {
        if *p > 0.0 {
            let i = i as u64;
            probs.insert(
                Outcome::Scatter {
                    stage: i / k + 1,
                    crossing: (i % k) as u32 + 1,
                },
                *p,
            );
        }
    }
    for i in 0..JOINT_DIM {
        let w = result.no_scatter_state.amplitudes()[i].norm_sqr();
        if w > 0.0 {
            let (control, target) = joint_modes(i);
            probs.insert(Outcome::Exit { control, target }, w);
        }
    }
    probs
}

const CONSERVATION_TOL: f64 = 1e-10;

impl ProtocolResult {
    /// Whether `success + Σ scatter = norm²(input)` holds for `input_norm_sqr`.
    pub fn conserves(&self, input_norm_sqr: f64) -> bool {
        (self.success_prob - self.no_scatter_state.norm_sqr()).abs() <= TOL
            && (self.success_prob + self.scatter_prob() - input_norm_sqr).abs() <= CONSERVATION_TOL
    }
}
