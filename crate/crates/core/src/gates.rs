//! CZ/CNOT gate constructions and their evaluation.
//!
//! Gate matrices are the no-scatter Kraus operator restricted to the
//! dual-rail code space. A target leaving through a rail that carries no
//! logical value (`B_u` for the main layout) is a detected failure, like a
//! scatter, so it is projected out before decoding. Columns are not
//! renormalized: the squared norm of column `j` is the success probability for
//! basis input `|j⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::ops::Mul;

use num_complex::Complex64;

use crate::elements::{rotation, Operator2};
use crate::interrogation::{run_joint_protocol, GateSpec, Theta, ThetaRule, Variant};
use crate::statespace::{
    concurrence, decode_with, encode_with, project_code_space, QubitState,
};
use crate::{Error, Result};

/// Cumulative scatter probability above which a basis input is forbidden.
pub const FORBIDDEN_SCATTER: f64 = 0.99;

/// Target unitary for fidelity comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IdealGate {
    Cz,
    /// `(I⊗R(π/4))·CZ·(I⊗R(π/4))`, the CNOT in the splitter's own sign
    /// convention.
    Cnot,
}

fn spec_with(
    n: u64,
    eta: f64,
    crossings: u32,
    rule: ThetaRule,
    sandwich: bool,
    variant: Variant,
) -> Result<GateSpec> {
    let spec = GateSpec {
        n_stages: n,
        theta: Theta::Rule(rule),
        eta,
        crossings_per_stage: crossings,
        hadamard_sandwich: sandwich,
        variant,
    };
    spec.validate()?;
    Ok(spec)
}

/// Controlled sign shift with `θ = π/N`.
pub fn cz_spec(n: u64, eta: f64, crossings: u32) -> Result<GateSpec> {
    spec_with(n, eta, crossings, ThetaRule::PiOverN, false, Variant::Main)
}

/// CZ wrapped in two `θ = π/4` splitters on the target rails.
pub fn cnot_spec(n: u64, eta: f64, crossings: u32) -> Result<GateSpec> {
    spec_with(n, eta, crossings, ThetaRule::PiOverN, true, Variant::Main)
}

/// Both target rails inside the setup, `θ = π/(2N)`.
pub fn azuma_spec(n: u64, eta: f64, crossings: u32) -> Result<GateSpec> {
    spec_with(n, eta, crossings, ThetaRule::PiOver2N, false, Variant::Azuma)
}

/// 4×4 complex matrix on `|00⟩, |01⟩, |10⟩, |11⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateMatrix {
    m: [[Complex64; 4]; 4],
}

impl GateMatrix {
    pub fn from_entries(m: [[Complex64; 4]; 4]) -> Self {
        GateMatrix { m }
    }

    pub fn from_columns(cols: &[QubitState; 4]) -> Self {
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (j, col) in cols.iter().enumerate() {
            for (i, a) in col.amplitudes().iter().enumerate() {
                m[i][j] = *a;
            }
        }
        GateMatrix { m }
    }

    pub fn diag(d: [Complex64; 4]) -> Self {
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            m[i][i] = d[i];
        }
        GateMatrix { m }
    }

    pub fn identity() -> Self {
        Self::diag([Complex64::new(1.0, 0.0); 4])
    }

    pub fn cz() -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self::diag([one, one, one, -one])
    }

    /// `I ⊗ op`, with `op` acting on the target qubit.
    pub fn on_target(op: &Operator2) -> Self {
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for block in 0..2 {
            for r in 0..2 {
                for c in 0..2 {
                    m[2 * block + r][2 * block + c] = op.entry(r, c);
                }
            }
        }
        GateMatrix { m }
    }

    pub fn ideal(gate: IdealGate) -> Self {
        match gate {
            IdealGate::Cz => Self::cz(),
            IdealGate::Cnot => {
                let h = Self::on_target(&rotation(FRAC_PI_4));
                h * Self::cz() * h
            }
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn entries(&self) -> &[[Complex64; 4]; 4] {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.m[j][i].conj();
            }
        }
        GateMatrix { m }
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.m[i][i]).sum()
    }

    pub fn column_norm_sqr(&self, j: usize) -> f64 {
        (0..4).map(|i| self.m[i][j].norm_sqr()).sum()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..4).all(|i| (0..4).all(|j| i == j || self.m[i][j].norm() <= tol))
    }

    pub fn max_abs_diff(&self, other: &GateMatrix) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }
}

impl Mul for GateMatrix {
    type Output = GateMatrix;

    fn mul(self, rhs: GateMatrix) -> GateMatrix {
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..4).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        GateMatrix { m }
    }
}

/// One row of a truth table.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthRow {
    /// Computational basis index of the input, `0..4`.
    pub input: usize,
    /// Probability of no scatter and an exit in the code space.
    pub success_prob: f64,
    /// Cumulative scatter probability.
    pub scatter_prob: f64,
    /// No scatter, but the target left through the unused rail.
    pub leak_prob: f64,
    /// First-scatter probability per collision check.
    pub stage_scatter_probs: Vec<f64>,
    /// Renormalized decoded output; zero if nothing survives.
    pub output: QubitState,
}

impl TruthRow {
    pub fn label(&self) -> &'static str {
        basis_label(self.input)
    }

    pub fn forbidden(&self) -> bool {
        self.scatter_prob > FORBIDDEN_SCATTER
    }
}

pub fn basis_label(index: usize) -> &'static str {
    ["00", "01", "10", "11"][index]
}

struct BasisRun {
    column: QubitState,
    no_scatter_prob: f64,
    stage_scatter_probs: Vec<f64>,
}

fn run_basis(spec: &GateSpec, index: usize) -> Result<BasisRun> {
    let enc = spec.encoding();
    let input = encode_with(&QubitState::basis(index), enc)?;
    let r = run_joint_protocol(spec, &input)?;
    let column = decode_with(&project_code_space(&r.no_scatter_state, enc), enc)?;
    Ok(BasisRun {
        column,
        no_scatter_prob: r.success_prob,
        stage_scatter_probs: r.stage_scatter_probs,
    })
}

/// No-scatter gate matrix: column `j` is the decoded output for input `|j⟩`.
pub fn conditional_gate_matrix(spec: &GateSpec) -> Result<GateMatrix> {
    let cols = [0, 1, 2, 3].map(|j| run_basis(spec, j).map(|b| b.column));
    let [a, b, c, d] = cols;
    Ok(GateMatrix::from_columns(&[a?, b?, c?, d?]))
}

pub fn truth_table(spec: &GateSpec) -> Result<Vec<TruthRow>> {
    (0..4)
        .map(|input| {
            let run = run_basis(spec, input)?;
            let success_prob = run.column.norm_sqr();
            Ok(TruthRow {
                input,
                success_prob,
                scatter_prob: run.stage_scatter_probs.iter().sum(),
                leak_prob: (run.no_scatter_prob - success_prob).max(0.0),
                stage_scatter_probs: run.stage_scatter_probs,
                output: run.column.normalized().unwrap_or_else(QubitState::zero),
            })
        })
        .collect()
}

/// Process-level figures of merit of a conditional gate matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateMetrics {
    /// `|Tr(U†M)|² / 16`.
    pub raw_process_fidelity: f64,
    /// `|Tr(U†M)|² / (4·Tr(M†M))`, fidelity given success.
    pub postselected_process_fidelity: f64,
    pub worst_case_basis_success: f64,
}

impl GateMetrics {
    pub fn of(m: &GateMatrix, ideal: IdealGate) -> Self {
        let u = GateMatrix::ideal(ideal);
        let overlap = (u.adjoint() * *m).trace().norm_sqr();
        let weight = (m.adjoint() * *m).trace().re;
        let postselected = if weight > 0.0 {
            (overlap / (4.0 * weight)).min(1.0)
        } else {
            0.0
        };
        let worst = (0..4)
            .map(|j| m.column_norm_sqr(j))
            .fold(f64::INFINITY, f64::min);
        GateMetrics {
            raw_process_fidelity: (overlap / 16.0).min(1.0),
            postselected_process_fidelity: postselected,
            worst_case_basis_success: worst.min(1.0),
        }
    }
}

pub fn gate_metrics(spec: &GateSpec, ideal: IdealGate) -> Result<GateMetrics> {
    Ok(GateMetrics::of(&conditional_gate_matrix(spec)?, ideal))
}

/// Concurrence of the post-selected output for `(|0⟩+|1⟩)_C/√2 ⊗ |0⟩_T`.
pub fn entanglement_demo(spec: &GateSpec) -> Result<f64> {
    if !spec.hadamard_sandwich || spec.variant != Variant::Main {
        return Err(Error::Unsupported(
            "entanglement demo needs a cnot spec".into(),
        ));
    }
    let enc = spec.encoding();
    let plus = QubitState::from_real([FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0])?;
    let r = run_joint_protocol(spec, &encode_with(&plus, enc)?)?;
    let out = decode_with(&project_code_space(&r.no_scatter_state, enc), enc)?;
    let out = out
        .normalized()
        .ok_or_else(|| Error::Unsupported("no surviving amplitude".into()))?;
    concurrence(&out)
}
