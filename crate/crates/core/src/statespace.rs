//! Joint control/target mode space and dual-rail qubit encoding.
//!
//! The joint space is the tensor product of the two control positions
//! ([`ControlMode`]) and the three target paths ([`TargetMode`]). The basis
//! order is fixed and shared by every matrix and output table:
//!
//! ```text
//! 0: (In, Out0)  1: (In, U)  2: (In, D)  3: (Out, Out0)  4: (Out, U)  5: (Out, D)
//! ```
//!
//! States may be sub-normalized; after post-selection on "no scatter" the
//! squared norm is the success probability.

use std::fmt;

use num_complex::Complex64;

use crate::{Error, Result, TOL};

pub type Amplitude = Complex64;

/// Squared weight tolerated outside the code subspace when decoding.
pub const DECODE_LEAK_TOL: f64 = 1e-9;

pub const JOINT_DIM: usize = 6;

/// Position of the control (bomb) particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlMode {
    /// Travels the upper path through the setup.
    In,
    /// Stays outside the setup.
    Out,
}

/// Path of the target particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetMode {
    /// Bypass rail that never enters the interferometer.
    Out0,
    /// Upper internal path, `B_u`.
    U,
    /// Lower internal path, `B_d`.
    D,
}

impl ControlMode {
    pub const ALL: [ControlMode; 2] = [ControlMode::In, ControlMode::Out];

    pub fn index(self) -> usize {
        match self {
            ControlMode::In => 0,
            ControlMode::Out => 1,
        }
    }
}

impl TargetMode {
    pub const ALL: [TargetMode; 3] = [TargetMode::Out0, TargetMode::U, TargetMode::D];

    pub fn index(self) -> usize {
        match self {
            TargetMode::Out0 => 0,
            TargetMode::U => 1,
            TargetMode::D => 2,
        }
    }
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlMode::In => "in",
            ControlMode::Out => "out",
        })
    }
}

impl fmt::Display for TargetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetMode::Out0 => "out0",
            TargetMode::U => "u",
            TargetMode::D => "d",
        })
    }
}

/// Index of `(c, t)` in the fixed joint basis order.
pub fn joint_index(c: ControlMode, t: TargetMode) -> usize {
    3 * c.index() + t.index()
}

/// Inverse of [`joint_index`].
pub fn joint_modes(index: usize) -> (ControlMode, TargetMode) {
    (ControlMode::ALL[index / 3], TargetMode::ALL[index % 3])
}

fn norm_sqr_of(amps: &[Amplitude]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

fn check_amplitudes(amps: &[Amplitude]) -> Result<()> {
    if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = norm_sqr_of(amps);
    if n > 1.0 + TOL {
        return Err(Error::NormTooLarge(n));
    }
    Ok(())
}

/// Amplitude vector over the six joint modes.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    amps: [Amplitude; JOINT_DIM],
}

impl JointState {
    pub fn zero() -> Self {
        JointState {
            amps: [Amplitude::new(0.0, 0.0); JOINT_DIM],
        }
    }

    pub fn from_amplitudes(amps: [Amplitude; JOINT_DIM]) -> Result<Self> {
        check_amplitudes(&amps)?;
        Ok(JointState { amps })
    }

    /// Linear combination `Σ c_k |s_k⟩`, validated like [`Self::from_amplitudes`].
    pub fn superpose(terms: &[(Amplitude, &JointState)]) -> Result<Self> {
        let mut amps = [Amplitude::new(0.0, 0.0); JOINT_DIM];
        for (c, s) in terms {
            for (a, b) in amps.iter_mut().zip(s.amps.iter()) {
                *a += c * b;
            }
        }
        Self::from_amplitudes(amps)
    }

    pub fn amplitudes(&self) -> &[Amplitude; JOINT_DIM] {
        &self.amps
    }

    pub fn amp(&self, c: ControlMode, t: TargetMode) -> Amplitude {
        self.amps[joint_index(c, t)]
    }

    pub(crate) fn amp_mut(&mut self, c: ControlMode, t: TargetMode) -> &mut Amplitude {
        &mut self.amps[joint_index(c, t)]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr_of(&self.amps)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= TOL
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &JointState) -> Amplitude {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Rescaled to unit norm, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<JointState> {
        let n = self.norm_sqr();
        if n == 0.0 {
            return None;
        }
        let s = 1.0 / n.sqrt();
        Some(JointState {
            amps: self.amps.map(|a| a * s),
        })
    }

    /// Multiplies every amplitude by `factor`, which must have modulus ≤ 1.
    pub fn scaled(&self, factor: Amplitude) -> Result<JointState> {
        Self::from_amplitudes(self.amps.map(|a| a * factor))
    }

    /// Squared weight on the target mode `t`, summed over both control modes.
    pub fn target_weight(&self, t: TargetMode) -> f64 {
        ControlMode::ALL
            .iter()
            .map(|&c| self.amp(c, t).norm_sqr())
            .sum()
    }

    pub(crate) fn renormalize_in_place(&mut self) {
        let n = self.norm_sqr();
        if n > 0.0 {
            let s = 1.0 / n.sqrt();
            for a in self.amps.iter_mut() {
                *a *= s;
            }
        }
    }

    pub(crate) fn clear_target(&mut self, t: TargetMode) {
        for c in ControlMode::ALL {
            *self.amp_mut(c, t) = Amplitude::new(0.0, 0.0);
        }
    }
}

/// Unit state on the single joint mode `(c, t)`.
pub fn basis_state(c: ControlMode, t: TargetMode) -> JointState {
    let mut s = JointState::zero();
    *s.amp_mut(c, t) = Amplitude::new(1.0, 0.0);
    s
}

/// Two-qubit state in the computational basis `|00⟩, |01⟩, |10⟩, |11⟩`,
/// control qubit first.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitState {
    amps: [Amplitude; 4],
}

impl QubitState {
    pub fn from_amplitudes(amps: [Amplitude; 4]) -> Result<Self> {
        check_amplitudes(&amps)?;
        Ok(QubitState { amps })
    }

    /// Builds a state from real amplitudes.
    pub fn from_real(amps: [f64; 4]) -> Result<Self> {
        Self::from_amplitudes(amps.map(|a| Amplitude::new(a, 0.0)))
    }

    /// Computational basis state `|index⟩`, `index` in `0..4`.
    pub fn basis(index: usize) -> Self {
        assert!(index < 4, "two-qubit basis index out of range: {index}");
        let mut amps = [Amplitude::new(0.0, 0.0); 4];
        amps[index] = Amplitude::new(1.0, 0.0);
        QubitState { amps }
    }

    pub fn zero() -> Self {
        QubitState {
            amps: [Amplitude::new(0.0, 0.0); 4],
        }
    }

    pub fn amplitudes(&self) -> &[Amplitude; 4] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr_of(&self.amps)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= TOL
    }

    pub fn normalized(&self) -> Option<QubitState> {
        let n = self.norm_sqr();
        if n == 0.0 {
            return None;
        }
        let s = 1.0 / n.sqrt();
        Some(QubitState {
            amps: self.amps.map(|a| a * s),
        })
    }

    pub fn inner(&self, other: &QubitState) -> Amplitude {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Assignment of logical qubit values to physical modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Encoding {
    /// `|0⟩_C → In`, `|1⟩_C → Out`, `|0⟩_T → Out0`, `|1⟩_T → D`.
    DualRail,
    /// Both target values inside the interferometer and the control enters
    /// for `|1⟩_C`: `|0⟩_C → Out`, `|1⟩_C → In`, `|0⟩_T → U`, `|1⟩_T → D`.
    Azuma,
}

impl Encoding {
    pub fn control_mode(self, bit: usize) -> ControlMode {
        match (self, bit) {
            (Encoding::DualRail, 0) | (Encoding::Azuma, 1) => ControlMode::In,
            _ => ControlMode::Out,
        }
    }

    pub fn target_mode(self, bit: usize) -> TargetMode {
        match (self, bit) {
            (Encoding::DualRail, 0) => TargetMode::Out0,
            (Encoding::Azuma, 0) => TargetMode::U,
            _ => TargetMode::D,
        }
    }

    /// The target mode that carries no logical value in this encoding.
    pub fn unused_target(self) -> TargetMode {
        match self {
            Encoding::DualRail => TargetMode::U,
            Encoding::Azuma => TargetMode::Out0,
        }
    }

    /// Joint mode of the computational basis state `|index⟩`.
    pub fn modes(self, index: usize) -> (ControlMode, TargetMode) {
        (self.control_mode(index >> 1), self.target_mode(index & 1))
    }
}

/// Dual-rail encoding of a normalized two-qubit state.
pub fn encode_qubits(q: &QubitState) -> Result<JointState> {
    encode_with(q, Encoding::DualRail)
}

pub fn encode_with(q: &QubitState, enc: Encoding) -> Result<JointState> {
    if !q.is_normalized() {
        return Err(Error::NotNormalized(q.norm_sqr()));
    }
    let mut s = JointState::zero();
    for (i, a) in q.amps.iter().enumerate() {
        let (c, t) = enc.modes(i);
        *s.amp_mut(c, t) = *a;
    }
    Ok(s)
}

/// Inverse of [`encode_qubits`]. The result is not renormalized.
pub fn decode_qubits(s: &JointState) -> Result<QubitState> {
    decode_with(s, Encoding::DualRail)
}

pub fn decode_with(s: &JointState, enc: Encoding) -> Result<QubitState> {
    let leak = s.target_weight(enc.unused_target());
    if leak >= DECODE_LEAK_TOL {
        return Err(Error::OutsideCodeSpace(leak));
    }
    let mut amps = [Amplitude::new(0.0, 0.0); 4];
    for (i, a) in amps.iter_mut().enumerate() {
        let (c, t) = enc.modes(i);
        *a = s.amp(c, t);
    }
    Ok(QubitState { amps })
}

/// Drops the amplitude on the target mode unused by `enc`.
pub fn project_code_space(s: &JointState, enc: Encoding) -> JointState {
    let mut p = s.clone();
    p.clear_target(enc.unused_target());
    p
}

/// `|⟨a|b⟩|²` for normalized states.
pub fn fidelity(a: &JointState, b: &JointState) -> Result<f64> {
    for s in [a, b] {
        if !s.is_normalized() {
            return Err(Error::NotNormalized(s.norm_sqr()));
        }
    }
    Ok(a.inner(b).norm_sqr().min(1.0))
}

/// Pure-state concurrence `2|a00·a11 − a01·a10|`.
pub fn concurrence(q: &QubitState) -> Result<f64> {
    if !q.is_normalized() {
        return Err(Error::NotNormalized(q.norm_sqr()));
    }
    let [a00, a01, a10, a11] = q.amps;
    Ok((2.0 * (a00 * a11 - a01 * a10).norm()).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Amplitude {
        Amplitude::new(re, 0.0)
    }

    fn qubit_state() -> impl Strategy<Value = QubitState> {
        proptest::collection::vec(-1.0f64..1.0, 8)
            .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(|v| {
                let amps = [0, 1, 2, 3].map(|i| Amplitude::new(v[2 * i], v[2 * i + 1]));
                QubitState { amps }.normalized().unwrap()
            })
    }

    fn joint_state() -> impl Strategy<Value = JointState> {
        proptest::collection::vec(-1.0f64..1.0, 12)
            .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(|v| {
                let amps = [0, 1, 2, 3, 4, 5].map(|i| Amplitude::new(v[2 * i], v[2 * i + 1]));
                JointState { amps }.normalized().unwrap()
            })
    }

    #[test]
    fn basis_order_is_fixed() {
        use ControlMode::*;
        use TargetMode::*;
        let order = [(In, Out0), (In, U), (In, D), (Out, Out0), (Out, U), (Out, D)];
        for (i, (cm, tm)) in order.iter().enumerate() {
            assert_eq!(joint_index(*cm, *tm), i);
            assert_eq!(joint_modes(i), (*cm, *tm));
        }
    }

    #[test]
    fn basis_states() {
        let s = basis_state(ControlMode::In, TargetMode::D);
        assert_eq!(s.amp(ControlMode::In, TargetMode::D), c(1.0));
        assert_eq!(s.norm_sqr(), 1.0);
        let s = basis_state(ControlMode::Out, TargetMode::Out0);
        assert_eq!(s.amplitudes()[3], c(1.0));
        assert_eq!(basis_state(ControlMode::In, TargetMode::U).norm_sqr(), 1.0);
    }

    #[test]
    fn encode_basis_and_bell() {
        let s = encode_qubits(&QubitState::basis(0)).unwrap();
        assert_eq!(s, basis_state(ControlMode::In, TargetMode::Out0));
        let s = encode_qubits(&QubitState::basis(3)).unwrap();
        assert_eq!(s, basis_state(ControlMode::Out, TargetMode::D));

        let bell = QubitState::from_real([FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let expected = JointState::superpose(&[
            (c(FRAC_1_SQRT_2), &basis_state(ControlMode::In, TargetMode::Out0)),
            (c(FRAC_1_SQRT_2), &basis_state(ControlMode::Out, TargetMode::D)),
        ])
        .unwrap();
        assert_eq!(encode_qubits(&bell).unwrap(), expected);
    }

    #[test]
    fn encode_rejects_unnormalized() {
        let q = QubitState::from_real([0.5, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(encode_qubits(&q), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn decode_cases() {
        for i in 0..4 {
            let q = QubitState::basis(i);
            assert_eq!(decode_qubits(&encode_qubits(&q).unwrap()).unwrap(), q);
        }
        let err = decode_qubits(&basis_state(ControlMode::In, TargetMode::U)).unwrap_err();
        assert!(err.to_string().contains("target not in dual-rail subspace"));

        let s = JointState::superpose(&[
            (c(0.6), &basis_state(ControlMode::In, TargetMode::Out0)),
            (c(0.8), &basis_state(ControlMode::Out, TargetMode::D)),
        ])
        .unwrap();
        let q = decode_qubits(&s).unwrap();
        assert_eq!(q.amplitudes(), &[c(0.6), c(0.0), c(0.0), c(0.8)]);
    }

    #[test]
    fn azuma_encoding_modes() {
        let enc = Encoding::Azuma;
        assert_eq!(enc.modes(0), (ControlMode::Out, TargetMode::U));
        assert_eq!(enc.modes(2), (ControlMode::In, TargetMode::U));
        assert_eq!(enc.modes(3), (ControlMode::In, TargetMode::D));
        let s = encode_with(&QubitState::basis(0), enc).unwrap();
        assert!(decode_qubits(&s).is_err());
        assert_eq!(decode_with(&s, enc).unwrap(), QubitState::basis(0));
    }

    #[test]
    fn fidelity_cases() {
        let a = basis_state(ControlMode::In, TargetMode::U);
        let b = basis_state(ControlMode::In, TargetMode::D);
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        let plus =
            JointState::superpose(&[(c(FRAC_1_SQRT_2), &a), (c(FRAC_1_SQRT_2), &b)]).unwrap();
        assert!((fidelity(&plus, &a).unwrap() - 0.5).abs() < 1e-12);
        let half = a.scaled(c(0.5)).unwrap();
        assert!(fidelity(&half, &a).is_err());
    }

    #[test]
    fn concurrence_cases() {
        let bell = QubitState::from_real([FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(concurrence(&QubitState::basis(1)).unwrap(), 0.0);
        let q = QubitState::from_real([0.6, 0.0, 0.0, 0.8]).unwrap();
        assert!((concurrence(&q).unwrap() - 0.96).abs() < 1e-12);
        assert!(concurrence(&QubitState::zero()).is_err());
    }

    #[test]
    fn rejects_bad_amplitudes() {
        let mut amps = [c(0.0); JOINT_DIM];
        amps[0] = Amplitude::new(f64::NAN, 0.0);
        assert_eq!(JointState::from_amplitudes(amps), Err(Error::NonFinite));
        amps[0] = c(1.1);
        assert!(matches!(
            JointState::from_amplitudes(amps),
            Err(Error::NormTooLarge(_))
        ));
    }

    proptest! {
        #[test]
        fn superposition_of_orthonormal_components_is_normalized(q in qubit_state()) {
            let terms: Vec<(Amplitude, JointState)> = (0..4)
                .map(|i| (q.amplitudes()[i], encode_qubits(&QubitState::basis(i)).unwrap()))
                .collect();
            let refs: Vec<(Amplitude, &JointState)> = terms.iter().map(|(a, s)| (*a, s)).collect();
            let s = JointState::superpose(&refs).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn encode_decode_round_trip(q in qubit_state()) {
            for enc in [Encoding::DualRail, Encoding::Azuma] {
                let back = decode_with(&encode_with(&q, enc).unwrap(), enc).unwrap();
                for (a, b) in back.amplitudes().iter().zip(q.amplitudes()) {
                    prop_assert!((a - b).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn fidelity_symmetric_and_phase_invariant(
            a in joint_state(), b in joint_state(), phi in 0.0f64..std::f64::consts::TAU
        ) {
            let f = fidelity(&a, &b).unwrap();
            prop_assert!((f - fidelity(&b, &a).unwrap()).abs() < 1e-12);
            let ap = a.scaled(Amplitude::from_polar(1.0, phi)).unwrap();
            prop_assert!((f - fidelity(&ap, &b).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn concurrence_phase_invariant(
            q in qubit_state(),
            phi in 0.0f64..std::f64::consts::TAU,
            alpha in 0.0f64..std::f64::consts::TAU,
            beta in 0.0f64..std::f64::consts::TAU,
        ) {
            let c0 = concurrence(&q).unwrap();
            let g = Amplitude::from_polar(1.0, phi);
            let ea = Amplitude::from_polar(1.0, alpha);
            let eb = Amplitude::from_polar(1.0, beta);
            let [a00, a01, a10, a11] = *q.amplitudes();
            let global = QubitState::from_amplitudes([a00 * g, a01 * g, a10 * g, a11 * g]).unwrap();
            let local = QubitState::from_amplitudes([a00, a01 * eb, a10 * ea, a11 * ea * eb]).unwrap();
            prop_assert!((c0 - concurrence(&global).unwrap()).abs() < 1e-12);
            prop_assert!((c0 - concurrence(&local).unwrap()).abs() < 1e-12);
        }
    }
}
