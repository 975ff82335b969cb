//! Beamsplitters, mode-pair unitaries and the collision channel.

use std::ops::Mul;

use num_complex::Complex64;

use crate::statespace::{ControlMode, JointState, TargetMode};
use crate::{Error, Result, TOL};

/// 2×2 complex matrix acting on an ordered pair of target modes.
/// Row/column 0 is the first mode of the pair, 1 the second.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Operator2 {
    m: [[Complex64; 2]; 2],
}

impl Operator2 {
    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Operator2 {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub fn real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        let c = |x| Complex64::new(x, 0.0);
        Self::new(c(m00), c(m01), c(m10), c(m11))
    }

    pub fn identity() -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest entry of `|M†M − I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.adjoint() * *self;
        let mut dev: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let id = if r == c { 1.0 } else { 0.0 };
                dev = dev.max((p.m[r][c] - id).norm());
            }
        }
        dev
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation() <= TOL
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Operator2) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        d
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }
}

impl Mul for Operator2 {
    type Output = Operator2;

    fn mul(self, rhs: Operator2) -> Operator2 {
        let a = &self.m;
        let b = &rhs.m;
        let e = |r: usize, c: usize| a[r][0] * b[0][c] + a[r][1] * b[1][c];
        Operator2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }
}

/// Beamsplitter of reflectivity `cos²θ` on `(B_u, B_d)`:
/// `[[−cosθ, sinθ], [sinθ, cosθ]]`.
///
/// This is a reflection (det −1), so `rotation(θ)² = I`. Consecutive
/// splitters of a staged setup are separated by a mirror that adds a π phase
/// on `B_u` ([`upper_path_phase`]); with that phase the stages compose into
/// [`rotation_power`].
pub fn rotation(theta: f64) -> Operator2 {
    let (s, c) = theta.sin_cos();
    Operator2::real(-c, s, s, c)
}

/// π phase on the upper path, `diag(−1, 1)` on `(B_u, B_d)`.
pub fn upper_path_phase() -> Operator2 {
    Operator2::real(-1.0, 0.0, 0.0, 1.0)
}

/// Closed-form evolution through `n` unperturbed stages:
/// `[[−cos nθ, sin nθ], [sin nθ, cos nθ]]`.
///
/// Equals `R·P·R·P·…·R` with `n` splitters `R = rotation(θ)` and the mirror
/// phase `P = upper_path_phase()` between consecutive ones.
pub fn rotation_power(theta: f64, n: u64) -> Operator2 {
    assert!(n >= 1, "rotation_power needs at least one stage");
    rotation(n as f64 * theta)
}

/// Applies `op` on target modes `(a, b)` for both control branches.
pub fn apply_mode_pair(
    s: &JointState,
    op: &Operator2,
    a: TargetMode,
    b: TargetMode,
) -> Result<JointState> {
    if a == b {
        return Err(Error::SameMode);
    }
    let dev = op.unitarity_deviation();
    if dev > TOL {
        return Err(Error::NotUnitary(dev));
    }
    let mut out = s.clone();
    apply_pair_in_place(&mut out, op, a, b);
    Ok(out)
}

pub(crate) fn apply_pair_in_place(s: &mut JointState, op: &Operator2, a: TargetMode, b: TargetMode) {
    for c in ControlMode::ALL {
        let [x, y] = op.apply([s.amp(c, a), s.amp(c, b)]);
        *s.amp_mut(c, a) = x;
        *s.amp_mut(c, b) = y;
    }
}

/// Outcome of one collision check.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionResult {
    /// Sub-normalized no-scatter branch.
    pub surviving: JointState,
    pub scatter_prob: f64,
}

/// Collision check at a crossing: the only colliding configuration is
/// `(In, U)`, detected with efficiency `eta`.
pub fn collision_channel(s: &JointState, eta: f64) -> Result<CollisionResult> {
    let keep = survival_amplitude(eta)?;
    let mut surviving = s.clone();
    let scatter_prob = collide_in_place(&mut surviving, eta, keep);
    Ok(CollisionResult {
        surviving,
        scatter_prob,
    })
}

/// `√(1 − eta)` after validating `eta ∈ [0, 1]`.
pub(crate) fn survival_amplitude(eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::EtaOutOfRange(eta));
    }
    Ok((1.0 - eta).sqrt())
}

/// Applies the no-scatter Kraus operator and returns the scatter probability.
pub(crate) fn collide_in_place(s: &mut JointState, eta: f64, keep: f64) -> f64 {
    let a = s.amp_mut(ControlMode::In, TargetMode::U);
    let p = eta * a.norm_sqr();
    *a *= keep;
    p
}

#[cfg(test)]
fn zero_collision(s: &mut JointState) {
    *s.amp_mut(ControlMode::In, TargetMode::U) = Complex64::new(0.0, 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statespace::basis_state;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use ControlMode::{In, Out};
    use TargetMode::{Out0, D, U};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// Explicit product of `n` splitters with the mirror phase between them.
    fn staged_product(theta: f64, n: u64) -> Operator2 {
        let mut p = rotation(theta);
        for _ in 1..n {
            p = rotation(theta) * upper_path_phase() * p;
        }
        p
    }

    #[test]
    fn rotation_values() {
        assert!(rotation(0.0).max_abs_diff(&Operator2::real(-1.0, 0.0, 0.0, 1.0)) < 1e-15);
        let h = FRAC_1_SQRT_2;
        assert!(rotation(PI / 4.0).max_abs_diff(&Operator2::real(-h, h, h, h)) < 1e-15);
        let theta = 0.37;
        let [u, d] = rotation(theta).apply([c(0.0), c(1.0)]);
        assert!((u - c(theta.sin())).norm() < 1e-15);
        assert!((d - c(theta.cos())).norm() < 1e-15);
    }

    #[test]
    fn rotation_is_an_involution() {
        // The splitter alone squares to the identity; the mirror phase is what
        // turns consecutive stages into an accumulating rotation.
        for theta in [0.1, 0.7, 2.0] {
            let r = rotation(theta);
            assert!((r * r).max_abs_diff(&Operator2::identity()) < 1e-15);
        }
    }

    #[test]
    fn rotation_power_closed_forms() {
        let n = 50;
        let swap = rotation_power(PI / (2.0 * n as f64), n);
        assert!(swap.max_abs_diff(&Operator2::real(0.0, 1.0, 1.0, 0.0)) < 1e-12);
        let flip = rotation_power(PI / n as f64, n);
        assert!(flip.max_abs_diff(&Operator2::real(1.0, 0.0, 0.0, -1.0)) < 1e-12);
    }

    #[test]
    fn rotation_power_matches_staged_product() {
        let p = staged_product(0.3, 7);
        assert!(rotation_power(0.3, 7).max_abs_diff(&p) < 1e-12);
        assert!(rotation_power(0.3, 1).max_abs_diff(&rotation(0.3)) < 1e-15);
    }

    #[test]
    fn apply_mode_pair_cases() {
        let s = basis_state(In, D);
        assert_eq!(apply_mode_pair(&s, &Operator2::identity(), U, D).unwrap(), s);

        let swapped = apply_mode_pair(&s, &rotation(PI / 2.0), U, D).unwrap();
        assert!((swapped.amp(In, U) - c(1.0)).norm() < 1e-15);
        assert!(swapped.amp(In, D).norm() < 1e-15);

        let mixed = JointState::superpose(&[
            (c(0.6), &basis_state(In, D)),
            (Complex64::new(0.0, 0.8), &basis_state(Out, Out0)),
        ])
        .unwrap();
        let r = rotation(0.4);
        let there = apply_mode_pair(&mixed, &r, U, D).unwrap();
        let back = apply_mode_pair(&there, &r.adjoint(), U, D).unwrap();
        for (a, b) in back.amplitudes().iter().zip(mixed.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(there.amp(Out, Out0), mixed.amp(Out, Out0));
    }

    #[test]
    fn apply_mode_pair_errors() {
        let s = basis_state(In, D);
        assert_eq!(
            apply_mode_pair(&s, &Operator2::identity(), D, D),
            Err(Error::SameMode)
        );
        let bad = Operator2::real(1.0, 0.0, 0.0, 0.5);
        assert!(matches!(
            apply_mode_pair(&s, &bad, U, D),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn collision_cases() {
        let r = collision_channel(&basis_state(In, U), 1.0).unwrap();
        assert_eq!(r.surviving.norm_sqr(), 0.0);
        assert_eq!(r.scatter_prob, 1.0);

        let s = basis_state(Out, U);
        let r = collision_channel(&s, 1.0).unwrap();
        assert_eq!(r.surviving, s);
        assert_eq!(r.scatter_prob, 0.0);

        let s = JointState::superpose(&[
            (c(0.6), &basis_state(In, U)),
            (c(0.8), &basis_state(Out, D)),
        ])
        .unwrap();
        let r = collision_channel(&s, 0.5).unwrap();
        assert!((r.surviving.amp(In, U) - c(0.6 / 2f64.sqrt())).norm() < 1e-15);
        assert!((r.scatter_prob - 0.18).abs() < 1e-15);
    }

    #[test]
    fn collision_rejects_bad_eta() {
        let s = basis_state(In, U);
        assert_eq!(collision_channel(&s, 1.5), Err(Error::EtaOutOfRange(1.5)));
        assert!(collision_channel(&s, -0.1).is_err());
        assert!(collision_channel(&s, f64::NAN).is_err());
    }

    fn joint_state() -> impl Strategy<Value = JointState> {
        proptest::collection::vec(-1.0f64..1.0, 12)
            .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(|v| {
                let amps = [0, 1, 2, 3, 4, 5].map(|i| Complex64::new(v[2 * i], v[2 * i + 1]));
                JointState::from_amplitudes(amps.map(|a| a * 0.25))
                    .unwrap()
                    .normalized()
                    .unwrap()
            })
    }

    proptest! {
        #[test]
        fn rotation_is_symmetric_orthogonal_reflection(theta in -10.0f64..10.0) {
            let r = rotation(theta);
            prop_assert!(r.unitarity_deviation() < 1e-12);
            prop_assert!((r.entry(0, 1) - r.entry(1, 0)).norm() < 1e-15);
            prop_assert!((r.det() - c(-1.0)).norm() < 1e-12);
        }

        #[test]
        fn rotation_power_matches_oracle(theta in 0.0f64..PI) {
            let mut p = rotation(theta);
            for n in 1..=1000u64 {
                if n > 1 {
                    p = rotation(theta) * upper_path_phase() * p;
                }
                prop_assert!(rotation_power(theta, n).max_abs_diff(&p) < 1e-10, "n = {}", n);
            }
        }

        #[test]
        fn collision_conserves_probability(s in joint_state(), eta in 0.0f64..=1.0) {
            let r = collision_channel(&s, eta).unwrap();
            prop_assert!((r.surviving.norm_sqr() + r.scatter_prob - s.norm_sqr()).abs() < 1e-12);
        }

        #[test]
        fn perfect_collision_is_projection(s in joint_state()) {
            let r = collision_channel(&s, 1.0).unwrap();
            let mut projected = s.clone();
            zero_collision(&mut projected);
            match (r.surviving.normalized(), projected.normalized()) {
                (Some(a), Some(b)) => {
                    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                        prop_assert!((x - y).norm() < 1e-12);
                    }
                }
                (None, None) => {}
                _ => prop_assert!(false, "projection mismatch"),
            }
        }

        #[test]
        fn mode_pair_preserves_norm_and_spectators(s in joint_state(), theta in 0.0f64..PI) {
            let out = apply_mode_pair(&s, &rotation(theta), Out0, D).unwrap();
            prop_assert!((out.norm_sqr() - s.norm_sqr()).abs() < 1e-12);
            prop_assert_eq!(out.amp(In, U), s.amp(In, U));
            prop_assert_eq!(out.amp(Out, U), s.amp(Out, U));
        }
    }
}
