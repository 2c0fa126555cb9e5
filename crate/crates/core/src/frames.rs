//! Pulse operators and the transformation laws between two parties whose
//! clocks (and therefore laser phase references) differ.
//!
//! Conventions: `|0⟩` is the excited state, `Z|0⟩ = |0⟩`, `Z|1⟩ = −|1⟩`, and
//! everything is written in the interaction picture, so a clock offset shows
//! up only as the static relative phase `φ_BA = ω·t_BA`.
//!
//! Every operator carries the [`Frame`] it is written in. Operators that are
//! diagonal in the energy basis are the same in every frame; all others may
//! only be composed with operators and states described in the same frame.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::PureQubit;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance used for the unitarity invariant and for diagonal detection.
pub const UNITARY_TOL: f64 = 1e-12;

/// The party whose phase reference a description is relative to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    Alice,
    Bob,
}

impl Frame {
    pub fn other(self) -> Frame {
        match self {
            Frame::Alice => Frame::Bob,
            Frame::Bob => Frame::Alice,
        }
    }
}

/// An angle taken modulo 2π, stored as its representative in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct PhaseAngle(f64);

impl PhaseAngle {
    pub const ZERO: PhaseAngle = PhaseAngle(0.0);

    pub fn new(radians: f64) -> Self {
        let mut r = radians.rem_euclid(TAU);
        // rem_euclid can round up to exactly 2π for tiny negative inputs
        if r >= TAU {
            r = 0.0;
        }
        PhaseAngle(r)
    }

    /// Angle given in units of π (the `T = φ/π` parameterisation).
    pub fn from_pi_units(t: f64) -> Self {
        Self::new(t * PI)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn pi_units(self) -> f64 {
        self.0 / PI
    }

    /// The integer multiple `m·φ`, reduced modulo 2π.
    pub fn times(self, m: u64) -> Self {
        // Reduce the multiplier first so very large m keeps full precision.
        let period = 1u64 << 52;
        let hi = (m / period) as f64 * ((period as f64 * self.0) % TAU);
        let lo = (m % period) as f64 * self.0;
        Self::new(hi + lo)
    }
}

impl Add for PhaseAngle {
    type Output = PhaseAngle;
    fn add(self, rhs: PhaseAngle) -> PhaseAngle {
        PhaseAngle::new(self.0 + rhs.0)
    }
}

impl Sub for PhaseAngle {
    type Output = PhaseAngle;
    fn sub(self, rhs: PhaseAngle) -> PhaseAngle {
        PhaseAngle::new(self.0 - rhs.0)
    }
}

impl Neg for PhaseAngle {
    type Output = PhaseAngle;
    fn neg(self) -> PhaseAngle {
        PhaseAngle::new(-self.0)
    }
}

impl fmt::Display for PhaseAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}π", self.pi_units())
    }
}

/// A single-qubit unitary written in a particular party's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    m: [[Complex64; 2]; 2],
    frame: Frame,
}

impl Unitary2 {
    /// Builds an operator from a row-major matrix, rejecting non-unitary input.
    pub fn from_matrix(m: [[Complex64; 2]; 2], frame: Frame) -> Result<Self> {
        let u = Unitary2 { m, frame };
        let defect = u.unitarity_defect();
        if !(defect <= UNITARY_TOL) {
            return Err(Error::param(
                "matrix",
                format!("not unitary (max |UU† − I| = {defect:e})"),
            ));
        }
        Ok(u)
    }

    pub(crate) fn raw(m: [[Complex64; 2]; 2], frame: Frame) -> Self {
        Unitary2 { m, frame }
    }

    pub fn identity(frame: Frame) -> Self {
        Unitary2::raw([[ONE, ZERO], [ZERO, ONE]], frame)
    }

    pub fn diagonal(d0: Complex64, d1: Complex64, frame: Frame) -> Self {
        Unitary2::raw([[d0, ZERO], [ZERO, d1]], frame)
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Diagonal operators commute with every frame change.
    pub fn is_diagonal(&self) -> bool {
        self.m[0][1].norm() <= UNITARY_TOL && self.m[1][0].norm() <= UNITARY_TOL
    }

    /// Whether this operator may act on something described in `frame`.
    pub fn acts_in(&self, frame: Frame) -> bool {
        self.frame == frame || self.is_diagonal()
    }

    pub fn dagger(&self) -> Self {
        let m = &self.m;
        Unitary2::raw(
            [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
            self.frame,
        )
    }

    /// `self · rhs` (apply `rhs` first). Both must be described in the same
    /// frame unless one of them is diagonal.
    pub fn compose(&self, rhs: &Unitary2) -> Result<Self> {
        let frame = match (self.is_diagonal(), rhs.is_diagonal()) {
            (false, false) if self.frame != rhs.frame => {
                return Err(Error::FrameMismatch {
                    operator: self.frame,
                    operand: rhs.frame,
                })
            }
            (true, false) => rhs.frame,
            _ => self.frame,
        };
        Ok(Unitary2::raw(matmul(&self.m, &rhs.m), frame))
    }

    /// Largest entry of `|U·U† − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = matmul(&self.m, &self.dagger().m);
        let mut worst: f64 = 0.0;
        for (r, row) in p.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }

    pub fn determinant(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest entrywise distance to `other` (frames ignored).
    pub fn max_entry_diff(&self, other: &Unitary2) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        worst
    }

    /// Distance after removing the best-fitting global phase: `min_c |U − c·V|`
    /// over unit `c`, evaluated at the maximiser `c = tr(V†U)/|tr(V†U)|`.
    pub fn phase_distance(&self, other: &Unitary2) -> f64 {
        let overlap = matmul(&other.dagger().m, &self.m);
        let tr = overlap[0][0] + overlap[1][1];
        let c = if tr.norm() > 0.0 { tr / tr.norm() } else { ONE };
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for col in 0..2 {
                worst = worst.max((self.m[r][col] - c * other.m[r][col]).norm());
            }
        }
        worst
    }

    pub fn equal_up_to_phase(&self, other: &Unitary2, tol: f64) -> bool {
        self.phase_distance(other) <= tol
    }
}

pub(crate) fn matmul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// The `(kπ)`-pulse `Π_k(φ)` of a laser with phase `phi` relative to `frame`.
pub fn rabi_pulse(k: f64, phi: PhaseAngle, frame: Frame) -> Unitary2 {
    debug_assert!(k.is_finite(), "pulse area must be finite");
    let half = k * PI / 2.0;
    let (s, c) = half.sin_cos();
    let minus_i = Complex64::new(0.0, -1.0);
    let p = phi.radians();
    Unitary2::raw(
        [
            [Complex64::new(c, 0.0), minus_i * cis(-p) * s],
            [minus_i * cis(p) * s, Complex64::new(c, 0.0)],
        ],
        frame,
    )
}

/// The party's Pauli X: a π-pulse at zero phase with the global `−i` dropped.
pub fn pauli_x_op(frame: Frame) -> Unitary2 {
    Unitary2::raw([[ZERO, ONE], [ONE, ZERO]], frame)
}

/// The party's `π/2`-pulse at phase `π/2`.
pub fn hadamard_op(frame: Frame) -> Unitary2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Unitary2::raw([[h, -h], [h, h]], frame)
}

/// `exp(−iθZ/2)`. Diagonal, so valid in either frame; tagged Alice.
///
/// Takes raw radians: the spinor has period 4π, so θ = 2π gives `−I`.
pub fn z_rotation(theta: f64) -> Unitary2 {
    let t = theta / 2.0;
    Unitary2::diagonal(cis(-t), cis(t), Frame::Alice)
}

/// `e^{−iφZ/2} · U · e^{+iφZ/2}`, retagged to the other party's frame.
///
/// With `phi_ba = φ_BA` this rewrites an Alice-frame description in Bob's
/// frame; pass `−φ_BA` to go the other way.
pub fn frame_conjugate(u: &Unitary2, phi_ba: PhaseAngle) -> Unitary2 {
    let p = phi_ba.radians();
    let m = u.m;
    // Diagonal entries are untouched; off-diagonals pick up e^{∓iφ}.
    Unitary2::raw(
        [[m[0][0], m[0][1] * cis(-p)], [m[1][0] * cis(p), m[1][1]]],
        u.frame.other(),
    )
}

/// Rewrites a state description in the other party's frame:
/// amplitudes pick up `e^{−iφ/2}` and `e^{+iφ/2}`.
pub fn frame_shift_state(psi: &PureQubit, phi_ba: PhaseAngle) -> PureQubit {
    let half = phi_ba.radians() / 2.0;
    PureQubit::from_parts(psi.amp0() * cis(-half), psi.amp1() * cis(half), psi.frame().other())
}

/// Alice-frame description of `m` bounces, `(X_A X_B)^m = e^{+i m φ_BA Z}`
/// up to global phase.
pub fn bounce_unitary(m: u64, phi_ba: PhaseAngle) -> Result<Unitary2> {
    if m == 0 {
        return Err(Error::param("m", "bounce count must be at least 1"));
    }
    let theta = phi_ba.times(m).radians();
    Ok(Unitary2::diagonal(cis(theta), cis(-theta), Frame::Alice))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_matrix(u: &Unitary2, expected: [[Complex64; 2]; 2], tol: f64) {
        let e = Unitary2::raw(expected, u.frame());
        assert!(u.max_entry_diff(&e) <= tol, "{:?} != {:?}", u.matrix(), expected);
    }

    #[test]
    fn pi_pulse_matrix() {
        let u = rabi_pulse(1.0, PhaseAngle::ZERO, Frame::Alice);
        assert_matrix(&u, [[ZERO, c(0.0, -1.0)], [c(0.0, -1.0), ZERO]], 1e-15);
    }

    #[test]
    fn two_pi_pulse_is_minus_identity() {
        for phi in [0.0, 0.3, 2.0, 5.9] {
            let u = rabi_pulse(2.0, PhaseAngle::new(phi), Frame::Bob);
            assert_matrix(&u, [[-ONE, ZERO], [ZERO, -ONE]], 1e-15);
        }
    }

    #[test]
    fn half_pulse_at_quarter_phase_is_hadamard() {
        let u = rabi_pulse(0.5, PhaseAngle::new(FRAC_PI_2), Frame::Alice);
        assert!(u.max_entry_diff(&hadamard_op(Frame::Alice)) <= 1e-15);
        let h = FRAC_1_SQRT_2;
        assert_matrix(&u, [[c(h, 0.0), c(-h, 0.0)], [c(h, 0.0), c(h, 0.0)]], 1e-15);
    }

    #[test]
    fn pauli_x_is_pi_pulse_without_global_phase() {
        let x = pauli_x_op(Frame::Alice);
        assert_eq!(x.frame(), Frame::Alice);
        let pulse = rabi_pulse(1.0, PhaseAngle::ZERO, Frame::Alice);
        assert!(x.equal_up_to_phase(&pulse, 1e-15));
        let xx = x.compose(&x).unwrap();
        assert!(xx.equal_up_to_phase(&Unitary2::identity(Frame::Alice), 1e-15));
    }

    #[test]
    fn conjugated_x_has_phase_off_diagonals() {
        let phi = 0.7;
        let xb = frame_conjugate(&pauli_x_op(Frame::Alice), PhaseAngle::new(phi));
        assert_eq!(xb.frame(), Frame::Bob);
        assert_matrix(&xb, [[ZERO, cis(-phi)], [cis(phi), ZERO]], 1e-15);
    }

    #[test]
    fn hadamard_squared_flips_ground() {
        let h = hadamard_op(Frame::Alice);
        let hh = h.compose(&h).unwrap();
        assert_matrix(&hh, [[ZERO, -ONE], [ONE, ZERO]], 1e-15);
        assert!(h.unitarity_defect() < 1e-15);
    }

    #[test]
    fn z_rotation_edges() {
        assert_matrix(&z_rotation(0.0), [[ONE, ZERO], [ZERO, ONE]], 0.0);
        assert_matrix(&z_rotation(TAU), [[-ONE, ZERO], [ZERO, -ONE]], 1e-15);
        let r = z_rotation(1.3);
        let conj = frame_conjugate(&r, PhaseAngle::new(2.2));
        assert!(conj.max_entry_diff(&r) == 0.0);
    }

    #[test]
    fn conjugation_identities() {
        let u = rabi_pulse(0.37, PhaseAngle::new(1.1), Frame::Alice);
        assert!(frame_conjugate(&u, PhaseAngle::ZERO).max_entry_diff(&u) == 0.0);
        let phi = PhaseAngle::new(2.9);
        let back = frame_conjugate(&frame_conjugate(&u, phi), -phi);
        assert_eq!(back.frame(), Frame::Alice);
        assert!(back.max_entry_diff(&u) < 1e-15);
    }

    #[test]
    fn shift_state_examples() {
        let plus = PureQubit::new(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), Frame::Alice).unwrap();
        let same = frame_shift_state(&plus, PhaseAngle::ZERO);
        assert_eq!(same.frame(), Frame::Bob);
        assert_eq!(same.amp0(), plus.amp0());
        let phi = 1.2;
        let shifted = frame_shift_state(&plus, PhaseAngle::new(phi));
        assert_abs_diff_eq!(
            (shifted.amp0() - cis(-phi / 2.0) * FRAC_1_SQRT_2).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            (shifted.amp1() - cis(phi / 2.0) * FRAC_1_SQRT_2).norm(),
            0.0,
            epsilon = 1e-15
        );
        let excited = PureQubit::excited(Frame::Alice);
        let e = frame_shift_state(&excited, PhaseAngle::new(phi));
        assert_abs_diff_eq!(e.amp0().norm(), 1.0, epsilon = 1e-15);
        assert_eq!(e.amp1(), ZERO);
    }

    #[test]
    fn single_bounce_matches_explicit_product() {
        let phi = PhaseAngle::new(0.9);
        let xa = pauli_x_op(Frame::Alice);
        let xb_in_alice = frame_conjugate(&xa, phi);
        let product = Unitary2::raw(matmul(&xa.matrix(), &xb_in_alice.matrix()), Frame::Alice);
        assert!(product.equal_up_to_phase(&bounce_unitary(1, phi).unwrap(), 1e-15));
    }

    #[test]
    fn bounce_powers_of_two() {
        let phi = 0.3;
        for j in 0..10 {
            let m = 1u64 << j;
            let u = bounce_unitary(m, PhaseAngle::new(phi)).unwrap();
            let theta = m as f64 * phi;
            assert!((u.entry(0, 0) - cis(theta)).norm() < 1e-12);
            assert!((u.entry(1, 1) - cis(-theta)).norm() < 1e-12);
        }
        for m in 1..20 {
            let u = bounce_unitary(m, PhaseAngle::ZERO).unwrap();
            assert!(u.max_entry_diff(&Unitary2::identity(Frame::Alice)) == 0.0);
        }
        assert!(bounce_unitary(0, PhaseAngle::ZERO).is_err());
    }

    #[test]
    fn mismatched_frames_rejected() {
        let xa = pauli_x_op(Frame::Alice);
        let hb = hadamard_op(Frame::Bob);
        assert!(matches!(xa.compose(&hb), Err(Error::FrameMismatch { .. })));
        // diagonal operators compose with either frame
        let z = z_rotation(0.4);
        assert_eq!(z.compose(&hb).unwrap().frame(), Frame::Bob);
    }

    #[test]
    fn phase_angle_canonical() {
        assert_eq!(PhaseAngle::new(-1e-18).radians(), 0.0);
        assert!((PhaseAngle::new(-FRAC_PI_2).radians() - 1.5 * PI).abs() < 1e-15);
        assert!((PhaseAngle::new(7.0 * PI).radians() - PI).abs() < 1e-14);
        let big = PhaseAngle::new(0.1).times(1 << 40);
        let expected = ((1u64 << 40) as f64 * 0.1).rem_euclid(TAU);
        assert!((big.radians() - expected).abs() < 1e-3);
    }

    #[test]
    fn from_matrix_rejects_non_unitary() {
        assert!(Unitary2::from_matrix([[ONE, ONE], [ZERO, ONE]], Frame::Alice).is_err());
        assert!(Unitary2::from_matrix(hadamard_op(Frame::Bob).matrix(), Frame::Bob).is_ok());
    }
}
