use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::RngStream;
use crate::error::{Error, Result};
use crate::frames::{Frame, Unitary2};

pub const NORM_TOL: f64 = 1e-12;

/// Result of measuring an observable with eigenvalues ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

/// A normalised single-qubit state, `amp0·|0⟩ + amp1·|1⟩`, described in `frame`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit {
    amp0: Complex64,
    amp1: Complex64,
    frame: Frame,
}

impl PureQubit {
    pub fn new(amp0: Complex64, amp1: Complex64, frame: Frame) -> Result<Self> {
        let norm = amp0.norm_sqr() + amp1.norm_sqr();
        if !((norm - 1.0).abs() <= NORM_TOL) {
            return Err(Error::param(
                "amplitudes",
                format!("state not normalised (|a0|² + |a1|² = {norm})"),
            ));
        }
        Ok(PureQubit { amp0, amp1, frame })
    }

    pub(crate) fn from_parts(amp0: Complex64, amp1: Complex64, frame: Frame) -> Self {
        PureQubit { amp0, amp1, frame }
    }

    /// `|0⟩`, the excited energy eigenstate. Frame-independent up to phase.
    pub fn excited(frame: Frame) -> Self {
        Self::from_parts(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), frame)
    }

    pub fn ground(frame: Frame) -> Self {
        Self::from_parts(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), frame)
    }

    pub fn amp0(&self) -> Complex64 {
        self.amp0
    }

    pub fn amp1(&self) -> Complex64 {
        self.amp1
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    /// Probability of finding the qubit in `|1⟩`.
    pub fn prob_one(&self) -> f64 {
        self.amp1.norm_sqr()
    }

    /// `⟨−Z⟩ = |amp1|² − |amp0|²`.
    pub fn expect_minus_z(&self) -> f64 {
        self.amp1.norm_sqr() - self.amp0.norm_sqr()
    }
}

pub fn apply(u: &Unitary2, psi: &PureQubit) -> Result<PureQubit> {
    if !u.acts_in(psi.frame) {
        return Err(Error::FrameMismatch {
            operator: u.frame(),
            operand: psi.frame,
        });
    }
    let m = u.matrix();
    Ok(PureQubit::from_parts(
        m[0][0] * psi.amp0 + m[0][1] * psi.amp1,
        m[1][0] * psi.amp0 + m[1][1] * psi.amp1,
        psi.frame,
    ))
}

/// Projective measurement of `−Z`: `+1` (collapse to `|1⟩`) with probability
/// `|amp1|²`. Consumes exactly one uniform sample.
pub fn measure_minus_z(psi: &PureQubit, rng: &mut RngStream) -> Outcome {
    if rng.uniform() < psi.prob_one() {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// Draws ±1 with mean `expectation`. Values outside `[−1, 1]` by no more than
/// `1e-9` are clamped; anything further out is rejected.
pub fn sample_pm1(expectation: f64, rng: &mut RngStream) -> Result<Outcome> {
    if !(expectation.abs() <= 1.0 + 1e-9) {
        return Err(Error::param("expectation", format!("{expectation} is outside [-1, 1]")));
    }
    let p_plus = (1.0 + expectation.clamp(-1.0, 1.0)) / 2.0;
    Ok(if rng.uniform() < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{bounce_unitary, frame_shift_state, hadamard_op, PhaseAngle};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn mean_of(n: usize, mut f: impl FnMut() -> Outcome) -> f64 {
        (0..n).map(|_| f().value()).sum::<f64>() / n as f64
    }

    #[test]
    fn identity_leaves_state() {
        let psi = PureQubit::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), Frame::Bob).unwrap();
        assert_eq!(apply(&Unitary2::identity(Frame::Bob), &psi).unwrap(), psi);
    }

    #[test]
    fn hadamard_on_excited() {
        let out = apply(&hadamard_op(Frame::Alice), &PureQubit::excited(Frame::Alice)).unwrap();
        assert!((out.amp0() - FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((out.amp1() - FRAC_1_SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn bounce_circuit_state() {
        // H e^{+i m φ Z} H |0⟩ = i sin(mφ)|0⟩ + cos(mφ)|1⟩
        let phi = 0.41;
        for j in 0..6 {
            let m = 1u64 << j;
            let h = hadamard_op(Frame::Alice);
            let mut psi = apply(&h, &PureQubit::excited(Frame::Alice)).unwrap();
            psi = apply(&bounce_unitary(m, PhaseAngle::new(phi)).unwrap(), &psi).unwrap();
            psi = apply(&h, &psi).unwrap();
            let a = m as f64 * phi;
            assert!((psi.amp0() - Complex64::new(0.0, a.sin())).norm() < 1e-12);
            assert!((psi.amp1() - Complex64::new(a.cos(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_rejects_foreign_frame() {
        let err = apply(&hadamard_op(Frame::Bob), &PureQubit::excited(Frame::Alice));
        assert!(matches!(err, Err(Error::FrameMismatch { .. })));
    }

    #[test]
    fn ground_state_always_plus() {
        let mut rng = RngStream::new(3);
        let g = PureQubit::ground(Frame::Alice);
        assert!((0..1000).all(|_| measure_minus_z(&g, &mut rng) == Outcome::Plus));
    }

    #[test]
    fn one_way_quarter_turn_is_fair() {
        // H_B (shift H_A|0⟩) at φ = π/2 gives ⟨−Z⟩ = 0.
        let plus = apply(&hadamard_op(Frame::Alice), &PureQubit::excited(Frame::Alice)).unwrap();
        let bob = frame_shift_state(&plus, PhaseAngle::new(PI / 2.0));
        let fin = apply(&hadamard_op(Frame::Bob), &bob).unwrap();
        assert!((fin.prob_one() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empirical_mean_at_third_turn() {
        // cos(π/3) = 0.5; binomial stderr sqrt((1 - 0.25)/1e6) ≈ 8.7e-4, 3σ ≈ 0.0026
        let plus = apply(&hadamard_op(Frame::Alice), &PureQubit::excited(Frame::Alice)).unwrap();
        let bob = frame_shift_state(&plus, PhaseAngle::new(PI / 3.0));
        let fin = apply(&hadamard_op(Frame::Bob), &bob).unwrap();
        let mut rng = RngStream::new(99).child("mean", 0);
        let mean = mean_of(1_000_000, || measure_minus_z(&fin, &mut rng));
        assert!((mean - 0.5).abs() < 0.003, "mean {mean}");
    }

    #[test]
    fn sample_pm1_edges() {
        let mut rng = RngStream::new(4);
        assert!((0..1000).all(|_| sample_pm1(1.0, &mut rng).unwrap() == Outcome::Plus));
        assert!((0..1000).all(|_| sample_pm1(-1.0 - 5e-10, &mut rng).unwrap() == Outcome::Minus));
        assert!(sample_pm1(1.0 + 1e-6, &mut rng).is_err());
        assert!(sample_pm1(f64::NAN, &mut rng).is_err());
        let mean = mean_of(100_000, || sample_pm1(0.0, &mut rng).unwrap());
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn measurement_consumes_one_sample() {
        let psi = PureQubit::excited(Frame::Alice);
        let mut a = RngStream::new(8);
        let mut b = RngStream::new(8);
        measure_minus_z(&psi, &mut a);
        b.uniform();
        assert_eq!(a.uniform(), b.uniform());
    }
}
