//! Exact statevector oracle for the M-qubit GHZ protocol. Exponential in M,
//! so only used to validate the closed-form sampler.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::{frame_shift_state, hadamard_op, Frame, PhaseAngle, Unitary2};
use crate::simulator::PureQubit;

pub const MAX_GHZ_QUBITS: u32 = 12;

#[derive(Debug, Clone)]
pub struct GhzState {
    qubits: u32,
    amps: Vec<Complex64>,
    frame: Frame,
}

impl GhzState {
    /// `(|0…0⟩ + |1…1⟩)/√2` described in `frame`.
    pub fn prepare(qubits: u32, frame: Frame) -> Result<Self> {
        if !(1..=MAX_GHZ_QUBITS).contains(&qubits) {
            return Err(Error::param(
                "M",
                format!("GHZ oracle supports 1..={MAX_GHZ_QUBITS} qubits, got {qubits}"),
            ));
        }
        let dim = 1usize << qubits;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[0] = a;
        amps[dim - 1] = a;
        Ok(GhzState { qubits, amps, frame })
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies a single-qubit operator to qubit `q` (bit `q` of the index).
    pub fn apply_one(&mut self, u: &Unitary2, q: u32) -> Result<()> {
        if !u.acts_in(self.frame) {
            return Err(Error::FrameMismatch {
                operator: u.frame(),
                operand: self.frame,
            });
        }
        let m = u.matrix();
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_each(&mut self, u: &Unitary2) -> Result<()> {
        for q in 0..self.qubits {
            self.apply_one(u, q)?;
        }
        Ok(())
    }

    /// Rewrites the description in the other frame by shifting every qubit.
    pub fn shift_frame(&mut self, phi_ba: PhaseAngle) {
        // Same per-qubit factors as the single-qubit shift.
        let probe = frame_shift_state(
            &PureQubit::from_parts(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), self.frame),
            phi_ba,
        );
        let (f0, f1) = (probe.amp0(), probe.amp1());
        for (i, a) in self.amps.iter_mut().enumerate() {
            let ones = i.count_ones();
            let zeros = self.qubits - ones;
            *a *= f0.powu(zeros) * f1.powu(ones);
        }
        self.frame = self.frame.other();
    }

    /// Exact `⟨(−1)^M Z^{⊗M}⟩`.
    pub fn parity_expectation(&self) -> f64 {
        let global = if self.qubits % 2 == 0 { 1.0 } else { -1.0 };
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let z = if i.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                global * z * a.norm_sqr()
            })
            .sum()
    }
}

/// Runs the GHZ protocol on the full statevector: Alice prepares the state
/// (optionally rotating qubit 0 by `pre_rotation` first), Bob rewrites it in
/// his frame, applies `H_B` to every qubit and measures the parity.
pub fn ghz_parity_with_rotation(qubits: u32, phi_ba: PhaseAngle, pre_rotation: Option<&Unitary2>) -> Result<f64> {
    let mut state = GhzState::prepare(qubits, Frame::Alice)?;
    if let Some(r) = pre_rotation {
        state.apply_one(r, 0)?;
    }
    state.shift_frame(phi_ba);
    state.apply_each(&hadamard_op(Frame::Bob))?;
    Ok(state.parity_expectation())
}

pub fn ghz_parity_expectation(qubits: u32, phi_ba: PhaseAngle) -> Result<f64> {
    ghz_parity_with_rotation(qubits, phi_ba, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::z_rotation;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn single_qubit_matches_one_way() {
        for phi in [0.0, 0.3, 1.0, 2.5, PI] {
            let e = ghz_parity_expectation(1, PhaseAngle::new(phi)).unwrap();
            assert!((e - phi.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_offset_gives_one() {
        for m in 1..=MAX_GHZ_QUBITS {
            let e = ghz_parity_expectation(m, PhaseAngle::ZERO).unwrap();
            assert!((e - 1.0).abs() < 1e-10, "M={m}: {e}");
        }
    }

    #[test]
    fn three_qubits_eighth_turn() {
        let e = ghz_parity_expectation(3, PhaseAngle::new(FRAC_PI_4)).unwrap();
        assert!((e + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12, "{e}");
    }

    #[test]
    fn prepared_state_support() {
        let s = GhzState::prepare(4, Frame::Alice).unwrap();
        let nonzero: Vec<usize> = s
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(nonzero, vec![0, 15]);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_quarter_rotation_gives_sine() {
        let r = z_rotation(-FRAC_PI_2);
        for m in 1..=6 {
            for phi in [0.2, 0.9, 2.0] {
                let e = ghz_parity_with_rotation(m, PhaseAngle::new(phi), Some(&r)).unwrap();
                assert!((e - (m as f64 * phi).sin()).abs() < 1e-10, "M={m} φ={phi}: {e}");
            }
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(ghz_parity_expectation(0, PhaseAngle::ZERO).is_err());
        assert!(ghz_parity_expectation(13, PhaseAngle::ZERO).is_err());
    }
}
