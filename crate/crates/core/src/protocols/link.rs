use std::f64::consts::FRAC_PI_2;

use crate::channel::{run_coherent_bounces, transmit, transmit_batch, LossyChannel, TransmissionLog};
use crate::error::{Error, Result};
use crate::frames::{bounce_unitary, frame_shift_state, hadamard_op, z_rotation, Frame};
use crate::simulator::{apply, measure_minus_z, sample_pm1, Outcome, PureQubit, RngStream};

use super::TruthModel;

/// Which quadrature of the accumulated phase a shot reads out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Cos,
    Sin,
}

/// What the protocol parties can do: prepare, exchange and measure qubits.
/// The clock offset is only observable through shot outcomes.
pub trait QuantumLink {
    /// Qubit angular frequency (public knowledge).
    fn omega(&self) -> f64;

    /// Alice sends `H_A|0⟩`; Bob applies `H_B` and measures `−Z`.
    /// Expectation `cos(φ_BA)`.
    fn one_way_shot(&mut self) -> Result<Outcome>;

    /// `H_A (X_A X_B)^m H_A |0⟩` measured by Alice. Expectation
    /// `cos(2mφ_BA)` or, for [`Quadrature::Sin`], `sin(2mφ_BA)`.
    fn bounce_shot(&mut self, bounces: u64, quadrature: Quadrature) -> Result<Outcome>;

    /// An M-qubit GHZ state sent one way, `H_B` on each qubit, parity
    /// measured. Expectation `cos(Mφ_BA)` or `sin(Mφ_BA)`.
    fn ghz_shot(&mut self, qubits: u64, quadrature: Quadrature) -> Result<Outcome>;

    /// Sends charged so far under the link's accounting rule.
    fn sends(&self) -> u64;

    fn log(&self) -> TransmissionLog;

    fn counts_lost_sends(&self) -> bool;
}

/// A link backed by the statevector simulator and a seeded lossy channel.
#[derive(Debug, Clone)]
pub struct SimulatedLink {
    truth: TruthModel,
    channel: LossyChannel,
    rng: RngStream,
    log: TransmissionLog,
    count_lost: bool,
}

impl SimulatedLink {
    pub fn new(truth: TruthModel, channel: LossyChannel, rng: RngStream) -> Self {
        SimulatedLink {
            truth,
            channel,
            rng,
            log: TransmissionLog::default(),
            count_lost: true,
        }
    }

    pub fn count_lost_sends(mut self, yes: bool) -> Self {
        self.count_lost = yes;
        self
    }

    fn deliver_one_way(&mut self) {
        while !transmit(&self.channel, &mut self.rng, &mut self.log) {}
    }
}

impl QuantumLink for SimulatedLink {
    fn omega(&self) -> f64 {
        self.truth.omega
    }

    fn one_way_shot(&mut self) -> Result<Outcome> {
        self.deliver_one_way();
        let sent = apply(&hadamard_op(Frame::Alice), &PureQubit::excited(Frame::Alice))?;
        let at_bob = frame_shift_state(&sent, self.truth.phase());
        let fin = apply(&hadamard_op(Frame::Bob), &at_bob)?;
        Ok(measure_minus_z(&fin, &mut self.rng))
    }

    fn bounce_shot(&mut self, bounces: u64, quadrature: Quadrature) -> Result<Outcome> {
        run_coherent_bounces(bounces, &self.channel, &mut self.rng, &mut self.log)?;
        let h = hadamard_op(Frame::Alice);
        let mut psi = apply(&h, &PureQubit::excited(Frame::Alice))?;
        psi = apply(&bounce_unitary(bounces, self.truth.phase())?, &psi)?;
        if quadrature == Quadrature::Sin {
            psi = apply(&z_rotation(FRAC_PI_2), &psi)?;
        }
        psi = apply(&h, &psi)?;
        Ok(measure_minus_z(&psi, &mut self.rng))
    }

    fn ghz_shot(&mut self, qubits: u64, quadrature: Quadrature) -> Result<Outcome> {
        if qubits == 0 {
            return Err(Error::param("M", "need at least one qubit"));
        }
        while !transmit_batch(&self.channel, qubits, &mut self.rng, &mut self.log) {}
        let angle = self.truth.phase().times(qubits).radians();
        let expectation = match quadrature {
            Quadrature::Cos => angle.cos(),
            Quadrature::Sin => angle.sin(),
        };
        sample_pm1(expectation, &mut self.rng)
    }

    fn sends(&self) -> u64 {
        self.log.charged_sends(self.count_lost)
    }

    fn log(&self) -> TransmissionLog {
        self.log
    }

    fn counts_lost_sends(&self) -> bool {
        self.count_lost
    }
}

/// Mean of `shots` outcomes.
pub(crate) fn shot_mean(shots: u64, mut shot: impl FnMut() -> Result<Outcome>) -> Result<f64> {
    let mut sum = 0i64;
    for _ in 0..shots {
        sum += match shot()? {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        };
    }
    Ok(sum as f64 / shots as f64)
}
