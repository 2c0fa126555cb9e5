//! Executable synchronization protocols.
//!
//! Protocol procedures never see the hidden clock offset. They drive a
//! [`QuantumLink`], which prepares, transports and measures qubits on their
//! behalf and only ever hands back ±1 outcomes and send counters.

mod bitwise;
mod hybrid;
mod link;
mod simple;

use serde::{Deserialize, Serialize};

use crate::channel::TransmissionLog;
use crate::error::{Error, Result};
use crate::frames::PhaseAngle;

pub use bitwise::{
    assemble_estimate, bit_from_quadratures, entangled_bitwise, fraction_from_quadratures, improved_estimate,
    refine_bit, MAX_BITS,
};
pub use hybrid::hybrid_estimate;
pub use link::{Quadrature, QuantumLink, SimulatedLink};
pub use simple::{entangled_oneshot, simple_one_way, simple_two_way};

/// Hidden ground truth: the qubit frequency and Bob's clock offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthModel {
    /// Angular frequency, rad/s.
    pub omega: f64,
    /// Offset of Bob's clock relative to Alice's, seconds.
    pub t_ba: f64,
}

impl TruthModel {
    pub fn new(omega: f64, t_ba: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::param(
                "omega",
                format!("must be positive and finite, got {omega}"),
            ));
        }
        if !t_ba.is_finite() {
            return Err(Error::param("t_ba", "must be finite"));
        }
        Ok(TruthModel { omega, t_ba })
    }

    /// Truth with `ω·t_BA = π·T`.
    pub fn from_pi_units(omega: f64, t: f64) -> Result<Self> {
        Self::new(omega, t * std::f64::consts::PI / omega)
    }

    pub fn phase(&self) -> PhaseAngle {
        PhaseAngle::new(self.omega * self.t_ba)
    }

    /// `ω·t_BA` without reduction.
    pub fn raw_phase(&self) -> f64 {
        self.omega * self.t_ba
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMode {
    /// Cosine rounds only, bits decided independently by the `|T̄ − T| ≤ 1/4` rule.
    PaperCosineOnly,
    /// Cosine and sine rounds per bit, bits resolved by phase unwrapping.
    #[default]
    TwoQuadrature,
}

impl QuadratureMode {
    pub fn quadratures(self) -> u64 {
        match self {
            QuadratureMode::PaperCosineOnly => 1,
            QuadratureMode::TwoQuadrature => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    SimpleOneWay,
    SimpleTwoWay,
    Improved,
    EntangledOneshot,
    EntangledBitwise,
    Hybrid,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::SimpleOneWay => "simple-one-way",
            ProtocolKind::SimpleTwoWay => "simple-two-way",
            ProtocolKind::Improved => "improved",
            ProtocolKind::EntangledOneshot => "entangled-oneshot",
            ProtocolKind::EntangledBitwise => "entangled-bitwise",
            ProtocolKind::Hybrid => "hybrid",
        }
    }

    pub fn is_bitwise(self) -> bool {
        matches!(
            self,
            ProtocolKind::Improved | ProtocolKind::EntangledBitwise | ProtocolKind::Hybrid
        )
    }
}

/// Per-bit statistics of a bitwise protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitRecord {
    /// 1-based position of the bit in `T = 0.t₁t₂…`.
    pub bit_index: u32,
    /// Shots per quadrature.
    pub repetitions: u64,
    pub cos_estimate: f64,
    pub sin_estimate: Option<f64>,
    /// Raw estimate of `0.t_j t_{j+1}…` from this bit's rounds alone.
    pub fraction_estimate: f64,
    pub decided_bit: u8,
    pub sends_used: u64,
    /// Sends spent on cosine rounds alone.
    pub cosine_sends: u64,
}

/// The single-frequency estimation phase of simple and hybrid protocols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplePhase {
    pub shots: u64,
    /// Coherent bounces per shot (0 for one-way shots).
    pub bounces_per_shot: u64,
    /// Qubits per shot for entangled shots.
    pub qubits_per_shot: u64,
    pub cos_estimate: f64,
    pub sin_estimate: Option<f64>,
    pub sends: u64,
    pub cosine_sends: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub protocol: ProtocolKind,
    pub mode: Option<QuadratureMode>,
    pub omega: f64,
    pub estimate_t_ba: f64,
    /// `ω·t̂`, in `[0, π]`.
    pub estimate_phi: f64,
    /// Continuous estimate of `T` before rounding to the bit grid.
    pub fraction_estimate: Option<f64>,
    pub bits: Vec<u8>,
    pub k1: Option<u32>,
    pub total_one_way_sends: u64,
    /// Sends attributable to cosine rounds alone.
    pub cosine_sends: u64,
    pub bit_records: Vec<BitRecord>,
    pub simple_phase: Option<SimplePhase>,
    pub log: TransmissionLog,
    pub count_lost_sends: bool,
    /// Set by the harness, which alone knows the truth.
    pub succeeded: Option<bool>,
}

impl ProtocolReport {
    /// `(π/ω)·2^{−k}` for bitwise protocols.
    pub fn target_precision(&self) -> Option<f64> {
        if self.protocol.is_bitwise() && !self.bits.is_empty() {
            Some(std::f64::consts::PI / self.omega * (-(self.bits.len() as f64)).exp2())
        } else {
            None
        }
    }

    pub fn error_against(&self, truth: &TruthModel) -> f64 {
        self.estimate_t_ba - truth.t_ba
    }

    /// Marks the run successful when `|t̂ − t_BA| ≤ tolerance`.
    pub fn judge(&mut self, truth: &TruthModel, tolerance: f64) -> bool {
        let ok = self.error_against(truth).abs() <= tolerance;
        self.succeeded = Some(ok);
        ok
    }

    /// Whether the decided bits equal the truncated binary expansion of
    /// `T = ω t_BA / π`.
    pub fn bits_match_truth(&self, truth: &TruthModel) -> bool {
        let t = truth.raw_phase() / std::f64::consts::PI;
        truth_bits(t, self.bits.len() as u32) == self.bits
    }

    pub fn sum_of_parts(&self) -> u64 {
        self.bit_records.iter().map(|r| r.sends_used).sum::<u64>() + self.simple_phase.as_ref().map_or(0, |p| p.sends)
    }
}

/// The first `k` binary digits of `t ∈ [0, 1)`.
pub fn truth_bits(t: f64, k: u32) -> Vec<u8> {
    let mut x = t;
    (0..k)
        .map(|_| {
            x *= 2.0;
            if x >= 1.0 {
                x -= 1.0;
                1
            } else {
                0
            }
        })
        .collect()
}

pub(crate) fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}
