//! Erasure channel: each one-way transmission survives with probability η.
//!
//! Loss is heralded. A coherent chain of bounces (Alice → Bob → Alice) loses
//! all progress whenever either leg of any bounce is lost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::RngStream;

/// Survival probability of one one-way transmission, `0 < η ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Eta(f64);

impl Eta {
    pub const LOSSLESS: Eta = Eta(1.0);

    pub fn new(eta: f64) -> Result<Self> {
        if eta > 0.0 && eta <= 1.0 {
            Ok(Eta(eta))
        } else {
            Err(Error::param(
                "eta",
                format!("survival probability must lie in (0, 1], got {eta}"),
            ))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_lossless(self) -> bool {
        self.0 >= 1.0
    }
}

impl TryFrom<f64> for Eta {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Eta::new(v)
    }
}

impl From<Eta> for f64 {
    fn from(e: Eta) -> f64 {
        e.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossyChannel {
    pub eta: Eta,
}

impl LossyChannel {
    pub fn new(eta: f64) -> Result<Self> {
        Ok(LossyChannel { eta: Eta::new(eta)? })
    }

    pub fn lossless() -> Self {
        LossyChannel { eta: Eta::LOSSLESS }
    }
}

/// Running transmission counters for one protocol run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionLog {
    /// Every one-way send, lost or not.
    pub one_way_sends: u64,
    pub lost_sends: u64,
    /// Bounces whose both legs survived (including ones later wiped by a restart).
    pub completed_bounces: u64,
    /// Coherent chains restarted from scratch after a loss.
    pub restarts: u64,
    /// Multi-qubit rounds voided because at least one qubit was lost.
    pub voided_rounds: u64,
}

impl TransmissionLog {
    pub fn bounce_attempts(&self) -> u64 {
        self.completed_bounces + self.restarts
    }

    /// Sends charged to the protocol under the chosen accounting.
    pub fn charged_sends(&self, count_lost: bool) -> u64 {
        if count_lost {
            self.one_way_sends
        } else {
            self.one_way_sends - self.lost_sends
        }
    }
}

/// One one-way transmission. A lossless channel never consumes randomness.
pub fn transmit(ch: &LossyChannel, rng: &mut RngStream, log: &mut TransmissionLog) -> bool {
    log.one_way_sends += 1;
    if ch.eta.is_lossless() {
        return true;
    }
    let survived = rng.uniform() < ch.eta.get();
    if !survived {
        log.lost_sends += 1;
    }
    survived
}

/// Sends `qubits` qubits together; the batch is delivered only if all survive.
/// Every qubit is transmitted (and counted) even after one has been lost.
pub fn transmit_batch(ch: &LossyChannel, qubits: u64, rng: &mut RngStream, log: &mut TransmissionLog) -> bool {
    if ch.eta.is_lossless() {
        log.one_way_sends += qubits;
        return true;
    }
    let mut all = true;
    for _ in 0..qubits {
        all &= transmit(ch, rng, log);
    }
    if !all {
        log.voided_rounds += 1;
    }
    all
}

/// Expected bounce attempts to complete `m` consecutive successful bounces:
/// `(η^{−2m} − 1)/(1 − η²)`, with the lossless limit `m`.
pub fn expected_bounces(m: u64, eta: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::param("m", "bounce count must be at least 1"));
    }
    let eta = Eta::new(eta)?;
    Ok(ln_expected_bounces(m, eta).exp())
}

/// `ln E_B(m)`, finite even where `η^{−2m}` overflows.
pub fn ln_expected_bounces(m: u64, eta: Eta) -> f64 {
    let m = m as f64;
    if eta.is_lossless() {
        return m.ln();
    }
    let eta = eta.get();
    // a = 2m·ln(1/η); E_B = (e^a − 1)/(1 − η²)
    let a = -2.0 * m * eta.ln();
    let ln_num = a + (-(-a).exp_m1()).ln();
    let ln_den = (-(eta * eta)).ln_1p();
    ln_num - ln_den
}

/// Counters for one completed coherent chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ChainStats {
    pub attempts: u64,
    pub sends: u64,
    pub restarts: u64,
}

/// Runs bounce attempts until `m` consecutive bounces succeed.
pub fn run_coherent_bounces(
    m: u64,
    ch: &LossyChannel,
    rng: &mut RngStream,
    log: &mut TransmissionLog,
) -> Result<ChainStats> {
    if m == 0 {
        return Err(Error::param("m", "bounce count must be at least 1"));
    }
    let before = *log;
    if ch.eta.is_lossless() {
        log.one_way_sends += 2 * m;
        log.completed_bounces += m;
        return Ok(ChainStats {
            attempts: m,
            sends: 2 * m,
            restarts: 0,
        });
    }
    let mut progress = 0;
    while progress < m {
        let ok = transmit(ch, rng, log) && transmit(ch, rng, log);
        if ok {
            log.completed_bounces += 1;
            progress += 1;
        } else {
            log.restarts += 1;
            progress = 0;
        }
    }
    Ok(ChainStats {
        attempts: log.bounce_attempts() - before.bounce_attempts(),
        sends: log.one_way_sends - before.one_way_sends,
        restarts: log.restarts - before.restarts,
    })
}
