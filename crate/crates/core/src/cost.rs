//! Closed-form communication costs and uncertainties.
//!
//! Costs are expected one-way qubit communications. They are carried as
//! natural logarithms so that `2^{2k}` at k = 26 or the `η^{−2^k}` terms of
//! the lossy bitwise protocol never overflow; [`Cost::value`] reports
//! `+inf` when the linear value is not representable.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{ln_expected_bounces, Eta};
use crate::error::{Error, Result};

/// Total failure probability budget, `0 < ε < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Budget(f64);

impl Budget {
    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps < 1.0 {
            Ok(Budget(eps))
        } else {
            Err(Error::param(
                "eps",
                format!("error budget must lie in (0, 1), got {eps}"),
            ))
        }
    }

    /// `ε = 2^{−k}`.
    pub fn pow2(k: u32) -> Result<Self> {
        Budget::new((-(k as f64)).exp2())
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn halved(self) -> Budget {
        Budget(self.0 / 2.0)
    }
}

impl TryFrom<f64> for Budget {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Budget::new(v)
    }
}

impl From<Budget> for f64 {
    fn from(b: Budget) -> f64 {
        b.0
    }
}

/// An expected number of communications, stored as its natural log.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Cost {
    ln: f64,
}

impl Cost {
    pub fn from_ln(ln: f64) -> Self {
        Cost { ln }
    }

    pub fn from_value(v: f64) -> Self {
        Cost { ln: v.ln() }
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    /// Linear value, `+inf` if it overflows `f64`.
    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    pub fn overflowed(self) -> bool {
        self.value().is_infinite()
    }

    /// `self / other`, computed in the log domain.
    pub fn ratio(self, other: Cost) -> f64 {
        (self.ln - other.ln).exp()
    }

    pub fn plus(self, other: Cost) -> Cost {
        Cost {
            ln: log_add(self.ln, other.ln),
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.overflowed() {
            write!(f, "inf (ln = {})", self.ln)
        } else {
            write!(f, "{}", self.value())
        }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn check_bits(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::param("k", "at least one bit of precision is required"))
    } else {
        Ok(())
    }
}

/// Which protocol a [`CostQuery`] prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostProtocol {
    SqlOneWay,
    SqlTwoWay,
    Improved,
    LossySql,
    LossyImproved,
    Hybrid { k1: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostQuery {
    pub k: u32,
    pub eps: Budget,
    pub eta: Eta,
    pub protocol: CostProtocol,
}

impl CostQuery {
    pub fn evaluate(&self) -> Result<Cost> {
        match self.protocol {
            CostProtocol::SqlOneWay => sql_one_way_cost(self.k, self.eps),
            CostProtocol::SqlTwoWay => sql_two_way_cost(self.k, self.eps),
            CostProtocol::Improved => improved_cost(self.k, self.eps),
            CostProtocol::LossySql => lossy_sql_cost(self.k, self.eps, self.eta),
            CostProtocol::LossyImproved => lossy_improved_cost(self.k, self.eps, self.eta),
            CostProtocol::Hybrid { k1 } => hybrid_cost(k1, self.k, self.eps, self.eta),
        }
    }
}

/// `ln(c · ln(2/ε) · 2^{2k})`
fn ln_sql(coefficient: f64, k: u32, eps: Budget) -> f64 {
    (coefficient * (2.0 / eps.get()).ln()).ln() + 2.0 * k as f64 * LN_2
}

/// One-way simple protocol: `(32/π²) ln(2/ε) 2^{2k}`.
pub fn sql_one_way_cost(k: u32, eps: Budget) -> Result<Cost> {
    check_bits(k)?;
    Ok(Cost::from_ln(ln_sql(32.0 / (PI * PI), k, eps)))
}

/// Two-way simple protocol: `(16/π²) ln(2/ε) 2^{2k}`.
pub fn sql_two_way_cost(k: u32, eps: Budget) -> Result<Cost> {
    check_bits(k)?;
    Ok(Cost::from_ln(ln_sql(16.0 / (PI * PI), k, eps)))
}

/// Repetitions per bit, `ln(2k/ε)·32` before rounding.
pub fn repetitions_real(k: u32, eps: Budget) -> f64 {
    32.0 * (2.0 * k as f64 / eps.get()).ln()
}

/// Integral repetitions per bit actually run: `ceil(32 ln(2k/ε))`.
pub fn repetitions(k: u32, eps: Budget) -> u64 {
    repetitions_real(k, eps).ceil() as u64
}

/// Bitwise protocol without loss: `64 ln(2k/ε) (2^k − 1)`.
pub fn improved_cost(k: u32, eps: Budget) -> Result<Cost> {
    check_bits(k)?;
    // ln(2^k − 1) = k ln 2 + ln(1 − 2^{−k})
    let ln_geom = k as f64 * LN_2 + (-(-(k as f64)).exp2()).ln_1p();
    Ok(Cost::from_ln((2.0 * repetitions_real(k, eps)).ln() + ln_geom))
}

/// One-way simple protocol with every qubit re-sent until delivered.
pub fn lossy_sql_cost(k: u32, eps: Budget, eta: Eta) -> Result<Cost> {
    Ok(Cost::from_ln(sql_one_way_cost(k, eps)?.ln() - eta.get().ln()))
}

/// `ln Σ_{j<k} E_B(2^j)`
fn ln_bounce_sum(k: u32, eta: Eta) -> f64 {
    (0..k).fold(f64::NEG_INFINITY, |acc, j| {
        log_add(acc, ln_expected_bounces(1u64 << j, eta))
    })
}

/// Bitwise protocol over a lossy channel: `32 ln(2k/ε) · 2 Σ_{j<k} E_B(2^j)`.
pub fn lossy_improved_cost(k: u32, eps: Budget, eta: Eta) -> Result<Cost> {
    check_bits(k)?;
    if k > 63 {
        return Err(Error::param(
            "k",
            "bounce chains longer than 2^62 are not representable",
        ));
    }
    Ok(Cost::from_ln(
        (2.0 * repetitions_real(k, eps)).ln() + ln_bounce_sum(k, eta),
    ))
}

/// Shots in the simple phase of the hybrid protocol for the remaining
/// `k − k1` bits at budget `ε/2`: `ceil((8/π²) ln(4/ε) 2^{2(k−k1)})`.
///
/// Each shot chains `2^{k1}` bounces and therefore ticks at `2^{k1+1}ω`;
/// this is the two-way communication count for `k − k1` bits divided by the
/// two communications of a single-bounce shot.
pub fn hybrid_tail_shots(k1: u32, k: u32, eps: Budget) -> Result<f64> {
    if k1 > k {
        return Err(Error::param("k1", format!("k1 = {k1} exceeds k = {k}")));
    }
    let ln_shots = (8.0 / (PI * PI) * (4.0 / eps.get()).ln()).ln() + 2.0 * (k - k1) as f64 * LN_2;
    Ok(ln_shots.exp().ceil())
}

/// Cost of the simple phase alone (`k1 = 0` allowed): tail shots × `2·E_B(2^{k1})`.
pub fn hybrid_tail_cost(k1: u32, k: u32, eps: Budget, eta: Eta) -> Result<Cost> {
    if k1 == k {
        return Ok(Cost::from_ln(f64::NEG_INFINITY));
    }
    let shots = hybrid_tail_shots(k1, k, eps)?;
    Ok(Cost::from_ln(shots.ln() + LN_2 + ln_expected_bounces(1u64 << k1, eta)))
}

/// Improved protocol for `k1` bits at `ε/2`, then an effective-frequency
/// simple protocol for the remaining bits at `ε/2`.
pub fn hybrid_cost(k1: u32, k: u32, eps: Budget, eta: Eta) -> Result<Cost> {
    if k1 == 0 || k1 > k {
        return Err(Error::param("k1", format!("need 1 ≤ k1 ≤ k, got k1 = {k1}, k = {k}")));
    }
    let head = lossy_improved_cost(k1, eps.halved(), eta)?;
    Ok(head.plus(hybrid_tail_cost(k1, k, eps, eta)?))
}

/// The `k1 ∈ [1, k]` minimising [`hybrid_cost`]; ties go to the larger `k1`.
pub fn select_k1(eta: Eta, k: u32, eps: Budget) -> Result<u32> {
    check_bits(k)?;
    let mut best = (1, hybrid_cost(1, k, eps, eta)?);
    for k1 in 2..=k {
        let c = hybrid_cost(k1, k, eps, eta)?;
        if c.ln() <= best.1.ln() {
            best = (k1, c);
        }
    }
    Ok(best.0)
}

/// Success/failure mixture uncertainty:
/// `sqrt((1−ε)² 2^{−2k} π²/ω² + ε² π²/ω²)`.
pub fn uncertainty_mixture(k: u32, eps: f64, omega: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::param("eps", format!("must lie in [0, 1], got {eps}")));
    }
    if !(omega > 0.0) {
        return Err(Error::param("omega", "must be positive"));
    }
    let cell = (-(k as f64)).exp2();
    Ok(PI / omega * ((1.0 - eps).powi(2) * cell * cell + eps * eps).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SqlProtocol {
    OneWay,
    TwoWay,
}

/// `2/(ω√N_c)` one-way, `√2/(ω√N_c)` two-way.
pub fn sql_uncertainty(n_c: f64, omega: f64, protocol: SqlProtocol) -> Result<f64> {
    if !(n_c >= 1.0) {
        return Err(Error::param("n_c", "need at least one communication"));
    }
    if !(omega > 0.0) {
        return Err(Error::param("omega", "must be positive"));
    }
    let c = match protocol {
        SqlProtocol::OneWay => 2.0,
        SqlProtocol::TwoWay => std::f64::consts::SQRT_2,
    };
    Ok(c / (omega * n_c.sqrt()))
}

/// How lost transmissions are charged by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SendAccounting {
    /// Every transmission counts, including lost ones.
    CountLost,
    /// Only delivered qubits count.
    DeliveredOnly,
}

impl SendAccounting {
    pub fn from_flag(count_lost: bool) -> Self {
        if count_lost {
            SendAccounting::CountLost
        } else {
            SendAccounting::DeliveredOnly
        }
    }
}

/// Expected sends the simulator charges for one coherent chain of `m`
/// bounces. Each attempt costs `1 + η` sends on average (`η(1 + η)` counting
/// delivered qubits only), and by Wald's identity the chain costs that times
/// `E_B(m)`.
pub fn expected_chain_sends(m: u64, eta: Eta, accounting: SendAccounting) -> f64 {
    let e = eta.get();
    let per_attempt = match accounting {
        SendAccounting::CountLost => 1.0 + e,
        SendAccounting::DeliveredOnly => e * (1.0 + e),
    };
    if eta.is_lossless() {
        return per_attempt * m as f64;
    }
    per_attempt * ln_expected_bounces(m, eta).exp()
}

/// Expected sends charged for delivering one qubit one way.
pub fn expected_delivery_sends(eta: Eta, accounting: SendAccounting) -> f64 {
    match accounting {
        SendAccounting::CountLost => 1.0 / eta.get(),
        SendAccounting::DeliveredOnly => 1.0,
    }
}

/// Expected sends charged for delivering an `m`-qubit state intact.
pub fn expected_batch_sends(m: u64, eta: Eta, accounting: SendAccounting) -> f64 {
    let e = eta.get();
    let attempts = (-(m as f64) * e.ln()).exp();
    match accounting {
        SendAccounting::CountLost => m as f64 * attempts,
        SendAccounting::DeliveredOnly => m as f64 * e * attempts,
    }
}
