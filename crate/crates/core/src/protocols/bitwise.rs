use std::f64::consts::{PI, TAU};

use crate::cost::{repetitions, Budget};
use crate::error::{Error, Result};

use super::link::shot_mean;
use super::{clamp_unit, BitRecord, ProtocolKind, ProtocolReport, Quadrature, QuadratureMode, QuantumLink};

/// Largest bit count whose lossless send total is guaranteed to fit a `u64`.
pub const MAX_BITS: u32 = 40;

/// The phase fraction `f ∈ [0, 1)` with `cos 2πf ≈ cos_hat` (and
/// `sin 2πf ≈ sin_hat` when available). Cosine-only estimates land in `[0, 1/2]`.
pub fn fraction_from_quadratures(cos_hat: f64, sin_hat: Option<f64>, mode: QuadratureMode) -> Result<f64> {
    let c = clamp_unit(cos_hat);
    match mode {
        QuadratureMode::PaperCosineOnly => Ok(c.acos() / TAU),
        QuadratureMode::TwoQuadrature => {
            let s = sin_hat.ok_or_else(|| Error::param("sin_hat", "required in two-quadrature mode"))?;
            let f = clamp_unit(s).atan2(c) / TAU;
            let f = if f < 0.0 { f + 1.0 } else { f };
            Ok(if f >= 1.0 { 0.0 } else { f })
        }
    }
}

pub fn bit_from_quadratures(cos_hat: f64, sin_hat: Option<f64>, mode: QuadratureMode) -> Result<u8> {
    let f = fraction_from_quadratures(cos_hat, sin_hat, mode)?;
    Ok(match mode {
        QuadratureMode::PaperCosineOnly => (f > 0.25) as u8,
        QuadratureMode::TwoQuadrature => (f >= 0.5) as u8,
    })
}

fn cyclic_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Given this bit's raw fraction `f̂ ≈ 0.t_j t_{j+1}…` and the already
/// refined `0.t_{j+1}…`, picks `t_j` and returns it with the refined `0.t_j…`.
pub fn refine_bit(raw: f64, finer: f64) -> (u8, f64) {
    let zero = finer / 2.0;
    let one = (finer + 1.0) / 2.0;
    if cyclic_distance(one, raw) < cyclic_distance(zero, raw) {
        (1, one)
    } else {
        (0, zero)
    }
}

/// `(π/ω)(0.b₁…b_k + 2^{−(k+1)})`: the midpoint of the cell the bits select.
pub fn assemble_estimate(bits: &[u8], omega: f64) -> Result<f64> {
    if bits.is_empty() {
        return Err(Error::param("bits", "need at least one bit"));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::param("omega", "must be positive and finite"));
    }
    Ok(PI / omega * (binary_fraction(bits)? + (-(bits.len() as f64 + 1.0)).exp2()))
}

fn binary_fraction(bits: &[u8]) -> Result<f64> {
    let mut x = 0.0;
    for (i, &b) in bits.iter().enumerate() {
        if b > 1 {
            return Err(Error::param("bits", format!("entry {i} is {b}, not a bit")));
        }
        x += b as f64 * (-(i as f64 + 1.0)).exp2();
    }
    Ok(x)
}

#[derive(Clone, Copy)]
enum Round {
    Bounce,
    Ghz,
}

pub(super) struct BitLoop {
    pub records: Vec<BitRecord>,
    pub bits: Vec<u8>,
    pub fraction: f64,
}

fn check_bits(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::param("k", "need at least one bit"));
    }
    if k > MAX_BITS {
        return Err(Error::CounterOverflow(format!(
            "k = {k} would need 2^{} bounces per round; at most {MAX_BITS} bits are supported",
            k - 1
        )));
    }
    Ok(())
}

fn run_bit_loop<L: QuantumLink>(
    link: &mut L,
    k: u32,
    eps: Budget,
    mode: QuadratureMode,
    round: Round,
) -> Result<BitLoop> {
    check_bits(k)?;
    let n = repetitions(k, eps);
    let mut records = Vec::with_capacity(k as usize);
    let mut raw = Vec::with_capacity(k as usize);
    for j in 0..k {
        let bounces = 1u64 << j;
        let shot = |link: &mut L, q| match round {
            Round::Bounce => link.bounce_shot(bounces, q),
            Round::Ghz => link.ghz_shot(2 * bounces, q),
        };
        let start = link.sends();
        let c = shot_mean(n, || shot(link, Quadrature::Cos))?;
        let cosine_sends = link.sends() - start;
        let s = match mode {
            QuadratureMode::TwoQuadrature => Some(shot_mean(n, || shot(link, Quadrature::Sin))?),
            QuadratureMode::PaperCosineOnly => None,
        };
        let f = fraction_from_quadratures(c, s, mode)?;
        raw.push(f);
        records.push(BitRecord {
            bit_index: j + 1,
            repetitions: n,
            cos_estimate: clamp_unit(c),
            sin_estimate: s.map(clamp_unit),
            fraction_estimate: f,
            decided_bit: bit_from_quadratures(c, s, mode)?,
            sends_used: link.sends() - start,
            cosine_sends,
        });
    }

    let bits: Vec<u8>;
    let fraction;
    match mode {
        QuadratureMode::PaperCosineOnly => {
            bits = records.iter().map(|r| r.decided_bit).collect();
            fraction = binary_fraction(&bits)? + (-(k as f64 + 1.0)).exp2();
        }
        QuadratureMode::TwoQuadrature => {
            let mut decided = vec![0u8; k as usize];
            let last = k as usize - 1;
            decided[last] = records[last].decided_bit;
            let mut y = raw[last];
            for j in (0..last).rev() {
                let (b, refined) = refine_bit(raw[j], y);
                decided[j] = b;
                y = refined;
            }
            for (r, &b) in records.iter_mut().zip(&decided) {
                r.decided_bit = b;
            }
            bits = decided;
            fraction = y;
        }
    }
    Ok(BitLoop {
        records,
        bits,
        fraction,
    })
}

pub(super) fn report_from_loop<L: QuantumLink>(
    link: &L,
    protocol: ProtocolKind,
    mode: QuadratureMode,
    lp: BitLoop,
) -> Result<ProtocolReport> {
    let omega = link.omega();
    let estimate_t_ba = assemble_estimate(&lp.bits, omega)?;
    let cosine_sends = lp.records.iter().map(|r| r.cosine_sends).sum();
    Ok(ProtocolReport {
        protocol,
        mode: Some(mode),
        omega,
        estimate_t_ba,
        estimate_phi: omega * estimate_t_ba,
        fraction_estimate: Some(lp.fraction),
        bits: lp.bits,
        k1: None,
        total_one_way_sends: link.sends(),
        cosine_sends,
        bit_records: lp.records,
        simple_phase: None,
        log: link.log(),
        count_lost_sends: link.counts_lost_sends(),
        succeeded: None,
    })
}

/// Bitwise phase estimation with `2^j` coherent bounces for bit `j+1`.
pub fn improved_estimate<L: QuantumLink>(
    link: &mut L,
    k: u32,
    eps: Budget,
    mode: QuadratureMode,
) -> Result<ProtocolReport> {
    let lp = run_bit_loop(link, k, eps, mode, Round::Bounce)?;
    report_from_loop(link, ProtocolKind::Improved, mode, lp)
}

/// The same bit loop with one `2^{j+1}`-qubit GHZ state per round.
pub fn entangled_bitwise<L: QuantumLink>(
    link: &mut L,
    k: u32,
    eps: Budget,
    mode: QuadratureMode,
) -> Result<ProtocolReport> {
    let lp = run_bit_loop(link, k, eps, mode, Round::Ghz)?;
    report_from_loop(link, ProtocolKind::EntangledBitwise, mode, lp)
}
