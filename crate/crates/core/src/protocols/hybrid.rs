use crate::cost::{hybrid_tail_shots, Budget};
use crate::error::{Error, Result};

use super::bitwise::{assemble_estimate, fraction_from_quadratures, improved_estimate};
use super::link::shot_mean;
use super::{clamp_unit, ProtocolKind, ProtocolReport, Quadrature, QuadratureMode, QuantumLink, SimplePhase};

/// Picks `T̂ = (j + f)/2^{k1}` nearest to the coarse estimate, over integer
/// `j` and the candidate fractions `f`.
fn unwrap_into_cell(coarse: f64, candidates: &[f64], k1: u32) -> f64 {
    let scale = (k1 as f64).exp2();
    let mut best = (f64::INFINITY, 0.0);
    for &f in candidates {
        let j = (coarse * scale - f).round();
        let t = ((j + f) / scale).rem_euclid(1.0);
        let d = (t - coarse).rem_euclid(1.0);
        let d = d.min(1.0 - d);
        if d < best.0 {
            best = (d, t);
        }
    }
    best.1
}

/// Bitwise estimation of the first `k1` bits, then `2^{k1}`-bounce shots for
/// the remaining `k − k1`. Each phase gets half the failure budget.
pub fn hybrid_estimate<L: QuantumLink>(
    link: &mut L,
    k1: u32,
    k: u32,
    eps: Budget,
    mode: QuadratureMode,
) -> Result<ProtocolReport> {
    if k1 == 0 || k1 > k {
        return Err(Error::param("k1", format!("must satisfy 1 ≤ k1 ≤ k = {k}, got {k1}")));
    }
    let mut report = improved_estimate(link, k1, eps.halved(), mode)?;
    report.protocol = ProtocolKind::Hybrid;
    report.k1 = Some(k1);
    if k1 == k {
        return Ok(report);
    }

    let shots = hybrid_tail_shots(k1, k, eps)?.ceil();
    if !(shots < u64::MAX as f64) {
        return Err(Error::CounterOverflow(format!("{shots} phase-two shots")));
    }
    let shots = shots as u64;
    let bounces = 1u64 << k1;
    let start = link.sends();
    let c = shot_mean(shots, || link.bounce_shot(bounces, Quadrature::Cos))?;
    let cosine_sends = link.sends() - start;
    let s = match mode {
        QuadratureMode::TwoQuadrature => Some(shot_mean(shots, || link.bounce_shot(bounces, Quadrature::Sin))?),
        QuadratureMode::PaperCosineOnly => None,
    };
    let f = fraction_from_quadratures(c, s, mode)?;
    let candidates = match mode {
        QuadratureMode::TwoQuadrature => vec![f],
        QuadratureMode::PaperCosineOnly => vec![f, 1.0 - f],
    };
    let coarse = report.fraction_estimate.unwrap_or(0.0);
    let t = unwrap_into_cell(coarse, &candidates, k1);

    let cells = (k as f64).exp2();
    let index = ((t * cells).floor() as u64).min((1u64 << k) - 1);
    let bits: Vec<u8> = (0..k).map(|i| ((index >> (k - 1 - i)) & 1) as u8).collect();
    let estimate = assemble_estimate(&bits, report.omega)?;

    report.simple_phase = Some(SimplePhase {
        shots,
        bounces_per_shot: bounces,
        qubits_per_shot: 1,
        cos_estimate: clamp_unit(c),
        sin_estimate: s.map(clamp_unit),
        sends: link.sends() - start,
        cosine_sends,
    });
    report.cosine_sends += cosine_sends;
    report.bits = bits;
    report.fraction_estimate = Some(t);
    report.estimate_t_ba = estimate;
    report.estimate_phi = report.omega * estimate;
    report.total_one_way_sends = link.sends();
    report.log = link.log();
    Ok(report)
}
