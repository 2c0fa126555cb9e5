use crate::error::{Error, Result};

use super::link::shot_mean;
use super::{clamp_unit, ProtocolKind, ProtocolReport, Quadrature, QuantumLink, SimplePhase};

fn check_shots(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::param("N", "need at least one shot"));
    }
    Ok(())
}

fn simple_report<L: QuantumLink>(link: &L, protocol: ProtocolKind, phi: f64, phase: SimplePhase) -> ProtocolReport {
    let omega = link.omega();
    ProtocolReport {
        protocol,
        mode: None,
        omega,
        estimate_t_ba: phi / omega,
        estimate_phi: phi,
        fraction_estimate: None,
        bits: Vec::new(),
        k1: None,
        total_one_way_sends: link.sends(),
        cosine_sends: link.sends(),
        bit_records: Vec::new(),
        simple_phase: Some(phase),
        log: link.log(),
        count_lost_sends: link.counts_lost_sends(),
        succeeded: None,
    }
}

/// `N` delivered one-way shots; `φ̂ = arccos(mean)`.
pub fn simple_one_way<L: QuantumLink>(link: &mut L, shots: u64) -> Result<ProtocolReport> {
    check_shots(shots)?;
    let start = link.sends();
    let c = clamp_unit(shot_mean(shots, || link.one_way_shot())?);
    let sends = link.sends() - start;
    let phase = SimplePhase {
        shots,
        bounces_per_shot: 0,
        qubits_per_shot: 1,
        cos_estimate: c,
        sin_estimate: None,
        sends,
        cosine_sends: sends,
    };
    Ok(simple_report(link, ProtocolKind::SimpleOneWay, c.acos(), phase))
}

/// `N` single-bounce shots; `φ̂ = arccos(mean)/2`.
pub fn simple_two_way<L: QuantumLink>(link: &mut L, shots: u64) -> Result<ProtocolReport> {
    check_shots(shots)?;
    let start = link.sends();
    let c = clamp_unit(shot_mean(shots, || link.bounce_shot(1, Quadrature::Cos))?);
    let sends = link.sends() - start;
    let phase = SimplePhase {
        shots,
        bounces_per_shot: 1,
        qubits_per_shot: 1,
        cos_estimate: c,
        sin_estimate: None,
        sends,
        cosine_sends: sends,
    };
    Ok(simple_report(link, ProtocolKind::SimpleTwoWay, c.acos() / 2.0, phase))
}

/// `N` shots of an `M`-qubit GHZ state; `φ̂ = arccos(mean)/M`.
pub fn entangled_oneshot<L: QuantumLink>(link: &mut L, qubits: u64, shots: u64) -> Result<ProtocolReport> {
    check_shots(shots)?;
    if qubits == 0 {
        return Err(Error::param("M", "need at least one qubit"));
    }
    let start = link.sends();
    let c = clamp_unit(shot_mean(shots, || link.ghz_shot(qubits, Quadrature::Cos))?);
    let sends = link.sends() - start;
    let phase = SimplePhase {
        shots,
        bounces_per_shot: 0,
        qubits_per_shot: qubits,
        cos_estimate: c,
        sin_estimate: None,
        sends,
        cosine_sends: sends,
    };
    Ok(simple_report(
        link,
        ProtocolKind::EntangledOneshot,
        c.acos() / qubits as f64,
        phase,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LossyChannel;
    use crate::protocols::{SimulatedLink, TruthModel};
    use crate::simulator::RngStream;
    use std::f64::consts::PI;

    fn link(phi: f64, eta: f64, seed: u64) -> SimulatedLink {
        SimulatedLink::new(
            TruthModel::new(2.0, phi / 2.0).unwrap(),
            LossyChannel::new(eta).unwrap(),
            RngStream::new(seed),
        )
    }

    #[test]
    fn zero_offset() {
        let r = simple_one_way(&mut link(0.0, 1.0, 0), 1000).unwrap();
        assert_eq!(r.estimate_phi, 0.0);
        assert_eq!(r.simple_phase.unwrap().cos_estimate, 1.0);
        let r = simple_two_way(&mut link(0.0, 1.0, 0), 1000).unwrap();
        assert_eq!(r.estimate_t_ba, 0.0);
        assert_eq!(r.total_one_way_sends, 2000);
    }

    #[test]
    fn one_way_at_quarter_turn() {
        let r = simple_one_way(&mut link(PI / 2.0, 1.0, 1), 1_000_000).unwrap();
        assert!((r.estimate_phi - PI / 2.0).abs() < 0.005, "{}", r.estimate_phi);
        assert!((r.estimate_t_ba - PI / 4.0).abs() < 0.0025);
    }

    #[test]
    fn two_way_mean() {
        let r = simple_two_way(&mut link(PI / 8.0, 1.0, 2), 200_000).unwrap();
        let c = r.simple_phase.unwrap().cos_estimate;
        assert!((c - (PI / 4.0).cos()).abs() < 0.0063, "{c}");
    }

    #[test]
    fn lossy_sends_counted() {
        let r = simple_one_way(&mut link(1.0, 0.5, 3), 10_000).unwrap();
        assert!(r.total_one_way_sends > 10_000);
        assert_eq!(r.total_one_way_sends - r.log.lost_sends, 10_000);
        assert!(r.estimate_phi >= 0.0 && r.estimate_phi <= PI);
    }

    #[test]
    fn ghz_single_qubit_matches_one_way() {
        // identical sampling streams: same outcomes
        let a = simple_one_way(&mut link(1.1, 1.0, 4), 5000).unwrap();
        let b = entangled_oneshot(&mut link(1.1, 1.0, 4), 1, 5000).unwrap();
        assert_eq!(
            a.simple_phase.unwrap().cos_estimate,
            b.simple_phase.unwrap().cos_estimate
        );
        assert_eq!(a.total_one_way_sends, b.total_one_way_sends);
    }

    #[test]
    fn ghz_counts_and_estimate() {
        let r = entangled_oneshot(&mut link(0.2, 1.0, 5), 8, 100_000).unwrap();
        assert_eq!(r.total_one_way_sends, 800_000);
        assert!((r.estimate_phi - 0.2).abs() < 0.01);
    }

    #[test]
    fn rejects_zero_shots() {
        assert!(simple_one_way(&mut link(1.0, 1.0, 0), 0).is_err());
        assert!(simple_two_way(&mut link(1.0, 1.0, 0), 0).is_err());
        assert!(entangled_oneshot(&mut link(1.0, 1.0, 0), 0, 5).is_err());
    }
}
