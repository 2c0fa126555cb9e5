use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::LossyChannel;
use crate::cost::{
    expected_batch_sends, expected_chain_sends, expected_delivery_sends, hybrid_tail_shots, repetitions, select_k1,
    SendAccounting,
};
use crate::error::Result;
use crate::protocols::{
    entangled_bitwise, entangled_oneshot, hybrid_estimate, improved_estimate, simple_one_way, simple_two_way,
    ProtocolKind, ProtocolReport, SimulatedLink, TruthModel,
};
use crate::simulator::RngStream;

use super::config::{ExperimentConfig, OffsetSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    /// True offset in units of π.
    pub offset: f64,
    pub t_ba: f64,
    /// `t̂ − t_BA`, seconds.
    pub error: f64,
    pub report: ProtocolReport,
}

/// Runs `cfg` once on the given stream. The caller validates `cfg`.
pub fn execute(cfg: &ExperimentConfig, stream: &RngStream) -> Result<RunOutcome> {
    let offset = match cfg.offset {
        OffsetSpec::Fixed(t) => t,
        OffsetSpec::Uniform { uniform: [lo, hi] } => lo + (hi - lo) * stream.child("offset", 0).uniform(),
    };
    let truth = TruthModel::from_pi_units(cfg.omega, offset)?;
    let channel = LossyChannel { eta: cfg.eta()? };
    let mut link = SimulatedLink::new(truth, channel, stream.child("link", 0)).count_lost_sends(cfg.count_lost_sends);

    let mut report = match cfg.protocol {
        ProtocolKind::SimpleOneWay => simple_one_way(&mut link, cfg.shots()?)?,
        ProtocolKind::SimpleTwoWay => simple_two_way(&mut link, cfg.shots()?)?,
        ProtocolKind::EntangledOneshot => entangled_oneshot(&mut link, cfg.qubits()?, cfg.shots()?)?,
        ProtocolKind::Improved => improved_estimate(&mut link, cfg.bits()?, cfg.budget()?, cfg.mode)?,
        ProtocolKind::EntangledBitwise => entangled_bitwise(&mut link, cfg.bits()?, cfg.budget()?, cfg.mode)?,
        ProtocolKind::Hybrid => {
            let k = cfg.bits()?;
            hybrid_estimate(&mut link, resolve_k1(cfg)?, k, cfg.budget()?, cfg.mode)?
        }
    };
    if let Some(tol) = report.target_precision() {
        report.judge(&truth, tol);
    }
    Ok(RunOutcome {
        offset,
        t_ba: truth.t_ba,
        error: report.error_against(&truth),
        report,
    })
}

/// The configured `k1`, or the cost-optimal one.
pub fn resolve_k1(cfg: &ExperimentConfig) -> Result<u32> {
    match cfg.k1 {
        Some(k1) => Ok(k1),
        None => select_k1(cfg.eta()?, cfg.bits()?, cfg.budget()?),
    }
}

/// One validated run on stream `(seed, "run", 0)`.
pub fn run_single(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    execute(cfg, &RngStream::new(cfg.seed()?).child("run", 0))
}

/// Expected sends charged for one run of `cfg`, from the channel model.
pub fn analytic_sends(cfg: &ExperimentConfig) -> Result<f64> {
    let eta = cfg.eta()?;
    let acc = SendAccounting::from_flag(cfg.count_lost_sends);
    let q = cfg.mode.quadratures() as f64;
    let bit_loop = |k: u32, chain: &dyn Fn(u64) -> f64, n: u64| -> f64 {
        q * n as f64 * (0..k).map(|j| chain(1u64 << j)).sum::<f64>()
    };
    Ok(match cfg.protocol {
        ProtocolKind::SimpleOneWay => cfg.shots()? as f64 * expected_delivery_sends(eta, acc),
        ProtocolKind::SimpleTwoWay => cfg.shots()? as f64 * expected_chain_sends(1, eta, acc),
        ProtocolKind::EntangledOneshot => cfg.shots()? as f64 * expected_batch_sends(cfg.qubits()?, eta, acc),
        ProtocolKind::Improved => {
            let k = cfg.bits()?;
            bit_loop(k, &|m| expected_chain_sends(m, eta, acc), repetitions(k, cfg.budget()?))
        }
        ProtocolKind::EntangledBitwise => {
            let k = cfg.bits()?;
            bit_loop(
                k,
                &|m| expected_batch_sends(2 * m, eta, acc),
                repetitions(k, cfg.budget()?),
            )
        }
        ProtocolKind::Hybrid => {
            let k = cfg.bits()?;
            let eps = cfg.budget()?;
            let k1 = resolve_k1(cfg)?;
            let head = bit_loop(
                k1,
                &|m| expected_chain_sends(m, eta, acc),
                repetitions(k1, eps.halved()),
            );
            let tail = if k1 < k {
                q * hybrid_tail_shots(k1, k, eps)? * expected_chain_sends(1u64 << k1, eta, acc)
            } else {
                0.0
            };
            head + tail
        }
    })
}

/// Human-readable summary of one run.
pub fn describe(cfg: &ExperimentConfig, out: &RunOutcome) -> String {
    let r = &out.report;
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<22}{v}\n"));
    line("protocol", r.protocol.name().to_string());
    if let Some(m) = r.mode {
        line("mode", format!("{m:?}"));
    }
    line("omega [rad/s]", format!("{}", r.omega));
    line("eta", format!("{}", cfg.eta));
    line("true offset [pi/w]", format!("{}", out.offset));
    line("estimate [pi/w]", format!("{}", r.estimate_phi / PI));
    line("estimate t_BA [s]", format!("{}", r.estimate_t_ba));
    line("error [s]", format!("{:e}", out.error));
    if !r.bits.is_empty() {
        let bits: String = r.bits.iter().map(|b| char::from(b'0' + b)).collect();
        line("bits", format!("0.{bits}"));
    }
    if let Some(k1) = r.k1 {
        line("k1", k1.to_string());
    }
    line("one-way sends", r.total_one_way_sends.to_string());
    line("  cosine rounds", r.cosine_sends.to_string());
    line("  lost", r.log.lost_sends.to_string());
    if let Some(ok) = r.succeeded {
        line("within precision", ok.to_string());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(protocol: ProtocolKind) -> ExperimentConfig {
        ExperimentConfig {
            protocol,
            bits: Some(4),
            eps: Some(0.1),
            shots: Some(2000),
            qubits: Some(2),
            seed: Some(7),
            offset: OffsetSpec::Fixed(0.3),
            ..Default::default()
        }
    }

    #[test]
    fn rerun_is_identical() {
        let c = cfg(ProtocolKind::Improved);
        assert_eq!(run_single(&c).unwrap(), run_single(&c).unwrap());
    }

    #[test]
    fn lossless_analytic_matches_simulation() {
        for p in [
            ProtocolKind::SimpleOneWay,
            ProtocolKind::SimpleTwoWay,
            ProtocolKind::EntangledOneshot,
            ProtocolKind::Improved,
            ProtocolKind::EntangledBitwise,
            ProtocolKind::Hybrid,
        ] {
            let mut c = cfg(p);
            c.k1 = Some(2);
            let out = run_single(&c).unwrap();
            assert_eq!(
                out.report.total_one_way_sends as f64,
                analytic_sends(&c).unwrap(),
                "{p:?}"
            );
        }
    }

    #[test]
    fn hybrid_reports_selected_k1() {
        let mut c = cfg(ProtocolKind::Hybrid);
        c.eta = 0.9;
        c.bits = Some(6);
        let out = run_single(&c).unwrap();
        assert_eq!(out.report.k1, Some(resolve_k1(&c).unwrap()));
    }

    #[test]
    fn uniform_offsets_vary_by_stream() {
        let mut c = cfg(ProtocolKind::Improved);
        c.offset = OffsetSpec::Uniform { uniform: [0.0, 1.0] };
        let root = RngStream::new(3);
        let a = execute(&c, &root.child("run", 0)).unwrap();
        let b = execute(&c, &root.child("run", 1)).unwrap();
        assert_ne!(a.offset, b.offset);
        assert!((0.0..1.0).contains(&a.offset));
    }

    #[test]
    fn describe_mentions_bits() {
        let c = cfg(ProtocolKind::Improved);
        let s = describe(&c, &run_single(&c).unwrap());
        assert!(s.contains("bits") && s.contains("one-way sends"));
    }
}
