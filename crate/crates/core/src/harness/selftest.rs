use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::channel::Eta;
use crate::channel::{expected_bounces, run_coherent_bounces, LossyChannel, TransmissionLog};
use crate::cost::{improved_cost, lossy_improved_cost, lossy_sql_cost, sql_one_way_cost, Budget};
use crate::error::Result;
use crate::frames::{bounce_unitary, frame_conjugate, pauli_x_op, rabi_pulse, Frame, PhaseAngle};
use crate::protocols::{improved_estimate, simple_two_way, QuadratureMode, SimulatedLink, TruthModel};
use crate::simulator::{ghz_parity_expectation, run_in_frame, PureQubit, RngStream};

use super::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub property: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Replaceable pieces, so a deliberately broken formula can be shown to
/// trip the suite.
#[derive(Clone, Copy)]
pub struct SelftestHooks {
    pub expected_bounces: fn(u64, f64) -> Result<f64>,
}

impl Default for SelftestHooks {
    fn default() -> Self {
        SelftestHooks { expected_bounces }
    }
}

type Outcome = std::result::Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn unitarity(rng: &mut RngStream) -> Outcome {
    for _ in 0..200 {
        let u = rabi_pulse(4.0 * rng.uniform(), PhaseAngle::new(TAU * rng.uniform()), Frame::Alice);
        ensure(u.unitarity_defect() < 1e-12, || {
            format!("defect {}", u.unitarity_defect())
        })?;
    }
    Ok(())
}

fn conjugation_roundtrip(rng: &mut RngStream) -> Outcome {
    for _ in 0..200 {
        let u = rabi_pulse(4.0 * rng.uniform(), PhaseAngle::new(TAU * rng.uniform()), Frame::Alice);
        let phi = PhaseAngle::new(TAU * rng.uniform());
        let back = frame_conjugate(&frame_conjugate(&u, phi), -phi);
        ensure(back.max_entry_diff(&u) < 1e-12, || "A→B→A changed the operator".into())?;
    }
    Ok(())
}

fn bounce_product(rng: &mut RngStream) -> Outcome {
    for _ in 0..20 {
        let phi = PhaseAngle::new(TAU * rng.uniform());
        let xb = frame_conjugate(&pauli_x_op(Frame::Bob), phi);
        let one = pauli_x_op(Frame::Alice).compose(&xb).map_err(|e| e.to_string())?;
        let mut acc = one;
        for m in 1..=8u64 {
            let b = bounce_unitary(m, phi).map_err(|e| e.to_string())?;
            ensure(acc.equal_up_to_phase(&b, 1e-10), || format!("m={m} mismatch"))?;
            acc = one.compose(&acc).map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

fn frame_covariance(rng: &mut RngStream) -> Outcome {
    for _ in 0..100 {
        let phi = PhaseAngle::new(TAU * rng.uniform());
        let gates: Vec<_> = (0..6)
            .map(|_| {
                let f = if rng.uniform() < 0.5 { Frame::Alice } else { Frame::Bob };
                rabi_pulse(4.0 * rng.uniform(), PhaseAngle::new(TAU * rng.uniform()), f)
            })
            .collect();
        let start = PureQubit::excited(Frame::Alice);
        let a = run_in_frame(&gates, &start, Frame::Alice, phi).map_err(|e| e.to_string())?;
        let b = run_in_frame(&gates, &start, Frame::Bob, phi).map_err(|e| e.to_string())?;
        ensure((a.prob_one() - b.prob_one()).abs() < 1e-12, || {
            "outcome probabilities differ".into()
        })?;
    }
    Ok(())
}

fn ghz_parity(rng: &mut RngStream) -> Outcome {
    for m in 1..=8u32 {
        let phi = PhaseAngle::new(TAU * rng.uniform());
        let e = ghz_parity_expectation(m, phi).map_err(|e| e.to_string())?;
        let want = phi.times(m as u64).radians().cos();
        ensure((e - want).abs() < 1e-10, || format!("M={m}: {e} vs {want}"))?;
    }
    Ok(())
}

fn bounce_expectation(hooks: &SelftestHooks, rng: &mut RngStream) -> Outcome {
    for eta in [0.5, 0.9] {
        let e1 = (hooks.expected_bounces)(1, eta).map_err(|e| e.to_string())?;
        ensure((e1 * eta * eta - 1.0).abs() < 1e-12, || {
            format!("E_B(1) at η={eta} is {e1}, not 1/η²")
        })?;
        for m in [2u64, 4] {
            let want = (hooks.expected_bounces)(m, eta).map_err(|e| e.to_string())?;
            let ch = LossyChannel::new(eta).map_err(|e| e.to_string())?;
            let runs = 4000;
            let mut xs = Vec::with_capacity(runs);
            for _ in 0..runs {
                let mut log = TransmissionLog::default();
                let s = run_coherent_bounces(m, &ch, rng, &mut log).map_err(|e| e.to_string())?;
                xs.push(s.attempts as f64);
            }
            let mean = xs.iter().sum::<f64>() / runs as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
            let se = (var / runs as f64).sqrt();
            ensure((mean - want).abs() <= 4.0 * se, || {
                format!("m={m} η={eta}: simulated {mean:.4} ± {se:.4}, expected {want:.4}")
            })?;
        }
    }
    Ok(())
}

fn lossless_limits() -> Outcome {
    for k in 1..=12 {
        let eps = Budget::new(0.05).map_err(|e| e.to_string())?;
        let a = lossy_sql_cost(k, eps, Eta::LOSSLESS)
            .map_err(|e| e.to_string())?
            .value();
        let b = sql_one_way_cost(k, eps).map_err(|e| e.to_string())?.value();
        let c = lossy_improved_cost(k, eps, Eta::LOSSLESS)
            .map_err(|e| e.to_string())?
            .value();
        let d = improved_cost(k, eps).map_err(|e| e.to_string())?.value();
        ensure((a / b - 1.0).abs() < 1e-9 && (c / d - 1.0).abs() < 1e-9, || {
            format!("k={k}")
        })?;
    }
    Ok(())
}

fn lossless_counters(rng: &RngStream) -> Outcome {
    let eps = Budget::new(0.1).map_err(|e| e.to_string())?;
    for k in 1..=5u32 {
        let truth = TruthModel::from_pi_units(1.0, 0.3).map_err(|e| e.to_string())?;
        let mut link = SimulatedLink::new(truth, LossyChannel::lossless(), rng.child("counters", k as u64));
        let r = improved_estimate(&mut link, k, eps, QuadratureMode::PaperCosineOnly).map_err(|e| e.to_string())?;
        let n = r.bit_records[0].repetitions;
        let want = 2 * n * ((1u64 << k) - 1);
        ensure(r.total_one_way_sends == want, || {
            format!("k={k}: {} sends, expected {want}", r.total_one_way_sends)
        })?;
    }
    let truth = TruthModel::from_pi_units(1.0, 0.2).map_err(|e| e.to_string())?;
    let mut link = SimulatedLink::new(truth, LossyChannel::lossless(), rng.child("counters", 0));
    let r = simple_two_way(&mut link, 1000).map_err(|e| e.to_string())?;
    ensure(r.total_one_way_sends == 2000, || {
        format!("two-way: {} sends", r.total_one_way_sends)
    })
}

fn bitwise_success(rng: &RngStream) -> Outcome {
    let eps = Budget::new(0.1).map_err(|e| e.to_string())?;
    let mut offsets = rng.child("offsets", 0);
    let mut failures = 0;
    let runs = 100;
    for r in 0..runs {
        let truth = TruthModel::from_pi_units(1.0, offsets.uniform()).map_err(|e| e.to_string())?;
        let mut link = SimulatedLink::new(truth, LossyChannel::lossless(), rng.child("run", r));
        let mut rep = improved_estimate(&mut link, 4, eps, QuadratureMode::TwoQuadrature).map_err(|e| e.to_string())?;
        if !rep.judge(&truth, PI / 16.0) {
            failures += 1;
        }
    }
    ensure(failures <= 10, || format!("{failures}/{runs} runs outside precision"))
}

fn rejects_dead_channel() -> Outcome {
    let cfg = ExperimentConfig {
        eta: 0.0,
        bits: Some(3),
        seed: Some(1),
        ..Default::default()
    };
    ensure(cfg.validate().is_err(), || "η = 0 config was accepted".into())
}

pub fn selftest_with(hooks: SelftestHooks) -> Vec<Check> {
    let root = RngStream::new(0x5e1f_7e57);
    let mut checks = Vec::new();
    let mut push = |module, property, outcome: Outcome| {
        checks.push(Check {
            module,
            property,
            passed: outcome.is_ok(),
            detail: outcome.err().unwrap_or_default(),
        })
    };
    push(
        "frames",
        "pulses are unitary",
        unitarity(&mut root.child("unitarity", 0)),
    );
    push(
        "frames",
        "frame conjugation round trip",
        conjugation_roundtrip(&mut root.child("conj", 0)),
    );
    push(
        "frames",
        "bounce equals alternating product",
        bounce_product(&mut root.child("bounce", 0)),
    );
    push(
        "frames",
        "frame covariance",
        frame_covariance(&mut root.child("covariance", 0)),
    );
    push(
        "simulator",
        "GHZ parity is cos(Mφ)",
        ghz_parity(&mut root.child("ghz", 0)),
    );
    push(
        "channel",
        "expected bounces match Monte Carlo",
        bounce_expectation(&hooks, &mut root.child("bounces", 0)),
    );
    push("cost", "lossless limits", lossless_limits());
    push(
        "protocols",
        "lossless send counters",
        lossless_counters(&root.child("counters", 0)),
    );
    push(
        "protocols",
        "bitwise success rate",
        bitwise_success(&root.child("success", 0)),
    );
    push("harness", "dead channel rejected", rejects_dead_channel());
    checks
}

pub fn selftest() -> Vec<Check> {
    selftest_with(SelftestHooks::default())
}
