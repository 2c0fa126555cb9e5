//! Browser bindings. Every export returns a JSON string; errors come back as
//! `{"error": "..."}` so the page never has to catch a wasm trap.

use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

use tqsync::harness::{curve_shape, emit_fig1_data, execute, EpsRule, ExperimentConfig, OffsetSpec};
use tqsync::{ProtocolKind, QuadratureMode, Result, RngStream};

fn respond<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| json!({ "error": e.to_string() }).to_string()),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, tqsync::Error> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| tqsync::Error::Config(format!("not a number: {t}")))
        })
        .collect()
}

#[derive(Serialize)]
struct Curve {
    eta: f64,
    k: Vec<u32>,
    ratio: Vec<f64>,
    k_min: u32,
    crossover: Option<u32>,
}

fn curves(etas: &str, kmax: u32) -> Result<Vec<Curve>> {
    let etas = parse_list(etas)?;
    let rows = emit_fig1_data(&etas, kmax, EpsRule::Pow2)?;
    let mut out = Vec::new();
    for &eta in &etas {
        let mine: Vec<_> = rows.iter().filter(|r| r.eta == eta).collect();
        let shape = curve_shape(&rows, eta).ok_or_else(|| tqsync::Error::Config("empty curve".into()))?;
        out.push(Curve {
            eta,
            k: mine.iter().map(|r| r.k).collect(),
            ratio: mine.iter().map(|r| r.ratio).collect(),
            k_min: shape.k_min,
            crossover: shape.crossover,
        });
    }
    Ok(out)
}

/// Cost ratio (bitwise over SQL) against k for each η in a comma list.
#[wasm_bindgen]
pub fn cost_curves(etas: &str, kmax: u32) -> String {
    respond(curves(etas, kmax))
}

#[derive(Serialize)]
struct Round {
    index: u32,
    bit: u8,
    truth_bit: u8,
    cos: f64,
    sin: Option<f64>,
    repetitions: u64,
}

#[derive(Serialize)]
struct Estimate {
    offset: f64,
    estimate: f64,
    bits: Vec<u8>,
    rounds: Vec<Round>,
    sends: u64,
    lost: u64,
    succeeded: Option<bool>,
}

fn estimate(offset: f64, k: u32, eps: f64, eta: f64, seed: u64) -> Result<Estimate> {
    let cfg = ExperimentConfig {
        protocol: ProtocolKind::Improved,
        offset: OffsetSpec::Fixed(offset),
        eta,
        bits: Some(k),
        eps: Some(eps),
        seed: Some(seed),
        mode: QuadratureMode::TwoQuadrature,
        ..Default::default()
    };
    cfg.validate()?;
    let out = execute(&cfg, &RngStream::new(seed).child("run", 0))?;
    let r = out.report;
    let truth = tqsync::protocols::truth_bits(offset, k);
    let bit_at = |i: u32| r.bits[i as usize - 1];
    Ok(Estimate {
        offset,
        estimate: r.estimate_phi / std::f64::consts::PI,
        rounds: r
            .bit_records
            .iter()
            .map(|b| Round {
                index: b.bit_index,
                bit: bit_at(b.bit_index),
                truth_bit: truth[b.bit_index as usize - 1],
                cos: b.cos_estimate,
                sin: b.sin_estimate,
                repetitions: b.repetitions,
            })
            .collect(),
        bits: r.bits,
        sends: r.total_one_way_sends,
        lost: r.log.lost_sends,
        succeeded: r.succeeded,
    })
}

/// One run of the bitwise protocol. `offset` is in units of π.
#[wasm_bindgen]
pub fn estimate_offset(offset: f64, k: u32, eps: f64, eta: f64, seed: u32) -> String {
    respond(estimate(offset, k, eps, eta, seed as u64))
}

#[derive(Serialize)]
struct ScalingPoint {
    shots: u64,
    sends: f64,
    rms_error: f64,
}

fn scaling(shots: &str, runs: u32, seed: u64) -> Result<Vec<ScalingPoint>> {
    let shots = parse_list(shots)?;
    let root = RngStream::new(seed);
    let mut out = Vec::new();
    for (i, &n) in shots.iter().enumerate() {
        let cfg = ExperimentConfig {
            protocol: ProtocolKind::SimpleOneWay,
            offset: OffsetSpec::Fixed(0.5),
            shots: Some(n as u64),
            runs: runs as u64,
            seed: Some(seed),
            ..Default::default()
        };
        cfg.validate()?;
        let row = root.child("row", i as u64);
        let mut sq = 0.0;
        let mut sends = 0.0;
        for r in 0..runs as u64 {
            let o = execute(&cfg, &row.child("run", r))?;
            sq += o.error * o.error;
            sends += o.report.total_one_way_sends as f64;
        }
        out.push(ScalingPoint {
            shots: n as u64,
            sends: sends / runs as f64,
            rms_error: (sq / runs as f64).sqrt(),
        });
    }
    Ok(out)
}

/// RMS error of the one-way counting protocol for each shot count.
#[wasm_bindgen]
pub fn sql_scaling(shots: &str, runs: u32, seed: u32) -> String {
    respond(scaling(shots, runs, seed as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn curves_have_one_entry_per_eta() {
        let v = parse(cost_curves("1, 0.99", 20));
        let a = v.as_array().unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[1]["k"].as_array().unwrap().len(), 20);
        assert_eq!(a[1]["crossover"], 10);
    }

    #[test]
    fn estimate_recovers_bits() {
        let v = parse(estimate_offset(0.40625, 5, 0.05, 1.0, 3));
        assert_eq!(v["bits"], json!([0, 1, 1, 0, 1]));
        assert_eq!(v["succeeded"], true);
        assert_eq!(v["rounds"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn errors_are_json() {
        assert!(parse(estimate_offset(0.3, 4, 0.1, 0.0, 1))["error"].is_string());
        assert!(parse(cost_curves("x", 5))["error"].is_string());
        assert!(parse(sql_scaling("100,abc", 3, 1))["error"].is_string());
    }

    #[test]
    fn sql_error_shrinks_with_shots() {
        let v = parse(sql_scaling("100,10000", 40, 9));
        let a = v.as_array().unwrap();
        let small = a[0]["rms_error"].as_f64().unwrap();
        let big = a[1]["rms_error"].as_f64().unwrap();
        assert!(big < small / 5.0, "{small} {big}");
        assert_eq!(a[1]["sends"], 10000.0);
    }
}
