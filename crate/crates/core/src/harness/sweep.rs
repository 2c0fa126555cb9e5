use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::protocols::ProtocolKind;
use crate::simulator::RngStream;

use super::config::{ExperimentConfig, OffsetSpec};
use super::run::{analytic_sends, execute, resolve_k1, RunOutcome};

/// A cartesian grid over a base config. `None` keeps the base value; an
/// explicitly empty list is rejected.
#[derive(Debug, Clone, Default)]
pub struct SweepGrid {
    pub base: ExperimentConfig,
    pub protocols: Option<Vec<ProtocolKind>>,
    pub etas: Option<Vec<f64>>,
    pub bits: Option<Vec<u32>>,
    pub eps: Option<Vec<f64>>,
    pub shots: Option<Vec<u64>>,
    pub qubits: Option<Vec<u64>>,
    pub offsets: Option<Vec<OffsetSpec>>,
}

fn axis<T: Clone>(name: &str, list: &Option<Vec<T>>, base: T) -> Result<Vec<T>> {
    match list {
        None => Ok(vec![base]),
        Some(v) if v.is_empty() => Err(Error::Config(format!("empty grid: no values for {name}"))),
        Some(v) => Ok(v.clone()),
    }
}

impl SweepGrid {
    /// Row configs in grid order (protocol outermost, offset innermost).
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>> {
        let b = &self.base;
        let protocols = axis("protocol", &self.protocols, b.protocol)?;
        let etas = axis("eta", &self.etas, b.eta)?;
        let bits = axis(
            "bits",
            &self.bits.as_ref().map(|v| v.iter().map(|&k| Some(k)).collect()),
            b.bits,
        )?;
        let eps = axis(
            "eps",
            &self.eps.as_ref().map(|v| v.iter().map(|&e| Some(e)).collect()),
            b.eps,
        )?;
        let shots = axis(
            "shots",
            &self.shots.as_ref().map(|v| v.iter().map(|&n| Some(n)).collect()),
            b.shots,
        )?;
        let qubits = axis(
            "qubits",
            &self.qubits.as_ref().map(|v| v.iter().map(|&m| Some(m)).collect()),
            b.qubits,
        )?;
        let offsets = axis("offset", &self.offsets, b.offset)?;
        let mut rows = Vec::new();
        for &protocol in &protocols {
            for &eta in &etas {
                for &k in &bits {
                    for &e in &eps {
                        for &n in &shots {
                            for &m in &qubits {
                                for &offset in &offsets {
                                    rows.push(ExperimentConfig {
                                        protocol,
                                        eta,
                                        bits: k,
                                        eps: e,
                                        shots: n,
                                        qubits: m,
                                        offset,
                                        out: None,
                                        ..b.clone()
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(rows)
    }
}

/// First 16 hex digits of SHA-256 over the config's JSON (seed included).
pub fn fingerprint(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.out = None;
    let bytes = serde_json::to_vec(&c).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub row: usize,
    pub fingerprint: String,
    pub config: ExperimentConfig,
    pub k1: Option<u32>,
    pub runs: u64,
    pub stats: Option<RowStats>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowStats {
    pub mean_estimate: f64,
    pub std_estimate: f64,
    pub rms_error: f64,
    /// Fraction of runs outside the target precision (bitwise protocols only).
    pub failure_rate: Option<f64>,
    pub mean_sends: f64,
    pub analytic_sends: f64,
    pub ratio: f64,
}

pub fn row_stats(cfg: &ExperimentConfig, outcomes: &[RunOutcome]) -> Result<RowStats> {
    let n = outcomes.len() as f64;
    let mean = |f: &dyn Fn(&RunOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
    let mean_estimate = mean(&|o| o.report.estimate_t_ba);
    let var = if outcomes.len() > 1 {
        outcomes
            .iter()
            .map(|o| (o.report.estimate_t_ba - mean_estimate).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    let failure_rate = if cfg.protocol.is_bitwise() {
        Some(mean(&|o| (o.report.succeeded == Some(false)) as u8 as f64))
    } else {
        None
    };
    let mean_sends = mean(&|o| o.report.total_one_way_sends as f64);
    let analytic = analytic_sends(cfg)?;
    Ok(RowStats {
        mean_estimate,
        std_estimate: var.sqrt(),
        rms_error: mean(&|o| o.error * o.error).sqrt(),
        failure_rate,
        mean_sends,
        analytic_sends: analytic,
        ratio: mean_sends / analytic,
    })
}

fn run_row(index: usize, cfg: &ExperimentConfig, root: &RngStream) -> SweepRow {
    let fp = fingerprint(cfg);
    let attempt = || -> Result<(Option<u32>, RowStats)> {
        cfg.validate()?;
        let row = root.child("row", index as u64);
        let outcomes = (0..cfg.runs)
            .into_par_iter()
            .map(|r| execute(cfg, &row.child("run", r)))
            .collect::<Result<Vec<_>>>()?;
        let k1 = if cfg.protocol == ProtocolKind::Hybrid {
            Some(resolve_k1(cfg)?)
        } else {
            None
        };
        Ok((k1, row_stats(cfg, &outcomes)?))
    };
    match attempt() {
        Ok((k1, stats)) => SweepRow {
            row: index,
            fingerprint: fp,
            config: cfg.clone(),
            k1,
            runs: cfg.runs,
            stats: Some(stats),
            error: None,
        },
        Err(e) => SweepRow {
            row: index,
            fingerprint: fp,
            config: cfg.clone(),
            k1: None,
            runs: cfg.runs,
            stats: None,
            error: Some(e.to_string()),
        },
    }
}

/// Runs every grid row on a pool of `workers` threads (all cores if
/// `None`). Row `i`, run `r` draws from `(seed, "row", i, "run", r)`, so the
/// output does not depend on scheduling. Failing rows are recorded, not fatal.
pub fn run_sweep(grid: &SweepGrid, workers: Option<usize>) -> Result<Vec<SweepRow>> {
    let seed = grid.base.seed()?;
    let configs = grid.expand()?;
    let root = RngStream::new(seed);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::param("workers", "need at least one worker"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, c)| run_row(i, c, &root))
            .collect()
    }))
}

pub const SWEEP_HEADER: [&str; 26] = [
    "row",
    "fingerprint",
    "protocol",
    "mode",
    "omega",
    "offset",
    "eta",
    "bits",
    "k1",
    "eps",
    "shots",
    "qubits",
    "runs",
    "seed",
    "count_lost_sends",
    "mean_estimate",
    "std_estimate",
    "rms_error",
    "failure_rate",
    "mean_sends",
    "analytic_sends",
    "ratio",
    "status",
    "error",
    "std_sql_units",
    "rms_sql_units",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// RFC-4180 CSV with a header row; floats in shortest round-trip form.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        let c = &r.config;
        let s = r.stats.as_ref();
        let eps = c.budget().ok().map(|b| b.get());
        // ω·std·√N and ω·rms·√N: the SQL constant in convenient units
        let sends = s.map(|s| s.mean_sends);
        let sql = |x: Option<f64>| match (x, sends) {
            (Some(x), Some(n)) => (x * c.omega * n.sqrt()).to_string(),
            _ => String::new(),
        };
        w.write_record([
            r.row.to_string(),
            r.fingerprint.clone(),
            c.protocol.name().to_string(),
            serde_json::to_value(c.mode)?.as_str().unwrap_or_default().to_string(),
            c.omega.to_string(),
            c.offset.to_string(),
            c.eta.to_string(),
            opt(c.bits),
            opt(r.k1.or(c.k1)),
            opt(eps),
            opt(c.shots),
            opt(c.qubits),
            c.runs.to_string(),
            opt(c.seed),
            c.count_lost_sends.to_string(),
            opt(s.map(|s| s.mean_estimate)),
            opt(s.map(|s| s.std_estimate)),
            opt(s.map(|s| s.rms_error)),
            opt(s.and_then(|s| s.failure_rate)),
            opt(sends),
            opt(s.map(|s| s.analytic_sends)),
            opt(s.map(|s| s.ratio)),
            if r.error.is_some() { "error" } else { "ok" }.to_string(),
            r.error.clone().unwrap_or_default(),
            sql(s.map(|s| s.std_estimate)),
            sql(s.map(|s| s.rms_error)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SweepGrid {
        SweepGrid {
            base: ExperimentConfig {
                protocol: ProtocolKind::Improved,
                bits: Some(3),
                eps: Some(0.1),
                runs: 8,
                seed: Some(5),
                offset: OffsetSpec::Uniform { uniform: [0.0, 1.0] },
                ..Default::default()
            },
            etas: Some(vec![1.0, 0.9]),
            bits: Some(vec![2, 3]),
            ..Default::default()
        }
    }

    fn csv_bytes(rows: &[SweepRow]) -> Vec<u8> {
        let mut v = Vec::new();
        write_sweep_csv(rows, &mut v).unwrap();
        v
    }

    #[test]
    fn grid_order() {
        let rows = grid().expand().unwrap();
        let pairs: Vec<_> = rows.iter().map(|c| (c.eta, c.bits.unwrap())).collect();
        assert_eq!(pairs, vec![(1.0, 2), (1.0, 3), (0.9, 2), (0.9, 3)]);
    }

    #[test]
    fn empty_axis_rejected() {
        let mut g = grid();
        g.etas = Some(vec![]);
        assert!(g.expand().unwrap_err().is_config_error());
    }

    #[test]
    fn worker_count_does_not_change_bytes() {
        let g = grid();
        let a = csv_bytes(&run_sweep(&g, Some(1)).unwrap());
        let b = csv_bytes(&run_sweep(&g, Some(4)).unwrap());
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("row,fingerprint,protocol"));
    }

    #[test]
    fn failing_rows_are_recorded() {
        let mut g = grid();
        g.etas = Some(vec![1.0, 0.0]);
        let rows = run_sweep(&g, Some(2)).unwrap();
        assert!(rows[0].error.is_none());
        assert!(rows[2].error.as_deref().unwrap().contains("eta"));
        assert!(rows[2].stats.is_none());
    }

    #[test]
    fn fingerprints_differ_by_parameters_and_seed() {
        let rows = grid().expand().unwrap();
        let fps: std::collections::HashSet<_> = rows.iter().map(fingerprint).collect();
        assert_eq!(fps.len(), rows.len());
        let mut c = rows[0].clone();
        let f0 = fingerprint(&c);
        c.seed = Some(6);
        assert_ne!(fingerprint(&c), f0);
    }
}
