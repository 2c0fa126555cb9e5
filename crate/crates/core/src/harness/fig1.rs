use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::channel::Eta;
use crate::cost::{lossy_improved_cost, lossy_sql_cost, Budget};
use crate::error::{Error, Result};

pub const FIG1_HEADER: [&str; 5] = ["eta", "k", "cost_improved", "cost_sql", "ratio"];

/// How the failure budget depends on the bit count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsRule {
    /// `ε = 2^{−k}`
    Pow2,
    Fixed(f64),
}

impl EpsRule {
    pub fn budget(self, k: u32) -> Result<Budget> {
        match self {
            EpsRule::Pow2 => Budget::pow2(k),
            EpsRule::Fixed(e) => Budget::new(e),
        }
    }
}

impl fmt::Display for EpsRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsRule::Pow2 => write!(f, "pow2"),
            EpsRule::Fixed(e) => write!(f, "{e}"),
        }
    }
}

/// `pow2` or a fixed budget such as `0.01`.
impl FromStr for EpsRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pow2" | "2^-k" => Ok(EpsRule::Pow2),
            other => {
                let e: f64 = other
                    .parse()
                    .map_err(|_| Error::Config(format!("eps rule `{s}`: expected pow2 or a number")))?;
                Budget::new(e)?;
                Ok(EpsRule::Fixed(e))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig1Row {
    pub eta: f64,
    pub k: u32,
    pub cost_improved: f64,
    pub cost_sql: f64,
    /// improved / SQL, computed in the log domain (finite even when both costs overflow).
    pub ratio: f64,
}

/// Analytic lossy costs of the bitwise protocol and the one-way SQL
/// protocol for `k = 1..=k_max` at each `η`.
pub fn emit_fig1_data(etas: &[f64], k_max: u32, rule: EpsRule) -> Result<Vec<Fig1Row>> {
    if etas.is_empty() {
        return Err(Error::Config("no eta values".into()));
    }
    if k_max == 0 || k_max > 63 {
        return Err(Error::param("kmax", format!("must lie in 1..=63, got {k_max}")));
    }
    let mut rows = Vec::with_capacity(etas.len() * k_max as usize);
    for &e in etas {
        let eta = Eta::new(e)?;
        for k in 1..=k_max {
            let eps = rule.budget(k)?;
            let imp = lossy_improved_cost(k, eps, eta)?;
            let sql = lossy_sql_cost(k, eps, eta)?;
            rows.push(Fig1Row {
                eta: e,
                k,
                cost_improved: imp.value(),
                cost_sql: sql.value(),
                ratio: imp.ratio(sql),
            });
        }
    }
    Ok(rows)
}

pub fn write_fig1_csv<W: Write>(rows: &[Fig1Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIG1_HEADER)?;
    for r in rows {
        w.write_record([
            r.eta.to_string(),
            r.k.to_string(),
            r.cost_improved.to_string(),
            r.cost_sql.to_string(),
            r.ratio.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Shape of one η curve of the ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveShape {
    pub eta: f64,
    /// Bit count at the smallest ratio, and that ratio.
    pub k_min: u32,
    pub min_ratio: f64,
    /// First `k` past the minimum where the ratio exceeds 1, provided the
    /// curve dips below 1 at all.
    pub crossover: Option<u32>,
}

pub fn curve_shape(rows: &[Fig1Row], eta: f64) -> Option<CurveShape> {
    let curve: Vec<&Fig1Row> = rows.iter().filter(|r| r.eta == eta).collect();
    let best = curve.iter().min_by(|a, b| a.ratio.total_cmp(&b.ratio))?;
    let crossover = if best.ratio < 1.0 {
        curve.iter().find(|r| r.k > best.k && r.ratio > 1.0).map(|r| r.k)
    } else {
        None
    };
    Some(CurveShape {
        eta,
        k_min: best.k,
        min_ratio: best.ratio,
        crossover,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_determinism() {
        let rows = emit_fig1_data(&[1.0, 0.99], 20, EpsRule::Pow2).unwrap();
        let mut a = Vec::new();
        write_fig1_csv(&rows, &mut a).unwrap();
        let mut b = Vec::new();
        write_fig1_csv(&emit_fig1_data(&[1.0, 0.99], 20, EpsRule::Pow2).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().next().unwrap(), "eta,k,cost_improved,cost_sql,ratio");
        assert_eq!(text.lines().count(), 41);
    }

    #[test]
    fn lossless_ratio_falls_below_one() {
        let rows = emit_fig1_data(&[1.0], 30, EpsRule::Pow2).unwrap();
        // below 1 from k = 5 on, never returning
        for r in &rows {
            assert_eq!(r.ratio < 1.0, r.k >= 5, "k={} ratio={}", r.k, r.ratio);
        }
        assert_eq!(curve_shape(&rows, 1.0).unwrap().crossover, None);
    }

    #[test]
    fn crossovers_order_with_channel_quality() {
        let rows = emit_fig1_data(&[0.99, 0.999], 30, EpsRule::Pow2).unwrap();
        assert_eq!(curve_shape(&rows, 0.99).unwrap().crossover, Some(10));
        assert_eq!(curve_shape(&rows, 0.999).unwrap().crossover, Some(14));
    }

    #[test]
    fn overflow_prints_inf() {
        let rows = emit_fig1_data(&[0.5], 40, EpsRule::Fixed(0.01)).unwrap();
        let last = rows.last().unwrap();
        assert!(last.cost_improved.is_infinite());
        assert!(last.ratio.is_infinite() || last.ratio > 1e100);
        let mut v = Vec::new();
        write_fig1_csv(&rows, &mut v).unwrap();
        assert!(String::from_utf8(v).unwrap().contains("inf"));
    }

    #[test]
    fn eps_rule_parsing() {
        assert_eq!("pow2".parse::<EpsRule>().unwrap(), EpsRule::Pow2);
        assert_eq!("0.01".parse::<EpsRule>().unwrap(), EpsRule::Fixed(0.01));
        assert!("2".parse::<EpsRule>().is_err());
        assert!(emit_fig1_data(&[0.0], 5, EpsRule::Pow2).is_err());
    }
}
