use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::Eta;
use crate::cost::Budget;
use crate::error::{Error, Result};
use crate::protocols::{ProtocolKind, QuadratureMode, MAX_BITS};

/// The true offset in units of π (`T = ωt_BA/π`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OffsetSpec {
    Fixed(f64),
    Uniform { uniform: [f64; 2] },
}

impl OffsetSpec {
    pub fn range(self) -> (f64, f64) {
        match self {
            OffsetSpec::Fixed(t) => (t, t),
            OffsetSpec::Uniform { uniform } => (uniform[0], uniform[1]),
        }
    }
}

impl Default for OffsetSpec {
    fn default() -> Self {
        OffsetSpec::Fixed(0.5)
    }
}

impl fmt::Display for OffsetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OffsetSpec::Fixed(t) => write!(f, "{t}"),
            OffsetSpec::Uniform { uniform: [a, b] } => write!(f, "uniform:{a}:{b}"),
        }
    }
}

/// `0.25` or `uniform:0.1:0.4`.
impl FromStr for OffsetSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse offset `{s}`; expected a number or uniform:LO:HI"));
        if let Some(rest) = s.strip_prefix("uniform:") {
            let (a, b) = rest.split_once(':').ok_or_else(bad)?;
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok(OffsetSpec::Uniform { uniform: [a, b] })
        } else {
            Ok(OffsetSpec::Fixed(s.trim().parse().map_err(|_| bad())?))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: ProtocolKind,
    /// rad/s
    pub omega: f64,
    pub offset: OffsetSpec,
    pub eta: f64,
    pub bits: Option<u32>,
    pub k1: Option<u32>,
    /// Failure budget; bitwise protocols default to `2^{−k}`.
    pub eps: Option<f64>,
    pub shots: Option<u64>,
    pub qubits: Option<u64>,
    pub runs: u64,
    pub seed: Option<u64>,
    pub mode: QuadratureMode,
    pub count_lost_sends: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            protocol: ProtocolKind::Improved,
            omega: 1.0,
            offset: OffsetSpec::default(),
            eta: 1.0,
            bits: None,
            k1: None,
            eps: None,
            shots: None,
            qubits: None,
            runs: 1,
            seed: None,
            mode: QuadratureMode::default(),
            count_lost_sends: true,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required (--seed or \"seed\" in the config file)".into()))
    }

    pub fn eta(&self) -> Result<Eta> {
        Eta::new(self.eta)
    }

    pub fn bits(&self) -> Result<u32> {
        let k = self
            .bits
            .ok_or_else(|| Error::Config(format!("{} needs --bits", self.protocol.name())))?;
        if k == 0 || k > MAX_BITS {
            return Err(Error::param("bits", format!("must lie in 1..={MAX_BITS}, got {k}")));
        }
        Ok(k)
    }

    pub fn budget(&self) -> Result<Budget> {
        match self.eps {
            Some(e) => Budget::new(e),
            None => Budget::pow2(self.bits()?),
        }
    }

    pub fn shots(&self) -> Result<u64> {
        match self.shots {
            Some(0) => Err(Error::param("shots", "need at least one shot")),
            Some(n) => Ok(n),
            None => Err(Error::Config(format!("{} needs --shots", self.protocol.name()))),
        }
    }

    pub fn qubits(&self) -> Result<u64> {
        match self.qubits {
            Some(0) => Err(Error::param("qubits", "need at least one qubit")),
            Some(m) => Ok(m),
            None => Err(Error::Config("entangled-oneshot needs --qubits".into())),
        }
    }

    /// Checks everything a run needs before any sampling happens.
    pub fn validate(&self) -> Result<()> {
        self.seed()?;
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::param(
                "omega",
                format!("must be positive and finite, got {}", self.omega),
            ));
        }
        self.eta()?;
        if self.runs == 0 {
            return Err(Error::param("runs", "need at least one run"));
        }
        match self.protocol {
            ProtocolKind::SimpleOneWay | ProtocolKind::SimpleTwoWay => {
                self.shots()?;
            }
            ProtocolKind::EntangledOneshot => {
                self.shots()?;
                self.qubits()?;
            }
            ProtocolKind::Improved | ProtocolKind::EntangledBitwise => {
                self.bits()?;
                self.budget()?;
            }
            ProtocolKind::Hybrid => {
                let k = self.bits()?;
                self.budget()?;
                if let Some(k1) = self.k1 {
                    if k1 == 0 || k1 > k {
                        return Err(Error::param(
                            "k1",
                            format!("must satisfy 1 ≤ k1 ≤ bits = {k}, got {k1}"),
                        ));
                    }
                }
            }
        }
        let (lo, hi) = self.offset.range();
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::param("offset", format!("invalid range {}", self.offset)));
        }
        check_offset(self.protocol, lo, self.qubits)?;
        check_offset(self.protocol, hi, self.qubits)
    }
}

/// Range preconditions on `T = ωt_BA/π`, checked here because only the
/// harness knows the truth.
pub fn check_offset(protocol: ProtocolKind, t: f64, qubits: Option<u64>) -> Result<()> {
    let (lo, hi, what) = match protocol {
        ProtocolKind::SimpleOneWay => (1.0 / 6.0, 5.0 / 6.0, "fringe [1/6, 5/6]"),
        ProtocolKind::SimpleTwoWay => (1.0 / 12.0, 5.0 / 12.0, "two-way fringe [1/12, 5/12]"),
        ProtocolKind::EntangledOneshot => (0.0, 1.0 / qubits.unwrap_or(1).max(1) as f64, "range [0, 1/M]"),
        _ => (0.0, 1.0, "range [0, 1]"),
    };
    if (lo..=hi).contains(&t) {
        Ok(())
    } else {
        Err(Error::precondition(
            "offset",
            format!("{}: ωt_BA/π = {t} lies outside the {what}", protocol.name()),
        ))
    }
}
