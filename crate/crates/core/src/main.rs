use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tqsync::cost::{
    hybrid_cost, improved_cost, lossy_improved_cost, lossy_sql_cost, select_k1, sql_one_way_cost, sql_two_way_cost,
    Budget,
};
use tqsync::harness::{
    describe, emit_fig1_data, exit, run_single, run_sweep, selftest, write_fig1_csv, write_sweep_csv, EpsRule,
    ExperimentConfig, OffsetSpec, SweepGrid,
};
use tqsync::{Error, Eta, ProtocolKind, QuadratureMode, Result};

#[derive(Parser)]
#[command(name = "tqsync", version, about = "Ticking-qubit clock synchronization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol once and print its report.
    Simulate(ExpArgs),
    /// Run a cartesian grid of configurations and write one CSV row each.
    Sweep {
        #[command(flatten)]
        exp: ExpArgs,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the analytic costs for one (k, ε, η).
    Costs {
        #[arg(long)]
        bits: u32,
        /// Failure budget (default 2^-k).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// Hybrid switch point (default: cost-optimal).
        #[arg(long)]
        k1: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the cost-ratio curves (bitwise vs SQL) as CSV.
    Fig1 {
        #[arg(long, value_delimiter = ',', default_value = "1,0.999,0.99,0.9")]
        etas: Vec<f64>,
        #[arg(long, default_value_t = 30)]
        kmax: u32,
        /// `pow2` (ε = 2^-k) or a fixed budget.
        #[arg(long, default_value = "pow2")]
        eps_rule: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a reduced invariant suite.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum YesNo {
    Yes,
    No,
}

/// Experiment flags. Flags override the config file; comma lists are
/// accepted by `sweep` only.
#[derive(Args)]
struct ExpArgs {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    protocol: Vec<ProtocolKind>,
    /// Angular frequency, rad/s.
    #[arg(long)]
    omega: Option<f64>,
    /// True offset ωt_BA in units of π: a number or uniform:LO:HI.
    #[arg(long, value_delimiter = ',', value_parser = parse_offset)]
    offset: Vec<OffsetSpec>,
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    bits: Vec<u32>,
    #[arg(long)]
    k1: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    shots: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    qubits: Vec<u64>,
    /// Monte Carlo runs per sweep row.
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<QuadratureMode>,
    #[arg(long, value_enum)]
    count_lost_sends: Option<YesNo>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_offset(s: &str) -> std::result::Result<OffsetSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn list<T: Clone>(v: &[T]) -> Option<Vec<T>> {
    (!v.is_empty()).then(|| v.to_vec())
}

fn single<T: Copy>(name: &str, v: &[T]) -> Result<Option<T>> {
    match v {
        [] => Ok(None),
        [x] => Ok(Some(*x)),
        _ => Err(Error::Config(format!(
            "--{name} takes one value here; use `sweep` for lists"
        ))),
    }
}

impl ExpArgs {
    /// The file config (or defaults) with the scalar flags applied.
    fn base(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(w) = self.omega {
            c.omega = w;
        }
        if let Some(k1) = self.k1 {
            c.k1 = Some(k1);
        }
        if let Some(r) = self.runs {
            c.runs = r;
        }
        if let Some(s) = self.seed {
            c.seed = Some(s);
        }
        if let Some(m) = self.mode {
            c.mode = m;
        }
        if let Some(y) = self.count_lost_sends {
            c.count_lost_sends = matches!(y, YesNo::Yes);
        }
        if let Some(o) = &self.out {
            c.out = Some(o.clone());
        }
        Ok(c)
    }

    fn single_config(&self) -> Result<ExperimentConfig> {
        let mut c = self.base()?;
        if let Some(p) = single("protocol", &self.protocol)? {
            c.protocol = p;
        }
        if let Some(o) = single("offset", &self.offset)? {
            c.offset = o;
        }
        if let Some(e) = single("eta", &self.eta)? {
            c.eta = e;
        }
        if let Some(k) = single("bits", &self.bits)? {
            c.bits = Some(k);
        }
        if let Some(e) = single("eps", &self.eps)? {
            c.eps = Some(e);
        }
        if let Some(n) = single("shots", &self.shots)? {
            c.shots = Some(n);
        }
        if let Some(m) = single("qubits", &self.qubits)? {
            c.qubits = Some(m);
        }
        Ok(c)
    }

    fn grid(&self) -> Result<SweepGrid> {
        Ok(SweepGrid {
            base: self.base()?,
            protocols: list(&self.protocol),
            etas: list(&self.eta),
            bits: list(&self.bits),
            eps: list(&self.eps),
            shots: list(&self.shots),
            qubits: list(&self.qubits),
            offsets: list(&self.offset),
        })
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn simulate(args: &ExpArgs) -> Result<i32> {
    let cfg = args.single_config()?;
    let outcome = run_single(&cfg)?;
    print!("{}", describe(&cfg, &outcome));
    let json = serde_json::json!({ "config": cfg, "outcome": outcome });
    match &cfg.out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            serde_json::to_writer_pretty(&mut w, &json)?;
            writeln!(w)?;
            println!("report written to {}", p.display());
        }
        None => println!("{}", serde_json::to_string(&json)?),
    }
    Ok(exit::OK)
}

fn sweep(args: &ExpArgs, workers: Option<usize>) -> Result<i32> {
    let grid = args.grid()?;
    let rows = run_sweep(&grid, workers)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    write_sweep_csv(&rows, output(&grid.base.out)?)?;
    if failed > 0 {
        eprintln!("{failed} of {} rows failed; see the error column", rows.len());
    }
    Ok(exit::OK)
}

fn costs(k: u32, eps: Option<f64>, eta: f64, k1: Option<u32>, out: &Option<PathBuf>) -> Result<i32> {
    let eps = match eps {
        Some(e) => Budget::new(e)?,
        None => Budget::pow2(k)?,
    };
    let eta = Eta::new(eta)?;
    let k1 = match k1 {
        Some(k1) => k1,
        None => select_k1(eta, k, eps)?,
    };
    let lossy_sql = lossy_sql_cost(k, eps, eta)?;
    let hybrid = hybrid_cost(k1, k, eps, eta)?;
    let rows = [
        ("sql_one_way", sql_one_way_cost(k, eps)?.value()),
        ("sql_two_way", sql_two_way_cost(k, eps)?.value()),
        ("improved", improved_cost(k, eps)?.value()),
        ("lossy_sql", lossy_sql.value()),
        ("lossy_improved", lossy_improved_cost(k, eps, eta)?.value()),
        ("k1", k1 as f64),
        ("hybrid", hybrid.value()),
        ("sql_over_hybrid", lossy_sql.ratio(hybrid)),
    ];
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record(["quantity", "value"])?;
    for (name, v) in rows {
        w.write_record([name.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(exit::OK)
}

fn fig1(etas: &[f64], kmax: u32, rule: &str, out: &Option<PathBuf>) -> Result<i32> {
    let rule: EpsRule = rule.parse()?;
    let rows = emit_fig1_data(etas, kmax, rule)?;
    write_fig1_csv(&rows, output(out)?)?;
    Ok(exit::OK)
}

fn run_selftest() -> i32 {
    let checks = selftest();
    let mut failed = 0;
    for c in &checks {
        if c.passed {
            println!("PASS {}: {}", c.module, c.property);
        } else {
            failed += 1;
            println!("FAIL {}: {}: {}", c.module, c.property, c.detail);
        }
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        exit::OK
    } else {
        exit::INVARIANT
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep { exp, workers } => sweep(exp, *workers),
        Command::Costs {
            bits,
            eps,
            eta,
            k1,
            out,
        } => costs(*bits, *eps, *eta, *k1, out),
        Command::Fig1 {
            etas,
            kmax,
            eps_rule,
            out,
        } => fig1(etas, *kmax, eps_rule, out),
        Command::Selftest => Ok(run_selftest()),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                exit::CONFIG
            } else {
                exit::FAILURE
            }
        }
    };
    ExitCode::from(code as u8)
}
