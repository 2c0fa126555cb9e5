//! Experiment orchestration: configs, single runs, parameter sweeps,
//! cost-ratio curves and a quick self-test.

mod config;
mod fig1;
mod run;
mod selftest;
mod sweep;

pub use config::{check_offset, ExperimentConfig, OffsetSpec};
pub use fig1::{curve_shape, emit_fig1_data, write_fig1_csv, CurveShape, EpsRule, Fig1Row, FIG1_HEADER};
pub use run::{analytic_sends, describe, execute, resolve_k1, run_single, RunOutcome};
pub use selftest::{selftest, selftest_with, Check, SelftestHooks};
pub use sweep::{fingerprint, row_stats, run_sweep, write_sweep_csv, RowStats, SweepGrid, SweepRow, SWEEP_HEADER};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INVARIANT: i32 = 3;
}
