//! Statevector evolution, measurement sampling and seeded randomness.

mod circuit;
mod ghz;
mod rng;
mod state;

pub use circuit::run_in_frame;
pub use ghz::{ghz_parity_expectation, ghz_parity_with_rotation, GhzState, MAX_GHZ_QUBITS};
pub use rng::RngStream;
pub use state::{apply, measure_minus_z, sample_pm1, Outcome, PureQubit, NORM_TOL};
