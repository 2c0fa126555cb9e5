//! Ticking-qubit clock synchronization: frame bookkeeping, a statevector
//! simulator with a lossy channel, the synchronization protocols, their
//! analytic communication costs and an experiment harness.

pub mod channel;
pub mod cost;
pub mod error;
pub mod frames;
pub mod harness;
pub mod protocols;
pub mod simulator;

pub use channel::{Eta, LossyChannel, TransmissionLog};
pub use cost::{Budget, Cost};
pub use error::{Error, Result};
pub use frames::{Frame, PhaseAngle, Unitary2};
pub use protocols::{ProtocolKind, ProtocolReport, QuadratureMode, QuantumLink, SimulatedLink, TruthModel};
pub use simulator::RngStream;
