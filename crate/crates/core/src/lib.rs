//! Simulation of Rydberg-blockade pulse protocols that entangle the
//! electronic (ground/clock) and nuclear-spin qubits of divalent atoms.

pub mod atomic;
pub mod error;
pub mod fidelity;
pub mod gates;
pub mod protocols;
pub mod pulse;
pub mod quantum;
pub mod sim;

pub use error::{Error, Result};
