//! A desk-scale laboratory for transient-error-aware VQE tuning.
//!
//! The crate simulates a small noisy quantum backend whose energy
//! estimates carry a job-indexed transient offset, and runs SPSA-based
//! VQE tuning on top of it under several control schemes:
//!
//! * [`controller`]: rerun-based transient estimation and the
//!   gradient-faithful accept/reject controller, plus the simpler
//!   magnitude-threshold skipper.
//! * [`optimizer`]: SPSA and its blocking, resampling and second-order
//!   variants, exposed as an ask/tell tuner.
//! * [`filters`]: a scalar Kalman post-filter baseline.
//! * [`device`]: the virtual backend with static damping, shot noise and
//!   transient traces.
//! * [`statevector`], [`ansatz`], [`hamiltonian`]: the exact simulator,
//!   circuit builders and Pauli-sum observables underneath.
//! * [`harness`]: experiment configuration, orchestration and CSV output.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod ansatz;
pub mod controller;
pub mod device;
pub mod error;
pub mod filters;
pub mod hamiltonian;
pub mod harness;
pub mod optimizer;
pub mod statevector;

pub use error::{Error, Result};
